//! Finite-dimensional graded commutative differential algebras with
//! per-stratum perverse degrees.
//!
//! A [`PerverseModel`] is a coordinate model of the ambient controlled-forms
//! algebra of an orbit space: an ordered basis with degrees and perverse
//! degrees, a differential matrix, and sparse product structure constants,
//! all over exact rationals. [`PerverseModel::validate`] checks every
//! structural law (d of square zero, Leibniz, graded commutativity,
//! associativity, unit, degree bookkeeping and perverse-degree
//! subadditivity); downstream computations assume a clean report.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{format_q, sign_pow, vec_zero, Q, QMatrix, QVec};
use crate::strata::{Perversity, StrataPoset, StratumId};
use num::traits::Zero;

/// Perverse degree of a cochain along one stratum. The zero cochain has
/// degree minus infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PerverseDegree {
    NegInfinity,
    Finite(i64),
}

impl PerverseDegree {
    pub fn leq(self, bound: i64) -> bool {
        match self {
            PerverseDegree::NegInfinity => true,
            PerverseDegree::Finite(v) => v <= bound,
        }
    }
}

impl fmt::Display for PerverseDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerverseDegree::NegInfinity => f.write_str("-inf"),
            PerverseDegree::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Declaration of one basis generator, keyed by stratum id.
#[derive(Clone, Debug)]
pub struct BasisDecl {
    pub name: String,
    pub degree: u32,
    pub pdeg: BTreeMap<StratumId, u32>,
}

impl BasisDecl {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        BasisDecl { name: name.into(), degree, pdeg: BTreeMap::new() }
    }

    pub fn pdeg(mut self, stratum: &str, value: u32) -> Self {
        self.pdeg.insert(StratumId::new(stratum), value);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BasisElement {
    name: String,
    degree: u32,
    /// Perverse degree at stratum index i of the poset.
    pdeg: Vec<u32>,
}

/// Sparse product column: b_i wedge b_j = sum of coeff * b_k.
type SparseVec = Vec<(usize, Q)>;

/// One violated model invariant.
#[derive(Clone, Debug)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

/// Outcome of [`PerverseModel::validate`]; empty means valid.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, rule: &'static str, detail: String) {
        self.violations.push(Violation { rule, detail });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let lines: Vec<String> =
            self.violations.iter().map(|v| format!("{}: {}", v.rule, v.detail)).collect();
        f.write_str(&lines.join("; "))
    }
}

/// Homogeneity of a coordinate vector over the graded basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Degree(usize),
    Mixed(usize, usize),
}

/// A cochain is a rational coordinate vector over a model's basis. It carries
/// no back-reference; operations live on the model and length-check.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    coords: QVec,
}

impl Cochain {
    pub fn from_coords(coords: QVec) -> Self {
        Cochain { coords }
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn into_coords(self) -> QVec {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

/// Finite coordinate model of the ambient perverse algebra of an orbit space.
#[derive(Clone, Debug, PartialEq)]
pub struct PerverseModel {
    poset: Arc<StrataPoset>,
    basis: Vec<BasisElement>,
    /// Column j holds the coordinates of d(b_j).
    diff: QMatrix,
    /// Full product table; a missing key is the zero product.
    prod: BTreeMap<(usize, usize), SparseVec>,
    unit: usize,
    connected_normal: bool,
}

impl PerverseModel {
    /// Assemble a model from named data. `prod_upper` lists structure
    /// constants for pairs with i <= j in basis order; the transposed pairs
    /// are filled in by graded commutativity. The unit is auto-detected as
    /// the unique two-sided identity among degree-0 elements.
    pub fn new(
        poset: Arc<StrataPoset>,
        basis: Vec<BasisDecl>,
        diff: &[(&str, &str, Q)],
        prod_upper: &[(&str, &str, &str, Q)],
        connected_normal: bool,
    ) -> Result<Self> {
        let diff_owned: Vec<(String, String, Q)> =
            diff.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.clone())).collect();
        let prod_owned: Vec<(String, String, String, Q)> = prod_upper
            .iter()
            .map(|(a, b, c, v)| (a.to_string(), b.to_string(), c.to_string(), v.clone()))
            .collect();
        Self::assemble(poset, basis, &diff_owned, &prod_owned, connected_normal)
    }

    pub fn assemble(
        poset: Arc<StrataPoset>,
        basis: Vec<BasisDecl>,
        diff: &[(String, String, Q)],
        prod_upper: &[(String, String, String, Q)],
        connected_normal: bool,
    ) -> Result<Self> {
        let mut names = BTreeMap::new();
        let mut elements = Vec::with_capacity(basis.len());
        for (i, decl) in basis.iter().enumerate() {
            if names.insert(decl.name.clone(), i).is_some() {
                return Err(Error::DuplicateBasisElement(decl.name.clone()));
            }
            let mut pdeg = vec![0u32; poset.len()];
            if decl.pdeg.len() != poset.len() {
                return Err(Error::PdegDomain { element: decl.name.clone() });
            }
            for (id, v) in &decl.pdeg {
                let idx = poset
                    .index_of(id)
                    .ok_or_else(|| Error::PdegDomain { element: decl.name.clone() })?;
                pdeg[idx] = *v;
            }
            elements.push(BasisElement { name: decl.name.clone(), degree: decl.degree, pdeg });
        }
        let n = elements.len();
        let lookup = |name: &str| -> Result<usize> {
            names.get(name).copied().ok_or_else(|| Error::UnknownBasisElement(name.to_string()))
        };

        let mut dmat = QMatrix::zeros(n, n);
        for (from, to, coeff) in diff {
            let j = lookup(from)?;
            let k = lookup(to)?;
            let cur = dmat.get(k, j) + coeff;
            dmat.set(k, j, cur);
        }

        let mut prod: BTreeMap<(usize, usize), SparseVec> = BTreeMap::new();
        for (a, b, c, coeff) in prod_upper {
            let i = lookup(a)?;
            let j = lookup(b)?;
            let k = lookup(c)?;
            if i > j {
                return Err(Error::ProductPairOrder(a.clone(), b.clone()));
            }
            let entry = prod.entry((i, j)).or_default();
            match entry.iter_mut().find(|(t, _)| *t == k) {
                Some((_, v)) => *v += coeff,
                None => entry.push((k, coeff.clone())),
            }
        }
        // fill the transposed pairs by graded commutativity
        let pairs: Vec<(usize, usize)> = prod.keys().copied().collect();
        for (i, j) in pairs {
            if i == j {
                continue;
            }
            let sign = sign_pow((elements[i].degree as usize) * (elements[j].degree as usize));
            let mirrored: SparseVec =
                prod[&(i, j)].iter().map(|(k, c)| (*k, &sign * c)).collect();
            prod.insert((j, i), mirrored);
        }
        for entry in prod.values_mut() {
            entry.retain(|(_, c)| !c.is_zero());
            entry.sort_by_key(|(k, _)| *k);
        }
        prod.retain(|_, v| !v.is_empty());

        // auto-detect the two-sided unit among degree-0 elements
        let mut unit = None;
        'outer: for u in 0..n {
            if elements[u].degree != 0 {
                continue;
            }
            for j in 0..n {
                let left = prod.get(&(u, j)).cloned().unwrap_or_default();
                let expect: SparseVec = vec![(j, Q::from_integer(1.into()))];
                if left != expect {
                    continue 'outer;
                }
            }
            unit = Some(u);
            break;
        }
        let unit = unit.ok_or(Error::NoUnit)?;

        Ok(PerverseModel { poset, basis: elements, diff: dmat, prod, unit, connected_normal })
    }

    pub fn poset(&self) -> &Arc<StrataPoset> {
        &self.poset
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn unit_index(&self) -> usize {
        self.unit
    }

    pub fn connected_normal(&self) -> bool {
        self.connected_normal
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.basis[idx].degree as usize
    }

    pub fn name_of(&self, idx: usize) -> &str {
        &self.basis[idx].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    pub fn pdeg_of(&self, idx: usize, stratum: usize) -> u32 {
        self.basis[idx].pdeg[stratum]
    }

    pub fn pdeg_map(&self, idx: usize) -> BTreeMap<StratumId, u32> {
        self.poset
            .strata()
            .iter()
            .enumerate()
            .map(|(s, info)| (info.id.clone(), self.basis[idx].pdeg[s]))
            .collect()
    }

    pub fn top_degree(&self) -> usize {
        self.basis.iter().map(|b| b.degree as usize).max().unwrap_or(0)
    }

    pub fn degree_indices(&self, degree: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degree_of(i) == degree).collect()
    }

    pub fn diff_matrix(&self) -> &QMatrix {
        &self.diff
    }

    /// Structure constants of b_i wedge b_j; empty slice means zero.
    pub fn product_column(&self, i: usize, j: usize) -> &[(usize, Q)] {
        self.prod.get(&(i, j)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Product entries with i <= j, for serialization.
    pub fn product_upper_entries(&self) -> Vec<(usize, usize, usize, Q)> {
        let mut out = Vec::new();
        for (&(i, j), col) in &self.prod {
            if i > j {
                continue;
            }
            for (k, c) in col {
                out.push((i, j, *k, c.clone()));
            }
        }
        out
    }

    pub fn zero_cochain(&self) -> Cochain {
        Cochain::from_coords(vec_zero(self.dim()))
    }

    pub fn basis_cochain(&self, idx: usize) -> Cochain {
        let mut v = vec_zero(self.dim());
        v[idx] = Q::from_integer(1.into());
        Cochain::from_coords(v)
    }

    pub fn unit_cochain(&self) -> Cochain {
        self.basis_cochain(self.unit)
    }

    /// Cochain from (name, coefficient) terms.
    pub fn cochain_from_terms(&self, terms: &[(&str, Q)]) -> Result<Cochain> {
        let mut v = vec_zero(self.dim());
        for (name, c) in terms {
            let idx =
                self.index_of(name).ok_or_else(|| Error::UnknownBasisElement(name.to_string()))?;
            v[idx] += c;
        }
        Ok(Cochain::from_coords(v))
    }

    fn check_len(&self, v: &[Q]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { got: v.len(), expected: self.dim() });
        }
        Ok(())
    }

    /// Degree structure of a coordinate vector.
    pub fn homogeneity(&self, v: &[Q]) -> Homogeneity {
        let mut lo = None;
        let mut hi = None;
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = self.degree_of(i);
            lo = Some(lo.map_or(d, |l: usize| l.min(d)));
            hi = Some(hi.map_or(d, |h: usize| h.max(d)));
        }
        match (lo, hi) {
            (Some(l), Some(h)) if l == h => Homogeneity::Degree(l),
            (Some(l), Some(h)) => Homogeneity::Mixed(l, h),
            _ => Homogeneity::Zero,
        }
    }

    /// Degree of a homogeneous cochain; None for zero, error on mixed support.
    pub fn degree(&self, c: &Cochain) -> Result<Option<usize>> {
        self.check_len(c.coords())?;
        match self.homogeneity(c.coords()) {
            Homogeneity::Zero => Ok(None),
            Homogeneity::Degree(d) => Ok(Some(d)),
            Homogeneity::Mixed(l, h) => Err(Error::MixedDegree(l, h)),
        }
    }

    /// d on raw coordinates.
    pub fn apply_diff(&self, v: &[Q]) -> QVec {
        self.diff.mul_vec(v)
    }

    pub fn differential(&self, c: &Cochain) -> Result<Cochain> {
        self.check_len(c.coords())?;
        Ok(Cochain::from_coords(self.apply_diff(c.coords())))
    }

    /// Wedge on raw coordinates, bilinear over the structure constants.
    pub fn wedge_coords(&self, a: &[Q], b: &[Q]) -> QVec {
        let mut out = vec_zero(self.dim());
        for (i, ca) in a.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (j, cb) in b.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                for (k, c) in self.product_column(i, j) {
                    out[*k] += &(ca * cb) * c;
                }
            }
        }
        out
    }

    pub fn wedge(&self, a: &Cochain, b: &Cochain) -> Result<Cochain> {
        self.check_len(a.coords())?;
        self.check_len(b.coords())?;
        Ok(Cochain::from_coords(self.wedge_coords(a.coords(), b.coords())))
    }

    /// Max perverse degree over the support of `c` at the given stratum.
    pub fn perverse_degree(&self, c: &Cochain, stratum: &StratumId) -> Result<PerverseDegree> {
        self.check_len(c.coords())?;
        let s = self.poset.index_of(stratum).ok_or_else(|| Error::UnknownStratum(stratum.clone()))?;
        Ok(self.perverse_degree_idx(c.coords(), s))
    }

    pub fn perverse_degree_idx(&self, v: &[Q], stratum: usize) -> PerverseDegree {
        let mut best = PerverseDegree::NegInfinity;
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                best = best.max(PerverseDegree::Finite(self.pdeg_of(i, stratum) as i64));
            }
        }
        best
    }

    /// Does `v` satisfy the perverse bound at every stratum?
    pub fn within_bound(&self, v: &[Q], p: &Perversity) -> bool {
        (0..self.poset.len())
            .all(|s| self.perverse_degree_idx(v, s).leq(p.value_at(s)))
    }

    /// Basis indices whose perverse degree respects `p` at every stratum.
    /// A negative bound excludes every generator touching that stratum,
    /// including those of perverse degree zero.
    pub fn allowed_indices(&self, p: &Perversity) -> Vec<bool> {
        (0..self.dim())
            .map(|i| (0..self.poset.len()).all(|s| (self.pdeg_of(i, s) as i64) <= p.value_at(s)))
            .collect()
    }

    /// Run every structural invariant and collect the violations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.dim();

        // d raises degree by exactly one
        for j in 0..n {
            for k in 0..n {
                if !self.diff.get(k, j).is_zero() && self.degree_of(k) != self.degree_of(j) + 1 {
                    report.push(
                        "degree_raise",
                        format!("d({}) hits {} of degree {}", self.name_of(j), self.name_of(k), self.degree_of(k)),
                    );
                }
            }
        }

        if !self.diff.mul(&self.diff).is_zero() {
            report.push("d_squared_nonzero", "d composed with d is nonzero".to_string());
        }

        // product bookkeeping
        for (&(i, j), col) in &self.prod {
            for (k, c) in col {
                if c.is_zero() {
                    continue;
                }
                if self.degree_of(*k) != self.degree_of(i) + self.degree_of(j) {
                    report.push(
                        "product_degree",
                        format!("{}*{} hits {} of wrong degree", self.name_of(i), self.name_of(j), self.name_of(*k)),
                    );
                }
                for s in 0..self.poset.len() {
                    if self.pdeg_of(*k, s) > self.pdeg_of(i, s) + self.pdeg_of(j, s) {
                        report.push(
                            "pdeg_subadditivity",
                            format!(
                                "{}*{} hits {} with perverse degree {} > {} + {} at {}",
                                self.name_of(i),
                                self.name_of(j),
                                self.name_of(*k),
                                self.pdeg_of(*k, s),
                                self.pdeg_of(i, s),
                                self.pdeg_of(j, s),
                                self.poset.info(s).id
                            ),
                        );
                    }
                }
            }
        }

        // graded commutativity at the structure-constant level
        for i in 0..n {
            for j in i..n {
                let sign = sign_pow(self.degree_of(i) * self.degree_of(j));
                let ij = self.product_column(i, j);
                let ji = self.product_column(j, i);
                let mirrored: SparseVec = ji.iter().map(|(k, c)| (*k, &sign * c)).collect();
                if ij != mirrored.as_slice() {
                    report.push(
                        "graded_commutativity",
                        format!("{} and {} do not commute up to sign", self.name_of(i), self.name_of(j)),
                    );
                }
            }
        }

        // associativity on all basis triples
        'assoc: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ei = self.basis_vec(i);
                    let ej = self.basis_vec(j);
                    let ek = self.basis_vec(k);
                    let left = self.wedge_coords(&self.wedge_coords(&ei, &ej), &ek);
                    let right = self.wedge_coords(&ei, &self.wedge_coords(&ej, &ek));
                    if left != right {
                        report.push(
                            "associativity",
                            format!(
                                "({}*{})*{} differs from {}*({}*{})",
                                self.name_of(i), self.name_of(j), self.name_of(k),
                                self.name_of(i), self.name_of(j), self.name_of(k)
                            ),
                        );
                        break 'assoc;
                    }
                }
            }
        }

        // Leibniz on all basis pairs
        for i in 0..n {
            for j in 0..n {
                let ei = self.basis_vec(i);
                let ej = self.basis_vec(j);
                let lhs = self.apply_diff(&self.wedge_coords(&ei, &ej));
                let mut rhs = self.wedge_coords(&self.apply_diff(&ei), &ej);
                let sgn = sign_pow(self.degree_of(i));
                let second = self.wedge_coords(&ei, &self.apply_diff(&ej));
                for (t, s) in rhs.iter_mut().zip(second) {
                    *t += &sgn * &s;
                }
                if lhs != rhs {
                    report.push(
                        "leibniz",
                        format!("d({}*{}) fails the Leibniz rule", self.name_of(i), self.name_of(j)),
                    );
                }
            }
        }

        // unit laws
        if self.degree_of(self.unit) != 0 {
            report.push("unit_degree", format!("unit {} has nonzero degree", self.name_of(self.unit)));
        }
        for j in 0..n {
            let prod = self.wedge_coords(&self.basis_vec(self.unit), &self.basis_vec(j));
            if prod != self.basis_vec(j) {
                report.push("unit_product", format!("1*{} is not {}", self.name_of(j), self.name_of(j)));
            }
        }
        for s in 0..self.poset.len() {
            if self.pdeg_of(self.unit, s) != 0 {
                report.push(
                    "unit_pdeg",
                    format!("unit has perverse degree {} at {}", self.pdeg_of(self.unit, s), self.poset.info(s).id),
                );
            }
        }
        if !self.apply_diff(&self.basis_vec(self.unit)).iter().all(|c| c.is_zero()) {
            report.push("unit_closed", "d(1) is nonzero".to_string());
        }

        report
    }

    fn basis_vec(&self, idx: usize) -> QVec {
        let mut v = vec_zero(self.dim());
        v[idx] = Q::from_integer(1.into());
        v
    }

    /// Render a cochain as a combination of named basis elements.
    pub fn format_cochain(&self, c: &Cochain) -> String {
        format_combination(self, c.coords())
    }
}

/// Render raw coordinates as a signed combination of basis names.
pub fn format_combination(model: &PerverseModel, v: &[Q]) -> String {
    let mut out = String::new();
    for (i, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let is_neg = c < &Q::zero();
        if out.is_empty() {
            if is_neg {
                out.push('-');
            }
        } else if is_neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag == Q::from_integer(1.into()) {
            out.push_str(model.name_of(i));
        } else {
            out.push_str(&format!("{}*{}", format_q(&mag), model.name_of(i)));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

use num::traits::Signed;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qi;
    use crate::strata::{Nature, StratumInfo};

    pub(crate) fn point_poset(nature: Nature) -> Arc<StrataPoset> {
        StrataPoset::new(vec![StratumInfo::new(StratumId::new("v"), nature).with_codim(4)], &[])
            .unwrap()
    }

    /// Two-generator model of the cone over the 2-sphere.
    pub(crate) fn c_sphere2(nature: Nature) -> PerverseModel {
        PerverseModel::new(
            point_poset(nature),
            vec![BasisDecl::new("u0", 0).pdeg("v", 0), BasisDecl::new("u2", 2).pdeg("v", 2)],
            &[],
            &[("u0", "u0", "u0", qi(1)), ("u0", "u2", "u2", qi(1))],
            true,
        )
        .unwrap()
    }

    #[test]
    fn c_sphere2_is_valid() {
        let m = c_sphere2(Nature::FixedPerverse);
        let report = m.validate();
        assert!(report.is_valid(), "unexpected violations: {report}");
    }

    #[test]
    fn d_squared_violation_is_reported() {
        // chain a -> b -> c with both arrows 1
        let poset = StrataPoset::empty();
        let m = PerverseModel::new(
            poset,
            vec![
                BasisDecl::new("one", 0),
                BasisDecl::new("a", 1),
                BasisDecl::new("b", 2),
                BasisDecl::new("c", 3),
            ],
            &[("a", "b", qi(1)), ("b", "c", qi(1))],
            &[
                ("one", "one", "one", qi(1)),
                ("one", "a", "a", qi(1)),
                ("one", "b", "b", qi(1)),
                ("one", "c", "c", qi(1)),
            ],
            false,
        )
        .unwrap();
        let report = m.validate();
        assert!(report.contains("d_squared_nonzero"));
    }

    #[test]
    fn pdeg_subadditivity_violation_is_reported() {
        // x*y has total perverse degree 2 + 0 but lands on a generator of
        // perverse degree 3
        let poset = point_poset(Nature::FixedPerverse);
        let m = PerverseModel::new(
            poset,
            vec![
                BasisDecl::new("u0", 0).pdeg("v", 0),
                BasisDecl::new("x", 1).pdeg("v", 2),
                BasisDecl::new("y", 1).pdeg("v", 0),
                BasisDecl::new("b", 2).pdeg("v", 3),
            ],
            &[],
            &[
                ("u0", "u0", "u0", qi(1)),
                ("u0", "x", "x", qi(1)),
                ("u0", "y", "y", qi(1)),
                ("u0", "b", "b", qi(1)),
                ("x", "y", "b", qi(1)),
            ],
            false,
        )
        .unwrap();
        let report = m.validate();
        assert!(report.contains("pdeg_subadditivity"), "report: {report}");
    }

    #[test]
    fn perverse_degree_is_max_over_support() {
        let m = c_sphere2(Nature::FixedPerverse);
        let v = StratumId::new("v");
        assert_eq!(m.perverse_degree(&m.zero_cochain(), &v).unwrap(), PerverseDegree::NegInfinity);
        let u2 = m.cochain_from_terms(&[("u2", qi(1))]).unwrap();
        assert_eq!(m.perverse_degree(&u2, &v).unwrap(), PerverseDegree::Finite(2));
        let mix = m.cochain_from_terms(&[("u0", qi(1)), ("u2", qi(1))]).unwrap();
        assert_eq!(m.perverse_degree(&mix, &v).unwrap(), PerverseDegree::Finite(2));
        let unknown = StratumId::new("zz");
        assert!(m.perverse_degree(&mix, &unknown).is_err());
    }

    #[test]
    fn unit_detection_and_missing_unit() {
        let m = c_sphere2(Nature::Mobile);
        assert_eq!(m.name_of(m.unit_index()), "u0");
        let err = PerverseModel::new(
            StrataPoset::empty(),
            vec![BasisDecl::new("x", 0)],
            &[],
            &[],
            false,
        );
        assert!(matches!(err, Err(Error::NoUnit)));
    }

    #[test]
    fn mixed_degree_cochains_are_flagged() {
        let m = c_sphere2(Nature::Mobile);
        let mix = m.cochain_from_terms(&[("u0", qi(1)), ("u2", qi(1))]).unwrap();
        assert!(matches!(m.degree(&mix), Err(Error::MixedDegree(0, 2))));
        let u2 = m.cochain_from_terms(&[("u2", qi(1))]).unwrap();
        assert_eq!(m.degree(&u2).unwrap(), Some(2));
        assert_eq!(m.degree(&m.zero_cochain()).unwrap(), None);
    }

    #[test]
    fn format_cochain_renders_signed_terms() {
        let m = c_sphere2(Nature::Mobile);
        let c = m
            .cochain_from_terms(&[("u0", qi(-2)), ("u2", crate::linalg::q(1, 3))])
            .unwrap();
        assert_eq!(m.format_cochain(&c), "-2*u0 + 1/3*u2");
        assert_eq!(m.format_cochain(&m.zero_cochain()), "0");
    }
}
