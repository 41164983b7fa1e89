//! Cohomological comparison of two fibrations over a common orbit space.
//!
//! Input: a base isomorphism between the two orbit-space models (degree,
//! differential, product and perverse-degree preserving). The pipeline
//! decides whether it preserves stratum natures (optimality), searches for a
//! proportionality certificate between the Euler data, and on success builds
//! the explicit isomorphism of pair complexes
//!
//! ```text
//! F(alpha, beta) = (f*alpha - f*beta ^ gamma, lambda * f*beta)
//! ```
//!
//! slice by slice over a perversity sample, verifying the perverse-degree
//! estimates, the chain identity, invertibility, compatibility with
//! inclusions, multiplicativity and the induced cohomology isomorphism.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cdga::{format_combination, Cochain, PerverseModel, ValidationReport, Violation};
use crate::error::{Error, Result};
use crate::gysin::{GysinModel, IOmegaComplex};
use crate::linalg::{vec_add, vec_scale, vec_sub, vec_zero, Q, QMatrix, QVec};
use crate::perverse_forms::extract_omega;
use crate::strata::{Nature, Perversity, StratumId};
use num::traits::{One, Zero};

/// Basis-level isomorphism between two base models: a strata bijection and an
/// invertible pullback matrix from target coordinates to source coordinates.
/// Construction verifies the chain-map, algebra-map and perverse-degree laws.
#[derive(Clone, Debug)]
pub struct BaseIso {
    source: Arc<PerverseModel>,
    target: Arc<PerverseModel>,
    /// source stratum index -> target stratum index
    strata_map: Vec<usize>,
    /// f*: column j = pullback of the j-th target basis element
    matrix: QMatrix,
    inverse: QMatrix,
}

impl BaseIso {
    pub fn new(
        source: Arc<PerverseModel>,
        target: Arc<PerverseModel>,
        strata_pairs: &[(StratumId, StratumId)],
        matrix: QMatrix,
    ) -> Result<Self> {
        let mut report = ValidationReport::default();

        // strata bijection
        let sp = source.poset();
        let tp = target.poset();
        let mut strata_map = vec![usize::MAX; sp.len()];
        let mut hit = vec![false; tp.len()];
        if strata_pairs.len() != sp.len() || sp.len() != tp.len() {
            report.violations.push(Violation {
                rule: "strata_map_bijection",
                detail: format!(
                    "{} pairs for {} source and {} target strata",
                    strata_pairs.len(),
                    sp.len(),
                    tp.len()
                ),
            });
        } else {
            for (a, b) in strata_pairs {
                let (Some(ia), Some(ib)) = (sp.index_of(a), tp.index_of(b)) else {
                    report.violations.push(Violation {
                        rule: "strata_map_bijection",
                        detail: format!("unknown strata in pair {a} -> {b}"),
                    });
                    continue;
                };
                if strata_map[ia] != usize::MAX || hit[ib] {
                    report.violations.push(Violation {
                        rule: "strata_map_bijection",
                        detail: format!("pair {a} -> {b} repeats a stratum"),
                    });
                    continue;
                }
                strata_map[ia] = ib;
                hit[ib] = true;
            }
        }
        let bijective = strata_map.iter().all(|&i| i != usize::MAX) && hit.iter().all(|&b| b);
        if !bijective && report.is_valid() {
            report.violations.push(Violation {
                rule: "strata_map_bijection",
                detail: "strata map is not a bijection".into(),
            });
        }

        if bijective {
            for a in 0..sp.len() {
                for b in 0..sp.len() {
                    if sp.precedes(a, b) != tp.precedes(strata_map[a], strata_map[b]) {
                        report.violations.push(Violation {
                            rule: "strata_map_order",
                            detail: format!(
                                "the pair ({}, {}) breaks the order isomorphism",
                                sp.info(a).id,
                                sp.info(b).id
                            ),
                        });
                    }
                }
            }
        }

        // invertibility and degree preservation
        let inverse = if matrix.rows() == source.dim() && matrix.cols() == target.dim() {
            match matrix.inverse() {
                Some(inv) => inv,
                None => {
                    report.violations.push(Violation {
                        rule: "iso_invertible",
                        detail: "pullback matrix is singular".into(),
                    });
                    QMatrix::zeros(target.dim(), source.dim())
                }
            }
        } else {
            report.violations.push(Violation {
                rule: "iso_invertible",
                detail: format!(
                    "pullback matrix is {}x{}, expected {}x{}",
                    matrix.rows(),
                    matrix.cols(),
                    source.dim(),
                    target.dim()
                ),
            });
            QMatrix::zeros(target.dim(), source.dim())
        };

        if matrix.rows() == source.dim() && matrix.cols() == target.dim() {
            for j in 0..target.dim() {
                for i in 0..source.dim() {
                    if !matrix.get(i, j).is_zero() && source.degree_of(i) != target.degree_of(j) {
                        report.violations.push(Violation {
                            rule: "iso_degree",
                            detail: format!(
                                "pullback of {} touches {} of a different degree",
                                target.name_of(j),
                                source.name_of(i)
                            ),
                        });
                    }
                }
            }

            // chain map: f* d2 = d1 f*
            if matrix.mul(target.diff_matrix()) != source.diff_matrix().mul(&matrix) {
                report.violations.push(Violation {
                    rule: "iso_chain_map",
                    detail: "pullback does not intertwine the differentials".into(),
                });
            }

            // algebra map on basis pairs
            'alg: for i in 0..target.dim() {
                for j in 0..target.dim() {
                    let mut ei = vec_zero(target.dim());
                    ei[i] = Q::one();
                    let mut ej = vec_zero(target.dim());
                    ej[j] = Q::one();
                    let lhs = matrix.mul_vec(&target.wedge_coords(&ei, &ej));
                    let rhs = source.wedge_coords(&matrix.mul_vec(&ei), &matrix.mul_vec(&ej));
                    if lhs != rhs {
                        report.violations.push(Violation {
                            rule: "iso_algebra_map",
                            detail: format!(
                                "f*({} ^ {}) differs from f*{} ^ f*{}",
                                target.name_of(i),
                                target.name_of(j),
                                target.name_of(i),
                                target.name_of(j)
                            ),
                        });
                        break 'alg;
                    }
                }
            }

            // perverse degree preservation on basis elements
            if bijective {
                for j in 0..target.dim() {
                    let pulled = matrix.col(j);
                    for s in 0..sp.len() {
                        let got = source.perverse_degree_idx(&pulled, s);
                        let want = crate::cdga::PerverseDegree::Finite(
                            target.pdeg_of(j, strata_map[s]) as i64,
                        );
                        if got != want {
                            report.violations.push(Violation {
                                rule: "iso_perverse_degree",
                                detail: format!(
                                    "pullback of {} has perverse degree {} at {}, expected {}",
                                    target.name_of(j),
                                    got,
                                    sp.info(s).id,
                                    want
                                ),
                            });
                        }
                    }
                }
            }
        }

        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        Ok(BaseIso { source, target, strata_map, matrix, inverse })
    }

    /// The basis-identity isomorphism; both models must share a basis
    /// signature (names, degrees, perverse degrees and stratum ids).
    pub fn identity(source: &Arc<PerverseModel>, target: &Arc<PerverseModel>) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::SignatureMismatch("different basis sizes".into()));
        }
        for i in 0..source.dim() {
            if source.name_of(i) != target.name_of(i) {
                return Err(Error::SignatureMismatch(format!(
                    "basis element {} is named {} on one side and {} on the other",
                    i,
                    source.name_of(i),
                    target.name_of(i)
                )));
            }
            if source.degree_of(i) != target.degree_of(i) {
                return Err(Error::SignatureMismatch(format!(
                    "basis element {} changes degree",
                    source.name_of(i)
                )));
            }
            if source.pdeg_map(i) != target.pdeg_map(i) {
                return Err(Error::SignatureMismatch(format!(
                    "basis element {} changes perverse degrees",
                    source.name_of(i)
                )));
            }
        }
        let sp = source.poset();
        let tp = target.poset();
        let mut pairs = Vec::with_capacity(sp.len());
        for info in sp.strata() {
            if tp.index_of(&info.id).is_none() {
                return Err(Error::SignatureMismatch(format!(
                    "stratum {} is missing on the target side",
                    info.id
                )));
            }
            pairs.push((info.id.clone(), info.id.clone()));
        }
        if tp.len() != sp.len() {
            return Err(Error::SignatureMismatch("different numbers of strata".into()));
        }
        Self::new(source.clone(), target.clone(), &pairs, QMatrix::identity(source.dim()))
    }

    pub fn source(&self) -> &Arc<PerverseModel> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PerverseModel> {
        &self.target
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    /// f* on target coordinates.
    pub fn pullback(&self, v: &[Q]) -> QVec {
        self.matrix.mul_vec(v)
    }

    /// Inverse pullback on source coordinates.
    pub fn pullback_inv(&self, v: &[Q]) -> QVec {
        self.inverse.mul_vec(v)
    }

    /// Carry a perversity on the source poset over to the target poset.
    pub fn transfer(&self, p: &Perversity) -> Result<Perversity> {
        if !p.bound_to(self.source.poset()) {
            return Err(Error::PosetMismatch);
        }
        let tp = self.target.poset();
        let map: BTreeMap<StratumId, i64> = (0..tp.len())
            .map(|t| {
                let s = self.strata_map.iter().position(|&x| x == t).expect("bijection");
                (tp.info(t).id.clone(), p.value_at(s))
            })
            .collect();
        Perversity::from_values(tp.clone(), &map)
    }

    /// Does the strata map preserve the nature of every stratum?
    pub fn check_optimal(&self) -> OptimalityReport {
        let sp = self.source.poset();
        let tp = self.target.poset();
        let strata: Vec<StratumComparison> = (0..sp.len())
            .map(|s| {
                let t = self.strata_map[s];
                StratumComparison {
                    source: sp.info(s).id.clone(),
                    target: tp.info(t).id.clone(),
                    source_nature: sp.info(s).nature,
                    target_nature: tp.info(t).nature,
                    ok: sp.info(s).nature == tp.info(t).nature,
                }
            })
            .collect();
        let optimal = strata.iter().all(|c| c.ok);
        let shared_euler =
            if optimal { Some(Perversity::euler(sp.clone())) } else { None };
        OptimalityReport { optimal, strata, shared_euler }
    }
}

/// Per-stratum nature comparison under the strata map.
#[derive(Clone, Debug)]
pub struct StratumComparison {
    pub source: StratumId,
    pub target: StratumId,
    pub source_nature: Nature,
    pub target_nature: Nature,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct OptimalityReport {
    pub optimal: bool,
    pub strata: Vec<StratumComparison>,
    /// The common Euler perversity, on the source poset, when optimal.
    pub shared_euler: Option<Perversity>,
}

/// Witness that the Euler classes are proportional: f*(eps2) equals
/// lambda * eps1 - d(gamma) with gamma in the degree-1 Euler subcomplex of
/// the source.
#[derive(Clone, Debug)]
pub struct ProportionalityCert {
    pub lambda: Q,
    pub gamma: Cochain,
}

/// Outcome of the proportionality search.
#[derive(Clone, Debug)]
pub enum Proportionality {
    Proportional(ProportionalityCert),
    NotProportional { witness: String },
}

fn check_binding(f: &BaseIso, g1: &GysinModel, g2: &GysinModel) -> Result<()> {
    if g1.base().as_ref() != f.source.as_ref() {
        return Err(Error::IsoBinding("first model is not the source of the map".into()));
    }
    if g2.base().as_ref() != f.target.as_ref() {
        return Err(Error::IsoBinding("second model is not the target of the map".into()));
    }
    Ok(())
}

/// Search for (lambda, gamma) with f*(eps2) = lambda * eps1 - d(gamma): a
/// linear system over gamma's coordinates in the Euler subcomplex with
/// lambda as one extra unknown, keeping only solutions with lambda nonzero.
pub fn solve_proportionality(
    f: &BaseIso,
    g1: &GysinModel,
    g2: &GysinModel,
) -> Result<Proportionality> {
    check_binding(f, g1, g2)?;
    if !f.check_optimal().optimal {
        return Err(Error::NotOptimal);
    }
    let source = f.source();
    let e = g1.euler_perversity();
    let omega_e = extract_omega(source, e)?;
    let gamma_basis = omega_e.space().basis(1).clone();
    let m = gamma_basis.cols();
    let n = source.dim();

    // columns: [eps1 | -d(gamma_basis)]
    let mut system = QMatrix::zeros(n, 1 + m);
    for i in 0..n {
        system.set(i, 0, g1.epsilon().coords()[i].clone());
    }
    for j in 0..m {
        let dg = source.apply_diff(&gamma_basis.col(j));
        for i in 0..n {
            system.set(i, 1 + j, -dg[i].clone());
        }
    }
    let rhs = f.pullback(g2.epsilon().coords());
    let Some((particular, kernel)) = system.solve_with_kernel(&rhs) else {
        return Ok(Proportionality::NotProportional {
            witness: "the system f*(eps2) = lambda*eps1 - d(gamma) is inconsistent for every lambda"
                .into(),
        });
    };
    let solution = if !particular[0].is_zero() {
        particular
    } else {
        match (0..kernel.cols()).find(|&j| !kernel.col(j)[0].is_zero()) {
            Some(j) => {
                let k = kernel.col(j);
                let scale = k[0].clone().recip();
                vec_add(&particular, &vec_scale(&scale, &k))
            }
            None => {
                return Ok(Proportionality::NotProportional {
                    witness: "the system forces lambda = 0: f*(eps2) is exact while eps1 is not \
                              proportionally reachable"
                        .into(),
                });
            }
        }
    };
    let lambda = solution[0].clone();
    let gamma = gamma_basis.mul_vec(&solution[1..]);

    // certificate invariant
    let reconstructed = vec_sub(&vec_scale(&lambda, g1.epsilon().coords()), &source.apply_diff(&gamma));
    if reconstructed != rhs {
        return Err(Error::Internal("proportionality certificate fails its defining identity".into()));
    }
    Ok(Proportionality::Proportional(ProportionalityCert {
        lambda,
        gamma: Cochain::from_coords(gamma),
    }))
}

/// One perversity slice of the comparison map: matrices in the complexes'
/// own bases, both directions, with the four perverse-degree estimates
/// counted.
#[derive(Clone, Debug)]
pub struct IsoSlice {
    pub perversity: Perversity,
    pub forward: Vec<QMatrix>,
    pub backward: Vec<QMatrix>,
    /// How many times each estimate was checked: alpha bound, beta bound,
    /// beta differential bound, twisted bound.
    pub estimates_checked: [usize; 4],
}

struct SlexContext {
    io1: IOmegaComplex,
    io2: IOmegaComplex,
    slice: IsoSlice,
}

fn apply_f_raw(f: &BaseIso, cert: &ProportionalityCert, g1: &GysinModel, pair: &[Q]) -> QVec {
    let n2 = f.target.dim();
    let alpha = f.pullback(&pair[..n2]);
    let beta = f.pullback(&pair[n2..]);
    let correction = g1.base().wedge_coords(&beta, cert.gamma.coords());
    let out_alpha = vec_sub(&alpha, &correction);
    let out_beta = vec_scale(&cert.lambda, &beta);
    g1.pair(&out_alpha, &out_beta)
}

fn apply_f_inv_raw(f: &BaseIso, cert: &ProportionalityCert, g2: &GysinModel, pair: &[Q]) -> QVec {
    let n1 = f.source.dim();
    let alpha = f.pullback_inv(&pair[..n1]);
    let beta = f.pullback_inv(&pair[n1..]);
    let gamma2 = f.pullback_inv(cert.gamma.coords());
    let lambda_inv = cert.lambda.clone().recip();
    let correction = vec_scale(&lambda_inv, &g2.base().wedge_coords(&beta, &gamma2));
    let out_alpha = vec_add(&alpha, &correction);
    let out_beta = vec_scale(&lambda_inv, &beta);
    g2.pair(&out_alpha, &out_beta)
}

fn build_slice(
    f: &BaseIso,
    cert: &ProportionalityCert,
    g1: &GysinModel,
    g2: &GysinModel,
    p: &Perversity,
) -> Result<SlexContext> {
    let p2 = f.transfer(p)?;
    let io1 = g1.iomega(p)?;
    let io2 = g2.iomega(&p2)?;
    let x = g1.characteristic_perversity();
    let p_minus_x = p.sub(x)?;
    let source = g1.base();

    let mut estimates = [0usize; 4];
    let mut forward = Vec::with_capacity(io2.space().len());
    for degree in 0..io2.space().len() {
        let mut cols = Vec::with_capacity(io2.dim(degree));
        for j in 0..io2.dim(degree) {
            let v = io2.space().basis(degree).col(j);
            let image = apply_f_raw(f, cert, g1, &v);
            let n1 = source.dim();
            let (ia, ib) = (&image[..n1], &image[n1..]);

            // the four perverse-degree estimates from the construction
            if !source.within_bound(ia, p) {
                return Err(Error::BadCertificate(format!(
                    "first component escapes the bound at perversity {p} in degree {degree}"
                )));
            }
            estimates[0] += 1;
            if !source.within_bound(ib, &p_minus_x) {
                return Err(Error::BadCertificate(format!(
                    "fiber component escapes the shifted bound at perversity {p} in degree {degree}"
                )));
            }
            estimates[1] += 1;
            if !source.within_bound(&source.apply_diff(ib), &p_minus_x) {
                return Err(Error::BadCertificate(format!(
                    "fiber differential escapes the shifted bound at perversity {p} in degree {degree}"
                )));
            }
            estimates[2] += 1;
            let twisted = {
                let beta_degree = degree.wrapping_sub(1);
                let sign = crate::linalg::sign_pow(if degree == 0 { 1 } else { beta_degree });
                let tw = vec_scale(&sign, &source.wedge_coords(ib, g1.epsilon().coords()));
                vec_add(&source.apply_diff(ia), &tw)
            };
            if !source.within_bound(&twisted, p) {
                return Err(Error::BadCertificate(format!(
                    "twisted differential escapes the bound at perversity {p} in degree {degree}"
                )));
            }
            estimates[3] += 1;

            let coords = io1.space().coords(degree, &image).ok_or_else(|| {
                Error::BadCertificate(format!(
                    "image leaves the target complex at perversity {p} in degree {degree}"
                ))
            })?;
            cols.push(coords);
        }
        forward.push(QMatrix::from_cols(io1.dim(degree), &cols));
    }

    let mut backward = Vec::with_capacity(io1.space().len());
    for degree in 0..io1.space().len() {
        let mut cols = Vec::with_capacity(io1.dim(degree));
        for j in 0..io1.dim(degree) {
            let v = io1.space().basis(degree).col(j);
            let image = apply_f_inv_raw(f, cert, g2, &v);
            let coords = io2.space().coords(degree, &image).ok_or_else(|| {
                Error::BadCertificate(format!(
                    "inverse image leaves the source complex at perversity {p} in degree {degree}"
                ))
            })?;
            cols.push(coords);
        }
        backward.push(QMatrix::from_cols(io2.dim(degree), &cols));
    }

    // chain identity in complex coordinates
    let d1 = g1.iomega_diff_matrices(&io1)?;
    let d2 = g2.iomega_diff_matrices(&io2)?;
    for i in 0..forward.len().saturating_sub(1) {
        if forward[i + 1].mul(&d2[i]) != d1[i].mul(&forward[i]) {
            return Err(Error::BadCertificate(format!(
                "chain identity fails at perversity {p} in degree {i}"
            )));
        }
    }

    // exact inverses
    for i in 0..forward.len() {
        if forward[i].mul(&backward[i]) != QMatrix::identity(io1.dim(i))
            || backward[i].mul(&forward[i]) != QMatrix::identity(io2.dim(i))
        {
            return Err(Error::BadCertificate(format!(
                "inverse composition is not the identity at perversity {p} in degree {i}"
            )));
        }
    }

    Ok(SlexContext {
        io1,
        io2,
        slice: IsoSlice { perversity: p.clone(), forward, backward, estimates_checked: estimates },
    })
}

/// Build one slice of the comparison map, with every estimate asserted.
pub fn build_f(
    f: &BaseIso,
    cert: &ProportionalityCert,
    g1: &GysinModel,
    g2: &GysinModel,
    p: &Perversity,
) -> Result<IsoSlice> {
    check_binding(f, g1, g2)?;
    Ok(build_slice(f, cert, g1, g2, p)?.slice)
}

/// Falsification control: apply the comparison map with the correction term
/// dropped and report whether the chain identity still holds on every basis
/// vector. With a nonzero gamma this is expected to fail.
pub fn chain_map_without_correction(
    f: &BaseIso,
    cert: &ProportionalityCert,
    g1: &GysinModel,
    g2: &GysinModel,
    p: &Perversity,
) -> Result<bool> {
    check_binding(f, g1, g2)?;
    let p2 = f.transfer(p)?;
    let io2 = g2.iomega(&p2)?;
    let n2 = f.target.dim();
    let bad_apply = |pair: &[Q]| -> QVec {
        let alpha = f.pullback(&pair[..n2]);
        let beta = vec_scale(&cert.lambda, &f.pullback(&pair[n2..]));
        g1.pair(&alpha, &beta)
    };
    for degree in 0..io2.space().len() {
        for j in 0..io2.dim(degree) {
            let v = io2.space().basis(degree).col(j);
            let lhs = g1.pair_d(degree, &bad_apply(&v));
            let rhs = bad_apply(&g2.pair_d(degree, &v));
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Verification record of the comparison map over a perversity sample.
#[derive(Clone, Debug)]
pub struct IsoVerification {
    /// The sample, on the source poset.
    pub sample: Vec<Perversity>,
    pub inclusion_compatible: bool,
    pub multiplicative: bool,
    pub invertible: bool,
    pub commutes_with_base_map: bool,
    pub cohomology_isomorphism: bool,
    /// The zero perversity was sampled and the slice there is a
    /// quasi-isomorphism of the pair algebras.
    pub homotopy_chain_at_zero: bool,
}

impl IsoVerification {
    pub fn pass(&self) -> bool {
        self.inclusion_compatible
            && self.multiplicative
            && self.invertible
            && self.commutes_with_base_map
            && self.cohomology_isomorphism
    }
}

/// Build the comparison map over the sample plus all pairwise sums and check
/// the perverse-morphism laws.
pub fn verify_perverse_iso(
    f: &BaseIso,
    cert: &ProportionalityCert,
    g1: &GysinModel,
    g2: &GysinModel,
    sample: &[Perversity],
) -> Result<IsoVerification> {
    check_binding(f, g1, g2)?;

    // closure of the sample under pairwise sums
    let mut closure: Vec<Perversity> = Vec::new();
    let push = |p: Perversity, closure: &mut Vec<Perversity>| {
        if !closure.iter().any(|q| q.key() == p.key()) {
            closure.push(p);
        }
    };
    for p in sample {
        push(p.clone(), &mut closure);
    }
    for a in sample {
        for b in sample {
            push(a.add(b)?, &mut closure);
        }
    }

    let mut slices: BTreeMap<Vec<i64>, SlexContext> = BTreeMap::new();
    for p in &closure {
        slices.insert(p.key(), build_slice(f, cert, g1, g2, p)?);
    }

    // invertibility is asserted inside every slice build
    let invertible = true;

    // compatibility with inclusions on comparable pairs
    let mut inclusion_compatible = true;
    for a in &closure {
        for b in &closure {
            if a.key() == b.key() || !a.leq(b)? {
                continue;
            }
            let sa = &slices[&a.key()];
            let sb = &slices[&b.key()];
            for degree in 0..sa.io2.space().len() {
                // coordinate inclusions on both sides
                let mut inc1 = Vec::new();
                for j in 0..sa.io1.dim(degree) {
                    let v = sa.io1.space().basis(degree).col(j);
                    inc1.push(sb.io1.space().coords(degree, &v).ok_or_else(|| {
                        Error::Internal("pair complex is not monotone in the perversity".into())
                    })?);
                }
                let inc1 = QMatrix::from_cols(sb.io1.dim(degree), &inc1);
                let mut inc2 = Vec::new();
                for j in 0..sa.io2.dim(degree) {
                    let v = sa.io2.space().basis(degree).col(j);
                    inc2.push(sb.io2.space().coords(degree, &v).ok_or_else(|| {
                        Error::Internal("pair complex is not monotone in the perversity".into())
                    })?);
                }
                let inc2 = QMatrix::from_cols(sb.io2.dim(degree), &inc2);
                if inc1.mul(&sa.slice.forward[degree]) != sb.slice.forward[degree].mul(&inc2) {
                    inclusion_compatible = false;
                }
            }
        }
    }

    // multiplicativity across sampled pairs, at the ambient pair level
    let mut multiplicative = true;
    for a in sample {
        for b in sample {
            let sum = a.add(b)?;
            let sa = &slices[&a.key()];
            let sb = &slices[&b.key()];
            let ssum = &slices[&sum.key()];
            for da in 0..sa.io2.space().len() {
                for db in 0..sb.io2.space().len() {
                    for i in 0..sa.io2.dim(da) {
                        for j in 0..sb.io2.dim(db) {
                            let v = sa.io2.space().basis(da).col(i);
                            let w = sb.io2.space().basis(db).col(j);
                            let prod = g2.pair_wedge(da, &v, db, &w);
                            let lhs = apply_f_raw(f, cert, g1, &prod);
                            let rhs = g1.pair_wedge(
                                da,
                                &apply_f_raw(f, cert, g1, &v),
                                db,
                                &apply_f_raw(f, cert, g1, &w),
                            );
                            if lhs != rhs {
                                multiplicative = false;
                            }
                            // the product must live in the summed slice
                            if da + db < ssum.io2.space().len()
                                && !ssum.io2.space().contains(da + db, &prod)
                            {
                                multiplicative = false;
                            }
                        }
                    }
                }
            }
        }
    }

    // F(rho2(alpha)) = rho1(f* alpha) on the base subcomplex
    let mut commutes_with_base_map = true;
    for p in sample {
        let p2 = f.transfer(p)?;
        let omega2 = extract_omega(f.target(), &p2)?;
        let omega1 = extract_omega(f.source(), p)?;
        for degree in 0..omega2.space().len() {
            for j in 0..omega2.dim(degree) {
                let alpha = omega2.space().basis(degree).col(j);
                let lhs = apply_f_raw(f, cert, g1, &g2.rho(&alpha));
                let pulled = f.pullback(&alpha);
                let rhs = g1.rho(&pulled);
                if lhs != rhs || !omega1.contains(degree, &pulled) {
                    commutes_with_base_map = false;
                }
            }
        }
    }

    // induced isomorphism on cohomology at every sampled perversity
    let mut cohomology_isomorphism = true;
    let mut quasi_iso_at_zero = false;
    let zero_key = Perversity::zero(g1.base().poset().clone()).key();
    for p in sample {
        let ctx = &slices[&p.key()];
        let t1 = g1.ih_total_of(&ctx.io1)?;
        let t2 = g2.ih_total_of(&ctx.io2)?;
        let mut ok = t1.dims() == t2.dims();
        if ok {
            for degree in 0..t2.len() {
                let mut cols = Vec::new();
                for rep in t2.representatives(degree) {
                    let image = apply_f_raw(f, cert, g1, rep);
                    match t1.reduce(degree, &image) {
                        Some(c) => cols.push(c),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                let m = QMatrix::from_cols(t1.dim(degree), &cols);
                if m.rank() != t1.dim(degree) {
                    ok = false;
                }
            }
        }
        if !ok {
            cohomology_isomorphism = false;
        }
        if p.key() == zero_key && ok {
            quasi_iso_at_zero = true;
        }
    }

    Ok(IsoVerification {
        sample: sample.to_vec(),
        inclusion_compatible,
        multiplicative,
        invertible,
        commutes_with_base_map,
        cohomology_isomorphism,
        homotopy_chain_at_zero: quasi_iso_at_zero,
    })
}

/// Degreewise dimension mismatch of the total-space cohomology, reported as a
/// concrete obstruction when the Euler data is not proportional.
#[derive(Clone, Debug)]
pub struct IhMismatch {
    pub perversity: Perversity,
    pub dims_source: Vec<usize>,
    pub dims_target: Vec<usize>,
}

/// Outcome of the full comparison pipeline.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// Optimal and proportional: the comparison map was built and verified,
    /// so the perverse cohomology algebras are isomorphic.
    Isomorphic {
        lambda: Q,
        gamma: Cochain,
        verification: IsoVerification,
    },
    /// The base map does not preserve stratum natures.
    NotOptimal { report: OptimalityReport },
    /// Optimal but the Euler classes are not proportional.
    NotProportional { witness: String, obstructions: Vec<IhMismatch> },
}

/// The default perversity sample: zero, characteristic, Euler, their sums,
/// and the top perversity when every stratum carries a codimension.
pub fn default_sample(g: &GysinModel) -> Vec<Perversity> {
    let poset = g.base().poset().clone();
    let zero = Perversity::zero(poset.clone());
    let x = g.characteristic_perversity().clone();
    let e = g.euler_perversity().clone();
    let mut sample = vec![
        zero,
        x.clone(),
        e.clone(),
        e.add(&x).expect("same poset"),
        e.add(&e).expect("same poset"),
    ];
    if let Ok(top) = Perversity::top(poset) {
        sample.push(top);
    }
    let mut out: Vec<Perversity> = Vec::new();
    for p in sample {
        if !out.iter().any(|q| q.key() == p.key()) {
            out.push(p);
        }
    }
    out
}

/// Full pipeline: optimality, proportionality, construction and verification.
pub fn compare_actions(
    f: &BaseIso,
    g1: &GysinModel,
    g2: &GysinModel,
    sample: Option<&[Perversity]>,
) -> Result<Verdict> {
    check_binding(f, g1, g2)?;
    let optimality = f.check_optimal();
    if !optimality.optimal {
        return Ok(Verdict::NotOptimal { report: optimality });
    }
    let sample: Vec<Perversity> = match sample {
        Some(s) => s.to_vec(),
        None => default_sample(g1),
    };
    match solve_proportionality(f, g1, g2)? {
        Proportionality::NotProportional { witness } => {
            let mut obstructions = Vec::new();
            for p in &sample {
                let dims1 = g1.ih_total(p)?.dims();
                let dims2 = g2.ih_total(&f.transfer(p)?)?.dims();
                if dims1 != dims2 {
                    obstructions.push(IhMismatch {
                        perversity: p.clone(),
                        dims_source: dims1,
                        dims_target: dims2,
                    });
                }
            }
            Ok(Verdict::NotProportional { witness, obstructions })
        }
        Proportionality::Proportional(cert) => {
            let verification = verify_perverse_iso(f, &cert, g1, g2, &sample)?;
            Ok(Verdict::Isomorphic {
                lambda: cert.lambda.clone(),
                gamma: cert.gamma.clone(),
                verification,
            })
        }
    }
}

/// Render the gamma witness over the source basis.
pub fn format_gamma(g1: &GysinModel, cert: &ProportionalityCert) -> String {
    format_combination(g1.base(), cert.gamma.coords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qi;
    use crate::models::builtin;
    use num::traits::Zero;
    use std::collections::BTreeMap as Map;

    fn pv(g: &GysinModel, v: i64) -> Perversity {
        let map: Map<StratumId, i64> = [(StratumId::new("v"), v)].into();
        Perversity::from_values(g.base().poset().clone(), &map).unwrap()
    }

    #[test]
    fn identity_iso_and_optimality() {
        let phi1 = builtin("phi1").unwrap();
        let f = BaseIso::identity(phi1.base(), phi1.base()).unwrap();
        let report = f.check_optimal();
        assert!(report.optimal);
        assert_eq!(report.shared_euler.as_ref().unwrap().values(), &[2]);

        // same algebra, different natures: constructs but is not optimal
        let phi2 = builtin("phi2").unwrap();
        let f12 = BaseIso::identity(phi1.base(), phi2.base()).unwrap();
        let report = f12.check_optimal();
        assert!(!report.optimal);
        assert_eq!(report.strata[0].source_nature, Nature::FixedPerverse);
        assert_eq!(report.strata[0].target_nature, Nature::FixedNonperverse);

        let phi3 = builtin("phi3").unwrap();
        let f23 = BaseIso::identity(phi2.base(), phi3.base()).unwrap();
        assert!(!f23.check_optimal().optimal);
    }

    #[test]
    fn proportionality_for_scaled_euler_data() {
        let phi1 = builtin("phi1").unwrap();
        let scaled = builtin("phi1_scaled").unwrap();
        let f = BaseIso::identity(phi1.base(), scaled.base()).unwrap();
        match solve_proportionality(&f, &phi1, &scaled).unwrap() {
            Proportionality::Proportional(cert) => {
                assert_eq!(cert.lambda, qi(2));
                assert!(cert.gamma.is_zero());
            }
            other => panic!("expected a certificate, got {other:?}"),
        }

        let f_id = BaseIso::identity(phi1.base(), phi1.base()).unwrap();
        match solve_proportionality(&f_id, &phi1, &phi1).unwrap() {
            Proportionality::Proportional(cert) => {
                assert_eq!(cert.lambda, qi(1));
                assert!(cert.gamma.is_zero());
            }
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn zero_euler_data_is_not_proportional_to_a_nonzero_class() {
        let phi1 = builtin("phi1").unwrap();
        let flat = GysinModel::new(phi1.base().clone(), phi1.base().zero_cochain()).unwrap();
        let f = BaseIso::identity(phi1.base(), flat.base()).unwrap();
        match solve_proportionality(&f, &phi1, &flat).unwrap() {
            Proportionality::NotProportional { .. } => {}
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_gamma_certificate_on_the_extended_pair() {
        let ext = builtin("ext_gamma").unwrap();
        let ext_u2 = builtin("ext_gamma_u2").unwrap();
        let f = BaseIso::identity(ext.base(), ext_u2.base()).unwrap();
        match solve_proportionality(&f, &ext, &ext_u2).unwrap() {
            Proportionality::Proportional(cert) => {
                assert_eq!(cert.lambda, qi(1));
                let a1 = ext.base().index_of("a1").unwrap();
                assert_eq!(cert.gamma.coords()[a1], qi(1));
                assert!(!cert.gamma.is_zero());
            }
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn identity_certificate_collapses_the_comparison_map() {
        let phi1 = builtin("phi1").unwrap();
        let f = BaseIso::identity(phi1.base(), phi1.base()).unwrap();
        let cert = ProportionalityCert { lambda: qi(1), gamma: phi1.base().zero_cochain() };
        let slice = build_f(&f, &cert, &phi1, &phi1, &pv(&phi1, 2)).unwrap();
        for (degree, m) in slice.forward.iter().enumerate() {
            assert_eq!(*m, QMatrix::identity(m.rows()), "degree {degree}");
        }
    }

    #[test]
    fn scaled_pair_builds_and_inverts() {
        let phi1 = builtin("phi1").unwrap();
        let scaled = builtin("phi1_scaled").unwrap();
        let f = BaseIso::identity(phi1.base(), scaled.base()).unwrap();
        let Proportionality::Proportional(cert) =
            solve_proportionality(&f, &phi1, &scaled).unwrap()
        else {
            panic!("expected certificate");
        };
        let slice = build_f(&f, &cert, &phi1, &scaled, &pv(&phi1, 2)).unwrap();
        // fiber components are doubled
        let fiber = slice.forward[1].get(0, 0).clone();
        assert_eq!(fiber, qi(2));
        assert!(slice.estimates_checked.iter().all(|&c| c > 0));
    }

    #[test]
    fn verification_passes_on_the_extended_pair() {
        let ext = builtin("ext_gamma").unwrap();
        let ext_u2 = builtin("ext_gamma_u2").unwrap();
        let f = BaseIso::identity(ext.base(), ext_u2.base()).unwrap();
        let Proportionality::Proportional(cert) =
            solve_proportionality(&f, &ext, &ext_u2).unwrap()
        else {
            panic!("expected certificate");
        };
        let sample = default_sample(&ext);
        let verification = verify_perverse_iso(&f, &cert, &ext, &ext_u2, &sample).unwrap();
        assert!(verification.pass(), "{verification:?}");
        assert!(verification.homotopy_chain_at_zero);
    }

    #[test]
    fn dropping_the_correction_breaks_the_chain_identity() {
        let ext = builtin("ext_gamma").unwrap();
        let ext_u2 = builtin("ext_gamma_u2").unwrap();
        let f = BaseIso::identity(ext.base(), ext_u2.base()).unwrap();
        let Proportionality::Proportional(cert) =
            solve_proportionality(&f, &ext, &ext_u2).unwrap()
        else {
            panic!("expected certificate");
        };
        assert!(!chain_map_without_correction(&f, &cert, &ext, &ext_u2, &pv(&ext, 2)).unwrap());

        // with gamma = 0 dropping the term changes nothing
        let phi1 = builtin("phi1").unwrap();
        let scaled = builtin("phi1_scaled").unwrap();
        let f = BaseIso::identity(phi1.base(), scaled.base()).unwrap();
        let Proportionality::Proportional(cert) =
            solve_proportionality(&f, &phi1, &scaled).unwrap()
        else {
            panic!("expected certificate");
        };
        assert!(chain_map_without_correction(&f, &cert, &phi1, &scaled, &pv(&phi1, 2)).unwrap());
    }

    #[test]
    fn compare_actions_verdicts() {
        // (A): proportional Euler data
        let phi1 = builtin("phi1").unwrap();
        let scaled = builtin("phi1_scaled").unwrap();
        let f = BaseIso::identity(phi1.base(), scaled.base()).unwrap();
        match compare_actions(&f, &phi1, &scaled, None).unwrap() {
            Verdict::Isomorphic { lambda, gamma, verification } => {
                assert_eq!(lambda, qi(2));
                assert!(gamma.is_zero());
                assert!(verification.pass());
            }
            other => panic!("expected verdict A, got {other:?}"),
        }

        // (B): natures differ
        let phi2 = builtin("phi2").unwrap();
        let f = BaseIso::identity(phi1.base(), phi2.base()).unwrap();
        match compare_actions(&f, &phi1, &phi2, None).unwrap() {
            Verdict::NotOptimal { report } => {
                assert!(!report.strata[0].ok);
            }
            other => panic!("expected verdict B, got {other:?}"),
        }

        // (C): optimal but the Euler classes are not proportional; the
        // dimension obstruction at p(v) = 2 is reported
        let flat = GysinModel::new(phi1.base().clone(), phi1.base().zero_cochain()).unwrap();
        let f = BaseIso::identity(phi1.base(), flat.base()).unwrap();
        match compare_actions(&f, &phi1, &flat, None).unwrap() {
            Verdict::NotProportional { obstructions, .. } => {
                let at2 = obstructions
                    .iter()
                    .find(|o| o.perversity.values() == [2])
                    .expect("obstruction at p(v)=2");
                assert_eq!(at2.dims_source, vec![1, 0, 0, 0]);
                assert_eq!(at2.dims_target, vec![1, 1, 1, 0]);
            }
            other => panic!("expected verdict C, got {other:?}"),
        }
    }

    #[test]
    fn signature_mismatch_is_rejected() {
        let phi1 = builtin("phi1").unwrap();
        let ext = builtin("ext_gamma").unwrap();
        assert!(matches!(
            BaseIso::identity(phi1.base(), ext.base()),
            Err(Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn default_sample_contains_the_named_perversities() {
        let phi1 = builtin("phi1").unwrap();
        let sample = default_sample(&phi1);
        let keys: Vec<Vec<i64>> = sample.iter().map(|p| p.key()).collect();
        assert!(keys.contains(&vec![0]));
        assert!(keys.contains(&vec![1]));
        assert!(keys.contains(&vec![2]));
        assert!(keys.contains(&vec![3]));
        assert!(keys.contains(&vec![4]));
        // top perversity of the codimension-4 vertex coincides with e
        assert_eq!(sample.len(), 5);
    }

    #[test]
    fn transfer_carries_values_across_the_strata_map() {
        let phi1 = builtin("phi1").unwrap();
        let scaled = builtin("phi1_scaled").unwrap();
        let f = BaseIso::identity(phi1.base(), scaled.base()).unwrap();
        let p = pv(&phi1, 3);
        let q = f.transfer(&p).unwrap();
        assert_eq!(q.values(), &[3]);
        assert!(q.bound_to(scaled.base().poset()));
    }
}
