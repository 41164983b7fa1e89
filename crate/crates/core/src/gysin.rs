//! The twisted pair complex of a circle fibration and its Gysin sequences.
//!
//! A [`GysinModel`] couples a base model with a closed Euler 2-cochain. For a
//! perversity p the pair complex collects pairs (alpha, beta) with beta in the
//! (p - x)-subcomplex and both twisted bounds satisfied, under the
//! differential
//!
//! ```text
//! D(alpha, beta) = (d alpha + (-1)^{|beta|} beta ^ eps, d beta)
//! ```
//!
//! Its cohomology stands in for the intersection cohomology of the total
//! space. Projection to beta gives the Gysin term, whose cohomology links the
//! base and the total space in a long exact sequence; the connecting map
//! carries the unit to the Euler class.

use std::fmt;
use std::sync::Arc;

use crate::cdga::{Cochain, Homogeneity, PerverseModel, ValidationReport};
use crate::cohomology::{cohomology_with, induced_diff_matrices, Class, CohomologyTable, GradedSubspace};
use crate::error::{Error, Result};
use crate::linalg::{sign_pow, vec_add, vec_is_zero, vec_scale, vec_zero, Q, QMatrix, QVec};
use crate::perverse_forms::{extract_omega, ih_base, PerverseSubcomplex};
use crate::strata::Perversity;

/// Base model plus Euler data. Construction validates the base model and the
/// Euler cochain; every operation assumes a valid model.
#[derive(Clone, Debug, PartialEq)]
pub struct GysinModel {
    base: Arc<PerverseModel>,
    epsilon: Cochain,
    characteristic: Perversity,
    euler: Perversity,
    connected_normal: bool,
}

impl GysinModel {
    /// Validate and assemble. The characteristic and Euler perversities are
    /// derived from the stratum natures; epsilon must be a closed 2-cochain
    /// bounded by the Euler perversity.
    pub fn new(base: Arc<PerverseModel>, epsilon: Cochain) -> Result<Self> {
        if epsilon.coords().len() != base.dim() {
            return Err(Error::DimensionMismatch {
                got: epsilon.coords().len(),
                expected: base.dim(),
            });
        }
        let mut report = base.validate();
        let euler = Perversity::euler(base.poset().clone());
        match base.homogeneity(epsilon.coords()) {
            Homogeneity::Zero | Homogeneity::Degree(2) => {}
            Homogeneity::Degree(d) => report.violations.push(crate::cdga::Violation {
                rule: "epsilon_degree",
                detail: format!("Euler cochain has degree {d}, expected 2"),
            }),
            Homogeneity::Mixed(l, h) => report.violations.push(crate::cdga::Violation {
                rule: "epsilon_degree",
                detail: format!("Euler cochain mixes degrees {l} and {h}"),
            }),
        }
        if !vec_is_zero(&base.apply_diff(epsilon.coords())) {
            report.violations.push(crate::cdga::Violation {
                rule: "epsilon_not_closed",
                detail: "d(epsilon) is nonzero".to_string(),
            });
        }
        if !base.within_bound(epsilon.coords(), &euler) {
            report.violations.push(crate::cdga::Violation {
                rule: "epsilon_perversity",
                detail: "Euler cochain exceeds the Euler perversity bound".to_string(),
            });
        }
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        let characteristic = Perversity::characteristic(base.poset().clone());
        let connected_normal = base.connected_normal();
        Ok(GysinModel { base, epsilon, characteristic, euler, connected_normal })
    }

    /// Validation-only entry: the full report, never an error.
    pub fn validation_report(base: &Arc<PerverseModel>, epsilon: &Cochain) -> ValidationReport {
        match Self::new(base.clone(), epsilon.clone()) {
            Ok(_) => ValidationReport::default(),
            Err(Error::Invalid(report)) => report,
            Err(e) => ValidationReport {
                violations: vec![crate::cdga::Violation { rule: "structure", detail: e.to_string() }],
            },
        }
    }

    pub fn base(&self) -> &Arc<PerverseModel> {
        &self.base
    }

    pub fn epsilon(&self) -> &Cochain {
        &self.epsilon
    }

    pub fn characteristic_perversity(&self) -> &Perversity {
        &self.characteristic
    }

    pub fn euler_perversity(&self) -> &Perversity {
        &self.euler
    }

    pub fn connected_normal(&self) -> bool {
        self.connected_normal
    }

    /// Dimension of the stacked pair coordinate space.
    pub fn pair_dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn split<'a>(&self, v: &'a [Q]) -> (&'a [Q], &'a [Q]) {
        let n = self.base.dim();
        (&v[..n], &v[n..])
    }

    pub fn pair(&self, alpha: &[Q], beta: &[Q]) -> QVec {
        let mut out = alpha.to_vec();
        out.extend_from_slice(beta);
        out
    }

    /// Fiber-component projection.
    pub fn beta_part(&self, v: &[Q]) -> QVec {
        self.split(v).1.to_vec()
    }

    /// Base-component injection alpha -> (alpha, 0).
    pub fn rho(&self, alpha: &[Q]) -> QVec {
        self.pair(alpha, &vec_zero(self.base.dim()))
    }

    /// The pair differential on a homogeneous degree-i pair vector.
    pub fn pair_d(&self, degree: usize, v: &[Q]) -> QVec {
        let (alpha, beta) = self.split(v);
        // |beta| = degree - 1; the parity of degree + 1 matches
        let sign = sign_pow(degree + 1);
        let twist = vec_scale(&sign, &self.base.wedge_coords(beta, self.epsilon.coords()));
        let out_alpha = vec_add(&self.base.apply_diff(alpha), &twist);
        let out_beta = self.base.apply_diff(beta);
        self.pair(&out_alpha, &out_beta)
    }

    /// The pair wedge on homogeneous vectors of the stated degrees.
    pub fn pair_wedge(&self, _deg_a: usize, a: &[Q], deg_b: usize, b: &[Q]) -> QVec {
        let (aa, ab) = self.split(a);
        let (ba, bb) = self.split(b);
        let out_alpha = self.base.wedge_coords(aa, ba);
        let sign = sign_pow(deg_b);
        let mut out_beta = vec_scale(&sign, &self.base.wedge_coords(ab, ba));
        out_beta = vec_add(&out_beta, &self.base.wedge_coords(aa, bb));
        self.pair(&out_alpha, &out_beta)
    }

    /// Solution space of the two twisted bounds, per degree.
    pub fn iomega(&self, p: &Perversity) -> Result<IOmegaComplex> {
        if !p.bound_to(self.base.poset()) {
            return Err(Error::PosetMismatch);
        }
        let n = self.base.dim();
        let p_minus_x = p.sub(&self.characteristic)?;
        let allowed_p = self.base.allowed_indices(p);
        let allowed_px = self.base.allowed_indices(&p_minus_x);
        let top = self.base.top_degree();
        let mut bases = Vec::with_capacity(top + 2);
        for degree in 0..=top + 1 {
            let alpha_vars: Vec<usize> = self
                .base
                .degree_indices(degree)
                .into_iter()
                .filter(|&i| allowed_p[i])
                .collect();
            let beta_vars: Vec<usize> = if degree == 0 {
                Vec::new()
            } else {
                self.base
                    .degree_indices(degree - 1)
                    .into_iter()
                    .filter(|&i| allowed_px[i])
                    .collect()
            };
            let sign = sign_pow(degree + 1);
            // wedge of each beta variable with epsilon, for the twisted bound
            let beta_twists: Vec<QVec> = beta_vars
                .iter()
                .map(|&b| {
                    let mut e = vec_zero(n);
                    e[b] = Q::from_integer(1.into());
                    vec_scale(&sign, &self.base.wedge_coords(&e, self.epsilon.coords()))
                })
                .collect();

            // rows: d(beta) must stay inside the (p - x) coordinates, and
            // d(alpha) + sign * beta ^ eps inside the p coordinates
            let bad_beta_targets: Vec<usize> =
                self.base.degree_indices(degree).into_iter().filter(|&i| !allowed_px[i]).collect();
            let bad_alpha_targets: Vec<usize> = self
                .base
                .degree_indices(degree + 1)
                .into_iter()
                .filter(|&i| !allowed_p[i])
                .collect();

            let rows = bad_beta_targets.len() + bad_alpha_targets.len();
            let cols = alpha_vars.len() + beta_vars.len();
            let mut constraint = QMatrix::zeros(rows, cols);
            for (r, &bad) in bad_beta_targets.iter().enumerate() {
                for (c, &b) in beta_vars.iter().enumerate() {
                    constraint.set(r, alpha_vars.len() + c, self.base.diff_matrix().get(bad, b).clone());
                }
            }
            let offset = bad_beta_targets.len();
            for (r, &bad) in bad_alpha_targets.iter().enumerate() {
                for (c, &a) in alpha_vars.iter().enumerate() {
                    constraint.set(offset + r, c, self.base.diff_matrix().get(bad, a).clone());
                }
                for (c, twist) in beta_twists.iter().enumerate() {
                    constraint.set(offset + r, alpha_vars.len() + c, twist[bad].clone());
                }
            }

            let kern = constraint.kernel();
            let mut cols_out = Vec::with_capacity(kern.cols());
            for j in 0..kern.cols() {
                let k = kern.col(j);
                let mut alpha = vec_zero(n);
                let mut beta = vec_zero(n);
                for (c, &a) in alpha_vars.iter().enumerate() {
                    alpha[a] = k[c].clone();
                }
                for (c, &b) in beta_vars.iter().enumerate() {
                    beta[b] = k[alpha_vars.len() + c].clone();
                }
                cols_out.push(self.pair(&alpha, &beta));
            }
            bases.push(QMatrix::from_cols(2 * n, &cols_out));
        }
        Ok(IOmegaComplex {
            perversity: p.clone(),
            space: GradedSubspace::new(2 * n, bases),
        })
    }

    /// Intersection cohomology of the total space at one perversity.
    pub fn ih_total(&self, p: &Perversity) -> Result<CohomologyTable> {
        let io = self.iomega(p)?;
        self.ih_total_of(&io)
    }

    pub fn ih_total_of(&self, io: &IOmegaComplex) -> Result<CohomologyTable> {
        cohomology_with(&io.space, |i, v| self.pair_d(i, v))
    }

    /// Differential matrices of the pair complex in its own coordinates.
    pub fn iomega_diff_matrices(&self, io: &IOmegaComplex) -> Result<Vec<QMatrix>> {
        induced_diff_matrices(&io.space, |i, v| self.pair_d(i, v))
    }

    /// Cup product inherited from the pair wedge; classes of perversities p
    /// and p' multiply into the table at p + p'.
    pub fn ih_total_cup(
        &self,
        left_table: &CohomologyTable,
        left: &Class,
        right_table: &CohomologyTable,
        right: &Class,
        target: &CohomologyTable,
    ) -> Result<Class> {
        crate::cohomology::cup_product(left_table, left, right_table, right, target, |da, a, db, b| {
            self.pair_wedge(da, a, db, b)
        })
    }

    /// Image of the fiber projection, with the induced differential. Hard
    /// error if the image fails to be closed under d.
    pub fn gysin_term(&self, p: &Perversity) -> Result<GysinTerm> {
        let io = self.iomega(p)?;
        self.gysin_term_of(&io)
    }

    pub fn gysin_term_of(&self, io: &IOmegaComplex) -> Result<GysinTerm> {
        let n = self.base.dim();
        let top = self.base.top_degree();
        let mut bases = Vec::with_capacity(top + 1);
        for j in 0..=top {
            let betas: Vec<QVec> =
                (0..io.dim(j + 1)).map(|c| self.beta_part(&io.space.basis(j + 1).col(c))).collect();
            let image = QMatrix::from_cols(n, &betas).image_basis();
            bases.push(QMatrix::from_cols(n, &image));
        }
        let space = GradedSubspace::new(n, bases);
        // the induced differential beta -> d(beta) must preserve the image
        for j in 0..space.len() {
            for c in 0..space.dim(j) {
                let d = self.base.apply_diff(&space.basis(j).col(c));
                let ok = if j + 1 < space.len() {
                    space.contains(j + 1, &d)
                } else {
                    vec_is_zero(&d)
                };
                if !ok {
                    return Err(Error::GysinTermNotClosed { degree: j });
                }
            }
        }
        Ok(GysinTerm { perversity: io.perversity.clone(), space })
    }

    /// Cohomology of the Gysin term.
    pub fn gysin_cohomology(&self, term: &GysinTerm) -> Result<CohomologyTable> {
        cohomology_with(&term.space, |_, v| self.base.apply_diff(v))
    }

    /// Witness data for the connecting map: a particular alpha together with
    /// the homogeneous solution space, so callers can compare witnesses.
    pub fn connecting_witnesses(
        &self,
        p: &Perversity,
        beta: &Cochain,
    ) -> Result<(QVec, Vec<QVec>)> {
        let degree = match self.base.degree(beta)? {
            Some(d) => d,
            None => return Err(Error::ClassBookkeeping("zero cochain has no degree".into())),
        };
        let term = self.gysin_term(p)?;
        if !term.space.contains(degree, beta.coords()) {
            return Err(Error::NotInGysinTerm);
        }
        let n = self.base.dim();
        let allowed_p = self.base.allowed_indices(p);
        let alpha_vars: Vec<usize> = self
            .base
            .degree_indices(degree + 1)
            .into_iter()
            .filter(|&i| allowed_p[i])
            .collect();
        let sign = sign_pow(degree);
        let twist = vec_scale(&sign, &self.base.wedge_coords(beta.coords(), self.epsilon.coords()));
        let bad_targets: Vec<usize> = self
            .base
            .degree_indices(degree + 2)
            .into_iter()
            .filter(|&i| !allowed_p[i])
            .collect();
        let mut constraint = QMatrix::zeros(bad_targets.len(), alpha_vars.len());
        let mut rhs = Vec::with_capacity(bad_targets.len());
        for (r, &bad) in bad_targets.iter().enumerate() {
            for (c, &a) in alpha_vars.iter().enumerate() {
                constraint.set(r, c, self.base.diff_matrix().get(bad, a).clone());
            }
            rhs.push(-twist[bad].clone());
        }
        let (particular, kernel) = constraint
            .solve_with_kernel(&rhs)
            .ok_or_else(|| Error::Internal("witness system for a Gysin member is inconsistent".into()))?;
        let lift = |x: &[Q]| {
            let mut alpha = vec_zero(n);
            for (c, &a) in alpha_vars.iter().enumerate() {
                alpha[a] = x[c].clone();
            }
            alpha
        };
        let kern_vecs: Vec<QVec> = (0..kernel.cols()).map(|j| lift(&kernel.col(j))).collect();
        Ok((lift(&particular), kern_vecs))
    }

    /// Connecting map of the Gysin sequence: pick a witness alpha for the
    /// cocycle beta and return the class of d(alpha) + (-1)^{|beta|} beta^eps
    /// in the base cohomology at p. The class does not depend on the witness.
    pub fn connecting_map(&self, p: &Perversity, beta: &Cochain) -> Result<EubImage> {
        let degree = match self.base.degree(beta)? {
            Some(d) => d,
            None => return Err(Error::ClassBookkeeping("zero cochain has no degree".into())),
        };
        if !vec_is_zero(&self.base.apply_diff(beta.coords())) {
            return Err(Error::NotACocycle);
        }
        let (alpha, _) = self.connecting_witnesses(p, beta)?;
        let image = self.eub_image(degree, &alpha, beta.coords());
        let table = ih_base(&self.base, p)?;
        let class = table.class_of(degree + 2, &image).ok_or_else(|| {
            Error::Internal("connecting image is not a cocycle of the base subcomplex".into())
        })?;
        Ok(EubImage {
            witness: Cochain::from_coords(alpha),
            image: Cochain::from_coords(image),
            class,
        })
    }

    /// d(alpha) + (-1)^{|beta|} beta ^ eps for a degree-|beta| cocycle.
    pub fn eub_image(&self, beta_degree: usize, alpha: &[Q], beta: &[Q]) -> QVec {
        let sign = sign_pow(beta_degree);
        let twist = vec_scale(&sign, &self.base.wedge_coords(beta, self.epsilon.coords()));
        vec_add(&self.base.apply_diff(alpha), &twist)
    }

    /// The class of epsilon in the base cohomology at the Euler perversity.
    pub fn euler_class(&self) -> Result<EulerClass> {
        let table = ih_base(&self.base, &self.euler)?;
        let class = table
            .class_of(2, self.epsilon.coords())
            .ok_or_else(|| Error::Internal("Euler cochain is not a cocycle of its subcomplex".into()))?;
        let is_zero = class.is_zero();
        Ok(EulerClass { class, is_zero, table })
    }

    /// Dimension bookkeeping of the short exact sequence at one perversity.
    pub fn short_exact_check(&self, p: &Perversity) -> Result<SesReport> {
        let omega = extract_omega(&self.base, p)?;
        let io = self.iomega(p)?;
        let term = self.gysin_term_of(&io)?;
        let mut rows = Vec::new();
        let mut ok = true;
        for i in 0..io.space.len() {
            let omega_dim = omega.dim(i);
            let gysin_dim = if i == 0 { 0 } else { term.space.dim(i - 1) };
            let io_dim = io.dim(i);
            let sum_ok = omega_dim + gysin_dim == io_dim;

            // rho embeds the base subcomplex and hits exactly the kernel of
            // the projection
            let mut rho_cols = Vec::with_capacity(omega_dim);
            for j in 0..omega_dim {
                let v = self.rho(&omega.space().basis(i).col(j));
                match io.space.coords(i, &v) {
                    Some(c) => rho_cols.push(c),
                    None => {
                        rho_cols.clear();
                        break;
                    }
                }
            }
            let rho_ok = rho_cols.len() == omega_dim;
            let rho_mat = QMatrix::from_cols(io_dim, &rho_cols);
            let rho_injective = rho_mat.rank() == omega_dim;

            let mut proj_cols = Vec::with_capacity(io_dim);
            for j in 0..io_dim {
                let beta = self.beta_part(&io.space.basis(i).col(j));
                let c = if i == 0 {
                    if vec_is_zero(&beta) { Some(Vec::new()) } else { None }
                } else {
                    term.space.coords(i - 1, &beta)
                };
                match c {
                    Some(c) => proj_cols.push(c),
                    None => {
                        proj_cols.clear();
                        break;
                    }
                }
            }
            let proj_ok = proj_cols.len() == io_dim;
            let proj_mat = QMatrix::from_cols(gysin_dim, &proj_cols);
            let surjective = proj_mat.rank() == gysin_dim;
            let composite_zero = rho_ok && proj_ok && proj_mat.mul(&rho_mat).is_zero();
            let middle_exact = composite_zero && rho_mat.rank() + proj_mat.rank() == io_dim;

            let row_ok =
                sum_ok && rho_ok && rho_injective && proj_ok && surjective && middle_exact;
            ok &= row_ok;
            rows.push(SesRow {
                degree: i,
                omega_dim,
                gysin_dim,
                iomega_dim: io_dim,
                ok: row_ok,
            });
        }
        Ok(SesReport { rows, ok })
    }

    /// Assemble the long exact sequence at one perversity and verify
    /// exactness at every node.
    pub fn long_exact_sequence(&self, p: &Perversity) -> Result<GysinSequence> {
        let base_table = ih_base(&self.base, p)?;
        let io = self.iomega(p)?;
        let total_table = self.ih_total_of(&io)?;
        let term = self.gysin_term_of(&io)?;
        let gysin_table = self.gysin_cohomology(&term)?;

        let max_degree = total_table.len();

        // pi: IH^i(B) -> IH^i(X), class of (alpha, 0)
        let mut pi = Vec::new();
        for i in 0..max_degree {
            let cols: Option<Vec<QVec>> = base_table
                .representatives(i)
                .iter()
                .map(|r| total_table.reduce(i, &self.rho(r)))
                .collect();
            let cols = cols.ok_or_else(|| {
                Error::Internal("base representative does not map to a total cocycle".into())
            })?;
            pi.push(QMatrix::from_cols(total_table.dim(i), &cols));
        }

        // oint: IH^i(X) -> H^{i-1}(G), fiber projection
        let mut oint = Vec::new();
        for i in 0..max_degree {
            let target_dim = if i == 0 { 0 } else { gysin_table.dim(i - 1) };
            let cols: Option<Vec<QVec>> = total_table
                .representatives(i)
                .iter()
                .map(|r| {
                    let beta = self.beta_part(r);
                    if i == 0 {
                        if vec_is_zero(&beta) { Some(Vec::new()) } else { None }
                    } else {
                        gysin_table.reduce(i - 1, &beta)
                    }
                })
                .collect();
            let cols = cols.ok_or_else(|| {
                Error::Internal("fiber projection of a total cocycle left the Gysin term".into())
            })?;
            oint.push(QMatrix::from_cols(target_dim, &cols));
        }

        // eub: H^j(G) -> IH^{j+2}(B) via the connecting witness
        let mut eub = Vec::new();
        for j in 0..gysin_table.len() {
            let cols: Result<Vec<QVec>> = gysin_table
                .representatives(j)
                .iter()
                .map(|g| {
                    let (alpha, _) = self.connecting_witnesses(p, &Cochain::from_coords(g.clone()))?;
                    let image = self.eub_image(j, &alpha, g);
                    base_table.reduce(j + 2, &image).ok_or_else(|| {
                        Error::Internal("connecting image is not a base cocycle".into())
                    })
                })
                .collect();
            eub.push(QMatrix::from_cols(base_table.dim(j + 2), &cols?));
        }

        // exactness node by node, walking
        //   IH^i(B) --pi--> IH^i(X) --oint--> H^{i-1}(G) --eub--> IH^{i+1}(B)
        let zero = |rows: usize, cols: usize| QMatrix::zeros(rows, cols);
        let get = |v: &Vec<QMatrix>, i: usize, rows: usize, cols: usize| -> QMatrix {
            v.get(i).cloned().unwrap_or_else(|| zero(rows, cols))
        };
        let mut nodes = Vec::new();
        for i in 0..=max_degree {
            let dim_b = base_table.dim(i);
            let dim_x = total_table.dim(i);
            let dim_g_prev = if i == 0 { 0 } else { gysin_table.dim(i - 1) };

            let into_b = if i >= 2 {
                get(&eub, i - 2, dim_b, gysin_table.dim(i - 2))
            } else {
                zero(dim_b, 0)
            };
            let out_b = get(&pi, i, dim_x, dim_b);
            nodes.push(node(format!("IH^{i}(B)"), dim_b, &into_b, &out_b));

            let into_x = get(&pi, i, dim_x, dim_b);
            let out_x = get(&oint, i, dim_g_prev, dim_x);
            nodes.push(node(format!("IH^{i}(X)"), dim_x, &into_x, &out_x));

            if i >= 1 {
                let into_g = get(&oint, i, dim_g_prev, dim_x);
                let out_g = get(&eub, i - 1, base_table.dim(i + 1), dim_g_prev);
                nodes.push(node(format!("H^{}(G)", i - 1), dim_g_prev, &into_g, &out_g));
            }
        }

        Ok(GysinSequence {
            perversity: p.clone(),
            base: base_table,
            total: total_table,
            gysin: gysin_table,
            pi,
            oint,
            eub,
            nodes,
        })
    }

    /// Degree-0 Gysin cohomology is spanned by the constants and the
    /// connecting map carries the unit to the Euler class; only meaningful
    /// for connected normal models at perversities above the Euler one.
    pub fn lemma_g(&self, p: &Perversity) -> Result<LemmaGReport> {
        if !self.connected_normal {
            return Ok(LemmaGReport::not_applicable("model not flagged connected_normal"));
        }
        if !p.geq(&self.euler)? {
            return Ok(LemmaGReport::not_applicable("p \u{2271} e"));
        }
        let term = self.gysin_term(p)?;
        let table = self.gysin_cohomology(&term)?;
        let h0_dim = table.dim(0);
        let unit = self.base.unit_cochain();
        let unit_class = table.reduce(0, unit.coords());
        let unit_spans = matches!(&unit_class, Some(c) if !vec_is_zero(c)) && h0_dim == 1;

        let eub = self.connecting_map(p, &unit)?;
        let base_table = ih_base(&self.base, p)?;
        let euler_in_p = base_table.class_of(2, self.epsilon.coords()).ok_or_else(|| {
            Error::Internal("Euler cochain left its subcomplex at a larger perversity".into())
        })?;
        let eub_matches = eub.class == euler_in_p;

        Ok(LemmaGReport {
            applicable: true,
            reason: None,
            h0_dim,
            unit_spans_h0: unit_spans,
            eub_equals_euler: eub_matches,
        })
    }

    // Structural self-checks used by the test suites.

    /// D composed with itself vanishes on every basis pair of the complex.
    pub fn iomega_d_squared_zero(&self, io: &IOmegaComplex) -> bool {
        for i in 0..io.space.len() {
            for j in 0..io.dim(i) {
                let v = io.space.basis(i).col(j);
                let dd = self.pair_d(i + 1, &self.pair_d(i, &v));
                if !vec_is_zero(&dd) {
                    return false;
                }
            }
        }
        true
    }

    /// Graded Leibniz rule of D against the pair wedge, on basis pairs drawn
    /// from two complexes.
    pub fn iomega_leibniz(&self, io_a: &IOmegaComplex, io_b: &IOmegaComplex) -> bool {
        for da in 0..io_a.space.len() {
            for db in 0..io_b.space.len() {
                for i in 0..io_a.dim(da) {
                    for j in 0..io_b.dim(db) {
                        let v = io_a.space.basis(da).col(i);
                        let w = io_b.space.basis(db).col(j);
                        let vw = self.pair_wedge(da, &v, db, &w);
                        let lhs = self.pair_d(da + db, &vw);
                        let mut rhs = self.pair_wedge(da + 1, &self.pair_d(da, &v), db, &w);
                        let sgn = sign_pow(da);
                        let second =
                            vec_scale(&sgn, &self.pair_wedge(da, &v, db + 1, &self.pair_d(db, &w)));
                        rhs = vec_add(&rhs, &second);
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Products of members of two pair complexes land in the complex at the
    /// summed perversity.
    pub fn iomega_wedge_in_sum(
        &self,
        io_a: &IOmegaComplex,
        io_b: &IOmegaComplex,
        io_sum: &IOmegaComplex,
    ) -> bool {
        for da in 0..io_a.space.len() {
            for db in 0..io_b.space.len() {
                for i in 0..io_a.dim(da) {
                    for j in 0..io_b.dim(db) {
                        let prod = self.pair_wedge(
                            da,
                            &io_a.space.basis(da).col(i),
                            db,
                            &io_b.space.basis(db).col(j),
                        );
                        let ok = if da + db < io_sum.space.len() {
                            io_sum.space.contains(da + db, &prod)
                        } else {
                            vec_is_zero(&prod)
                        };
                        if !ok {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// rho is a map of algebras: rho(a) ^ rho(b) = rho(a ^ b).
    pub fn rho_is_algebra_map(&self, oa: &PerverseSubcomplex, ob: &PerverseSubcomplex) -> bool {
        for da in 0..oa.space().len() {
            for db in 0..ob.space().len() {
                for i in 0..oa.dim(da) {
                    for j in 0..ob.dim(db) {
                        let a = oa.space().basis(da).col(i);
                        let b = ob.space().basis(db).col(j);
                        let lhs = self.pair_wedge(da, &self.rho(&a), db, &self.rho(&b));
                        let rhs = self.rho(&self.base.wedge_coords(&a, &b));
                        if lhs != rhs {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Render a pair vector as (alpha, beta) over the base names.
    pub fn format_pair(&self, v: &[Q]) -> String {
        let (alpha, beta) = self.split(v);
        format!(
            "({}, {})",
            crate::cdga::format_combination(&self.base, alpha),
            crate::cdga::format_combination(&self.base, beta)
        )
    }
}

/// The pair complex at one perversity: per-degree bases of the solution space
/// in stacked (alpha, beta) coordinates.
#[derive(Clone, Debug)]
pub struct IOmegaComplex {
    perversity: Perversity,
    space: GradedSubspace,
}

impl IOmegaComplex {
    pub fn perversity(&self) -> &Perversity {
        &self.perversity
    }

    pub fn space(&self) -> &GradedSubspace {
        &self.space
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.space.dim(degree)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.space.dims()
    }
}

/// Fiber components admitting a twisted witness, with the induced
/// differential; graded by the fiber degree.
#[derive(Clone, Debug)]
pub struct GysinTerm {
    perversity: Perversity,
    space: GradedSubspace,
}

impl GysinTerm {
    pub fn perversity(&self) -> &Perversity {
        &self.perversity
    }

    pub fn space(&self) -> &GradedSubspace {
        &self.space
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.space.dim(degree)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.space.dims()
    }
}

/// Result of the connecting map on one cocycle.
#[derive(Clone, Debug)]
pub struct EubImage {
    pub witness: Cochain,
    pub image: Cochain,
    pub class: Class,
}

/// The class of the Euler cochain in base cohomology at the Euler perversity.
#[derive(Clone, Debug)]
pub struct EulerClass {
    pub class: Class,
    pub is_zero: bool,
    pub table: CohomologyTable,
}

/// Dimension bookkeeping of the short exact sequence in one degree.
#[derive(Clone, Debug)]
pub struct SesRow {
    pub degree: usize,
    pub omega_dim: usize,
    pub gysin_dim: usize,
    pub iomega_dim: usize,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct SesReport {
    pub rows: Vec<SesRow>,
    pub ok: bool,
}

/// One node of the long exact sequence with its exactness verdict.
#[derive(Clone, Debug)]
pub struct SequenceNode {
    pub label: String,
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    pub composite_zero: bool,
    pub exact: bool,
}

fn node(label: String, dim: usize, into: &QMatrix, out: &QMatrix) -> SequenceNode {
    let rank_in = into.rank();
    let rank_out = out.rank();
    let composite_zero = if out.cols() == into.rows() && into.cols() > 0 {
        out.mul(into).is_zero()
    } else {
        true
    };
    let exact = composite_zero && rank_in + rank_out == dim;
    SequenceNode { label, dim, rank_in, rank_out, composite_zero, exact }
}

/// The assembled long exact sequence at one perversity.
#[derive(Clone, Debug)]
pub struct GysinSequence {
    pub perversity: Perversity,
    pub base: CohomologyTable,
    pub total: CohomologyTable,
    pub gysin: CohomologyTable,
    pub pi: Vec<QMatrix>,
    pub oint: Vec<QMatrix>,
    pub eub: Vec<QMatrix>,
    pub nodes: Vec<SequenceNode>,
}

impl GysinSequence {
    pub fn is_exact(&self) -> bool {
        self.nodes.iter().all(|n| n.exact)
    }
}

/// Lemma check: H^0 of the Gysin term is one-dimensional, spanned by the
/// constants, and the connecting map sends the unit to the Euler class.
#[derive(Clone, Debug)]
pub struct LemmaGReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub h0_dim: usize,
    pub unit_spans_h0: bool,
    pub eub_equals_euler: bool,
}

impl LemmaGReport {
    fn not_applicable(reason: &str) -> Self {
        LemmaGReport {
            applicable: false,
            reason: Some(reason.to_string()),
            h0_dim: 0,
            unit_spans_h0: false,
            eub_equals_euler: false,
        }
    }

    pub fn passed(&self) -> bool {
        self.applicable && self.h0_dim == 1 && self.unit_spans_h0 && self.eub_equals_euler
    }
}

impl fmt::Display for LemmaGReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.applicable {
            return write!(f, "not applicable: {}", self.reason.as_deref().unwrap_or(""));
        }
        write!(
            f,
            "H0(G)={}; eub(1)=EulerClass: {}",
            self.h0_dim,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qi;
    use crate::models::builtin;
    use crate::strata::StratumId;
    use num::traits::Zero;
    use std::collections::BTreeMap;

    fn pv(g: &GysinModel, v: i64) -> Perversity {
        let map: BTreeMap<StratumId, i64> = [(StratumId::new("v"), v)].into();
        Perversity::from_values(g.base().poset().clone(), &map).unwrap()
    }

    #[test]
    fn iomega_dimensions_for_the_cone_examples() {
        let phi1 = builtin("phi1").unwrap();
        let io = phi1.iomega(&pv(&phi1, 2)).unwrap();
        assert_eq!(io.dims(), vec![1, 1, 1, 0]);
        // the degree-1 member is the pair (0, u0)
        let col = io.space().basis(1).col(0);
        let (n, u0) = (phi1.base().dim(), phi1.base().index_of("u0").unwrap());
        assert!(col[..n].iter().all(|c| c.is_zero()));
        assert!(!col[n + u0].is_zero());

        let io0 = phi1.iomega(&pv(&phi1, 0)).unwrap();
        assert_eq!(io0.dims(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn zero_euler_cochain_decouples_the_pair() {
        let phi3 = builtin("phi3").unwrap();
        for v in [0i64, 1, 2, 3] {
            let p = pv(&phi3, v);
            let io = phi3.iomega(&p).unwrap();
            let omega = extract_omega(phi3.base(), &p).unwrap();
            for i in 0..io.space().len() {
                let prev = if i == 0 { 0 } else { omega.dim(i - 1) };
                assert_eq!(io.dim(i), omega.dim(i) + prev, "p(v)={v}, degree {i}");
            }
            // D acts as (d, d); with d = 0 the whole differential vanishes
            for i in 0..io.space().len() {
                for j in 0..io.dim(i) {
                    let d = phi3.pair_d(i, &io.space().basis(i).col(j));
                    assert!(vec_is_zero(&d));
                }
            }
        }
    }

    #[test]
    fn ih_total_tables_for_the_three_actions() {
        let phi1 = builtin("phi1").unwrap();
        let phi2 = builtin("phi2").unwrap();
        let phi3 = builtin("phi3").unwrap();
        assert_eq!(phi1.ih_total(&pv(&phi1, 2)).unwrap().dims(), vec![1, 0, 0, 0]);
        assert_eq!(phi2.ih_total(&pv(&phi2, 2)).unwrap().dims(), vec![1, 1, 1, 0]);
        assert_eq!(phi3.ih_total(&pv(&phi3, 2)).unwrap().dims(), vec![1, 1, 1, 1]);
        assert_eq!(phi1.ih_total(&pv(&phi1, 0)).unwrap().dims(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn gysin_term_examples() {
        let phi1 = builtin("phi1").unwrap();
        let term = phi1.gysin_term(&pv(&phi1, 2)).unwrap();
        assert_eq!(term.dims(), vec![1, 0, 0]);
        let u0 = phi1.base().index_of("u0").unwrap();
        assert!(!term.space().basis(0).col(0)[u0].is_zero());

        let term0 = phi1.gysin_term(&pv(&phi1, 0)).unwrap();
        assert_eq!(term0.dims(), vec![0, 0, 0]);

        // with a zero Euler cochain the witness condition is vacuous
        let phi2 = builtin("phi2").unwrap();
        let p = pv(&phi2, 1);
        let term = phi2.gysin_term(&p).unwrap();
        let p_minus_x = p.sub(phi2.characteristic_perversity()).unwrap();
        let omega = extract_omega(phi2.base(), &p_minus_x).unwrap();
        assert_eq!(term.dims(), omega.dims());
    }

    #[test]
    fn connecting_map_carries_the_unit_to_the_euler_class() {
        let phi1 = builtin("phi1").unwrap();
        let p = pv(&phi1, 2);
        let unit = phi1.base().unit_cochain();
        let eub = phi1.connecting_map(&p, &unit).unwrap();
        let table = ih_base(phi1.base(), &p).unwrap();
        let euler = table.class_of(2, phi1.epsilon().coords()).unwrap();
        assert!(!eub.class.is_zero());
        assert_eq!(eub.class, euler);

        // scaled Euler data scales the image
        let scaled = builtin("phi1_scaled").unwrap();
        let eub2 = scaled.connecting_map(&pv(&scaled, 2), &unit).unwrap();
        let u2 = scaled.base().index_of("u2").unwrap();
        assert_eq!(eub2.image.coords()[u2], qi(2));

        // zero Euler cochain: the connecting image vanishes
        let phi2 = builtin("phi2").unwrap();
        let eub3 = phi2.connecting_map(&pv(&phi2, 2), &unit).unwrap();
        assert!(eub3.class.is_zero());
    }

    #[test]
    fn connecting_map_rejects_non_members() {
        let phi1 = builtin("phi1").unwrap();
        // u2 is not in the Gysin term at p = 0 (the term is empty there)
        let u2 = phi1.base().cochain_from_terms(&[("u2", qi(1))]).unwrap();
        assert!(matches!(
            phi1.connecting_map(&pv(&phi1, 0), &u2),
            Err(Error::NotInGysinTerm)
        ));
    }

    #[test]
    fn connecting_map_is_witness_independent() {
        // ext_gamma has a one-dimensional witness freedom for beta = u0 at
        // p = e: alpha may include any multiple of a1
        let ext = builtin("ext_gamma").unwrap();
        let p = pv(&ext, 2);
        let unit = ext.base().unit_cochain();
        let (alpha, kernel) = ext.connecting_witnesses(&p, &unit).unwrap();
        assert!(!kernel.is_empty(), "expected a positive-dimensional witness space");

        let table = ih_base(ext.base(), &p).unwrap();
        let image1 = ext.eub_image(0, &alpha, unit.coords());
        let class1 = table.class_of(2, &image1).unwrap();
        for k in &kernel {
            let alpha2 = vec_add(&alpha, k);
            let image2 = ext.eub_image(0, &alpha2, unit.coords());
            let class2 = table.class_of(2, &image2).unwrap();
            assert_eq!(class1, class2);
        }
    }

    #[test]
    fn long_exact_sequence_is_exact_for_all_builtins() {
        for name in crate::models::BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            for v in [0i64, 1, 2, 3] {
                let seq = g.long_exact_sequence(&pv(&g, v)).unwrap();
                assert!(seq.is_exact(), "{name} at p(v)={v}: {:#?}", seq.nodes);
            }
        }
    }

    #[test]
    fn phi1_sequence_detects_the_euler_class() {
        let phi1 = builtin("phi1").unwrap();
        let seq = phi1.long_exact_sequence(&pv(&phi1, 2)).unwrap();
        // H^0(G) is one-dimensional, eub embeds it onto the Euler line and pi
        // then kills it
        assert_eq!(seq.gysin.dim(0), 1);
        assert_eq!(seq.eub[0].rank(), 1);
        assert_eq!(seq.base.dim(2), 1);
        assert_eq!(seq.pi[2].rank(), 0);
    }

    #[test]
    fn zero_euler_sequences_split() {
        for name in ["phi2", "phi3"] {
            let g = builtin(name).unwrap();
            for v in [0i64, 1, 2, 3] {
                let p = pv(&g, v);
                let seq = g.long_exact_sequence(&p).unwrap();
                for m in &seq.eub {
                    assert!(m.is_zero(), "{name}: nonzero connecting map");
                }
                // splitting: dim IH^i(X) = dim IH^i(B) + dim H^{i-1}(G)
                for i in 0..seq.total.len() {
                    let prev = if i == 0 { 0 } else { seq.gysin.dim(i - 1) };
                    assert_eq!(seq.total.dim(i), seq.base.dim(i) + prev);
                }
            }
        }
    }

    #[test]
    fn short_exact_sequence_bookkeeping() {
        for name in crate::models::BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            for v in [-1i64, 0, 1, 2, 3] {
                let report = g.short_exact_check(&pv(&g, v)).unwrap();
                assert!(report.ok, "{name} at p(v)={v}");
            }
        }
    }

    #[test]
    fn lemma_g_holds_above_the_euler_perversity() {
        for name in ["phi1", "phi1_scaled", "ext_gamma"] {
            let g = builtin(name).unwrap();
            for v in [2i64, 3, 4] {
                let report = g.lemma_g(&pv(&g, v)).unwrap();
                assert!(report.applicable && report.passed(), "{name} at p(v)={v}: {report}");
            }
            let gate = g.lemma_g(&pv(&g, 1)).unwrap();
            assert!(!gate.applicable);
            assert_eq!(gate.to_string(), "not applicable: p \u{2271} e");
        }
    }

    #[test]
    fn pair_complex_structural_laws_on_builtins() {
        for name in crate::models::BUILTIN_NAMES {
            let g = builtin(name).unwrap();
            let x = g.characteristic_perversity().clone();
            let e = g.euler_perversity().clone();
            let zero = Perversity::zero(g.base().poset().clone());
            for p in [&zero, &x, &e] {
                let io = g.iomega(p).unwrap();
                assert!(g.iomega_d_squared_zero(&io), "{name}: D^2 != 0");
            }
            for (pa, pb) in [(&zero, &zero), (&zero, &e), (&x, &e), (&e, &e)] {
                let io_a = g.iomega(pa).unwrap();
                let io_b = g.iomega(pb).unwrap();
                let io_sum = g.iomega(&pa.add(pb).unwrap()).unwrap();
                assert!(g.iomega_leibniz(&io_a, &io_b), "{name}: Leibniz fails");
                assert!(g.iomega_wedge_in_sum(&io_a, &io_b, &io_sum), "{name}: wedge escapes");
                let oa = extract_omega(g.base(), pa).unwrap();
                let ob = extract_omega(g.base(), pb).unwrap();
                assert!(g.rho_is_algebra_map(&oa, &ob), "{name}: rho not multiplicative");
            }
        }
    }

    #[test]
    fn ih_total_cup_products() {
        // for the untwisted product model the fiber class squares to zero and
        // multiplies the base class
        let phi3 = builtin("phi3").unwrap();
        let p = pv(&phi3, 2);
        let t = phi3.ih_total(&p).unwrap();
        let t2 = phi3.ih_total(&pv(&phi3, 4)).unwrap();
        let one = t.class_of(0, &phi3.rho(&{
            let mut v = vec_zero(phi3.base().dim());
            v[phi3.base().unit_index()] = qi(1);
            v
        })).unwrap();
        let fiber = Class { degree: 1, coords: vec![qi(1)] };
        let prod = phi3.ih_total_cup(&t, &one, &t, &fiber, &t2).unwrap();
        assert!(!prod.is_zero());
        let sq = phi3.ih_total_cup(&t, &fiber, &t, &fiber, &t2).unwrap();
        assert!(sq.is_zero(), "odd class must square to zero");
    }

    #[test]
    fn gysin_model_construction_rejects_bad_euler_data() {
        let phi1 = builtin("phi1").unwrap();
        let base = phi1.base().clone();
        // degree-0 cochain as epsilon
        let err = GysinModel::new(base.clone(), base.unit_cochain());
        match err {
            Err(Error::Invalid(report)) => assert!(report.contains("epsilon_degree")),
            other => panic!("expected invalid, got {other:?}"),
        }
    }
}
