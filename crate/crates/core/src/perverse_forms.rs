//! Perverse subcomplexes of the ambient algebra and their cohomology.
//!
//! For a perversity p, the subcomplex collects the cochains whose perverse
//! degree and whose differential's perverse degree are both bounded by p at
//! every singular stratum. Extraction is pure linear algebra: the first bound
//! carves out a coordinate subspace, the second is a kernel condition inside
//! it.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::cdga::PerverseModel;
use crate::cohomology::{cohomology_with, Class, CohomologyTable, GradedSubspace};
use crate::error::{Error, Result};
use crate::linalg::{vec_zero, Q, QMatrix};
use crate::strata::Perversity;

/// The subcomplex of cochains bounded by one perversity, embedded in ambient
/// model coordinates.
#[derive(Clone, Debug)]
pub struct PerverseSubcomplex {
    model: Arc<PerverseModel>,
    perversity: Perversity,
    space: GradedSubspace,
}

impl PerverseSubcomplex {
    pub fn model(&self) -> &Arc<PerverseModel> {
        &self.model
    }

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

    pub fn contains(&self, degree: usize, v: &[Q]) -> bool {
        self.space.contains(degree, v)
    }

    pub fn cohomology(&self) -> Result<CohomologyTable> {
        let model = self.model.clone();
        cohomology_with(&self.space, move |_, v| model.apply_diff(v))
    }
}

/// Largest subspace on which both perverse bounds hold: coordinates allowed
/// by p whose differential stays inside the allowed coordinates.
pub fn extract_omega(model: &Arc<PerverseModel>, p: &Perversity) -> Result<PerverseSubcomplex> {
    if !p.bound_to(model.poset()) {
        return Err(Error::PosetMismatch);
    }
    let allowed = model.allowed_indices(p);
    let n = model.dim();
    let top = model.top_degree();
    let mut bases = Vec::with_capacity(top + 1);
    for degree in 0..=top {
        let vars: Vec<usize> =
            model.degree_indices(degree).into_iter().filter(|&i| allowed[i]).collect();
        let bad_targets: Vec<usize> =
            model.degree_indices(degree + 1).into_iter().filter(|&i| !allowed[i]).collect();
        // rows: forbidden coordinates of d(alpha) must vanish
        let mut constraint = QMatrix::zeros(bad_targets.len(), vars.len());
        for (r, &bad) in bad_targets.iter().enumerate() {
            for (c, &var) in vars.iter().enumerate() {
                constraint.set(r, c, model.diff_matrix().get(bad, var).clone());
            }
        }
        let kern = constraint.kernel();
        let mut cols = Vec::with_capacity(kern.cols());
        for j in 0..kern.cols() {
            let k = kern.col(j);
            let mut ambient = vec_zero(n);
            for (c, &var) in vars.iter().enumerate() {
                ambient[var] = k[c].clone();
            }
            cols.push(ambient);
        }
        bases.push(QMatrix::from_cols(n, &cols));
    }
    Ok(PerverseSubcomplex {
        model: model.clone(),
        perversity: p.clone(),
        space: GradedSubspace::new(n, bases),
    })
}

/// Subspace inclusion for p <= q, expressed per degree as a matrix from the
/// p-basis to the q-basis.
#[derive(Clone, Debug)]
pub struct InclusionMap {
    pub matrices: Vec<QMatrix>,
}

pub fn inclusion_map(
    sub_p: &PerverseSubcomplex,
    sub_q: &PerverseSubcomplex,
) -> Result<InclusionMap> {
    if sub_p.model != sub_q.model {
        return Err(Error::PosetMismatch);
    }
    if !sub_p.perversity.leq(&sub_q.perversity)? {
        return Err(Error::NotComparable(format!(
            "{} is not bounded by {}",
            sub_p.perversity, sub_q.perversity
        )));
    }
    let mut matrices = Vec::with_capacity(sub_p.space.len());
    for degree in 0..sub_p.space.len() {
        let mut cols = Vec::with_capacity(sub_p.dim(degree));
        for j in 0..sub_p.dim(degree) {
            let v = sub_p.space.basis(degree).col(j);
            let c = sub_q.space.coords(degree, &v).ok_or_else(|| {
                Error::Internal("monotonicity failed: smaller subcomplex not included".into())
            })?;
            cols.push(c);
        }
        matrices.push(QMatrix::from_cols(sub_q.dim(degree), &cols));
    }
    Ok(InclusionMap { matrices })
}

/// Intersection cohomology of the orbit space at one perversity.
pub fn ih_base(model: &Arc<PerverseModel>, p: &Perversity) -> Result<CohomologyTable> {
    extract_omega(model, p)?.cohomology()
}

/// Cup product on base cohomology tables. Classes over perversities p and p'
/// multiply into the table at p + p'.
pub fn ih_cup(
    model: &PerverseModel,
    left_table: &CohomologyTable,
    left: &Class,
    right_table: &CohomologyTable,
    right: &Class,
    target: &CohomologyTable,
) -> Result<Class> {
    crate::cohomology::cup_product(left_table, left, right_table, right, target, |_, a, _, b| {
        model.wedge_coords(a, b)
    })
}

/// Concurrency-safe memo table keyed by a perversity's value vector. Writes
/// are idempotent: racing inserts of the same key keep the first value.
pub struct Memo<T> {
    inner: RwLock<HashMap<Vec<i64>, Arc<T>>>,
}

impl<T> Default for Memo<T> {
    fn default() -> Self {
        Memo { inner: RwLock::new(HashMap::new()) }
    }
}

impl<T> Memo<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_try_insert<F>(&self, key: &[i64], build: F) -> Result<Arc<T>>
    where
        F: FnOnce() -> Result<T>,
    {
        if let Some(hit) = self.inner.read().expect("memo poisoned").get(key) {
            return Ok(hit.clone());
        }
        let value = Arc::new(build()?);
        let mut guard = self.inner.write().expect("memo poisoned");
        Ok(guard.entry(key.to_vec()).or_insert(value).clone())
    }
}

/// Is the zero vector the only cochain of every degree? Utility for tests.
pub fn subcomplex_is_zero(sub: &PerverseSubcomplex) -> bool {
    sub.dims().iter().all(|&d| d == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::BasisDecl;
    use crate::linalg::qi;
    use crate::strata::{Nature, StrataPoset, StratumId, StratumInfo};
    use num::traits::Zero;
    use std::collections::BTreeMap;

    fn c_sphere2() -> Arc<PerverseModel> {
        let poset = StrataPoset::new(
            vec![StratumInfo::new(StratumId::new("v"), Nature::FixedPerverse).with_codim(4)],
            &[],
        )
        .unwrap();
        Arc::new(
            PerverseModel::new(
                poset,
                vec![BasisDecl::new("u0", 0).pdeg("v", 0), BasisDecl::new("u2", 2).pdeg("v", 2)],
                &[],
                &[("u0", "u0", "u0", qi(1)), ("u0", "u2", "u2", qi(1))],
                true,
            )
            .unwrap(),
        )
    }

    fn pv(model: &Arc<PerverseModel>, v: i64) -> Perversity {
        let map: BTreeMap<StratumId, i64> = [(StratumId::new("v"), v)].into();
        Perversity::from_values(model.poset().clone(), &map).unwrap()
    }

    #[test]
    fn extraction_cuts_by_perverse_degree() {
        let m = c_sphere2();
        let sub0 = extract_omega(&m, &pv(&m, 0)).unwrap();
        assert_eq!(sub0.dims(), vec![1, 0, 0]);
        assert!(sub0.contains(0, &[qi(1), qi(0)]));
        assert!(!sub0.contains(2, &[qi(0), qi(1)]));

        let sub2 = extract_omega(&m, &pv(&m, 2)).unwrap();
        assert_eq!(sub2.dims(), vec![1, 0, 1]);

        let huge = extract_omega(&m, &pv(&m, 100)).unwrap();
        assert_eq!(huge.dims(), vec![1, 0, 1]);
        assert_eq!(huge.dims().iter().sum::<usize>(), m.dim());
    }

    #[test]
    fn negative_perversity_excludes_everything() {
        let m = c_sphere2();
        let sub = extract_omega(&m, &pv(&m, -1)).unwrap();
        assert!(subcomplex_is_zero(&sub));
    }

    #[test]
    fn ih_base_dimensions() {
        let m = c_sphere2();
        assert_eq!(ih_base(&m, &pv(&m, 0)).unwrap().dims(), vec![1, 0, 0]);
        assert_eq!(ih_base(&m, &pv(&m, 1)).unwrap().dims(), vec![1, 0, 0]);
        assert_eq!(ih_base(&m, &pv(&m, 2)).unwrap().dims(), vec![1, 0, 1]);
    }

    #[test]
    fn inclusions_compose() {
        let m = c_sphere2();
        let s0 = extract_omega(&m, &pv(&m, 0)).unwrap();
        let s1 = extract_omega(&m, &pv(&m, 1)).unwrap();
        let s2 = extract_omega(&m, &pv(&m, 2)).unwrap();

        let id = inclusion_map(&s0, &s0).unwrap();
        for (degree, mat) in id.matrices.iter().enumerate() {
            assert_eq!(*mat, QMatrix::identity(s0.dim(degree)));
        }

        let i01 = inclusion_map(&s0, &s1).unwrap();
        let i12 = inclusion_map(&s1, &s2).unwrap();
        let i02 = inclusion_map(&s0, &s2).unwrap();
        for degree in 0..s0.space().len() {
            assert_eq!(i12.matrices[degree].mul(&i01.matrices[degree]), i02.matrices[degree]);
        }

        assert!(inclusion_map(&s2, &s0).is_err());
    }

    #[test]
    fn monotone_dimensions_in_the_perversity() {
        let m = c_sphere2();
        for a in -1..3i64 {
            let sa = extract_omega(&m, &pv(&m, a)).unwrap();
            let sb = extract_omega(&m, &pv(&m, a + 1)).unwrap();
            for degree in 0..sa.space().len() {
                assert!(sa.dim(degree) <= sb.dim(degree));
            }
        }
    }

    #[test]
    fn wedge_lands_in_the_summed_perversity() {
        let m = c_sphere2();
        for a in 0..3i64 {
            for b in 0..3i64 {
                let sa = extract_omega(&m, &pv(&m, a)).unwrap();
                let sb = extract_omega(&m, &pv(&m, b)).unwrap();
                let target = extract_omega(&m, &pv(&m, a + b)).unwrap();
                for da in 0..sa.space().len() {
                    for db in 0..sb.space().len() {
                        for i in 0..sa.dim(da) {
                            for j in 0..sb.dim(db) {
                                let prod = m.wedge_coords(
                                    &sa.space().basis(da).col(i),
                                    &sb.space().basis(db).col(j),
                                );
                                if da + db < target.space().len() {
                                    assert!(target.contains(da + db, &prod));
                                } else {
                                    assert!(prod.iter().all(|c| c.is_zero()));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cup_product_is_unital_and_kills_u2_squared() {
        let m = c_sphere2();
        let t0 = ih_base(&m, &pv(&m, 0)).unwrap();
        let t2 = ih_base(&m, &pv(&m, 2)).unwrap();
        // [1] * [u2] = [u2] (0-bar + 2-bar = 2-bar)
        let one = t0.class_of(0, &[qi(1), qi(0)]).unwrap();
        let u2 = t2.class_of(2, &[qi(0), qi(1)]).unwrap();
        let prod = ih_cup(&m, &t0, &one, &t2, &u2, &t2).unwrap();
        assert_eq!(prod, u2);
        // [u2] * [u2] lands in degree 4 which is empty
        let t4 = ih_base(&m, &pv(&m, 4)).unwrap();
        let sq = ih_cup(&m, &t2, &u2, &t2, &u2, &t4).unwrap();
        assert!(sq.is_zero());
    }

    #[test]
    fn memo_returns_shared_values() {
        let memo: Memo<usize> = Memo::new();
        let a = memo.get_or_try_insert(&[1, 2], || Ok(7)).unwrap();
        let b = memo.get_or_try_insert(&[1, 2], || Ok(9)).unwrap();
        assert_eq!(*a, 7);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
