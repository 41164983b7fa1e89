//! Cohomology of embedded cochain complexes over the rationals.
//!
//! A [`GradedSubspace`] lists, per degree, a basis of a subspace of some
//! ambient coordinate space. Given a differential (a per-degree linear map on
//! ambient vectors) the engine checks that the subspace is preserved, then
//! produces a [`CohomologyTable`]: per-degree dimensions, representative
//! cocycles, and the reduction map expressing any cocycle in the chosen
//! representatives modulo coboundaries. Everything is exact; pivoting is by
//! least index, so tables are deterministic.

use crate::error::{Error, Result};
use crate::linalg::{complete_basis, vec_is_zero, vec_zero, Q, QMatrix, QVec};
use num::traits::Zero;

/// Per-degree bases of a graded subspace of a fixed ambient coordinate space.
#[derive(Clone, Debug)]
pub struct GradedSubspace {
    pub ambient_dim: usize,
    /// bases[i] is ambient_dim x k_i; columns span the degree-i piece.
    pub bases: Vec<QMatrix>,
}

impl GradedSubspace {
    pub fn new(ambient_dim: usize, bases: Vec<QMatrix>) -> Self {
        for b in &bases {
            assert_eq!(b.rows(), ambient_dim);
        }
        GradedSubspace { ambient_dim, bases }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.bases.get(degree).map_or(0, QMatrix::cols)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(QMatrix::cols).collect()
    }

    pub fn basis(&self, degree: usize) -> &QMatrix {
        &self.bases[degree]
    }

    /// Coordinates of an ambient vector in the degree-i basis, if it lies in
    /// the subspace.
    pub fn coords(&self, degree: usize, v: &[Q]) -> Option<QVec> {
        if degree >= self.len() {
            return if vec_is_zero(v) { Some(Vec::new()) } else { None };
        }
        self.bases[degree].solve(v)
    }

    pub fn contains(&self, degree: usize, v: &[Q]) -> bool {
        self.coords(degree, v).is_some()
    }
}

/// One cohomology class: coordinates over the chosen representatives of its
/// degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Class {
    pub degree: usize,
    pub coords: QVec,
}

impl Class {
    pub fn zero(degree: usize, dim: usize) -> Self {
        Class { degree, coords: vec_zero(dim) }
    }

    pub fn is_zero(&self) -> bool {
        vec_is_zero(&self.coords)
    }
}

#[derive(Clone, Debug)]
struct DegreeData {
    /// Representative cocycles, ambient coordinates.
    reps: Vec<QVec>,
    /// Basis of the coboundaries, ambient coordinates.
    boundaries: Vec<QVec>,
}

/// Cohomology of one embedded complex.
#[derive(Clone, Debug)]
pub struct CohomologyTable {
    ambient_dim: usize,
    degrees: Vec<DegreeData>,
}

impl CohomologyTable {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of graded slots (the complex length).
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn dim(&self, degree: usize) -> usize {
        self.degrees.get(degree).map_or(0, |d| d.reps.len())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.reps.len()).collect()
    }

    pub fn representatives(&self, degree: usize) -> &[QVec] {
        self.degrees.get(degree).map(|d| d.reps.as_slice()).unwrap_or(&[])
    }

    /// Ambient cocycle representing a class.
    pub fn representative(&self, class: &Class) -> QVec {
        let mut out = vec_zero(self.ambient_dim);
        for (c, rep) in class.coords.iter().zip(self.representatives(class.degree)) {
            if !c.is_zero() {
                for (o, r) in out.iter_mut().zip(rep) {
                    *o += c * r;
                }
            }
        }
        out
    }

    /// Coordinates of the class of `v` over the representatives; None when
    /// `v` is not a cocycle of the underlying subcomplex.
    pub fn reduce(&self, degree: usize, v: &[Q]) -> Option<QVec> {
        if degree >= self.len() {
            return if vec_is_zero(v) { Some(Vec::new()) } else { None };
        }
        let d = &self.degrees[degree];
        let cols: Vec<QVec> = d.boundaries.iter().chain(d.reps.iter()).cloned().collect();
        let span = QMatrix::from_cols(self.ambient_dim, &cols);
        let sol = span.solve(v)?;
        Some(sol[d.boundaries.len()..].to_vec())
    }

    pub fn class_of(&self, degree: usize, v: &[Q]) -> Option<Class> {
        self.reduce(degree, v).map(|coords| Class { degree, coords })
    }

    /// Is the cocycle `v` a coboundary?
    pub fn is_exact(&self, degree: usize, v: &[Q]) -> bool {
        matches!(self.reduce(degree, v), Some(c) if vec_is_zero(&c))
    }
}

/// Compute the cohomology of a graded subspace under the given differential.
/// `apply_d(i, v)` must send an ambient degree-i vector to its ambient
/// differential; the subspace must be closed under it.
pub fn cohomology_with<F>(space: &GradedSubspace, mut apply_d: F) -> Result<CohomologyTable>
where
    F: FnMut(usize, &[Q]) -> QVec,
{
    let len = space.len();
    // images of the basis columns, per degree
    let mut d_images: Vec<QMatrix> = Vec::with_capacity(len);
    for i in 0..len {
        let cols: Vec<QVec> =
            (0..space.dim(i)).map(|j| apply_d(i, &space.basis(i).col(j))).collect();
        d_images.push(QMatrix::from_cols(space.ambient_dim, &cols));
    }
    // invariance: d of degree i must land in the degree i+1 piece
    for i in 0..len {
        if i + 1 < len {
            for j in 0..d_images[i].cols() {
                if !space.contains(i + 1, &d_images[i].col(j)) {
                    return Err(Error::NonInvariantSubspace { degree: i });
                }
            }
        } else if !d_images[i].is_zero() {
            return Err(Error::NonInvariantSubspace { degree: i });
        }
    }

    let mut degrees = Vec::with_capacity(len);
    for i in 0..len {
        // cocycles: kernel of d restricted to the degree-i basis
        let kern = d_images[i].kernel();
        let cocycles: Vec<QVec> =
            (0..kern.cols()).map(|j| space.basis(i).mul_vec(&kern.col(j))).collect();
        // coboundaries: image of d from degree i-1
        let boundaries: Vec<QVec> = if i == 0 {
            Vec::new()
        } else {
            d_images[i - 1].image_basis()
        };
        let bmat = QMatrix::from_cols(space.ambient_dim, &boundaries);
        let chosen = complete_basis(&bmat, &cocycles);
        let reps: Vec<QVec> = chosen.into_iter().map(|j| cocycles[j].clone()).collect();

        // rank accounting: boundaries plus representatives are independent and
        // span exactly the cocycles
        let all: Vec<QVec> = boundaries.iter().chain(reps.iter()).cloned().collect();
        let span = QMatrix::from_cols(space.ambient_dim, &all);
        let rank = span.rank();
        let cocycle_rank = QMatrix::from_cols(space.ambient_dim, &cocycles).rank();
        if rank != boundaries.len() + reps.len() || rank != cocycle_rank {
            return Err(Error::Internal(format!(
                "cohomology basis accounting failed in degree {i}"
            )));
        }
        degrees.push(DegreeData { reps, boundaries });
    }
    Ok(CohomologyTable { ambient_dim: space.ambient_dim, degrees })
}

/// Differential matrices in subspace coordinates: M_i maps degree-i
/// coordinates to degree-(i+1) coordinates. The top map is the zero matrix.
pub fn induced_diff_matrices<F>(space: &GradedSubspace, mut apply_d: F) -> Result<Vec<QMatrix>>
where
    F: FnMut(usize, &[Q]) -> QVec,
{
    let len = space.len();
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let target_dim = if i + 1 < len { space.dim(i + 1) } else { 0 };
        let mut cols = Vec::with_capacity(space.dim(i));
        for j in 0..space.dim(i) {
            let img = apply_d(i, &space.basis(i).col(j));
            if i + 1 < len {
                let c = space
                    .coords(i + 1, &img)
                    .ok_or(Error::NonInvariantSubspace { degree: i })?;
                cols.push(c);
            } else if !vec_is_zero(&img) {
                return Err(Error::NonInvariantSubspace { degree: i });
            } else {
                cols.push(Vec::new());
            }
        }
        out.push(QMatrix::from_cols(target_dim, &cols));
    }
    Ok(out)
}

/// Cup product of classes. `wedge(da, a, db, b)` multiplies ambient vectors of
/// the stated degrees; the result is reduced in `target` at the summed
/// degree. Errors when the inputs do not belong to their tables or the
/// product fails to be a cocycle of the target complex.
pub fn cup_product<W>(
    left_table: &CohomologyTable,
    left: &Class,
    right_table: &CohomologyTable,
    right: &Class,
    target: &CohomologyTable,
    wedge: W,
) -> Result<Class>
where
    W: FnOnce(usize, &[Q], usize, &[Q]) -> QVec,
{
    if left.coords.len() != left_table.dim(left.degree) {
        return Err(Error::ClassBookkeeping(format!(
            "left class has {} coordinates in a table of dimension {}",
            left.coords.len(),
            left_table.dim(left.degree)
        )));
    }
    if right.coords.len() != right_table.dim(right.degree) {
        return Err(Error::ClassBookkeeping(format!(
            "right class has {} coordinates in a table of dimension {}",
            right.coords.len(),
            right_table.dim(right.degree)
        )));
    }
    let a = left_table.representative(left);
    let b = right_table.representative(right);
    let product = wedge(left.degree, &a, right.degree, &b);
    let degree = left.degree + right.degree;
    target.class_of(degree, &product).ok_or_else(|| {
        Error::ClassBookkeeping(format!(
            "product of degrees {} and {} is not a cocycle of the target table",
            left.degree, right.degree
        ))
    })
}
