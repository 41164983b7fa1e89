//! Dense exact linear algebra over the rationals.
//!
//! Matrices carry arbitrary-precision rational entries. Rank, kernel, image
//! and solving all go through a single fraction-free (Bareiss) elimination on
//! denominator-cleared integer rows, with least-index pivoting so that every
//! result is deterministic for a fixed input.

use num::integer::lcm;
use num::traits::{One, Signed, Zero};
use num::{BigInt, BigRational};

/// Exact rational scalar.
pub type Q = BigRational;
/// Coordinate vector over `Q`.
pub type QVec = Vec<Q>;

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn vec_zero(len: usize) -> QVec {
    vec![Q::zero(); len]
}

pub fn vec_is_zero(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn vec_add(a: &[Q], b: &[Q]) -> QVec {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Q], b: &[Q]) -> QVec {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(c: &Q, v: &[Q]) -> QVec {
    v.iter().map(|x| c * x).collect()
}

pub fn vec_neg(v: &[Q]) -> QVec {
    v.iter().map(|x| -x.clone()).collect()
}

/// Dense row-major rational matrix. Zero-row and zero-column shapes are legal.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl std::fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<QVec>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose columns are the given vectors; `ambient` fixes the row
    /// count so an empty list still has a well-defined shape.
    pub fn from_cols(ambient: usize, cols: &[QVec]) -> Self {
        let mut m = Self::zeros(ambient, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), ambient);
            for i in 0..ambient {
                m.set(i, j, col[i].clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<QVec> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j) + a * b;
                        out.set(i, j, cur);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> QVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        let mut out = vec_zero(self.rows);
        for i in 0..self.rows {
            let mut acc = Q::zero();
            for j in 0..self.cols {
                let a = self.get(i, j);
                if !a.is_zero() && !v[j].is_zero() {
                    acc += a * &v[j];
                }
            }
            out[i] = acc;
        }
        out
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows);
        let mut m = QMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        m
    }

    pub fn rank(&self) -> usize {
        echelon(self, self.cols).pivots.len()
    }

    /// Basis of the null space, as columns. Deterministic: free variables are
    /// taken in increasing column order.
    pub fn kernel(&self) -> QMatrix {
        let ech = echelon(self, self.cols);
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut cols = Vec::with_capacity(free.len());
        for &f in &free {
            let mut x = vec_zero(self.cols);
            x[f] = Q::one();
            back_substitute_homogeneous(&ech, &mut x);
            cols.push(x);
        }
        QMatrix::from_cols(self.cols, &cols)
    }

    /// One solution of `self * x = b`, if the system is consistent.
    pub fn solve(&self, b: &[Q]) -> Option<QVec> {
        self.solve_with_kernel(b).map(|(p, _)| p)
    }

    /// Particular solution together with a kernel basis, if consistent.
    pub fn solve_with_kernel(&self, b: &[Q]) -> Option<(QVec, QMatrix)> {
        assert_eq!(b.len(), self.rows);
        let aug = self.hstack(&QMatrix::from_cols(self.rows, &[b.to_vec()]));
        let ech = echelon(&aug, self.cols);
        // rows without a pivot must have zero right-hand side
        let piv_rows = ech.pivots.len();
        for i in piv_rows..self.rows {
            if !ech.mat[i][self.cols].is_zero() {
                return None;
            }
        }
        let mut x = vec_zero(self.cols);
        back_substitute_particular(&ech, self.cols, &mut x);
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut kcols = Vec::with_capacity(free.len());
        for &f in &free {
            let mut k = vec_zero(self.cols);
            k[f] = Q::one();
            back_substitute_homogeneous_restricted(&ech, self.cols, &mut k);
            kcols.push(k);
        }
        Some((x, QMatrix::from_cols(self.cols, &kcols)))
    }

    /// Solve `self * X = B` columnwise.
    pub fn solve_matrix(&self, b: &QMatrix) -> Option<QMatrix> {
        assert_eq!(b.rows(), self.rows);
        let mut cols = Vec::with_capacity(b.cols());
        for j in 0..b.cols() {
            cols.push(self.solve(&b.col(j))?);
        }
        Some(QMatrix::from_cols(self.cols, &cols))
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if self.rows != self.cols {
            return None;
        }
        if self.rank() != self.rows {
            return None;
        }
        self.solve_matrix(&QMatrix::identity(self.rows))
    }

    /// Least-index columns forming a basis of the column space.
    pub fn pivot_columns(&self) -> Vec<usize> {
        echelon(self, self.cols).pivots.iter().map(|&(_, c)| c).collect()
    }

    /// Basis of the column space: the original pivot columns.
    pub fn image_basis(&self) -> Vec<QVec> {
        self.pivot_columns().into_iter().map(|j| self.col(j)).collect()
    }
}

/// Is `v` in the span of the columns of `basis`?
pub fn in_span(basis: &QMatrix, v: &[Q]) -> bool {
    basis.solve(v).is_some()
}

/// Greedily extend `start` (columns) by candidate columns that raise the rank,
/// scanning candidates in order. Returns the indices of chosen candidates.
pub fn complete_basis(start: &QMatrix, candidates: &[QVec]) -> Vec<usize> {
    let mut current = start.clone();
    let mut rank = current.rank();
    let mut chosen = Vec::new();
    for (idx, cand) in candidates.iter().enumerate() {
        let widened = current.hstack(&QMatrix::from_cols(current.rows(), &[cand.clone()]));
        let r = widened.rank();
        if r > rank {
            rank = r;
            current = widened;
            chosen.push(idx);
        }
    }
    chosen
}

struct Echelon {
    /// Fraction-free row echelon form over `BigInt`, rows scaled to integers.
    mat: Vec<Vec<BigInt>>,
    /// (row, col) of each pivot, in order.
    pivots: Vec<(usize, usize)>,
}

/// Fraction-free elimination. Pivot search is restricted to the first
/// `pivot_cols` columns so augmented systems keep their right-hand side
/// passive.
fn echelon(m: &QMatrix, pivot_cols: usize) -> Echelon {
    let rows = m.rows();
    let cols = m.cols();
    // clear denominators row by row; scaling rows preserves rank, kernel and
    // solvability of the augmented system
    let mut mat: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| {
            let mut denom = BigInt::one();
            for j in 0..cols {
                denom = lcm(denom, m.get(i, j).denom().clone());
            }
            (0..cols)
                .map(|j| {
                    let x = m.get(i, j);
                    x.numer() * (&denom / x.denom())
                })
                .collect()
        })
        .collect();

    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0usize;
    for c in 0..pivot_cols.min(cols) {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, pr);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let t = (&mat[i][j] * &mat[r][c] - &mat[i][c] * &mat[r][j]) / &prev;
                mat[i][j] = t;
            }
            mat[i][c] = BigInt::zero();
        }
        prev = mat[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    Echelon { mat, pivots }
}

fn row_dot_tail(row: &[BigInt], x: &[Q], from: usize, to: usize) -> Q {
    let mut acc = Q::zero();
    for j in from..to {
        if !row[j].is_zero() && !x[j].is_zero() {
            acc += Q::from_integer(row[j].clone()) * &x[j];
        }
    }
    acc
}

/// Solve the homogeneous system for the pivot variables given fixed free
/// variables already written into `x`.
fn back_substitute_homogeneous(ech: &Echelon, x: &mut [Q]) {
    let cols = x.len();
    for &(r, c) in ech.pivots.iter().rev() {
        let s = row_dot_tail(&ech.mat[r], x, c + 1, cols);
        x[c] = -s / Q::from_integer(ech.mat[r][c].clone());
    }
}

/// Same as above, but the matrix is augmented and only the first `a_cols`
/// columns are variables.
fn back_substitute_homogeneous_restricted(ech: &Echelon, a_cols: usize, x: &mut [Q]) {
    for &(r, c) in ech.pivots.iter().rev() {
        let s = row_dot_tail(&ech.mat[r], x, c + 1, a_cols);
        x[c] = -s / Q::from_integer(ech.mat[r][c].clone());
    }
}

/// Particular solution of the augmented system with free variables zero.
fn back_substitute_particular(ech: &Echelon, a_cols: usize, x: &mut [Q]) {
    for &(r, c) in ech.pivots.iter().rev() {
        let s = row_dot_tail(&ech.mat[r], x, c + 1, a_cols);
        let rhs = Q::from_integer(ech.mat[r][a_cols].clone());
        x[c] = (rhs - s) / Q::from_integer(ech.mat[r][c].clone());
    }
}

/// Sign helper: (-1)^n.
pub fn sign_pow(n: usize) -> Q {
    if n % 2 == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Render a rational compactly; integers print without a denominator.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse "n" or "n/d" with optional sign.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Q::from_integer(n))
    }
}

#[allow(unused)]
fn abs_q(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<i64>>) -> QMatrix {
        QMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(qi).collect()).collect())
    }

    #[test]
    fn rank_and_kernel_of_simple_matrix() {
        let a = m(vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel();
        assert_eq!(k.cols(), 1);
        let v = k.col(0);
        assert!(vec_is_zero(&a.mul_vec(&v)));
    }

    #[test]
    fn kernel_of_empty_constraint_matrix_is_identity() {
        let a = QMatrix::zeros(0, 3);
        let k = a.kernel();
        assert_eq!(k.cols(), 3);
        assert_eq!(k, QMatrix::identity(3));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(vec![vec![1, 1], vec![1, -1]]);
        let x = a.solve(&[qi(3), qi(1)]).unwrap();
        assert_eq!(x, vec![qi(2), qi(1)]);

        let b = m(vec![vec![1, 1], vec![2, 2]]);
        assert!(b.solve(&[qi(1), qi(3)]).is_none());
        assert!(b.solve(&[qi(1), qi(2)]).is_some());
    }

    #[test]
    fn solve_with_rational_entries() {
        let a = QMatrix::from_rows(vec![vec![q(1, 2), q(1, 3)], vec![q(1, 4), q(-2, 3)]]);
        let b = vec![q(5, 6), q(-5, 12)];
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(vec![vec![2, 1], vec![1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), QMatrix::identity(2));
        assert_eq!(inv.mul(&a), QMatrix::identity(2));
        let s = m(vec![vec![1, 2], vec![2, 4]]);
        assert!(s.inverse().is_none());
    }

    #[test]
    fn image_basis_uses_least_index_pivots() {
        let a = m(vec![vec![0, 1, 1], vec![0, 2, 2]]);
        assert_eq!(a.pivot_columns(), vec![1]);
        let img = a.image_basis();
        assert_eq!(img, vec![vec![qi(1), qi(2)]]);
    }

    #[test]
    fn complete_basis_extends_greedily() {
        let start = QMatrix::from_cols(2, &[vec![qi(1), qi(0)]]);
        let cands = vec![vec![qi(2), qi(0)], vec![qi(1), qi(1)], vec![qi(0), qi(3)]];
        assert_eq!(complete_basis(&start, &cands), vec![1]);
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_q("3").unwrap(), qi(3));
        assert_eq!(parse_q("-4/6").unwrap(), q(-2, 3));
        assert_eq!(format_q(&q(-2, 3)), "-2/3");
        assert_eq!(format_q(&qi(7)), "7");
        assert!(parse_q("1/0").is_none());
        assert!(parse_q("x").is_none());
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_killed(rows in 1usize..5, cols in 1usize..5,
                                     seed in prop::collection::vec(-5i64..5, 25)) {
            let a = QMatrix::from_rows(
                (0..rows).map(|i| (0..cols).map(|j| qi(seed[i * 5 + j])).collect()).collect());
            let k = a.kernel();
            for j in 0..k.cols() {
                prop_assert!(vec_is_zero(&a.mul_vec(&k.col(j))));
            }
            prop_assert_eq!(a.rank() + k.cols(), cols);
        }

        #[test]
        fn solve_solutions_check_out(cols in 1usize..5,
                                     seed in prop::collection::vec(-4i64..4, 25),
                                     xs in prop::collection::vec(-4i64..4, 5)) {
            let rows = 4usize;
            let a = QMatrix::from_rows(
                (0..rows).map(|i| (0..cols).map(|j| qi(seed[i * 5 + j])).collect()).collect());
            // consistent by construction
            let x0: QVec = (0..cols).map(|j| qi(xs[j])).collect();
            let b = a.mul_vec(&x0);
            let (p, k) = a.solve_with_kernel(&b).unwrap();
            prop_assert_eq!(a.mul_vec(&p), b.clone());
            for j in 0..k.cols() {
                prop_assert!(vec_is_zero(&a.mul_vec(&k.col(j))));
            }
        }
    }
}
