//! Verification support: a deterministic generator of random valid models and
//! an independent dense-elimination oracle for cohomology dimensions.
//!
//! The oracle deliberately shares no code with [`crate::linalg`]: it runs a
//! plain Gauss-Jordan reduction over rationals with normalized pivots, so the
//! engine's fraction-free elimination is cross-checked by a genuinely
//! different route.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cdga::{BasisDecl, Cochain, PerverseModel};
use crate::cohomology::GradedSubspace;
use crate::error::Result;
use crate::gysin::GysinModel;
use crate::linalg::{q, qi, vec_zero, Q, QVec};
use crate::perverse_forms::extract_omega;
use crate::strata::{Nature, Perversity, StrataPoset, StratumId, StratumInfo};
use num::traits::Zero;

/// SplitMix64: tiny, deterministic, platform-independent.
#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }
}

/// Perversity from raw values in stratum order.
pub fn perversity_from(poset: &Arc<StrataPoset>, values: &[i64]) -> Perversity {
    let map: BTreeMap<StratumId, i64> = poset
        .strata()
        .iter()
        .zip(values)
        .map(|(s, v)| (s.id.clone(), *v))
        .collect();
    Perversity::from_values(poset.clone(), &map).expect("values match the poset")
}

// A raw tensor-product model under construction: index 0 is the unit.
struct RawModel {
    degrees: Vec<u32>,
    pdeg: Vec<Vec<u32>>,
    diff: Vec<Vec<(usize, Q)>>,
    /// full product table
    prod: BTreeMap<(usize, usize), Vec<(usize, Q)>>,
}

impl RawModel {
    fn unit(strata: usize) -> Self {
        RawModel {
            degrees: vec![0],
            pdeg: vec![vec![0; strata]],
            diff: vec![Vec::new()],
            prod: [((0, 0), vec![(0, qi(1))])].into(),
        }
    }

    fn len(&self) -> usize {
        self.degrees.len()
    }

    /// One free generator g of the given degree with g*g = 0.
    fn single(strata: usize, degree: u32, pdeg: Vec<u32>) -> Self {
        let mut m = Self::unit(strata);
        m.degrees.push(degree);
        m.pdeg.push(pdeg);
        m.diff.push(Vec::new());
        m.prod.insert((0, 1), vec![(1, qi(1))]);
        m.prod.insert((1, 0), vec![(1, qi(1))]);
        m
    }

    /// A contractible pair d(a) = c * b with a odd; all products among the
    /// generators vanish.
    fn cone_pair(strata: usize, odd_degree: u32, pdeg_a: Vec<u32>, pdeg_b: Vec<u32>, c: Q) -> Self {
        let mut m = Self::unit(strata);
        m.degrees.push(odd_degree);
        m.pdeg.push(pdeg_a);
        m.diff.push(vec![(2, c)]);
        m.degrees.push(odd_degree + 1);
        m.pdeg.push(pdeg_b);
        m.diff.push(Vec::new());
        for g in [1usize, 2] {
            m.prod.insert((0, g), vec![(g, qi(1))]);
            m.prod.insert((g, 0), vec![(g, qi(1))]);
        }
        m
    }

    fn tensor(&self, other: &RawModel) -> RawModel {
        let nb = other.len();
        let flat = |i: usize, j: usize| i * nb + j;
        let n = self.len() * nb;
        let mut degrees = vec![0u32; n];
        let strata = self.pdeg.first().map_or(0, Vec::len);
        let mut pdeg = vec![vec![0u32; strata]; n];
        let mut diff: Vec<Vec<(usize, Q)>> = vec![Vec::new(); n];
        for i in 0..self.len() {
            for j in 0..nb {
                let idx = flat(i, j);
                degrees[idx] = self.degrees[i] + other.degrees[j];
                for s in 0..strata {
                    pdeg[idx][s] = self.pdeg[i][s] + other.pdeg[j][s];
                }
                for (t, c) in &self.diff[i] {
                    diff[idx].push((flat(*t, j), c.clone()));
                }
                let sgn = crate::linalg::sign_pow(self.degrees[i] as usize);
                for (t, c) in &other.diff[j] {
                    diff[idx].push((flat(i, *t), &sgn * c));
                }
            }
        }
        let mut prod: BTreeMap<(usize, usize), Vec<(usize, Q)>> = BTreeMap::new();
        for (&(i1, i2), ca) in &self.prod {
            for (&(j1, j2), cb) in &other.prod {
                // (x_{i1} ox y_{j1}) ^ (x_{i2} ox y_{j2}) picks up the Koszul
                // sign for moving y_{j1} past x_{i2}
                let sgn = crate::linalg::sign_pow(
                    (other.degrees[j1] as usize) * (self.degrees[i2] as usize),
                );
                let key = (flat(i1, j1), flat(i2, j2));
                let entry = prod.entry(key).or_default();
                for (k1, c1) in ca {
                    for (k2, c2) in cb {
                        let target = flat(*k1, *k2);
                        let coeff = &sgn * &(c1 * c2);
                        match entry.iter_mut().find(|(t, _)| *t == target) {
                            Some((_, v)) => *v += coeff,
                            None => entry.push((target, coeff)),
                        }
                    }
                }
            }
        }
        for v in prod.values_mut() {
            v.retain(|(_, c)| !c.is_zero());
        }
        prod.retain(|_, v| !v.is_empty());
        RawModel { degrees, pdeg, diff, prod }
    }

    fn into_model(self, poset: Arc<StrataPoset>, connected_normal: bool) -> Result<PerverseModel> {
        let names: Vec<String> = (0..self.len()).map(|i| format!("e{i}")).collect();
        let basis: Vec<BasisDecl> = (0..self.len())
            .map(|i| {
                let mut decl = BasisDecl::new(names[i].clone(), self.degrees[i]);
                for (s, info) in poset.strata().iter().enumerate() {
                    decl.pdeg.insert(info.id.clone(), self.pdeg[i][s]);
                }
                decl
            })
            .collect();
        let mut diff = Vec::new();
        for (i, entries) in self.diff.iter().enumerate() {
            for (t, c) in entries {
                diff.push((names[i].clone(), names[*t].clone(), c.clone()));
            }
        }
        let mut prod = Vec::new();
        for (&(i, j), entries) in &self.prod {
            if i > j {
                continue;
            }
            for (k, c) in entries {
                prod.push((names[i].clone(), names[j].clone(), names[*k].clone(), c.clone()));
            }
        }
        PerverseModel::assemble(poset, basis, &diff, &prod, connected_normal)
    }
}

fn random_poset(rng: &mut Rng) -> Arc<StrataPoset> {
    let natures =
        [Nature::Mobile, Nature::FixedNonperverse, Nature::FixedPerverse];
    let count = match rng.below(10) {
        0 => 0,
        1..=5 => 1,
        _ => 2,
    };
    let strata: Vec<StratumInfo> = (0..count)
        .map(|i| {
            let id = StratumId::new(format!("s{i}"));
            let mut info = StratumInfo::new(id, natures[rng.below(3)]);
            if rng.chance(50) {
                info = info.with_codim(2 + rng.below(4) as u32);
            }
            info
        })
        .collect();
    let order: Vec<(StratumId, StratumId)> = if count == 2 && rng.chance(50) {
        vec![(strata[0].id.clone(), strata[1].id.clone())]
    } else {
        Vec::new()
    };
    StrataPoset::new(strata, &order).expect("random poset is well formed")
}

fn random_pdeg(rng: &mut Rng, strata: usize, degree: u32) -> Vec<u32> {
    (0..strata).map(|_| rng.below(degree as usize + 1) as u32).collect()
}

fn random_block(rng: &mut Rng, strata: usize) -> RawModel {
    let coeffs = [qi(1), qi(2), qi(-1), q(1, 2)];
    match rng.below(4) {
        0 => {
            let d = 2 * (1 + rng.below(2) as u32);
            RawModel::single(strata, d, random_pdeg(rng, strata, d))
        }
        1 => {
            let d = 1 + 2 * rng.below(2) as u32;
            RawModel::single(strata, d, random_pdeg(rng, strata, d))
        }
        _ => {
            let d = 1 + 2 * rng.below(2) as u32;
            RawModel::cone_pair(
                strata,
                d,
                random_pdeg(rng, strata, d),
                random_pdeg(rng, strata, d + 1),
                coeffs[rng.below(coeffs.len())].clone(),
            )
        }
    }
}

/// A random valid model of bounded size: a tensor product of elementary
/// blocks over a random small poset. Validity holds by construction and is
/// still re-checked by the caller's suites.
pub fn random_base_model(rng: &mut Rng, max_dim: usize) -> Arc<PerverseModel> {
    let poset = random_poset(rng);
    let strata = poset.len();
    let mut raw = RawModel::unit(strata);
    loop {
        let block = random_block(rng, strata);
        if raw.len() * block.len() > max_dim {
            break;
        }
        raw = raw.tensor(&block);
        if rng.chance(40) {
            break;
        }
    }
    let model = raw.into_model(poset, true).expect("random model assembles");
    Arc::new(model)
}

/// A random valid model with a random admissible Euler cochain.
pub fn random_gysin_model(rng: &mut Rng, max_dim: usize) -> GysinModel {
    let base = random_base_model(rng, max_dim);
    let epsilon = random_euler_cochain(rng, &base);
    GysinModel::new(base, epsilon).expect("random Euler data validates")
}

/// A random closed degree-2 cochain within the Euler bound; zero roughly
/// a third of the time.
pub fn random_euler_cochain(rng: &mut Rng, base: &Arc<PerverseModel>) -> Cochain {
    if rng.chance(35) {
        return base.zero_cochain();
    }
    let e = Perversity::euler(base.poset().clone());
    let omega_e = extract_omega(base, &e).expect("euler subcomplex");
    if omega_e.space().len() <= 2 || omega_e.dim(2) == 0 {
        return base.zero_cochain();
    }
    // cocycles of degree 2 inside the Euler subcomplex
    let basis = omega_e.space().basis(2);
    let images: Vec<QVec> = (0..basis.cols()).map(|j| base.apply_diff(&basis.col(j))).collect();
    let image_mat = crate::linalg::QMatrix::from_cols(base.dim(), &images);
    let kern = image_mat.kernel();
    if kern.cols() == 0 {
        return base.zero_cochain();
    }
    let coeffs = [qi(0), qi(1), qi(-1), qi(2), q(1, 2)];
    let mut eps = vec_zero(base.dim());
    for j in 0..kern.cols() {
        let c = coeffs[rng.below(coeffs.len())].clone();
        if c.is_zero() {
            continue;
        }
        let cocycle = basis.mul_vec(&kern.col(j));
        for (t, s) in eps.iter_mut().zip(&cocycle) {
            *t += &c * s;
        }
    }
    Cochain::from_coords(eps)
}

// The oracle: dense Gauss-Jordan with normalized pivots, no shared code with
// the engine's fraction-free elimination.

fn gauss_jordan_rank(mut rows: Vec<QVec>) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].clone().recip();
        for x in rows[rank].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..nrows {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in 0..ncols {
                    let delta = &factor * &rows[rank][c];
                    rows[r][c] = &rows[r][c] - &delta;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// Cohomology dimensions of an embedded complex, computed by the oracle:
/// dim H^i = dim C^i - rank(d_i) - rank(d_{i-1}).
pub fn oracle_cohomology_dims<F>(space: &GradedSubspace, mut apply_d: F) -> Vec<usize>
where
    F: FnMut(usize, &[Q]) -> QVec,
{
    let len = space.len();
    let mut ranks = Vec::with_capacity(len);
    for i in 0..len {
        let rows: Vec<QVec> =
            (0..space.dim(i)).map(|j| apply_d(i, &space.basis(i).col(j))).collect();
        // rank of the map equals the rank of the transposed row list
        ranks.push(gauss_jordan_rank(rows));
    }
    (0..len)
        .map(|i| {
            let prev = if i == 0 { 0 } else { ranks[i - 1] };
            space.dim(i) - ranks[i] - prev
        })
        .collect()
}
