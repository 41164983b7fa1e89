//! Singular strata of an orbit space and integer perversities on them.
//!
//! A stratum is mobile (finite isotropy), fixed but not perverse, or fixed and
//! perverse; the nature is input data attached to each stratum. Perversities
//! assign an integer to every singular stratum and form a partially ordered
//! abelian monoid under pointwise sum and pointwise order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Symbolic name of a singular stratum.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumId(String);

impl StratumId {
    pub fn new(s: impl Into<String>) -> Self {
        StratumId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StratumId {
    fn from(s: &str) -> Self {
        StratumId(s.to_owned())
    }
}

/// Geometric nature of a singular stratum under the circle action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Nature {
    Mobile,
    FixedNonperverse,
    FixedPerverse,
}

impl Nature {
    pub fn is_fixed(self) -> bool {
        matches!(self, Nature::FixedNonperverse | Nature::FixedPerverse)
    }

    pub fn parse(s: &str) -> Option<Nature> {
        match s {
            "mobile" => Some(Nature::Mobile),
            "fixed_nonperverse" => Some(Nature::FixedNonperverse),
            "fixed_perverse" => Some(Nature::FixedPerverse),
            _ => None,
        }
    }
}

impl fmt::Display for Nature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Nature::Mobile => "mobile",
            Nature::FixedNonperverse => "fixed_nonperverse",
            Nature::FixedPerverse => "fixed_perverse",
        };
        f.write_str(s)
    }
}

/// One singular stratum. `codim` is the codimension in the total space and is
/// only used to offer the conventional top perversity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StratumInfo {
    pub id: StratumId,
    pub nature: Nature,
    pub codim: Option<u32>,
}

impl StratumInfo {
    pub fn new(id: impl Into<StratumId>, nature: Nature) -> Self {
        StratumInfo { id: id.into(), nature, codim: None }
    }

    pub fn with_codim(mut self, codim: u32) -> Self {
        self.codim = Some(codim);
        self
    }
}

/// Finite poset of singular strata with a strict partial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrataPoset {
    strata: Vec<StratumInfo>,
    /// Transitive closure of the input relation, as index pairs (a, b) with a < b.
    below: BTreeSet<(usize, usize)>,
}

impl StrataPoset {
    /// Build from strata and order pairs `(s, t)` meaning `s` lies below `t`.
    /// The transitive closure is computed; a cycle makes the order
    /// non-strict and is rejected.
    pub fn new(strata: Vec<StratumInfo>, order: &[(StratumId, StratumId)]) -> Result<Arc<Self>> {
        let mut seen = BTreeSet::new();
        for s in &strata {
            if !seen.insert(s.id.clone()) {
                return Err(Error::DuplicateStratum(s.id.clone()));
            }
        }
        let index: BTreeMap<&StratumId, usize> =
            strata.iter().enumerate().map(|(i, s)| (&s.id, i)).collect();
        let n = strata.len();
        let mut rel = vec![vec![false; n]; n];
        for (a, b) in order {
            let &ia = index.get(a).ok_or_else(|| Error::UnknownStratum(a.clone()))?;
            let &ib = index.get(b).ok_or_else(|| Error::UnknownStratum(b.clone()))?;
            rel[ia][ib] = true;
        }
        // Warshall closure
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut below = BTreeSet::new();
        for i in 0..n {
            if rel[i][i] {
                return Err(Error::OrderNotStrict(strata[i].id.clone()));
            }
            for j in 0..n {
                if rel[i][j] {
                    below.insert((i, j));
                }
            }
        }
        Ok(Arc::new(StrataPoset { strata, below }))
    }

    /// Poset with no singular strata (manifold orbit space).
    pub fn empty() -> Arc<Self> {
        Arc::new(StrataPoset { strata: Vec::new(), below: BTreeSet::new() })
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn strata(&self) -> &[StratumInfo] {
        &self.strata
    }

    pub fn index_of(&self, id: &StratumId) -> Option<usize> {
        self.strata.iter().position(|s| &s.id == id)
    }

    pub fn info(&self, idx: usize) -> &StratumInfo {
        &self.strata[idx]
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.below.contains(&(a, b))
    }

    pub fn order_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.below.iter().copied()
    }
}

/// Integer-valued function on the singular strata of one poset. Negative
/// values are allowed: differences of perversities stay representable, and a
/// negative bound simply excludes more cochains.
#[derive(Clone, Debug)]
pub struct Perversity {
    poset: Arc<StrataPoset>,
    /// Value at stratum index i.
    values: Vec<i64>,
}

impl PartialEq for Perversity {
    fn eq(&self, other: &Self) -> bool {
        self.same_poset(other) && self.values == other.values
    }
}
impl Eq for Perversity {}

impl Perversity {
    pub fn from_values(poset: Arc<StrataPoset>, map: &BTreeMap<StratumId, i64>) -> Result<Self> {
        if map.len() != poset.len() {
            return Err(Error::PerversityDomain(format!(
                "{} values for {} strata",
                map.len(),
                poset.len()
            )));
        }
        let mut values = vec![0i64; poset.len()];
        for (id, v) in map {
            let idx = poset
                .index_of(id)
                .ok_or_else(|| Error::PerversityDomain(format!("stratum `{id}` not in poset")))?;
            values[idx] = *v;
        }
        Ok(Perversity { poset, values })
    }

    pub fn constant(poset: Arc<StrataPoset>, v: i64) -> Self {
        let values = vec![v; poset.len()];
        Perversity { poset, values }
    }

    /// The unity element: zero on every stratum.
    pub fn zero(poset: Arc<StrataPoset>) -> Self {
        Self::constant(poset, 0)
    }

    /// 1 on fixed strata, 0 on mobile strata.
    pub fn characteristic(poset: Arc<StrataPoset>) -> Self {
        let values = poset.strata().iter().map(|s| if s.nature.is_fixed() { 1 } else { 0 }).collect();
        Perversity { poset, values }
    }

    /// 0 on mobile, 1 on fixed non-perverse, 2 on perverse strata.
    pub fn euler(poset: Arc<StrataPoset>) -> Self {
        let values = poset
            .strata()
            .iter()
            .map(|s| match s.nature {
                Nature::Mobile => 0,
                Nature::FixedNonperverse => 1,
                Nature::FixedPerverse => 2,
            })
            .collect();
        Perversity { poset, values }
    }

    /// Conventional top perversity t(S) = codim(S) - 2; requires every
    /// stratum to carry a codimension.
    pub fn top(poset: Arc<StrataPoset>) -> Result<Self> {
        let mut values = Vec::with_capacity(poset.len());
        for s in poset.strata() {
            let c = s.codim.ok_or_else(|| Error::MissingCodim(s.id.clone()))?;
            values.push(c as i64 - 2);
        }
        Ok(Perversity { poset, values })
    }

    pub fn poset(&self) -> &Arc<StrataPoset> {
        &self.poset
    }

    pub fn same_poset(&self, other: &Perversity) -> bool {
        Arc::ptr_eq(&self.poset, &other.poset) || *self.poset == *other.poset
    }

    pub fn bound_to(&self, poset: &Arc<StrataPoset>) -> bool {
        Arc::ptr_eq(&self.poset, poset) || *self.poset == **poset
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value_at(&self, idx: usize) -> i64 {
        self.values[idx]
    }

    pub fn value(&self, id: &StratumId) -> Result<i64> {
        let idx = self.poset.index_of(id).ok_or_else(|| Error::UnknownStratum(id.clone()))?;
        Ok(self.values[idx])
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Perversity) -> Result<Perversity> {
        if !self.same_poset(other) {
            return Err(Error::PosetMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Perversity { poset: self.poset.clone(), values })
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Perversity) -> Result<Perversity> {
        if !self.same_poset(other) {
            return Err(Error::PosetMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Perversity { poset: self.poset.clone(), values })
    }

    /// Pointwise order: true iff self(S) <= other(S) for every stratum.
    pub fn leq(&self, other: &Perversity) -> Result<bool> {
        if !self.same_poset(other) {
            return Err(Error::PosetMismatch);
        }
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    pub fn geq(&self, other: &Perversity) -> Result<bool> {
        other.leq(self)
    }

    /// Memoization key: the value vector in poset order.
    pub fn key(&self) -> Vec<i64> {
        self.values.clone()
    }
}

impl fmt::Display for Perversity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poset.is_empty() {
            return f.write_str("(trivial)");
        }
        let parts: Vec<String> = self
            .poset
            .strata()
            .iter()
            .zip(&self.values)
            .map(|(s, v)| format!("{}={}", s.id, v))
            .collect();
        f.write_str(&parts.join(","))
    }
}
