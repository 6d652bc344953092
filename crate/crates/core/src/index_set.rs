//! Multi-indices, hyperbolic crosses, dyadic blocks and their text format.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of indices any enumeration may produce.
pub const DEFAULT_CARDINALITY_CAP: usize = 10_000_000;

/// An integer frequency vector k in Z^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(components: Vec<i64>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    /// Hyperbolic weight prod_j max(1, |k_j|), saturating at `u128::MAX`.
    pub fn hyperbolic_weight(&self) -> u128 {
        self.0.iter().fold(1u128, |acc, &v| {
            acc.saturating_mul(v.unsigned_abs().max(1) as u128)
        })
    }

    /// Sup norm max_j |k_j|.
    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

/// Canonical order on Z^d: hyperbolic weight, then sup norm, then lexicographic.
pub fn canonical_cmp(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    a.hyperbolic_weight()
        .cmp(&b.hyperbolic_weight())
        .then_with(|| a.sup_norm().cmp(&b.sup_norm()))
        .then_with(|| a.0.cmp(&b.0))
}

/// How the indices of an [`IndexSet`] are ordered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexOrdering {
    /// Sorted by [`canonical_cmp`].
    Canonical,
    /// Sorted by non-increasing spectral value, ties in canonical order.
    Rearranged,
    /// Caller-supplied order.
    Custom,
}

/// An ordered list of distinct multi-indices of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    dim: usize,
    indices: Vec<MultiIndex>,
    ordering: IndexOrdering,
    level: Option<u32>,
}

impl IndexSet {
    /// Builds a set after checking dimensions and rejecting duplicates.
    pub fn new(dim: usize, indices: Vec<MultiIndex>, ordering: IndexOrdering) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("index dimension must be positive"));
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for k in &indices {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "index {:?} has dimension {}, expected {dim}",
                    k.components(),
                    k.dim()
                )));
            }
            if !seen.insert(k) {
                return Err(Error::invalid(format!(
                    "duplicate index {:?}",
                    k.components()
                )));
            }
        }
        Ok(IndexSet {
            dim,
            indices,
            ordering,
            level: None,
        })
    }

    fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn ordering(&self) -> IndexOrdering {
        self.ordering
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<MultiIndex> {
        self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.indices.contains(k)
    }

    /// True when `self` equals the first `self.len()` entries of `other`.
    pub fn is_prefix_of(&self, other: &IndexSet) -> bool {
        self.len() <= other.len() && self.indices[..] == other.indices[..self.len()]
    }

    /// Line-oriented text form: a header with d and the level, then one index per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let level = self
            .level
            .map(|l| l.to_string())
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(out, "# d={} level={} count={}", self.dim, level, self.len());
        for k in &self.indices {
            let line: Vec<String> = k.components().iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Parses the text form produced by [`IndexSet::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty index-set text"))?;
        let mut dim = None;
        let mut level = None;
        for field in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = field.strip_prefix("d=") {
                dim = Some(
                    v.parse::<usize>()
                        .map_err(|e| Error::invalid(format!("bad dimension {v}: {e}")))?,
                );
            } else if let Some(v) = field.strip_prefix("level=") {
                if v != "-" {
                    level = Some(
                        v.parse::<u32>()
                            .map_err(|e| Error::invalid(format!("bad level {v}: {e}")))?,
                    );
                }
            }
        }
        let dim = dim.ok_or_else(|| Error::invalid("index-set header lacks d="))?;
        let mut indices = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let comps = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<i64>()
                        .map_err(|e| Error::invalid(format!("bad index entry {t}: {e}")))
                })
                .collect::<Result<Vec<i64>>>()?;
            indices.push(MultiIndex(comps));
        }
        let ordering = if indices.windows(2).all(|w| canonical_cmp(&w[0], &w[1]) == Ordering::Less) {
            IndexOrdering::Canonical
        } else {
            IndexOrdering::Custom
        };
        let mut set = IndexSet::new(dim, indices, ordering)?;
        set.level = level;
        Ok(set)
    }
}

/// All k in Z^d with prod_j factor(|k_j|) <= limit, for a non-decreasing factor >= 1.
///
/// The output is unsorted. Fails when more than `cap` indices would be produced.
pub(crate) fn enumerate_product_bounded(
    dim: usize,
    limit: u64,
    factor: &dyn Fn(u64) -> u64,
    cap: usize,
) -> Result<Vec<MultiIndex>> {
    let mut out = Vec::new();
    let mut current = vec![0i64; dim];
    fn rec(
        axis: usize,
        limit: u64,
        factor: &dyn Fn(u64) -> u64,
        current: &mut Vec<i64>,
        out: &mut Vec<MultiIndex>,
        cap: usize,
    ) -> Result<()> {
        if axis == current.len() {
            if out.len() >= cap {
                return Err(Error::ResourceCap {
                    what: "index enumeration".into(),
                    needed: out.len() as u128 + 1,
                    cap: cap as u128,
                });
            }
            out.push(MultiIndex(current.clone()));
            return Ok(());
        }
        let mut v: u64 = 0;
        loop {
            let f = factor(v);
            if f > limit {
                break;
            }
            let rest = limit / f;
            current[axis] = v as i64;
            rec(axis + 1, rest, factor, current, out, cap)?;
            if v > 0 {
                current[axis] = -(v as i64);
                rec(axis + 1, rest, factor, current, out, cap)?;
            }
            v += 1;
        }
        current[axis] = 0;
        Ok(())
    }
    if limit == 0 {
        return Ok(out);
    }
    rec(0, limit, factor, &mut current, &mut out, cap)?;
    Ok(out)
}

/// Step hyperbolic cross {k : prod_j max(1,|k_j|) < 2^level} in canonical order.
pub fn hyperbolic_cross(level: u32, dim: usize) -> Result<IndexSet> {
    hyperbolic_cross_capped(level, dim, DEFAULT_CARDINALITY_CAP)
}

/// [`hyperbolic_cross`] with an explicit cardinality cap.
pub fn hyperbolic_cross_capped(level: u32, dim: usize, cap: usize) -> Result<IndexSet> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if level >= 63 {
        return Err(Error::invalid("level must be below 63"));
    }
    let needed = hyperbolic_cross_cardinality(level, dim);
    if needed > cap as u128 {
        return Err(Error::ResourceCap {
            what: format!("hyperbolic cross level {level}, d={dim}"),
            needed,
            cap: cap as u128,
        });
    }
    let limit = (1u64 << level) - 1;
    let mut indices = enumerate_product_bounded(dim, limit, &|v| v.max(1), cap)?;
    indices.sort_by(canonical_cmp);
    Ok(IndexSet::new(dim, indices, IndexOrdering::Canonical)?.with_level(level))
}

/// Exact count #{k in Z^d : prod_j max(1,|k_j|) <= limit}.
pub fn hyperbolic_count(dim: usize, limit: u64) -> u128 {
    let mut memo = HashMap::new();
    count_rec(dim, limit, &mut memo)
}

fn count_rec(dim: usize, limit: u64, memo: &mut HashMap<(usize, u64), u128>) -> u128 {
    if limit == 0 {
        return 0;
    }
    if dim == 1 {
        return 2 * limit as u128 + 1;
    }
    if let Some(&c) = memo.get(&(dim, limit)) {
        return c;
    }
    // v = 0 and v = +-1 contribute 3 * F_{d-1}(limit); |v| = u >= 2 contributes 2 F_{d-1}(limit / u).
    let mut total = 3 * count_rec(dim - 1, limit, memo);
    let mut u = 2u64;
    while u <= limit {
        let q = limit / u;
        let u_hi = limit / q;
        let mult = (u_hi - u + 1) as u128;
        total += 2 * mult * count_rec(dim - 1, q, memo);
        u = u_hi + 1;
    }
    memo.insert((dim, limit), total);
    total
}

/// Exact cardinality |Omega_level| without enumerating the set.
pub fn hyperbolic_cross_cardinality(level: u32, dim: usize) -> u128 {
    if level == 0 {
        return 0;
    }
    hyperbolic_count(dim, (1u64 << level) - 1)
}

/// Dyadic block rho(s) = {k : floor(2^{s_j - 1}) <= |k_j| < 2^{s_j}} in canonical order.
pub fn dyadic_block(s: &[u32]) -> Result<IndexSet> {
    if s.is_empty() {
        return Err(Error::invalid("block multi-index must be non-empty"));
    }
    let mut axes: Vec<Vec<i64>> = Vec::with_capacity(s.len());
    let mut needed: u128 = 1;
    for &sj in s {
        if sj >= 62 {
            return Err(Error::invalid("block level must be below 62"));
        }
        let axis: Vec<i64> = if sj == 0 {
            vec![0]
        } else {
            let lo = 1i64 << (sj - 1);
            let hi = 1i64 << sj;
            (lo..hi).flat_map(|v| [-v, v]).collect()
        };
        needed = needed.saturating_mul(axis.len() as u128);
        axes.push(axis);
    }
    if needed > DEFAULT_CARDINALITY_CAP as u128 {
        return Err(Error::ResourceCap {
            what: "dyadic block".into(),
            needed,
            cap: DEFAULT_CARDINALITY_CAP as u128,
        });
    }
    let mut indices = vec![MultiIndex(Vec::new())];
    for axis in &axes {
        let mut next = Vec::with_capacity(indices.len() * axis.len());
        for k in &indices {
            for &v in axis {
                let mut c = k.0.clone();
                c.push(v);
                next.push(MultiIndex(c));
            }
        }
        indices = next;
    }
    indices.sort_by(canonical_cmp);
    IndexSet::new(s.len(), indices, IndexOrdering::Canonical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_enumeration() {
        for d in 1..=3 {
            for l in 0..=7 {
                let set = hyperbolic_cross(l, d).unwrap();
                assert_eq!(set.len() as u128, hyperbolic_cross_cardinality(l, d), "d={d} l={l}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let set = hyperbolic_cross(3, 2).unwrap();
        let back = IndexSet::from_text(&set.to_text()).unwrap();
        assert_eq!(set, back);
    }
}
