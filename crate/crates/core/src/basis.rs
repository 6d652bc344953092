//! Measure spaces, point sets and pointwise-evaluable orthonormal basis systems.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_set::{IndexOrdering, IndexSet, MultiIndex};

pub type C64 = Complex64;

/// Kind of domain carrying the measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// [0, 2pi)^d with the normalized Lebesgue measure.
    Torus,
    /// [-1, 1] with the Lebesgue measure (mass 2).
    Interval,
}

/// A domain together with the total mass of its measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpace {
    kind: DomainKind,
    dim: usize,
    total_mass: f64,
}

impl MeasureSpace {
    pub fn torus(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("torus dimension must be positive"));
        }
        Ok(MeasureSpace {
            kind: DomainKind::Torus,
            dim,
            total_mass: 1.0,
        })
    }

    pub fn interval() -> Self {
        MeasureSpace {
            kind: DomainKind::Interval,
            dim: 1,
            total_mass: 2.0,
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        match self.kind {
            DomainKind::Torus => x.iter().all(|&t| (0.0..2.0 * PI).contains(&t)),
            DomainKind::Interval => (-1.0..=1.0).contains(&x[0]),
        }
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!("{x:?} not in {:?}^{}", self.kind, self.dim)))
        }
    }
}

/// A finite list of points of a common dimension, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Points { dim, coords })
    }

    pub fn empty(dim: usize) -> Self {
        Points {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point of dimension {} in a set of dimension {dim}",
                    r.len()
                )));
            }
            coords.extend_from_slice(r);
        }
        Ok(Points { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Points with indices in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Points {
        Points {
            dim: self.dim,
            coords: self.coords[range.start * self.dim..range.end * self.dim].to_vec(),
        }
    }
}

/// Family of an orthonormal system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisFamily {
    Trigonometric,
    Legendre,
}

#[derive(Clone, Debug)]
enum BasisKind {
    Trig { freqs: Arc<Vec<MultiIndex>> },
    Legendre { size: usize },
}

/// An ordered orthonormal system b_1, b_2, ... on a measure space.
///
/// Flat indices start at 1. For the trigonometric system b_k(x) = exp(i kappa(k).x)
/// with kappa the stored frequency list; for Legendre b_k is the L2-normalized
/// Legendre polynomial of degree k - 1.
#[derive(Clone, Debug)]
pub struct BasisSystem {
    space: MeasureSpace,
    kind: BasisKind,
}

impl BasisSystem {
    /// Trigonometric system on the torus with the given frequency order.
    pub fn trigonometric(dim: usize, frequencies: Vec<MultiIndex>) -> Result<Self> {
        let set = IndexSet::new(dim, frequencies, IndexOrdering::Custom)?;
        Ok(BasisSystem {
            space: MeasureSpace::torus(dim)?,
            kind: BasisKind::Trig {
                freqs: Arc::new(set.into_indices()),
            },
        })
    }

    /// Trigonometric system ordered like an index set.
    pub fn trigonometric_from_set(set: &IndexSet) -> Result<Self> {
        Ok(BasisSystem {
            space: MeasureSpace::torus(set.dim())?,
            kind: BasisKind::Trig {
                freqs: Arc::new(set.indices().to_vec()),
            },
        })
    }

    /// Legendre system with `size` polynomials (degrees 0 .. size - 1).
    pub fn legendre(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("Legendre system needs at least one polynomial"));
        }
        Ok(BasisSystem {
            space: MeasureSpace::interval(),
            kind: BasisKind::Legendre { size },
        })
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn family(&self) -> BasisFamily {
        match self.kind {
            BasisKind::Trig { .. } => BasisFamily::Trigonometric,
            BasisKind::Legendre { .. } => BasisFamily::Legendre,
        }
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            BasisKind::Trig { freqs } => freqs.len(),
            BasisKind::Legendre { size } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frequency of the trigonometric basis element `k` (1-based).
    pub fn frequency(&self, k: usize) -> Option<&MultiIndex> {
        match &self.kind {
            BasisKind::Trig { freqs } => freqs.get(k.checked_sub(1)?),
            BasisKind::Legendre { .. } => None,
        }
    }

    pub fn frequencies(&self) -> Option<&[MultiIndex]> {
        match &self.kind {
            BasisKind::Trig { freqs } => Some(freqs),
            BasisKind::Legendre { .. } => None,
        }
    }

    /// Squared sup norm of b_k: 1 for trig, (2k - 1)/2 for Legendre.
    pub fn sup_norm_sq(&self, k: usize) -> f64 {
        match self.kind {
            BasisKind::Trig { .. } => 1.0,
            BasisKind::Legendre { .. } => (2.0 * k as f64 - 1.0) / 2.0,
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            Err(Error::IndexOutOfRange {
                index: k,
                size: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// b_k(x) for a flat index k >= 1.
    pub fn eval(&self, k: usize, x: &[f64]) -> Result<C64> {
        self.check_index(k)?;
        self.space.check(x)?;
        Ok(match &self.kind {
            BasisKind::Trig { freqs } => trig_value(&freqs[k - 1], x),
            BasisKind::Legendre { .. } => {
                let v = legendre_values(x[0], k);
                C64::new(v[k - 1], 0.0)
            }
        })
    }

    /// b_1(x), ..., b_count(x).
    pub fn eval_prefix(&self, x: &[f64], count: usize) -> Result<Vec<C64>> {
        if count > self.len() {
            return Err(Error::IndexOutOfRange {
                index: count,
                size: self.len(),
            });
        }
        self.space.check(x)?;
        Ok(match &self.kind {
            BasisKind::Trig { freqs } => freqs[..count].iter().map(|k| trig_value(k, x)).collect(),
            BasisKind::Legendre { .. } => legendre_values(x[0], count)
                .into_iter()
                .map(|v| C64::new(v, 0.0))
                .collect(),
        })
    }

    fn check_points(&self, points: &Points) -> Result<()> {
        if points.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "points of dimension {} for a basis on dimension {}",
                points.dim(),
                self.space.dim()
            )));
        }
        for x in points.iter() {
            self.space.check(x)?;
        }
        Ok(())
    }

    /// Matrix with entry (i, j) = b_{start + j}(x_i) for j < count.
    pub fn design_block(&self, points: &Points, start: usize, count: usize) -> Result<DMatrix<C64>> {
        if start == 0 || start + count - 1 > self.len() {
            return Err(Error::IndexOutOfRange {
                index: start + count.saturating_sub(1),
                size: self.len(),
            });
        }
        let mut eval = self.block_evaluator(points)?;
        if start > 1 {
            eval.skip_to(start);
        }
        Ok(eval.next_block(count))
    }

    /// Design matrix of b_1..b_count at the points.
    pub fn design_matrix(&self, points: &Points, count: usize) -> Result<DMatrix<C64>> {
        if count == 0 {
            return Ok(DMatrix::zeros(points.len(), 0));
        }
        self.design_block(points, 1, count)
    }

    /// Sequential evaluator producing consecutive column blocks b_k(x_i).
    ///
    /// Legendre blocks continue the three-term recurrence, so walking through K
    /// columns costs O(K) per point regardless of the block size.
    pub fn block_evaluator(&self, points: &Points) -> Result<BlockEvaluator> {
        self.check_points(points)?;
        let n = points.len();
        Ok(BlockEvaluator {
            basis: self.clone(),
            points: points.clone(),
            next: 1,
            p_prev: vec![0.0; n],
            p_cur: vec![1.0; n],
        })
    }
}

/// exp(i k.x).
fn trig_value(k: &MultiIndex, x: &[f64]) -> C64 {
    let phase: f64 = k.components().iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
    let (s, c) = phase.sin_cos();
    C64::new(c, s)
}

/// Orthonormal Legendre values L_0(x), ..., L_{count-1}(x) on [-1, 1].
pub fn legendre_values(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut p_prev = 0.0;
    let mut p_cur = 1.0;
    for n in 0..count {
        let nf = n as f64;
        out.push(p_cur * ((2.0 * nf + 1.0) / 2.0).sqrt());
        let p_next = ((2.0 * nf + 1.0) * x * p_cur - nf * p_prev) / (nf + 1.0);
        p_prev = p_cur;
        p_cur = p_next;
    }
    out
}

/// Column-block evaluator returned by [`BasisSystem::block_evaluator`].
pub struct BlockEvaluator {
    basis: BasisSystem,
    points: Points,
    /// Next flat index to be produced.
    next: usize,
    /// Classical Legendre P_{next-2} and P_{next-1} per point.
    p_prev: Vec<f64>,
    p_cur: Vec<f64>,
}

impl BlockEvaluator {
    pub fn points(&self) -> &Points {
        &self.points
    }

    /// Flat index of the next column that [`BlockEvaluator::next_block`] returns.
    pub fn position(&self) -> usize {
        self.next
    }

    /// Advances without materializing columns before `k`.
    pub fn skip_to(&mut self, k: usize) {
        while self.next < k {
            let step = (k - self.next).min(4096);
            self.advance(step, None);
        }
    }

    /// The next `count` columns as an (n x count) matrix.
    pub fn next_block(&mut self, count: usize) -> DMatrix<C64> {
        let n = self.points.len();
        let mut out = DMatrix::<C64>::zeros(n, count);
        self.advance(count, Some(&mut out));
        out
    }

    fn advance(&mut self, count: usize, mut out: Option<&mut DMatrix<C64>>) {
        let start = self.next;
        match &self.basis.kind {
            BasisKind::Trig { freqs } => {
                if let Some(out) = out.as_deref_mut() {
                    for j in 0..count {
                        let k = &freqs[start - 1 + j];
                        for (i, x) in self.points.iter().enumerate() {
                            out[(i, j)] = trig_value(k, x);
                        }
                    }
                }
            }
            BasisKind::Legendre { .. } => {
                for (i, x) in self.points.iter().enumerate() {
                    let x = x[0];
                    let mut p_prev = self.p_prev[i];
                    let mut p_cur = self.p_cur[i];
                    for j in 0..count {
                        let deg = (start - 1 + j) as f64;
                        if let Some(out) = out.as_deref_mut() {
                            out[(i, j)] = C64::new(p_cur * ((2.0 * deg + 1.0) / 2.0).sqrt(), 0.0);
                        }
                        let p_next = ((2.0 * deg + 1.0) * x * p_cur - deg * p_prev) / (deg + 1.0);
                        p_prev = p_cur;
                        p_cur = p_next;
                    }
                    self.p_prev[i] = p_prev;
                    self.p_cur[i] = p_cur;
                }
            }
        }
        self.next += count;
    }
}
