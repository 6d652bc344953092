//! Evaluation grids over the domain with optional local refinement.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::{DomainKind, MeasureSpace, Points};
use crate::error::{Error, Result};

/// Default cap on the number of grid points.
pub const DEFAULT_GRID_CAP: usize = 1 << 22;

/// Refinement applied after the coarse pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum Refinement {
    None,
    /// Adds a window of +-`factor` fine steps (coarse spacing / `factor`) per axis
    /// around the current maximizer.
    Local { factor: usize },
}

/// Tensor grid description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub per_axis: usize,
    pub refinement: Refinement,
}

impl GridSpec {
    pub fn new(per_axis: usize, refinement: Refinement) -> Result<Self> {
        if per_axis < 2 {
            return Err(Error::invalid("grid needs at least 2 points per axis"));
        }
        Ok(GridSpec {
            per_axis,
            refinement,
        })
    }

    /// 4096 points in dimension 1, 256 per axis in dimension 2, fewer beyond; local refinement.
    pub fn default_for(dim: usize) -> Self {
        let per_axis = match dim {
            1 => 4096,
            2 => 256,
            3 => 32,
            _ => 8,
        };
        GridSpec {
            per_axis,
            refinement: Refinement::Local { factor: 16 },
        }
    }

    /// Total number of coarse points in dimension `dim`.
    pub fn total_points(&self, dim: usize) -> Result<usize> {
        let mut n: usize = 1;
        for _ in 0..dim {
            n = n.checked_mul(self.per_axis).ok_or_else(|| Error::ResourceCap {
                what: "grid size".into(),
                needed: u128::MAX,
                cap: DEFAULT_GRID_CAP as u128,
            })?;
        }
        if n > DEFAULT_GRID_CAP {
            return Err(Error::ResourceCap {
                what: "grid size".into(),
                needed: n as u128,
                cap: DEFAULT_GRID_CAP as u128,
            });
        }
        Ok(n)
    }

    /// Coarse axis coordinates.
    pub fn axis(&self, space: &MeasureSpace) -> Vec<f64> {
        let n = self.per_axis;
        match space.kind() {
            DomainKind::Torus => (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect(),
            DomainKind::Interval => (0..n)
                .map(|j| {
                    if j + 1 == n {
                        1.0
                    } else {
                        -1.0 + 2.0 * j as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }

    /// Coarse tensor grid.
    pub fn points(&self, space: &MeasureSpace) -> Result<Points> {
        let total = self.total_points(space.dim())?;
        let axis = self.axis(space);
        Ok(tensor(&vec![axis; space.dim()], total))
    }

    /// Fine window around `center`, or `None` without refinement.
    pub fn refinement_points(&self, space: &MeasureSpace, center: &[f64]) -> Option<Points> {
        let factor = match self.refinement {
            Refinement::None => return None,
            Refinement::Local { factor } => factor.max(1),
        };
        let axes: Vec<Vec<f64>> = center
            .iter()
            .map(|&c| match space.kind() {
                DomainKind::Torus => {
                    let h = 2.0 * PI / (self.per_axis * factor) as f64;
                    // Snap to the fine lattice so refined points stay on the coarse lattice's refinement.
                    let base = (c / h).round() as i64;
                    let cells = (self.per_axis * factor) as i64;
                    (-(factor as i64)..=factor as i64)
                        .map(|t| 2.0 * PI * (base + t).rem_euclid(cells) as f64 / cells as f64)
                        .collect()
                }
                DomainKind::Interval => {
                    let h = 2.0 / ((self.per_axis - 1) * factor) as f64;
                    let mut v: Vec<f64> = (-(factor as i64)..=factor as i64)
                        .map(|t| (c + t as f64 * h).clamp(-1.0, 1.0))
                        .collect();
                    v.dedup();
                    v
                }
            })
            .collect();
        let total = axes.iter().map(|a| a.len()).product();
        Some(tensor(&axes, total))
    }
}

fn tensor(axes: &[Vec<f64>], total: usize) -> Points {
    let dim = axes.len();
    let mut coords = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        for (j, &i) in idx.iter().enumerate() {
            coords.push(axes[j][i]);
        }
        for j in (0..dim).rev() {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    Points::new(dim, coords).expect("tensor grid has consistent dimension")
}
