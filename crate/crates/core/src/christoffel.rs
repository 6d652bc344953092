//! Christoffel function Lambda_n = sup_x (sum_{k <= n} |b_k(x)|^2)^{1/2}.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSystem, DomainKind, Points};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Closed-form Christoffel function: sqrt(n) for trig, n / sqrt(2) for Legendre.
pub fn christoffel_exact(system: &BasisSystem, n: usize) -> Result<f64> {
    if n > system.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            size: system.len(),
        });
    }
    Ok(match system.family() {
        BasisFamily::Trigonometric => (n as f64).sqrt(),
        BasisFamily::Legendre => n as f64 / std::f64::consts::SQRT_2,
    })
}

/// Power rule Lambda_n <= c n^beta, usable at unboundedly many n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChristoffelRule {
    pub c: f64,
    pub beta: f64,
}

impl ChristoffelRule {
    /// Closed form of the family as a power rule (exact for trig and Legendre).
    pub fn for_family(family: BasisFamily) -> Self {
        match family {
            BasisFamily::Trigonometric => ChristoffelRule { c: 1.0, beta: 0.5 },
            BasisFamily::Legendre => ChristoffelRule {
                c: std::f64::consts::FRAC_1_SQRT_2,
                beta: 1.0,
            },
        }
    }

    pub fn value(&self, n: usize) -> f64 {
        self.c * (n as f64).powf(self.beta)
    }
}

/// Result of a grid evaluation of the Christoffel function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMaximum {
    /// Largest value found (a lower bound on the true supremum).
    pub value: f64,
    /// Point where it was attained.
    pub argmax: Vec<f64>,
    /// Number of refinement passes performed.
    pub refinements: usize,
}

/// Grid lower bound on Lambda_n with refinement around the maximizer.
///
/// After the coarse pass the spacing is halved around the current maximizer until
/// the value changes by less than 1e-8 (at most 30 passes).
pub fn christoffel_grid(system: &BasisSystem, n: usize, grid: &GridSpec) -> Result<GridMaximum> {
    if n == 0 || n > system.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            size: system.len(),
        });
    }
    let space = *system.space();
    let coarse = grid.points(&space)?;
    let (mut best, mut arg) = max_sum_sq(system, n, &coarse)?;
    let mut h = match space.kind() {
        DomainKind::Torus => 2.0 * PI / grid.per_axis as f64,
        DomainKind::Interval => 2.0 / (grid.per_axis - 1) as f64,
    };
    let mut passes = 0;
    if !matches!(grid.refinement, crate::grid::Refinement::None) {
        for _ in 0..30 {
            h /= 2.0;
            let window = local_window(&space, &arg, h, 4);
            let (v, a) = max_sum_sq(system, n, &window)?;
            passes += 1;
            let change = v - best;
            if v > best {
                best = v;
                arg = a;
            }
            if change.abs() < 1e-8 {
                break;
            }
        }
    }
    Ok(GridMaximum {
        value: best.sqrt(),
        argmax: arg,
        refinements: passes,
    })
}

fn local_window(space: &crate::basis::MeasureSpace, center: &[f64], h: f64, steps: i64) -> Points {
    let axes: Vec<Vec<f64>> = center
        .iter()
        .map(|&c| {
            let mut v: Vec<f64> = (-steps..=steps)
                .map(|t| {
                    let x = c + t as f64 * h;
                    match space.kind() {
                        DomainKind::Torus => x.rem_euclid(2.0 * PI),
                        DomainKind::Interval => x.clamp(-1.0, 1.0),
                    }
                })
                .collect();
            v.dedup();
            v
        })
        .collect();
    let mut pts = Points::empty(center.len());
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut idx = vec![0usize; axes.len()];
    let mut buf = vec![0.0; axes.len()];
    for _ in 0..total {
        for (j, &i) in idx.iter().enumerate() {
            buf[j] = axes[j][i];
        }
        if space.contains(&buf) {
            pts.push(&buf);
        }
        for j in (0..axes.len()).rev() {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    pts
}

/// max_x sum_{k <= n} |b_k(x)|^2 over the points, with its argmax.
fn max_sum_sq(system: &BasisSystem, n: usize, points: &Points) -> Result<(f64, Vec<f64>)> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    const CHUNK: usize = 2048;
    let mut start = 0;
    while start < points.len() {
        let end = (start + CHUNK).min(points.len());
        let part = points.slice(start..end);
        let design = system.design_matrix(&part, n)?;
        for i in 0..part.len() {
            let s: f64 = design.row(i).iter().map(|z| z.norm_sqr()).sum();
            if s > best {
                best = s;
                arg = part.point(i).to_vec();
            }
        }
        start = end;
    }
    Ok((best, arg))
}
