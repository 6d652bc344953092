//! Least-squares fits of log2 e = -alpha log2 n + gamma log2 log2 n + log2 c.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest points dropped by default as preasymptotic.
pub const DEFAULT_EXCLUDE: usize = 2;

/// Relative singular-value threshold below which gamma is declared unidentifiable.
pub const IDENTIFIABILITY_TOLERANCE: f64 = 1e-8;

/// Fit controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFitOptions {
    /// Holds gamma fixed instead of fitting it.
    pub fixed_gamma: Option<f64>,
    /// Number of smallest n values dropped (at least 3 points are always kept).
    pub exclude_smallest: usize,
}

impl Default for RateFitOptions {
    fn default() -> Self {
        RateFitOptions {
            fixed_gamma: None,
            exclude_smallest: DEFAULT_EXCLUDE,
        }
    }
}

/// Fitted model e = c n^{-alpha} (log2 n)^gamma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha: f64,
    pub gamma: f64,
    pub c: f64,
    /// gamma was estimated (false when fixed or unidentifiable).
    pub gamma_fitted: bool,
    pub gamma_identifiable: bool,
    pub n_min: f64,
    pub n_max: f64,
    /// Euclidean norm of the log2 residuals.
    pub residual_norm: f64,
    /// All input pairs, including excluded ones.
    pub pairs: Vec<(f64, f64)>,
    pub options: RateFitOptions,
}

impl RateFit {
    /// Refits from the stored pairs and options.
    pub fn refit(&self) -> Result<RateFit> {
        fit_rate(&self.pairs, &self.options)
    }
}

/// Fits the rate model to (n, error) pairs.
pub fn fit_rate(pairs: &[(f64, f64)], opts: &RateFitOptions) -> Result<RateFit> {
    if pairs.len() < 4 {
        return Err(Error::invalid(format!("rate fit needs at least 4 pairs, got {}", pairs.len())));
    }
    for w in pairs.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::invalid("n values must be strictly increasing"));
        }
    }
    if pairs.iter().any(|(n, e)| !(*n > 1.0) || !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("rate fit needs n > 1 and positive finite errors"));
    }
    let drop = opts.exclude_smallest.min(pairs.len() - 3);
    let used = &pairs[drop..];
    let rows = used.len();
    let x1: Vec<f64> = used.iter().map(|(n, _)| -n.log2()).collect();
    let x2: Vec<f64> = used.iter().map(|(n, _)| n.log2().log2()).collect();
    let y: Vec<f64> = used.iter().map(|(_, e)| e.log2()).collect();

    let solve = |cols: &[&[f64]], rhs: &[f64]| -> (Vec<f64>, f64) {
        let a = DMatrix::from_fn(rows, cols.len() + 1, |i, j| if j < cols.len() { cols[j][i] } else { 1.0 });
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let b = DVector::from_column_slice(rhs);
        let sol = svd.solve(&b, 0.0).expect("thin SVD solve");
        (sol.iter().cloned().collect(), if smax > 0.0 { smin / smax } else { 0.0 })
    };

    let (alpha, gamma, logc, fitted, identifiable) = match opts.fixed_gamma {
        Some(g) => {
            let rhs: Vec<f64> = y.iter().zip(&x2).map(|(y, l)| y - g * l).collect();
            let (s, _) = solve(&[&x1], &rhs);
            (s[0], g, s[1], false, true)
        }
        None => {
            let (s, ratio) = solve(&[&x1, &x2], &y);
            if ratio > IDENTIFIABILITY_TOLERANCE {
                (s[0], s[1], s[2], true, true)
            } else {
                let (s, _) = solve(&[&x1], &y);
                (s[0], 0.0, s[1], false, false)
            }
        }
    };
    let residual_norm = (0..rows)
        .map(|i| {
            let pred = alpha * x1[i] + gamma * x2[i] + logc;
            (y[i] - pred).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok(RateFit {
        alpha,
        gamma,
        c: logc.exp2(),
        gamma_fitted: fitted,
        gamma_identifiable: identifiable,
        n_min: used[0].0,
        n_max: used[rows - 1].0,
        residual_norm,
        pairs: pairs.to_vec(),
        options: *opts,
    })
}

/// Median of a non-empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
