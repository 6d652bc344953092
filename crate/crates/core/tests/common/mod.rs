//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre nodes and weights on [-1, 1] from the Golub-Welsch eigenproblem.
pub fn golub_welsch(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// L2-normalized Legendre values by the three-term recurrence, degrees 0..count.
pub fn legendre_normalized(x: f64, count: usize) -> Vec<f64> {
    let mut p = vec![0.0; count];
    if count == 0 {
        return p;
    }
    p[0] = 1.0;
    if count > 1 {
        p[1] = x;
    }
    for n in 1..count.saturating_sub(1) {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
    }
    for (n, v) in p.iter_mut().enumerate() {
        *v *= ((2.0 * n as f64 + 1.0) / 2.0).sqrt();
    }
    p
}

/// Brute-force hyperbolic cross count over the enclosing box.
pub fn brute_cross_count(level: u32, d: usize) -> usize {
    let bound = 1i64 << level;
    let mut count = 0;
    let mut k = vec![-bound; d];
    loop {
        let prod: i64 = k.iter().map(|v| v.abs().max(1)).product();
        if prod < bound {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == d {
                return count;
            }
            k[j] += 1;
            if k[j] <= bound {
                break;
            }
            k[j] = -bound;
            j += 1;
        }
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
