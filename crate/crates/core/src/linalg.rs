//! Dense complex linear algebra helpers built on real matrix products.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::C64;

/// Real and imaginary parts of a complex matrix; `im` is `None` for real matrices.
pub struct SplitMatrix {
    pub re: DMatrix<f64>,
    pub im: Option<DMatrix<f64>>,
}

impl SplitMatrix {
    pub fn from_complex(a: &DMatrix<C64>) -> Self {
        let re = a.map(|z| z.re);
        let im = if a.iter().any(|z| z.im != 0.0) {
            Some(a.map(|z| z.im))
        } else {
            None
        };
        SplitMatrix { re, im }
    }

    pub fn from_real(a: DMatrix<f64>) -> Self {
        SplitMatrix { re: a, im: None }
    }

    /// Product self * other, skipping products with zero imaginary parts.
    pub fn mul(&self, other: &SplitMatrix) -> DMatrix<C64> {
        let rr = &self.re * &other.re;
        match (&self.im, &other.im) {
            (None, None) => rr.map(|v| C64::new(v, 0.0)),
            (Some(ai), None) => {
                let ir = ai * &other.re;
                rr.zip_map(&ir, C64::new)
            }
            (None, Some(bi)) => {
                let ri = &self.re * bi;
                rr.zip_map(&ri, C64::new)
            }
            (Some(ai), Some(bi)) => {
                let ii = ai * bi;
                let ri = &self.re * bi;
                let ir = ai * &other.re;
                let re = rr - ii;
                let im = ri + ir;
                re.zip_map(&im, C64::new)
            }
        }
    }
}

/// Complex product a * b through real matrix products.
pub fn cmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    SplitMatrix::from_complex(a).mul(&SplitMatrix::from_complex(b))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_max_eig(a: &DMatrix<C64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Outcome of a Lanczos run.
#[derive(Clone, Copy, Debug)]
pub struct LanczosResult {
    /// Largest Ritz value (a lower bound on the largest eigenvalue).
    pub value: f64,
    /// Residual norm of the corresponding Ritz pair.
    pub residual: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator given by its action.
///
/// Lanczos with full reorthogonalization from a fixed pseudo-random start vector, stopped
/// when the Ritz residual drops below `tol` times the Ritz value.
pub fn lanczos_max<F>(dim: usize, mut apply: F, tol: f64, max_iter: usize) -> LanczosResult
where
    F: FnMut(&DVector<C64>) -> DVector<C64>,
{
    if dim == 0 {
        return LanczosResult {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut v = DVector::<C64>::from_fn(dim, |_, _| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    v /= C64::new(v.norm(), 0.0);
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let max_iter = max_iter.min(dim);
    let mut best = LanczosResult {
        value: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
    };
    for j in 0..max_iter {
        let mut w = apply(&v);
        let a = v.dotc(&w).re;
        alphas.push(a);
        basis.push(v.clone());
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, C64::new(1.0, 0.0));
            }
        }
        let b = w.norm();
        let check = j + 1 == max_iter || b < 1e-300 || j % 4 == 3;
        if check {
            let k = alphas.len();
            let t = DMatrix::<f64>::from_fn(k, k, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c {
                    betas[r]
                } else if c + 1 == r {
                    betas[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (idx, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .unwrap();
            let last = eig.eigenvectors[(k - 1, idx)];
            let residual = b * last.abs();
            best = LanczosResult {
                value: theta,
                residual,
                iterations: j + 1,
            };
            if residual <= tol * theta.abs().max(f64::MIN_POSITIVE) || b < 1e-300 {
                break;
            }
        }
        if b < 1e-300 {
            break;
        }
        betas.push(b);
        v = w / C64::new(b, 0.0);
    }
    best
}
