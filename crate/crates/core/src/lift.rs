//! Pointwise lifting inequality ||f - Af||_inf <= ||K_m||_inf^{1/2} ||f - P_m f||_H + Lambda_m ||f - Af||_2.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{Points, C64};
use crate::christoffel::christoffel_exact;
use crate::error::{Error, Result};
use crate::linalg::SplitMatrix;
use crate::recovery::Approximant;
use crate::rkhs::RkhsSpec;

/// Relative slack allowed before a lift check counts as a violation.
pub const LIFT_TOLERANCE: f64 = 1e-10;

/// f = sum_{k <= K} c_k sigma_k b_k with ||f||_H = ||c||_2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub coeffs: Vec<C64>,
}

impl TestFunction {
    pub fn h_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `count` seeded elements of the unit H-ball with `terms` coefficients each.
///
/// Coefficient directions are uniform in a box, normalized, then scaled by a uniform radius.
pub fn random_test_functions(count: usize, terms: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut c: Vec<C64> = (0..terms)
                .map(|_| C64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
                .collect();
            let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let radius = rng.random::<f64>();
            for z in &mut c {
                *z *= radius / norm;
            }
            TestFunction { coeffs: c }
        })
        .collect()
}

/// One line of the ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftEntry {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub violated: bool,
}

/// Outcome of a lift verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftLedger {
    pub operator_id: String,
    pub m: usize,
    pub kernel_tail_sup: f64,
    pub christoffel: f64,
    pub entries: Vec<LiftEntry>,
    pub violations: usize,
}

/// Checks the lifting inequality for each test function.
///
/// The left side is a maximum over `grid` (a lower bound on the sup norm); the right side
/// is computed exactly from coefficients. Any mapping into V_m must satisfy it.
pub fn verify_lift(
    approx: &Approximant,
    spec: &RkhsSpec,
    m: usize,
    functions: &[TestFunction],
    grid: &Points,
) -> Result<LiftLedger> {
    if approx.range_dim() > m {
        return Err(Error::invalid(format!(
            "approximant range {} exceeds m = {m}",
            approx.range_dim()
        )));
    }
    if functions.is_empty() {
        return Err(Error::invalid("no test functions"));
    }
    let terms = functions.iter().map(|f| f.coeffs.len()).max().unwrap_or(0).max(m);
    let basis = spec.basis();
    let count = functions.len();
    // Expansion coefficients a_k = c_k sigma_k, one column per function.
    let mut a = DMatrix::<C64>::zeros(terms, count);
    for (j, f) in functions.iter().enumerate() {
        for (k, c) in f.coeffs.iter().enumerate() {
            a[(k, j)] = c * spec.sigma(k + 1)?;
        }
    }
    let asplit = SplitMatrix::from_complex(&a);
    let bgrid = basis.design_matrix(grid, terms)?;
    let fgrid = SplitMatrix::from_complex(&bgrid).mul(&asplit);
    // Coefficients of Af in V_m.
    let approx_coeffs: DMatrix<C64> = match approx {
        Approximant::Zero => DMatrix::zeros(m, count),
        Approximant::Projection { m: r } => {
            let mut out = DMatrix::zeros(m, count);
            for k in 0..*r {
                out.row_mut(k).copy_from(&a.row(k));
            }
            out
        }
        Approximant::Sampled(op) => {
            let bx = basis.design_matrix(op.points(), terms)?;
            let fx = SplitMatrix::from_complex(&bx).mul(&asplit);
            let c = SplitMatrix::from_complex(op.map()).mul(&SplitMatrix::from_complex(&fx));
            let mut out = DMatrix::zeros(m, count);
            out.rows_mut(0, op.m()).copy_from(&c);
            out
        }
    };
    let agrid = SplitMatrix::from_complex(&bgrid.columns(0, m).into_owned())
        .mul(&SplitMatrix::from_complex(&approx_coeffs));
    let ktail = spec.kernel_tail_sup(m)?;
    let lambda = christoffel_exact(basis, m)?;
    let mut entries = Vec::with_capacity(count);
    for (j, f) in functions.iter().enumerate() {
        let lhs = (0..grid.len())
            .map(|i| (fgrid[(i, j)] - agrid[(i, j)]).norm())
            .fold(0.0, f64::max);
        let h_tail: f64 = f.coeffs.iter().skip(m).map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let l2_sq: f64 = (0..terms)
            .map(|k| {
                let ak = if k < m { approx_coeffs[(k, j)] } else { C64::new(0.0, 0.0) };
                (a[(k, j)] - ak).norm_sqr()
            })
            .sum();
        let rhs = ktail.sqrt() * h_tail + lambda * l2_sq.sqrt();
        let margin = rhs - lhs;
        let violated = lhs > rhs + LIFT_TOLERANCE * rhs.max(1.0);
        entries.push(LiftEntry {
            index: j,
            lhs,
            rhs,
            margin,
            violated,
        });
    }
    let violations = entries.iter().filter(|e| e.violated).count();
    Ok(LiftLedger {
        operator_id: approx.id(),
        m,
        kernel_tail_sup: ktail,
        christoffel: lambda,
        entries,
        violations,
    })
}
