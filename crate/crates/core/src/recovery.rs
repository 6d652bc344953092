//! Weighted least-squares recovery onto the span of the first m basis functions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{BasisSystem, Points, C64};
use crate::error::{Error, Result};
use crate::linalg::cmul;
use crate::sampling::SamplePlan;

/// Relative singular-value threshold below which the design is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Row weighting of the least-squares problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// w_i = 1 / (n rho(x_i)).
    Weighted,
    /// w_i = 1 / n.
    Unweighted,
}

/// Extreme singular values of the weighted design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub s_min: f64,
    pub s_max: f64,
}

/// The linear map f(X) -> coefficients of the least-squares fit in V_m.
///
/// Stored as the (m x n) matrix G with coefficients c = G f(X). The recovered
/// function is sum_i f(x_i) phi_i(x) with phi_i(x) = sum_k G[k, i] b_k(x).
#[derive(Clone, Debug)]
pub struct RecoveryOperator {
    basis: BasisSystem,
    m: usize,
    plan: SamplePlan,
    weights: Vec<f64>,
    weighting: Weighting,
    map: DMatrix<C64>,
    conditioning: Conditioning,
    id: String,
}

impl RecoveryOperator {
    /// Solves the weighted problem through a QR factorization of W^{1/2} B followed by an
    /// SVD of the triangular factor.
    pub fn build(basis: &BasisSystem, m: usize, plan: &SamplePlan, weighting: Weighting) -> Result<Self> {
        let n = plan.points.len();
        if m == 0 || m > basis.len() {
            return Err(Error::IndexOutOfRange {
                index: m,
                size: basis.len(),
            });
        }
        if n < m {
            return Err(Error::invalid(format!("{n} samples cannot determine {m} coefficients")));
        }
        if plan.density.len() != n {
            return Err(Error::DimensionMismatch("density values per sample".into()));
        }
        let weights = match weighting {
            Weighting::Weighted => plan.weights(),
            Weighting::Unweighted => vec![1.0 / n as f64; n],
        };
        let mut a = basis.design_matrix(&plan.points, m)?;
        let root: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        for (i, r) in root.iter().enumerate() {
            a.row_mut(i).scale_mut(*r);
        }
        let qr = a.qr();
        let q = qr.q();
        let r = qr.r();
        let svd = r.svd(true, true);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        if !(s_min > RANK_TOLERANCE * s_max) {
            return Err(Error::RankDeficient { s_min, s_max });
        }
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested V^T");
        // R^{-1} = V S^{-1} U^H
        let mut vs = v_t.adjoint();
        for (j, s) in svd.singular_values.iter().enumerate() {
            vs.column_mut(j).scale_mut(1.0 / s);
        }
        let rinv = vs * u.adjoint();
        let mut qh = q.adjoint();
        for (i, r) in root.iter().enumerate() {
            qh.column_mut(i).scale_mut(*r);
        }
        let map = cmul(&rinv, &qh);
        let id = operator_id(basis, m, plan, weighting);
        Ok(RecoveryOperator {
            basis: basis.clone(),
            m,
            plan: plan.clone(),
            weights,
            weighting,
            map,
            conditioning: Conditioning { s_min, s_max },
            id,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.plan.points.len()
    }

    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.plan
    }

    pub fn points(&self) -> &Points {
        &self.plan.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    /// The (m x n) coefficient map G.
    pub fn map(&self) -> &DMatrix<C64> {
        &self.map
    }

    pub fn conditioning(&self) -> Conditioning {
        self.conditioning
    }

    /// Stable identifier derived from the basis, m, the sample points and the weighting.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Coefficients of the fit to sample values f(x_1..x_n).
    pub fn apply(&self, values: &[C64]) -> Result<Vec<C64>> {
        if values.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} samples",
                values.len(),
                self.n()
            )));
        }
        let v = DVector::from_column_slice(values);
        Ok((&self.map * v).iter().cloned().collect())
    }

    /// Cardinal functions phi_1(x), ..., phi_n(x).
    pub fn cardinal_functions(&self, x: &[f64]) -> Result<Vec<C64>> {
        let b = DVector::from_vec(self.basis.eval_prefix(x, self.m)?);
        Ok((self.map.transpose() * b).iter().cloned().collect())
    }

    /// Evaluates sum_k coeffs[k] b_k(x).
    pub fn eval_coeffs(&self, coeffs: &[C64], x: &[f64]) -> Result<C64> {
        eval_expansion(&self.basis, coeffs, x)
    }

    /// Max-abs deviation of A b_k from b_k over k <= m (zero for an exact projector).
    pub fn idempotence_defect(&self) -> Result<f64> {
        let b = self.basis.design_matrix(&self.plan.points, self.m)?;
        let gb = cmul(&self.map, &b);
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((gb[(i, j)] - target).norm());
            }
        }
        Ok(worst)
    }

    /// Max-abs weighted inner product between the residual f(X) - B c and the columns of B.
    pub fn residual_orthogonality_defect(&self, values: &[C64]) -> Result<f64> {
        let c = DVector::from_vec(self.apply(values)?);
        let b = self.basis.design_matrix(&self.plan.points, self.m)?;
        let fitted = &b * c;
        let mut worst: f64 = 0.0;
        for k in 0..self.m {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..self.n() {
                acc += (values[i] - fitted[i]) * b[(i, k)].conj() * self.weights[i];
            }
            worst = worst.max(acc.norm());
        }
        Ok(worst)
    }

    /// Copy of the operator whose map entries are multiplied by (1 + eps u), u uniform in
    /// [-1, 1]. Used as a negative control: it is no longer a projector.
    pub fn perturbed(&self, eps: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = self.map.map(|z| z * (1.0 + eps * (2.0 * rng.random::<f64>() - 1.0)));
        let mut out = self.clone();
        out.map = map;
        out.id = format!("{}-perturbed-{eps:e}-{seed}", self.id);
        out
    }
}

fn operator_id(basis: &BasisSystem, m: usize, plan: &SamplePlan, weighting: Weighting) -> String {
    let mut h = Sha256::new();
    h.update(format!("{:?}|{}|{m}|{weighting:?}|", basis.family(), basis.space().dim()).as_bytes());
    for v in plan.points.coords() {
        h.update(v.to_le_bytes());
    }
    for v in &plan.density {
        h.update(v.to_le_bytes());
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// sum_k coeffs[k] b_{k+1}(x).
pub fn eval_expansion(basis: &BasisSystem, coeffs: &[C64], x: &[f64]) -> Result<C64> {
    let vals = basis.eval_prefix(x, coeffs.len())?;
    Ok(vals.iter().zip(coeffs).map(|(b, c)| b * c).sum())
}

/// One-shot weighted least-squares fit of sample values.
pub fn fit_wls(
    basis: &BasisSystem,
    m: usize,
    plan: &SamplePlan,
    values: &[C64],
    weighting: Weighting,
) -> Result<Vec<C64>> {
    RecoveryOperator::build(basis, m, plan, weighting)?.apply(values)
}

/// An approximation scheme whose worst-case error can be evaluated.
#[derive(Clone, Copy, Debug)]
pub enum Approximant<'a> {
    /// The zero map.
    Zero,
    /// Orthogonal projection onto V_m.
    Projection { m: usize },
    /// A sampling-based least-squares operator.
    Sampled(&'a RecoveryOperator),
}

impl Approximant<'_> {
    pub fn range_dim(&self) -> usize {
        match self {
            Approximant::Zero => 0,
            Approximant::Projection { m } => *m,
            Approximant::Sampled(op) => op.m(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Approximant::Zero => "zero".into(),
            Approximant::Projection { m } => format!("projection-{m}"),
            Approximant::Sampled(op) => op.id().to_string(),
        }
    }

    pub fn weighting(&self) -> Option<Weighting> {
        match self {
            Approximant::Sampled(op) => Some(op.weighting()),
            _ => None,
        }
    }
}
