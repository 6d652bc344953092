//! RKHS specifications: a basis paired with a spectrum, plus exact lattice kernels.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::alpha::AlphaSequence;
use crate::basis::{BasisFamily, BasisSystem};
use crate::error::{Error, Result};
use crate::index_set::{hyperbolic_cross, hyperbolic_cross_cardinality};
use crate::spectrum::{SpectrumSequence, TailRule, TailSum, WeightRule};

/// Default number of lattice points per torus axis (2^16).
pub const DEFAULT_LATTICE_BITS: u32 = 16;

/// Size of the nominal Legendre system (indices beyond this are never needed).
const LEGENDRE_NOMINAL_SIZE: usize = 10_000_000;

/// Exact product kernel prod_j kappa(x_j - y_j) of a Sobolev-mixed space on a lattice.
///
/// kappa(t) = sum_{r in Z} (1 + |r|)^{-2s} e^{i r t} is tabulated at t_p = 2 pi p / N by a
/// length-N inverse DFT of the aliased coefficients sum_q (1 + |r + qN|)^{-2s}, which are
/// evaluated with the Hurwitz zeta function.
#[derive(Clone, Debug)]
pub struct LatticeKernel {
    bits: u32,
    dim: usize,
    table: Vec<f64>,
    err_1d: f64,
}

impl LatticeKernel {
    pub fn sobolev_mixed(s: f64, dim: usize, bits: u32) -> Result<Self> {
        if !(4..=24).contains(&bits) {
            return Err(Error::invalid(format!("lattice bits {bits} outside 4..=24")));
        }
        let n = 1usize << bits;
        let nf = n as f64;
        let two_s = 2.0 * s;
        let scale = nf.powf(-two_s);
        let mut coeffs: Vec<Complex<f64>> = (0..n)
            .map(|r| {
                let rc = if r > n / 2 { r as f64 - nf } else { r as f64 };
                let main = (1.0 + rc.abs()).powf(-two_s);
                let up = crate::special::hurwitz_zeta(two_s, 1.0 + (1.0 + rc) / nf);
                let down = crate::special::hurwitz_zeta(two_s, 1.0 + (1.0 - rc) / nf);
                Complex::new(main + scale * (up + down), 0.0)
            })
            .collect();
        let abs_sum: f64 = coeffs.iter().map(|c| c.re).sum();
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(n).process(&mut coeffs);
        let table = coeffs.iter().map(|c| c.re).collect();
        let err_1d = 64.0 * f64::EPSILON * bits as f64 * abs_sum;
        Ok(LatticeKernel {
            bits,
            dim,
            table,
            err_1d,
        })
    }

    pub fn points_per_axis(&self) -> usize {
        1 << self.bits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lattice coordinate of a torus point, or `None` when it is off the lattice.
    pub fn to_lattice(&self, x: &[f64]) -> Option<Vec<u32>> {
        let n = self.points_per_axis() as f64;
        x.iter()
            .map(|&t| {
                let u = t * n / (2.0 * PI);
                let p = u.round();
                if (u - p).abs() < 1e-6 {
                    Some((p as i64).rem_euclid(n as i64) as u32)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Torus coordinate of a lattice point.
    pub fn coordinate(&self, p: u32) -> f64 {
        2.0 * PI * p as f64 / self.points_per_axis() as f64
    }

    /// K(x, y) for lattice points.
    #[inline]
    pub fn eval(&self, p: &[u32], q: &[u32]) -> f64 {
        let mask = (self.points_per_axis() - 1) as u32;
        let mut v = 1.0;
        for (a, b) in p.iter().zip(q) {
            v *= self.table[(a.wrapping_sub(*b) & mask) as usize];
        }
        v
    }

    /// One-dimensional table kappa(2 pi p / N).
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Diagonal value K(x, x).
    pub fn diag(&self) -> f64 {
        self.table[0].powi(self.dim as i32)
    }

    /// Bound on the rounding error of one kernel evaluation.
    pub fn eval_error(&self) -> f64 {
        let k0 = self.table[0];
        self.dim as f64 * k0.powi(self.dim as i32 - 1) * self.err_1d * 1.01
    }
}

/// A basis system paired with a spectrum: kernel K = sum_k sigma_k^2 b_k conj(b_k).
#[derive(Clone, Debug)]
pub struct RkhsSpec {
    basis: BasisSystem,
    spectrum: SpectrumSequence,
    lattice: Option<Arc<LatticeKernel>>,
    label: String,
}

impl RkhsSpec {
    /// Sobolev space of dominating mixed smoothness s on T^d, at least `min_len` stored terms.
    pub fn sobolev_mixed(s: f64, d: usize, min_len: usize) -> Result<Self> {
        Self::sobolev_mixed_with_lattice(s, d, min_len, DEFAULT_LATTICE_BITS)
    }

    pub fn sobolev_mixed_with_lattice(s: f64, d: usize, min_len: usize, bits: u32) -> Result<Self> {
        let rule = WeightRule::sobolev_mixed(s, d)?;
        let spectrum = SpectrumSequence::from_rule(&rule, min_len)?;
        let freqs = spectrum.map().expect("sobolev spectra carry a map").to_vec();
        let basis = BasisSystem::trigonometric(d, freqs)?;
        let lattice = LatticeKernel::sobolev_mixed(s, d, bits)?;
        Ok(RkhsSpec {
            basis,
            spectrum,
            lattice: Some(Arc::new(lattice)),
            label: format!("sobolev-mixed(s={s}, d={d})"),
        })
    }

    /// Legendre-Sobolev space H(K_s) on [-1, 1] with `len` stored spectral values.
    pub fn legendre_sobolev(s: f64, len: usize) -> Result<Self> {
        let rule = WeightRule::legendre_sobolev(s)?;
        let spectrum = SpectrumSequence::from_rule(&rule, len)?;
        Ok(RkhsSpec {
            basis: BasisSystem::legendre(LEGENDRE_NOMINAL_SIZE)?,
            spectrum,
            lattice: None,
            label: format!("legendre-sobolev(s={s})"),
        })
    }

    /// Finite intermediate RKHS H_M on the torus for a rate sequence alpha.
    ///
    /// The basis is the trigonometric system in canonical hyperbolic-cross order and
    /// sigma_k^2 = alpha_{ceil(k/2)} / sqrt(k) for k <= truncation, zero beyond.
    pub fn intermediate(alpha: &AlphaSequence, truncation: usize) -> Result<Self> {
        let d = alpha.dim();
        let mut level = 1;
        while hyperbolic_cross_cardinality(level, d) < truncation as u128 {
            level += 1;
        }
        let set = hyperbolic_cross(level, d)?;
        let basis = BasisSystem::trigonometric(d, set.indices()[..truncation].to_vec())?;
        let spectrum = SpectrumSequence::intermediate(alpha, truncation)?;
        Ok(RkhsSpec {
            basis,
            spectrum,
            lattice: None,
            label: format!("intermediate({:?}, d={d}, M={truncation})", alpha.class()),
        })
    }

    /// Custom pairing; the basis must cover the stored spectrum.
    pub fn new(basis: BasisSystem, spectrum: SpectrumSequence, label: &str) -> Result<Self> {
        if basis.len() < spectrum.len() && !matches!(spectrum.tail_rule(), TailRule::Finite) {
            return Err(Error::DimensionMismatch(
                "basis shorter than the stored spectrum".into(),
            ));
        }
        Ok(RkhsSpec {
            basis,
            spectrum,
            lattice: None,
            label: label.to_string(),
        })
    }

    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    pub fn spectrum(&self) -> &SpectrumSequence {
        &self.spectrum
    }

    pub fn lattice(&self) -> Option<&LatticeKernel> {
        self.lattice.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mass(&self) -> f64 {
        self.basis.space().total_mass()
    }

    pub fn dim(&self) -> usize {
        self.basis.space().dim()
    }

    /// Largest index usable in coefficient computations (basis and spectrum both defined).
    pub fn max_index(&self) -> usize {
        match self.spectrum.tail_rule() {
            TailRule::Finite => self.spectrum.len(),
            TailRule::ClosedTotal { .. } => self.spectrum.len().min(self.basis.len()),
            _ => self.basis.len(),
        }
    }

    /// True when sigma_k = 0 for all k beyond `max_index`.
    pub fn is_finite(&self) -> bool {
        matches!(self.spectrum.tail_rule(), TailRule::Finite)
    }

    pub fn sigma(&self, k: usize) -> Result<f64> {
        self.spectrum.sigma(k).ok_or_else(|| {
            Error::MissingTailRule(format!("sigma_{k} lies beyond the stored spectrum"))
        })
    }

    pub fn tail_sum(&self, m: usize) -> Result<TailSum> {
        self.spectrum.tail_sum(m)
    }

    pub fn gelfand_lower(&self, m: usize) -> Result<f64> {
        self.spectrum.gelfand_lower(m, self.mass())
    }

    /// Bound on sum_{k > big_m} sigma_k^2 sup_x |b_k(x)|^2.
    pub fn sup_weighted_remainder(&self, big_m: usize) -> Result<f64> {
        let len = self.spectrum.len();
        match self.basis.family() {
            BasisFamily::Trigonometric => {
                let t = self.spectrum.tail_sum(big_m)?;
                // tail_sum covers stored terms beyond big_m too
                if big_m < len {
                    Ok(t.total())
                } else {
                    Ok(t.remainder)
                }
            }
            BasisFamily::Legendre => {
                // sup |b_k|^2 = (2k - 1)/2 <= k
                let t = self.spectrum.power_weighted_tail(big_m, 1.0)?;
                if big_m < len {
                    Ok(t.total())
                } else {
                    Ok(t.remainder)
                }
            }
        }
    }

    /// Upper bound on ||K_m||_inf = sup_x K_m(x, x), tight up to the tail remainder.
    pub fn kernel_tail_sup(&self, m: usize) -> Result<f64> {
        match self.basis.family() {
            BasisFamily::Trigonometric => Ok(self.spectrum.tail_sum(m)?.total()),
            BasisFamily::Legendre => {
                // Attained at x = 1 where |b_k(1)|^2 = k - 1/2.
                let w1 = self.spectrum.power_weighted_tail(m, 1.0)?;
                let w0 = self.spectrum.tail_sum(m)?;
                Ok(w1.value - 0.5 * w0.value + w1.remainder)
            }
        }
    }

    /// Tail kernel diagonal K_m(x, x) truncated at M, with the certified remainder.
    pub fn tail_kernel_diag(&self, m: usize, x: &[f64], big_m: usize) -> Result<TailSum> {
        if m >= big_m {
            return Err(Error::invalid(format!("need m < M, got m = {m}, M = {big_m}")));
        }
        let vals = self.basis.eval_prefix(x, big_m)?;
        let mut acc = 0.0;
        for k in (m + 1..=big_m).rev() {
            let s = self.sigma(k)?;
            acc += s * s * vals[k - 1].norm_sqr();
        }
        let remainder = self.sup_weighted_remainder(big_m)?;
        Ok(TailSum {
            value: acc,
            remainder,
            exact: false,
        })
    }
}
