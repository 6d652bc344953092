//! Sampling densities built from Christoffel functions and random sample plans.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisFamily, BasisSystem, DomainKind, Points};
use crate::christoffel::christoffel_exact;
use crate::error::{Error, Result};
use crate::rkhs::RkhsSpec;

/// Relative size of the spectral mass beyond M that the default choice of M tolerates.
pub const DEFAULT_MIDDLE_TOLERANCE: f64 = 1e-3;

/// Rejection sampling aborts when the acceptance rate falls below this value.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Number of samples n = ceil(gamma m ln(m + 1)), never below m.
pub fn sample_count(m: usize, gamma: f64) -> Result<usize> {
    if m == 0 || !(gamma > 0.0) {
        return Err(Error::invalid("sample count needs m >= 1 and gamma > 0"));
    }
    let n = (gamma * m as f64 * (m as f64 + 1.0).ln()).ceil() as usize;
    Ok(n.max(m))
}

/// Mixture weights and normalizing constants of a density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityNormalization {
    pub head_weight: f64,
    pub middle_weight: f64,
    pub uniform_weight: f64,
    /// sum_{m < k <= M} sigma_k^2.
    pub middle_mass: f64,
    /// The middle term was dropped because its spectral mass vanishes.
    pub middle_dropped: bool,
    /// M was capped by the available spectrum before reaching the tolerance.
    pub truncation_capped: bool,
}

/// rho_{m,M} = (1/3)[ (1/m) sum_{k<=m} |b_k|^2 + sum_{m<k<=M} sigma_k^2 |b_k|^2 / S + 1/mu(D) ].
#[derive(Clone, Debug)]
pub struct SamplingDensity {
    basis: BasisSystem,
    m: usize,
    big_m: usize,
    middle_sq: Vec<f64>,
    norm: DensityNormalization,
    mass: f64,
    sup: f64,
}

impl SamplingDensity {
    /// Density for range dimension `m`; `big_m = None` picks the default truncation.
    pub fn new(spec: &RkhsSpec, m: usize, big_m: Option<usize>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("density needs m >= 1"));
        }
        let max = spec.max_index();
        if m > max {
            return Err(Error::IndexOutOfRange { index: m, size: max });
        }
        let mut capped = false;
        let big_m = match big_m {
            Some(b) => {
                if b < m {
                    return Err(Error::invalid(format!("need M >= m, got M = {b}, m = {m}")));
                }
                if b > max {
                    return Err(Error::IndexOutOfRange { index: b, size: max });
                }
                b
            }
            None => {
                let (b, c) = default_truncation(spec, m)?;
                capped = c;
                b
            }
        };
        let mut middle_sq = Vec::with_capacity(big_m - m);
        for k in m + 1..=big_m {
            let s = spec.sigma(k)?;
            middle_sq.push(s * s);
        }
        let middle_mass: f64 = middle_sq.iter().rev().sum();
        let dropped = !(middle_mass > 0.0);
        let (hw, mw, uw) = if dropped {
            (0.5, 0.0, 0.5)
        } else {
            (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        };
        let mass = spec.mass();
        let basis = spec.basis().clone();
        let lambda = christoffel_exact(&basis, m)?;
        let middle_sup = if dropped {
            0.0
        } else {
            middle_sq
                .iter()
                .enumerate()
                .map(|(i, s)| s * basis.sup_norm_sq(m + 1 + i))
                .sum::<f64>()
                / middle_mass
        };
        let sup = hw * lambda * lambda / m as f64 + mw * middle_sup + uw / mass;
        Ok(SamplingDensity {
            basis,
            m,
            big_m,
            middle_sq,
            norm: DensityNormalization {
                head_weight: hw,
                middle_weight: mw,
                uniform_weight: uw,
                middle_mass,
                middle_dropped: dropped,
                truncation_capped: capped,
            },
            mass,
            sup,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn truncation(&self) -> usize {
        self.big_m
    }

    pub fn normalization(&self) -> &DensityNormalization {
        &self.norm
    }

    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    /// Upper bound on sup_x rho(x), exact for both supported families.
    pub fn sup_bound(&self) -> f64 {
        self.sup
    }

    /// rho(x) with respect to the reference measure.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let vals = self.basis.eval_prefix(x, self.big_m)?;
        let head: f64 = vals[..self.m].iter().map(|v| v.norm_sqr()).sum::<f64>() / self.m as f64;
        let middle = if self.norm.middle_dropped {
            0.0
        } else {
            vals[self.m..]
                .iter()
                .zip(&self.middle_sq)
                .map(|(v, s)| s * v.norm_sqr())
                .sum::<f64>()
                / self.norm.middle_mass
        };
        Ok(self.norm.head_weight * head
            + self.norm.middle_weight * middle
            + self.norm.uniform_weight / self.mass)
    }

    fn is_uniform(&self) -> bool {
        matches!(self.basis.family(), BasisFamily::Trigonometric)
    }
}

/// Default M: at least 4m, and large enough that the mass beyond M is below
/// `DEFAULT_MIDDLE_TOLERANCE` times the mass beyond m. Capped by the spectrum.
fn default_truncation(spec: &RkhsSpec, m: usize) -> Result<(usize, bool)> {
    let max = spec.max_index();
    let target = DEFAULT_MIDDLE_TOLERANCE * spec.tail_sum(m)?.total();
    let mut b = (4 * m).min(max);
    loop {
        if b >= max {
            return Ok((max, spec.tail_sum(max)?.total() > target));
        }
        if spec.tail_sum(b)?.total() <= target {
            // Bisect back to the smallest admissible M.
            let mut lo = (b / 2).max(4 * m);
            let mut hi = b;
            if lo >= hi || spec.tail_sum(lo)?.total() <= target {
                return Ok((lo.min(hi), false));
            }
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if spec.tail_sum(mid)?.total() <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok((hi, false));
        }
        b = (2 * b).min(max);
    }
}

/// Seeded i.i.d. sample points with their density values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplePlan {
    pub points: Points,
    pub density: Vec<f64>,
    pub seed: u64,
    pub m: usize,
    pub big_m: usize,
    pub n: usize,
    pub oversampling: Option<f64>,
    /// Lattice coordinates (flattened, `dim` per point) when points lie on a kernel lattice.
    pub lattice: Option<Vec<u32>>,
    pub acceptance_rate: f64,
}

impl SamplePlan {
    /// Least-squares weights w_i = 1 / (n rho(x_i)).
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.density.iter().map(|r| 1.0 / (n * r)).collect()
    }

    /// CSV with one row per point: coordinates then density.
    pub fn to_csv(&self) -> String {
        let d = self.points.dim();
        let mut out = String::new();
        let cols: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",density\n");
        for (i, x) in self.points.iter().enumerate() {
            for v in x {
                out.push_str(&format!("{v:.17e},"));
            }
            out.push_str(&format!("{:.17e}\n", self.density[i]));
        }
        out
    }

    /// JSON sidecar with the sampling metadata.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "m": self.m,
            "M": self.big_m,
            "n": self.n,
            "oversampling": self.oversampling,
            "dim": self.points.dim(),
            "on_lattice": self.lattice.is_some(),
            "acceptance_rate": self.acceptance_rate,
        })
    }
}

/// Draws n i.i.d. points from the density.
///
/// When `lattice_bits` is given on the torus, proposals are uniform on the lattice
/// with 2^bits points per axis. Trigonometric densities are identically 1 so every
/// proposal is accepted; otherwise rejection from the uniform envelope is used.
pub fn draw_samples(
    density: &SamplingDensity,
    n: usize,
    seed: u64,
    stream: u64,
    lattice_bits: Option<u32>,
) -> Result<SamplePlan> {
    let space = density.basis.space().clone();
    let dim = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let lattice_bits = match space.kind() {
        DomainKind::Torus => lattice_bits,
        DomainKind::Interval => None,
    };
    let cells = lattice_bits.map(|b| 1u64 << b);
    let mut points = Points::empty(dim);
    let mut lattice = lattice_bits.map(|_| Vec::with_capacity(n * dim));
    let mut dens = Vec::with_capacity(n);
    let mut proposals: u64 = 0;
    let envelope = density.sup_bound();
    let mut x = vec![0.0; dim];
    let mut lat = vec![0u32; dim];
    while dens.len() < n {
        proposals += 1;
        for j in 0..dim {
            x[j] = match (space.kind(), cells) {
                (DomainKind::Torus, Some(c)) => {
                    let p = rng.random_range(0..c);
                    lat[j] = p as u32;
                    2.0 * PI * p as f64 / c as f64
                }
                (DomainKind::Torus, None) => 2.0 * PI * rng.random::<f64>(),
                (DomainKind::Interval, _) => 2.0 * rng.random::<f64>() - 1.0,
            };
        }
        let rho = density.eval(&x)?;
        let accept = density.is_uniform() || rng.random::<f64>() * envelope <= rho;
        if accept {
            points.push(&x);
            if let Some(l) = lattice.as_mut() {
                l.extend_from_slice(&lat);
            }
            dens.push(rho);
        }
        if proposals >= 10_000 && (dens.len() as f64) < MIN_ACCEPTANCE * proposals as f64 {
            return Err(Error::Sampling(format!(
                "acceptance rate {:.3e} below {MIN_ACCEPTANCE:e}",
                dens.len() as f64 / proposals as f64
            )));
        }
    }
    Ok(SamplePlan {
        points,
        density: dens,
        seed,
        m: density.m,
        big_m: density.big_m,
        n,
        oversampling: None,
        lattice,
        acceptance_rate: n as f64 / proposals.max(1) as f64,
    })
}

/// Stream index for the `trial`-th plan at the `m_index`-th schedule entry.
pub fn stream_id(m_index: usize, trial: usize) -> u64 {
    ((m_index as u64) << 32) | trial as u64
}

/// Density and seeded plan with n = ceil(gamma m ln(m+1)) for a specification.
pub fn plan_for(
    spec: &RkhsSpec,
    m: usize,
    gamma: f64,
    seed: u64,
    stream: u64,
) -> Result<SamplePlan> {
    let density = SamplingDensity::new(spec, m, None)?;
    let n = sample_count(m, gamma)?;
    let bits = spec.lattice().map(|l| l.points_per_axis().trailing_zeros());
    let mut plan = draw_samples(&density, n, seed, stream, bits)?;
    plan.oversampling = Some(gamma);
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_uses_natural_log() {
        assert_eq!(sample_count(16, 2.0).unwrap(), (32.0 * 17f64.ln()).ceil() as usize);
        assert_eq!(sample_count(1, 0.1).unwrap(), 1);
    }

    #[test]
    fn trig_density_is_one() {
        let spec = RkhsSpec::sobolev_mixed(1.0, 1, 256).unwrap();
        let d = SamplingDensity::new(&spec, 16, None).unwrap();
        for t in [0.0, 0.3, 2.0, 6.0] {
            assert!((d.eval(&[t]).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_envelope_dominates() {
        let spec = RkhsSpec::legendre_sobolev(2.0, 512).unwrap();
        let d = SamplingDensity::new(&spec, 8, None).unwrap();
        let sup = d.sup_bound();
        assert!((d.eval(&[1.0]).unwrap() - sup).abs() < 1e-12 * sup);
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            assert!(d.eval(&[x]).unwrap() <= sup * (1.0 + 1e-12));
        }
    }
}
