//! Best-approximation rate sequences alpha_m for non-Hilbert classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_set::hyperbolic_cross_cardinality;
use crate::special::{hurwitz_zeta, power_sum};

/// Class and parameters generating alpha_m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum AlphaClass {
    /// H^r_p (Nikol'skii-Besov): 2^{-l(r - (1/p - 1/2)_+)} l^{(d-1)/2}.
    NikolskiiBesov { r: f64, p: f64 },
    /// W^r_p (mixed Sobolev): 2^{-l(r - (1/p - 1/2)_+)}.
    SobolevLp { r: f64, p: f64 },
    /// Mixed Wiener class: 2^{-l r}.
    Wiener { r: f64 },
    /// Korobov class: 2^{-(r - 1/2) l} l^{(d-1)/2}.
    Korobov { r: f64 },
    /// alpha_m = c m^{-a} for m >= 1.
    Power { c: f64, a: f64 },
    /// alpha_1, ..., alpha_L explicitly, zero beyond.
    Table { values: Vec<f64> },
}

/// Levels beyond this use counting bounds instead of exact cardinalities.
const MAX_EXACT_CARDINALITY: u128 = 1 << 34;
/// Levels summed explicitly in series tails before the ratio bound.
const MAX_SERIES_LEVEL: u32 = 4000;

/// A non-increasing rate sequence m -> alpha_m with exact level cardinalities.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlphaSequence {
    class: AlphaClass,
    d: usize,
    /// counts[l] = |Omega_l| for l = 0..counts.len().
    counts: Vec<u128>,
}

impl AlphaSequence {
    pub fn new(class: AlphaClass, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("alpha sequence needs d >= 1"));
        }
        match &class {
            AlphaClass::NikolskiiBesov { r, p } | AlphaClass::SobolevLp { r, p } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(Error::invalid(format!("need 1 < p < infinity, got p = {p}")));
                }
                let lo = 0.5f64.max(1.0 / p);
                if !(*r > lo) {
                    return Err(Error::invalid(format!("need r > max(1/2, 1/p) = {lo}, got r = {r}")));
                }
            }
            AlphaClass::Wiener { r } => {
                if !(*r > 0.5) {
                    return Err(Error::invalid(format!("wiener class needs r > 1/2, got {r}")));
                }
            }
            AlphaClass::Korobov { r } => {
                if !(*r > 1.0) {
                    return Err(Error::invalid(format!("korobov class needs r > 1, got {r}")));
                }
            }
            AlphaClass::Power { c, a } => {
                if !(*c > 0.0) || !(*a >= 0.0) {
                    return Err(Error::invalid("power alpha needs c > 0 and a >= 0"));
                }
            }
            AlphaClass::Table { values } => {
                if values.iter().any(|v| !(*v >= 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::invalid("alpha table must be non-negative and non-increasing"));
                }
            }
        }
        let mut counts = vec![0u128];
        if Self::level_exponents(&class, d).is_some() {
            let mut l = 1;
            loop {
                let c = hyperbolic_cross_cardinality(l, d);
                counts.push(c);
                if c > MAX_EXACT_CARDINALITY || l >= 60 {
                    break;
                }
                l += 1;
            }
        }
        Ok(AlphaSequence { class, d, counts })
    }

    pub fn class(&self) -> &AlphaClass {
        &self.class
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// (a, b) with raw rate 2^{-a l} l^b, for the level-based classes.
    fn level_exponents(class: &AlphaClass, d: usize) -> Option<(f64, f64)> {
        let half_dm1 = (d as f64 - 1.0) / 2.0;
        match *class {
            AlphaClass::NikolskiiBesov { r, p } => Some((r - (1.0 / p - 0.5).max(0.0), half_dm1)),
            AlphaClass::SobolevLp { r, p } => Some((r - (1.0 / p - 0.5).max(0.0), 0.0)),
            AlphaClass::Wiener { r } => Some((r, 0.0)),
            AlphaClass::Korobov { r } => Some((r - 0.5, half_dm1)),
            _ => None,
        }
    }

    /// Closed-form rate 2^{-a l} l^b at level l (constant 1).
    pub fn alpha_raw(&self, level: u32) -> Result<f64> {
        let (a, b) = Self::level_exponents(&self.class, self.d)
            .ok_or_else(|| Error::Unsupported("class has no level form".into()))?;
        let l = level as f64;
        let lb = if b == 0.0 { 1.0 } else { l.powf(b) };
        Ok((-a * l).exp2() * lb)
    }

    /// Non-increasing envelope sup_{l' >= l} of [`AlphaSequence::alpha_raw`].
    pub fn alpha_value(&self, level: u32) -> Result<f64> {
        let (a, b) = Self::level_exponents(&self.class, self.d)
            .ok_or_else(|| Error::Unsupported("class has no level form".into()))?;
        let peak = if b == 0.0 { 0.0 } else { b / (a * std::f64::consts::LN_2) };
        let last = (peak.ceil() as u32).max(level);
        let mut best = 0.0f64;
        for l in level..=last {
            best = best.max(self.alpha_raw(l)?);
        }
        Ok(best)
    }

    /// Level l(m) with |Omega_l| <= m < |Omega_{l+1}|.
    pub fn level_of(&self, m: u128) -> u32 {
        let mut l = 0;
        while l + 1 < self.counts.len() && self.counts[l + 1] <= m {
            l += 1;
        }
        if l + 1 == self.counts.len() {
            // beyond the exactly counted levels use the lower bound |Omega_l| >= 2^{l+1} - 1
            let mut lf = l as u32;
            while lf < 120 && (1u128 << (lf + 2)) - 1 <= m {
                lf += 1;
            }
            return lf;
        }
        l as u32
    }

    /// alpha_m for m >= 0.
    pub fn alpha_at(&self, m: usize) -> Result<f64> {
        match &self.class {
            AlphaClass::Power { c, a } => Ok(c * (m.max(1) as f64).powf(-a)),
            AlphaClass::Table { values } => Ok(if m == 0 {
                values.first().copied().unwrap_or(0.0)
            } else {
                values.get(m - 1).copied().unwrap_or(0.0)
            }),
            _ => self.alpha_value(self.level_of(m as u128)),
        }
    }

    /// sum_{k > start} alpha_k k^{-p} as (value, remainder bound).
    pub fn series_tail(&self, start: usize, p: f64) -> Result<(f64, f64)> {
        match &self.class {
            AlphaClass::Table { values } => {
                let mut acc = 0.0;
                for k in (start + 1..=values.len()).rev() {
                    acc += values[k - 1] * (k as f64).powf(-p);
                }
                Ok((acc, 0.0))
            }
            AlphaClass::Power { c, a } => {
                if a + p <= 1.0 {
                    return Err(Error::Divergent(format!(
                        "sum alpha_k k^-{p} with alpha_k = k^-{a}"
                    )));
                }
                Ok((c * hurwitz_zeta(a + p, start as f64 + 1.0), 0.0))
            }
            _ => self.level_series(start as u128, p),
        }
    }

    fn level_series(&self, start: u128, p: f64) -> Result<(f64, f64)> {
        let (a, _) = Self::level_exponents(&self.class, self.d).expect("level class");
        if a + p <= 1.0 {
            return Err(Error::Divergent(format!(
                "level series with rate exponent {a} and power {p}"
            )));
        }
        let exact_levels = self.counts.len() - 1;
        let mut value = 0.0;
        // Exact blocks k in [counts[l], counts[l+1] - 1] carry alpha(l).
        for l in 0..exact_levels {
            let lo = self.counts[l].max(start + 1).max(1);
            let hi = self.counts[l + 1] - 1;
            if lo > hi {
                continue;
            }
            value += self.alpha_value(l as u32)? * power_sum(lo as u64, hi as u64, p);
        }
        // Beyond the counted levels bound each block using the counting sandwich.
        let mut remainder = 0.0;
        let mut last_term = 0.0;
        let mut prev_term = 0.0;
        for l in exact_levels as u32..MAX_SERIES_LEVEL {
            let lo = ((1u128 << (l.min(120) + 1)) as f64 - 1.0).max(start as f64 + 1.0);
            let hi = self.cardinality_upper(l + 1);
            let block = block_power_bound(lo, hi, p);
            let term = self.alpha_value(l)? * block;
            remainder += term;
            prev_term = last_term;
            last_term = term;
            if term == 0.0 || (term < 1e-30 * (value + remainder) && l > exact_levels as u32 + 8) {
                break;
            }
        }
        if last_term > 0.0 && prev_term > 0.0 {
            let ratio = (last_term / prev_term).max((-(a + p - 1.0)).exp2());
            if ratio < 1.0 {
                remainder += last_term * ratio / (1.0 - ratio);
            } else {
                return Err(Error::Divergent("level series tail ratio >= 1".into()));
            }
        }
        Ok((value, remainder))
    }

    /// Upper bound sum_{t=0}^{l+d-1} 2^t C(t+d-1, d-1) on |Omega_l|.
    fn cardinality_upper(&self, l: u32) -> f64 {
        let d = self.d as f64;
        let mut total = 0.0;
        let mut binom = 1.0; // C(t + d - 1, d - 1) at t = 0
        for t in 0..(l as usize + self.d) {
            let tf = t as f64;
            total += tf.exp2() * binom;
            binom *= (tf + d) / (tf + 1.0);
        }
        total
    }
}

/// Upper bound on sum_{k=lo}^{hi} k^{-p} by integral comparison.
fn block_power_bound(lo: f64, hi: f64, p: f64) -> f64 {
    if hi < lo {
        return 0.0;
    }
    let lo_m = (lo - 1.0).max(1.0);
    let head = lo.powf(-p);
    head + if (p - 1.0).abs() < 1e-12 {
        (hi / lo_m).ln().max(0.0)
    } else if p < 1.0 {
        (hi.powf(1.0 - p) - lo_m.powf(1.0 - p)).max(0.0) / (1.0 - p)
    } else {
        lo_m.powf(1.0 - p) / (p - 1.0)
    }
}

/// sigma_k = sqrt(alpha_{ceil(k/2)} / sqrt(k)) for k >= 1.
pub fn intermediate_spectrum(alpha: &AlphaSequence, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("intermediate spectrum index starts at 1"));
    }
    let a = alpha.alpha_at(k.div_ceil(2))?;
    Ok((a / (k as f64).sqrt()).sqrt())
}
