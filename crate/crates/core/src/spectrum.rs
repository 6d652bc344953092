//! Weight rules, non-increasing spectra with certified tail rules, and tail sums.

use serde::{Deserialize, Serialize};

use crate::alpha::AlphaSequence;
use crate::error::{Error, Result};
use crate::index_set::{canonical_cmp, enumerate_product_bounded, IndexSet, MultiIndex, DEFAULT_CARDINALITY_CAP};
use crate::special::{hurwitz_zeta, zeta};

/// Weight sequence w(k) of a Hilbert class; the spectrum is 1/w rearranged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum WeightRule {
    /// w(k) = prod_j (1 + |k_j|)^s on Z^d, requires s > 1/2.
    SobolevMixed { s: f64, d: usize },
    /// w_k = (1 + ((k-1)k)^s)^{1/2} on flat indices, requires s > 1.
    LegendreSobolev { s: f64 },
}

impl WeightRule {
    pub fn sobolev_mixed(s: f64, d: usize) -> Result<Self> {
        let r = WeightRule::SobolevMixed { s, d };
        r.validate()?;
        Ok(r)
    }

    pub fn legendre_sobolev(s: f64) -> Result<Self> {
        let r = WeightRule::LegendreSobolev { s };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightRule::SobolevMixed { s, d } => {
                if !(s > 0.5) || !s.is_finite() {
                    return Err(Error::invalid(format!("sobolev-mixed needs s > 1/2, got {s}")));
                }
                if d == 0 {
                    return Err(Error::invalid("sobolev-mixed needs d >= 1"));
                }
            }
            WeightRule::LegendreSobolev { s } => {
                if !(s > 1.0) || !s.is_finite() {
                    return Err(Error::invalid(format!("legendre-sobolev needs s > 1, got {s}")));
                }
            }
        }
        Ok(())
    }

    /// w(k) for a multi-index (Sobolev-mixed) or a 1-component flat index (Legendre).
    pub fn weight_value(&self, k: &MultiIndex) -> Result<f64> {
        self.validate()?;
        match *self {
            WeightRule::SobolevMixed { s, d } => {
                if k.dim() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "index of dimension {} for weights on dimension {d}",
                        k.dim()
                    )));
                }
                Ok(k
                    .components()
                    .iter()
                    .map(|v| (1.0 + v.unsigned_abs() as f64).powf(s))
                    .product())
            }
            WeightRule::LegendreSobolev { .. } => {
                let c = k.components();
                if c.len() != 1 || c[0] < 1 {
                    return Err(Error::invalid("legendre weights take one flat index k >= 1"));
                }
                self.weight_flat(c[0] as usize)
            }
        }
    }

    /// Legendre weight for flat index k >= 1.
    pub fn weight_flat(&self, k: usize) -> Result<f64> {
        match *self {
            WeightRule::LegendreSobolev { s } => Ok(legendre_sigma_sq(s, k).recip().sqrt()),
            WeightRule::SobolevMixed { .. } => Err(Error::Unsupported(
                "flat weights are only defined for legendre-sobolev".into(),
            )),
        }
    }
}

/// sigma_k^2 = 1/(1 + ((k-1)k)^s) of the Legendre-Sobolev kernel.
pub fn legendre_sigma_sq(s: f64, k: usize) -> f64 {
    let e = (k as f64 - 1.0) * k as f64;
    1.0 / (1.0 + e.powf(s))
}

/// Analytic description of the spectrum beyond the stored prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TailRule {
    /// The full sum sum_k sigma_k^2 is known exactly.
    ClosedTotal { total: f64 },
    /// sigma_k = c q^k for every k.
    Geometric { c: f64, q: f64 },
    /// sigma_k^2 = 1/(1 + ((k-1)k)^s).
    LegendreSobolev { s: f64 },
    /// sigma_k^2 <= c k^{-p} beyond the stored prefix.
    PowerLaw { c: f64, p: f64 },
    /// sigma_k = 0 beyond the stored prefix.
    Finite,
    /// No information; tail sums are refused.
    Missing,
}

impl TailRule {
    pub fn describe(&self) -> String {
        match self {
            TailRule::ClosedTotal { total } => format!("closed total sum sigma^2 = {total:e}"),
            TailRule::Geometric { c, q } => format!("geometric sigma_k = {c} * {q}^k"),
            TailRule::LegendreSobolev { s } => {
                format!("p-series bound sigma_k^2 <= (k-1)^(-{})", 2.0 * s)
            }
            TailRule::PowerLaw { c, p } => format!("power law sigma_k^2 <= {c} k^(-{p})"),
            TailRule::Finite => "finite support".into(),
            TailRule::Missing => "missing".into(),
        }
    }

    /// True when the remainder returned is exact rather than an upper bound.
    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            TailRule::ClosedTotal { .. } | TailRule::Geometric { .. } | TailRule::Finite
        )
    }
}

/// Provenance of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum SpectrumSource {
    SobolevMixed { s: f64, d: usize },
    LegendreSobolev { s: f64 },
    Intermediate { alpha: crate::alpha::AlphaClass, d: usize, truncation: usize },
    Custom { label: String },
}

/// A tail sum split into the part over the stored prefix and the analytic remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub value: f64,
    pub remainder: f64,
    /// The remainder is exact (not just an upper bound).
    pub exact: bool,
}

impl TailSum {
    pub fn total(&self) -> f64 {
        self.value + self.remainder
    }
}

/// Non-increasing sequence sigma_1 >= sigma_2 >= ... with a tail rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSequence {
    values: Vec<f64>,
    map: Option<Vec<MultiIndex>>,
    tail: TailRule,
    source: SpectrumSource,
    /// suffix[m] = sum_{m < k <= len} sigma_k^2.
    #[serde(skip)]
    suffix: Vec<f64>,
    /// The stored prefix equals the global rearrangement (complete level set).
    exact_prefix: bool,
}

impl SpectrumSequence {
    fn assemble(
        values: Vec<f64>,
        map: Option<Vec<MultiIndex>>,
        tail: TailRule,
        source: SpectrumSource,
        exact_prefix: bool,
    ) -> Result<Self> {
        for (i, w) in values.windows(2).enumerate() {
            if !(w[1] <= w[0]) {
                return Err(Error::invalid(format!(
                    "spectrum increases at k = {}: {} < {}",
                    i + 2,
                    w[0],
                    w[1]
                )));
            }
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("spectrum values must be finite and non-negative"));
        }
        if let Some(m) = &map {
            if m.len() != values.len() {
                return Err(Error::DimensionMismatch("rearrangement map length".into()));
            }
        }
        let mut suffix = vec![0.0; values.len() + 1];
        for k in (0..values.len()).rev() {
            suffix[k] = suffix[k + 1] + values[k] * values[k];
        }
        Ok(SpectrumSequence {
            values,
            map,
            tail,
            source,
            suffix,
            exact_prefix,
        })
    }

    /// Spectrum of a weight rule with at least `min_len` stored values.
    ///
    /// For Sobolev-mixed weights the complete level set prod (1+|k_j|) <= T is
    /// enumerated, so the stored prefix is exactly the global rearrangement.
    pub fn from_rule(rule: &WeightRule, min_len: usize) -> Result<Self> {
        rule.validate()?;
        let min_len = min_len.max(1);
        match *rule {
            WeightRule::SobolevMixed { s, d } => {
                let mut t: u64 = 1;
                let indices = loop {
                    let set = enumerate_product_bounded(d, t, &|v| v + 1, DEFAULT_CARDINALITY_CAP)?;
                    if set.len() >= min_len {
                        break set;
                    }
                    t = t.checked_mul(2).ok_or_else(|| Error::invalid("level overflow"))?;
                };
                let (values, map) = sorted_sobolev(s, indices);
                let total = (2.0 * zeta(2.0 * s) - 1.0).powi(d as i32);
                Self::assemble(
                    values,
                    Some(map),
                    TailRule::ClosedTotal { total },
                    SpectrumSource::SobolevMixed { s, d },
                    true,
                )
            }
            WeightRule::LegendreSobolev { s } => {
                let values = (1..=min_len).map(|k| legendre_sigma_sq(s, k).sqrt()).collect();
                Self::assemble(
                    values,
                    None,
                    TailRule::LegendreSobolev { s },
                    SpectrumSource::LegendreSobolev { s },
                    true,
                )
            }
        }
    }

    /// Non-increasing rearrangement of 1/w over a finite index set, ties in canonical order.
    pub fn rearrange(rule: &WeightRule, set: &IndexSet) -> Result<Self> {
        rule.validate()?;
        let (s, d) = match *rule {
            WeightRule::SobolevMixed { s, d } => (s, d),
            WeightRule::LegendreSobolev { .. } => {
                return Err(Error::Unsupported(
                    "legendre weights are already ordered by flat index".into(),
                ))
            }
        };
        if set.dim() != d {
            return Err(Error::DimensionMismatch("index set vs weight dimension".into()));
        }
        let indices = set.indices().to_vec();
        let max_w = indices.iter().map(sobolev_level).max().unwrap_or(0);
        // The prefix is the global rearrangement iff every index with a smaller level is present.
        let exact = if max_w == 0 {
            true
        } else {
            let below = enumerate_product_bounded(d, max_w - 1, &|v| v + 1, DEFAULT_CARDINALITY_CAP)?;
            let present: std::collections::HashSet<&MultiIndex> = indices.iter().collect();
            below.iter().all(|k| present.contains(k))
        };
        let (values, map) = sorted_sobolev(s, indices);
        let total = (2.0 * zeta(2.0 * s) - 1.0).powi(d as i32);
        Self::assemble(
            values,
            Some(map),
            TailRule::ClosedTotal { total },
            SpectrumSource::SobolevMixed { s, d },
            exact,
        )
    }

    /// Custom spectrum from explicit values and a tail rule.
    pub fn from_values(values: Vec<f64>, tail: TailRule, label: &str) -> Result<Self> {
        Self::assemble(
            values,
            None,
            tail,
            SpectrumSource::Custom {
                label: label.to_string(),
            },
            true,
        )
    }

    /// Finite intermediate spectrum sigma_k^2 = alpha_{ceil(k/2)} / sqrt(k) for k <= truncation.
    pub fn intermediate(alpha: &AlphaSequence, truncation: usize) -> Result<Self> {
        // Square summability of the infinite sequence, as a sanity condition on alpha.
        alpha.series_tail(0, 0.5)?;
        let values = (1..=truncation)
            .map(|k| crate::alpha::intermediate_spectrum(alpha, k))
            .collect::<Result<Vec<f64>>>()?;
        Self::assemble(
            values,
            None,
            TailRule::Finite,
            SpectrumSource::Intermediate {
                alpha: alpha.class().clone(),
                d: alpha.dim(),
                truncation,
            },
            true,
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self) -> Option<&[MultiIndex]> {
        self.map.as_deref()
    }

    pub fn tail_rule(&self) -> &TailRule {
        &self.tail
    }

    pub fn source(&self) -> &SpectrumSource {
        &self.source
    }

    pub fn exact_prefix(&self) -> bool {
        self.exact_prefix
    }

    /// sigma_k for k >= 1 when known exactly (stored or closed form).
    pub fn sigma(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        if k <= self.values.len() {
            return Some(self.values[k - 1]);
        }
        match self.tail {
            TailRule::Geometric { c, q } => Some(c * q.powi(k as i32)),
            TailRule::LegendreSobolev { s } => Some(legendre_sigma_sq(s, k).sqrt()),
            TailRule::Finite => Some(0.0),
            _ => None,
        }
    }

    /// An upper bound on sigma_k valid for every k >= 1.
    pub fn sigma_upper(&self, k: usize) -> f64 {
        if let Some(v) = self.sigma(k) {
            return v;
        }
        let last = self.values.last().copied().unwrap_or(f64::INFINITY);
        match self.tail {
            TailRule::PowerLaw { c, p } => last.min((c * (k as f64).powf(-p)).sqrt()),
            _ => last,
        }
    }

    /// Sum of sigma_k^2 over k > m split into the stored part and a certified remainder.
    pub fn tail_sum(&self, m: usize) -> Result<TailSum> {
        self.power_weighted_tail(m, 0.0)
    }

    /// sum_{k > m} k^e sigma_k^2 for e in [0, 1], split into stored part and remainder bound.
    pub fn power_weighted_tail(&self, m: usize, e: f64) -> Result<TailSum> {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::Unsupported(format!("weighted tail exponent {e} outside [0, 1]")));
        }
        let len = self.values.len();
        let value = if m >= len {
            0.0
        } else if e == 0.0 {
            self.suffix[m]
        } else {
            let mut acc = 0.0;
            for k in (m + 1..=len).rev() {
                let v = self.values[k - 1];
                acc += (k as f64).powf(e) * v * v;
            }
            acc
        };
        let start = m.max(len);
        let (remainder, exact) = if e == 0.0 {
            (self.remainder0(start)?, self.tail.is_exact())
        } else if e == 1.0 {
            (self.remainder1(start)?, !matches!(self.tail, TailRule::LegendreSobolev { .. } | TailRule::PowerLaw { .. }))
        } else {
            // k^e <= k for k >= 1
            let r = match self.tail {
                TailRule::Finite => 0.0,
                _ => self.remainder1(start)?,
            };
            (r, matches!(self.tail, TailRule::Finite))
        };
        Ok(TailSum {
            value,
            remainder,
            exact,
        })
    }

    /// Bound on sum_{k > big_m} sigma_k^2 for big_m >= len.
    fn remainder0(&self, big_m: usize) -> Result<f64> {
        let len = self.values.len();
        Ok(match self.tail {
            TailRule::ClosedTotal { total } => {
                if big_m > len {
                    return Err(Error::MissingTailRule(format!(
                        "closed-total rule needs the prefix up to {big_m}, stored {len}"
                    )));
                }
                let prefix = self.suffix[0] - self.suffix[big_m];
                // Cancellation in total - prefix is at most a few ulps of the total.
                (total - prefix).max(0.0) + 8.0 * f64::EPSILON * total
            }
            TailRule::Geometric { c, q } => {
                let r = q * q;
                c * c * r.powi(big_m as i32 + 1) / (1.0 - r)
            }
            TailRule::LegendreSobolev { s } => legendre_tail0(s, big_m),
            TailRule::PowerLaw { c, p } => {
                if p <= 1.0 {
                    return Err(Error::Divergent(format!("power-law tail with p = {p}")));
                }
                c * hurwitz_zeta(p, big_m as f64 + 1.0)
            }
            TailRule::Finite => 0.0,
            TailRule::Missing => {
                return Err(Error::MissingTailRule(
                    "spectrum has no tail rule; refusing to truncate".into(),
                ))
            }
        })
    }

    /// Bound on sum_{k > big_m} k sigma_k^2 for big_m >= len.
    fn remainder1(&self, big_m: usize) -> Result<f64> {
        Ok(match self.tail {
            TailRule::Geometric { c, q } => {
                let r = q * q;
                let n = big_m as f64 + 1.0;
                c * c * r.powi(big_m as i32 + 1) * (n - (n - 1.0) * r) / ((1.0 - r) * (1.0 - r))
            }
            TailRule::LegendreSobolev { s } => legendre_tail1(s, big_m),
            TailRule::PowerLaw { c, p } => {
                if p <= 2.0 {
                    return Err(Error::Divergent(format!("first moment of a k^-{p} tail")));
                }
                c * hurwitz_zeta(p - 1.0, big_m as f64 + 1.0)
            }
            TailRule::Finite => 0.0,
            TailRule::ClosedTotal { .. } => {
                return Err(Error::MissingTailRule(
                    "closed-total rule carries no first-moment information".into(),
                ))
            }
            TailRule::Missing => {
                return Err(Error::MissingTailRule(
                    "spectrum has no tail rule; refusing to truncate".into(),
                ))
            }
        })
    }

    /// Gelfand-width lower bound sqrt(tail_sum(m) / mu(D)).
    pub fn gelfand_lower(&self, m: usize, mass: f64) -> Result<f64> {
        let t = self.tail_sum(m)?;
        Ok((t.total() / mass).sqrt())
    }

    /// Two-column CSV (k, sigma) with a JSON header line.
    pub fn to_csv(&self) -> String {
        let header = serde_json::json!({
            "source": self.source,
            "tail_rule": self.tail,
            "tail_rule_description": self.tail.describe(),
            "len": self.values.len(),
        });
        let mut out = format!("# {header}\nk,sigma\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{:.17e}\n", i + 1, v));
        }
        out
    }
}

/// prod_j (1 + |k_j|).
fn sobolev_level(k: &MultiIndex) -> u64 {
    k.components()
        .iter()
        .map(|v| v.unsigned_abs() + 1)
        .product()
}

fn sorted_sobolev(s: f64, mut indices: Vec<MultiIndex>) -> (Vec<f64>, Vec<MultiIndex>) {
    indices.sort_by(|a, b| {
        sobolev_level(a)
            .cmp(&sobolev_level(b))
            .then_with(|| canonical_cmp(a, b))
    });
    let values = indices
        .iter()
        .map(|k| (sobolev_level(k) as f64).powf(-s))
        .collect();
    (values, indices)
}

/// Number of explicit terms summed before switching to the zeta bound.
const LEGENDRE_EXPLICIT_TERMS: usize = 2048;

/// sum_{k > m} 1/(1 + ((k-1)k)^s): explicit terms then sigma_k^2 <= (k-1)^{-2s}.
fn legendre_tail0(s: f64, m: usize) -> f64 {
    let stop = m + LEGENDRE_EXPLICIT_TERMS;
    let mut acc = 0.0;
    // k > stop means j = k - 1 >= stop
    acc += hurwitz_zeta(2.0 * s, stop as f64);
    for k in (m + 1..=stop).rev() {
        acc += legendre_sigma_sq(s, k);
    }
    acc
}

/// sum_{k > m} k/(1 + ((k-1)k)^s): explicit terms then k (k-1)^{-2s} with j = k - 1.
fn legendre_tail1(s: f64, m: usize) -> f64 {
    let stop = m + LEGENDRE_EXPLICIT_TERMS;
    let j0 = stop as f64;
    let mut acc = hurwitz_zeta(2.0 * s - 1.0, j0) + hurwitz_zeta(2.0 * s, j0);
    for k in (m + 1..=stop).rev() {
        acc += k as f64 * legendre_sigma_sq(s, k);
    }
    acc
}
