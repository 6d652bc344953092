//! Right-hand sides of the lifting lemmas and the worst-case error theorems.

use serde::{Deserialize, Serialize};

use crate::alpha::AlphaSequence;
use crate::christoffel::ChristoffelRule;
use crate::error::{Error, Result};
use crate::spectrum::SpectrumSequence;

/// Which bound a report evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundName {
    /// ||K_m||^{1/2} ||f - P_m f||_H + Lambda_m ||f - Af||_2 with the dyadic bound on ||K_m||.
    #[serde(rename = "lemma-2.1")]
    Lemma21,
    /// sqrt(866 Lambda_m^2/m sum_{k>m/2} sigma_k^2) + sqrt(2 sum_{k>m/4} Lambda_{4k}^2 sigma_k^2 / k).
    #[serde(rename = "thm-2.2")]
    Thm22,
    /// 2 sum_{k>m/4} alpha_k Lambda_{4k}/k + Lambda_m ||f - Af||_2.
    #[serde(rename = "lemma-3.1")]
    Lemma31,
    /// (70/sqrt(m)) sum_{k>m/4} alpha_k / sqrt(k).
    #[serde(rename = "prop-3.2")]
    Prop32,
    /// sum_{k>m/4} 2 alpha_k Lambda_{4k}/k + (70 Lambda_m/sqrt(m)) sum_{k>m/4} alpha_k/sqrt(k).
    #[serde(rename = "thm-3.3")]
    Thm33,
    /// n^{-alpha + (1-2/p)_+ beta} (log2 n)^gamma.
    #[serde(rename = "thm-1.1")]
    Thm11,
    /// sqrt(c B sum_{k>n} sigma_k^2) with the absolute constant c carried symbolically as 1.
    #[serde(rename = "thm-1.2")]
    Thm12,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::Lemma21 => "lemma-2.1",
            BoundName::Thm22 => "thm-2.2",
            BoundName::Lemma31 => "lemma-3.1",
            BoundName::Prop32 => "prop-3.2",
            BoundName::Thm33 => "thm-3.3",
            BoundName::Thm11 => "thm-1.1",
            BoundName::Thm12 => "thm-1.2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "lemma-2.1" => BoundName::Lemma21,
            "thm-2.2" => BoundName::Thm22,
            "lemma-3.1" => BoundName::Lemma31,
            "prop-3.2" => BoundName::Prop32,
            "thm-3.3" => BoundName::Thm33,
            "thm-1.1" => BoundName::Thm11,
            "thm-1.2" => BoundName::Thm12,
            other => return Err(Error::invalid(format!("unknown bound {other}"))),
        })
    }
}

/// One summand of a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ingredient {
    pub label: String,
    pub value: f64,
}

/// Evaluated right-hand side with its summands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: BoundName,
    pub m: usize,
    /// Sum of the ingredient values.
    pub value: f64,
    pub ingredients: Vec<Ingredient>,
    /// Increase of the value caused by analytic tail remainders (0 when all sums are finite).
    pub truncation_remainder: f64,
    /// Constants that are not known numerically and were set to 1.
    pub symbolic_constants: Vec<String>,
}

impl BoundReport {
    fn from_parts(
        name: BoundName,
        m: usize,
        ingredients: Vec<Ingredient>,
        without_remainder: f64,
        symbolic_constants: Vec<String>,
    ) -> Self {
        let value: f64 = ingredients.iter().map(|i| i.value).sum();
        BoundReport {
            name,
            m,
            value,
            ingredients,
            truncation_remainder: (value - without_remainder).max(0.0),
            symbolic_constants,
        }
    }

    /// Sum of the ingredients (equals `value`).
    pub fn recomputed(&self) -> f64 {
        self.ingredients.iter().map(|i| i.value).sum()
    }
}

/// Rate parameters for the rate-arithmetic bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    /// Decay exponent of alpha_n.
    pub alpha: f64,
    /// Growth exponent of Lambda_n.
    pub beta: f64,
    /// Log exponent of alpha_n.
    pub gamma: f64,
    /// Target Lp exponent (2 <= p <= infinity).
    pub p: f64,
}

/// Everything a bound may need; unused fields are ignored.
#[derive(Clone, Copy, Debug)]
pub struct BoundInputs<'a> {
    pub m: usize,
    pub spectrum: Option<&'a SpectrumSequence>,
    pub alpha: Option<&'a AlphaSequence>,
    pub lambda: ChristoffelRule,
    /// ||f - Af||_2 for the lifting lemmas.
    pub l2_error: Option<f64>,
    /// ||f - P_m f||_H for the Hilbert lifting lemma (defaults to 1).
    pub h_residual: Option<f64>,
    /// Uniform bound B of the basis for the rate bound with sum of sigma^2.
    pub basis_bound: f64,
    pub rate: Option<RateInputs>,
}

impl<'a> BoundInputs<'a> {
    pub fn new(m: usize, lambda: ChristoffelRule) -> Self {
        BoundInputs {
            m,
            spectrum: None,
            alpha: None,
            lambda,
            l2_error: None,
            h_residual: None,
            basis_bound: 1.0,
            rate: None,
        }
    }
}

/// sum_{k > start} Lambda_{4k}^2 sigma_k^2 / k as (value, remainder) under a power rule.
pub fn dyadic_sigma_sum(spectrum: &SpectrumSequence, lambda: ChristoffelRule, start: usize) -> Result<(f64, f64)> {
    // Lambda_{4k}^2 / k = c^2 4^{2 beta} k^{2 beta - 1}
    let e = 2.0 * lambda.beta - 1.0;
    let factor = lambda.c * lambda.c * 4f64.powf(2.0 * lambda.beta);
    let t = spectrum.power_weighted_tail(start, e)?;
    Ok((factor * t.value, factor * t.remainder))
}

/// sum_{k > start} alpha_k Lambda_{4k} / k as (value, remainder) under a power rule.
pub fn dyadic_alpha_sum(alpha: &AlphaSequence, lambda: ChristoffelRule, start: usize) -> Result<(f64, f64)> {
    let factor = lambda.c * 4f64.powf(lambda.beta);
    let (v, r) = alpha.series_tail(start, 1.0 - lambda.beta)?;
    Ok((factor * v, factor * r))
}

fn need<T>(x: Option<T>, what: &str, name: BoundName) -> Result<T> {
    x.ok_or_else(|| Error::invalid(format!("{} needs {what}", name.as_str())))
}

fn ing(label: &str, value: f64) -> Ingredient {
    Ingredient {
        label: label.to_string(),
        value,
    }
}

/// Evaluates the named right-hand side with certified tail remainders included.
pub fn bound_rhs(name: BoundName, inputs: &BoundInputs<'_>) -> Result<BoundReport> {
    let m = inputs.m;
    let lam = inputs.lambda;
    if m < 4 && !matches!(name, BoundName::Thm11 | BoundName::Thm12) {
        return Err(Error::invalid(format!("{} needs m >= 4", name.as_str())));
    }
    let mf = m as f64;
    match name {
        BoundName::Lemma21 => {
            let sp = need(inputs.spectrum, "a spectrum", name)?;
            let l2 = need(inputs.l2_error, "the L2 error", name)?;
            let h = inputs.h_residual.unwrap_or(1.0);
            let (v, r) = dyadic_sigma_sum(sp, lam, m / 4)?;
            let a = (2.0 * (v + r)).sqrt() * h;
            let a0 = (2.0 * v).sqrt() * h;
            let b = lam.value(m) * l2;
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![ing("sqrt(||K_m||) * ||f - P_m f||_H", a), ing("Lambda_m * ||f - Af||_2", b)],
                a0 + b,
                vec![],
            ))
        }
        BoundName::Thm22 => {
            let sp = need(inputs.spectrum, "a spectrum", name)?;
            let t = sp.tail_sum(m / 2)?;
            let lm = lam.value(m);
            let c1 = 866.0 * lm * lm / mf;
            let a = (c1 * t.total()).sqrt();
            let a0 = (c1 * t.value).sqrt();
            let (v, r) = dyadic_sigma_sum(sp, lam, m / 4)?;
            let b = (2.0 * (v + r)).sqrt();
            let b0 = (2.0 * v).sqrt();
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![ing("L2 term", a), ing("tail kernel term", b)],
                a0 + b0,
                vec![],
            ))
        }
        BoundName::Lemma31 => {
            let al = need(inputs.alpha, "an alpha sequence", name)?;
            let l2 = need(inputs.l2_error, "the L2 error", name)?;
            let (v, r) = dyadic_alpha_sum(al, lam, m / 4)?;
            let b = lam.value(m) * l2;
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![ing("2 sum alpha_k Lambda_4k / k", 2.0 * (v + r)), ing("Lambda_m * ||f - Af||_2", b)],
                2.0 * v + b,
                vec![],
            ))
        }
        BoundName::Prop32 => {
            let al = need(inputs.alpha, "an alpha sequence", name)?;
            let (v, r) = al.series_tail(m / 4, 0.5)?;
            let c = 70.0 / mf.sqrt();
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![ing("(70/sqrt m) sum alpha_k / sqrt k", c * (v + r))],
                c * v,
                vec![],
            ))
        }
        BoundName::Thm33 => {
            let al = need(inputs.alpha, "an alpha sequence", name)?;
            let (v1, r1) = dyadic_alpha_sum(al, lam, m / 4)?;
            let (v2, r2) = al.series_tail(m / 4, 0.5)?;
            let c = 70.0 * lam.value(m) / mf.sqrt();
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![
                    ing("sum 2 alpha_k Lambda_4k / k", 2.0 * (v1 + r1)),
                    ing("(70 Lambda_m / sqrt m) sum alpha_k / sqrt k", c * (v2 + r2)),
                ],
                2.0 * v1 + c * v2,
                vec![],
            ))
        }
        BoundName::Thm11 => {
            let r = need(inputs.rate, "rate inputs", name)?;
            if !(r.p >= 2.0) {
                return Err(Error::invalid("thm-1.1 needs 2 <= p <= infinity"));
            }
            let q = if r.p.is_infinite() { 1.0 } else { (1.0 - 2.0 / r.p).max(0.0) };
            let exponent = -r.alpha + q * r.beta;
            let n = mf.max(2.0);
            let v = n.powf(exponent) * n.log2().powf(r.gamma);
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![ing("n^(-alpha + (1-2/p)_+ beta) (log n)^gamma", v)],
                v,
                vec!["implied constant".into()],
            ))
        }
        BoundName::Thm12 => {
            let sp = need(inputs.spectrum, "a spectrum", name)?;
            let t = sp.tail_sum(m)?;
            let v = (inputs.basis_bound * t.total()).sqrt();
            Ok(BoundReport::from_parts(
                name,
                m,
                vec![ing("sqrt(c B sum_{k>n} sigma_k^2)", v)],
                (inputs.basis_bound * t.value).sqrt(),
                vec!["c".into()],
            ))
        }
    }
}
