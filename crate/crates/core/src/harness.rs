//! Experiment configuration, presets, runs and invariant verification.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alpha::{AlphaClass, AlphaSequence};
use crate::basis::{BasisFamily, DomainKind, Points, C64};
use crate::bounds::{bound_rhs, dyadic_sigma_sum, BoundInputs, BoundName, BoundReport};
use crate::christoffel::ChristoffelRule;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Refinement};
use crate::lift::{random_test_functions, verify_lift};
use crate::rate::{fit_rate, median, RateFit, RateFitOptions};
use crate::recovery::{Approximant, RecoveryOperator, Weighting};
use crate::rkhs::RkhsSpec;
use crate::sampling::{plan_for, stream_id, SamplingDensity};
use crate::special::gauss_legendre;
use crate::worstcase::{worst_case_l2, worst_case_linf, ErrorReport, NormKind, WorstCaseOptions};

/// Version of the CSV and JSON output schemas.
pub const SCHEMA_VERSION: u32 = 1;

/// Header of the error table.
pub const CSV_HEADER: &str = "preset,d,m,n,trial,norm,value,certificate,bound_thm,seed";

/// Names of the shipped presets.
pub const PRESET_NAMES: [&str; 7] = [
    "cor-4.1", "thm-4.3", "thm-4.4", "cor-4.5", "cor-4.6", "cor-4.7", "cor-4.8",
];

/// Source text of a shipped preset.
pub fn preset_source(name: &str) -> Result<&'static str> {
    Ok(match name {
        "cor-4.1" => include_str!("../presets/cor-4.1.toml"),
        "thm-4.3" => include_str!("../presets/thm-4.3.toml"),
        "thm-4.4" => include_str!("../presets/thm-4.4.toml"),
        "cor-4.5" => include_str!("../presets/cor-4.5.toml"),
        "cor-4.6" => include_str!("../presets/cor-4.6.toml"),
        "cor-4.7" => include_str!("../presets/cor-4.7.toml"),
        "cor-4.8" => include_str!("../presets/cor-4.8.toml"),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    })
}

/// Parsed and validated shipped preset.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(preset_source(name)?)
}

/// Function class of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassConfig {
    SobolevMixed {
        s: f64,
        d: usize,
        /// Stored spectrum length; defaults to a multiple of the largest m.
        #[serde(default)]
        spectrum_len: Option<usize>,
    },
    LegendreSobolev {
        s: f64,
        #[serde(default)]
        spectrum_len: Option<usize>,
    },
    /// Finite intermediate RKHS built from a rate sequence, truncated at factor * max m.
    Intermediate {
        alpha: AlphaClass,
        d: usize,
        #[serde(default = "default_truncation_factor")]
        truncation_factor: usize,
    },
}

fn default_truncation_factor() -> usize {
    4
}

fn default_oversampling() -> f64 {
    4.0
}

fn default_weighting() -> Weighting {
    Weighting::Weighted
}

fn default_refinement() -> usize {
    16
}

fn default_exclude() -> usize {
    crate::rate::DEFAULT_EXCLUDE
}

/// Schedule of subspace dimensions, trials and randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub m: Vec<usize>,
    #[serde(default = "default_oversampling")]
    pub oversampling: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_weighting")]
    pub weighting: Weighting,
}

/// Norms and grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Any of "l2", "linf".
    pub norms: Vec<String>,
    #[serde(default)]
    pub grid_per_axis: Option<usize>,
    #[serde(default = "default_refinement")]
    pub refinement_factor: usize,
}

/// Rate fit settings; the fit variable is m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_exclude")]
    pub exclude: usize,
    /// Predicted L-infinity exponent, recorded next to the fit.
    #[serde(default)]
    pub expected_alpha: Option<f64>,
}

/// Output location.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub class: ClassConfig,
    pub schedule: ScheduleConfig,
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every invariant; all failures are configuration errors.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.preset.is_empty() {
            return cfg("preset name must not be empty".into());
        }
        let ms = &self.schedule.m;
        if ms.is_empty() {
            return cfg("m-schedule is empty".into());
        }
        if ms[0] == 0 || ms.windows(2).any(|w| w[1] <= w[0]) {
            return cfg("m-schedule must be positive and strictly increasing".into());
        }
        if self.schedule.trials == 0 {
            return cfg("trials must be at least 1".into());
        }
        if !(self.schedule.oversampling > 0.0 && self.schedule.oversampling.is_finite()) {
            return cfg("oversampling must be positive".into());
        }
        if self.evaluation.norms.is_empty() {
            return cfg("no norms requested".into());
        }
        for n in &self.evaluation.norms {
            parse_norm(n)?;
        }
        if let Some(g) = self.evaluation.grid_per_axis {
            if g < 2 {
                return cfg("grid needs at least 2 points per axis".into());
            }
        }
        match &self.class {
            ClassConfig::SobolevMixed { s, d, .. } => {
                if !(*s > 0.5) {
                    return cfg(format!("sobolev-mixed needs s > 1/2, got {s}"));
                }
                if *d == 0 {
                    return cfg("dimension must be at least 1".into());
                }
            }
            ClassConfig::LegendreSobolev { s, .. } => {
                if !(*s > 1.0) {
                    return cfg(format!("legendre-sobolev needs s > 1, got {s}"));
                }
            }
            ClassConfig::Intermediate {
                alpha,
                d,
                truncation_factor,
            } => {
                AlphaSequence::new(alpha.clone(), *d).map_err(|e| Error::Config(e.to_string()))?;
                if *truncation_factor < 2 {
                    return cfg("truncation_factor must be at least 2".into());
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.class {
            ClassConfig::SobolevMixed { d, .. } | ClassConfig::Intermediate { d, .. } => *d,
            ClassConfig::LegendreSobolev { .. } => 1,
        }
    }

    pub fn max_m(&self) -> usize {
        *self.schedule.m.last().expect("validated schedule")
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }

    pub fn norms(&self) -> Vec<NormKind> {
        self.evaluation
            .norms
            .iter()
            .map(|n| parse_norm(n).expect("validated norm"))
            .collect()
    }

    pub fn grid(&self) -> GridSpec {
        let mut g = GridSpec::default_for(self.dim());
        if let Some(p) = self.evaluation.grid_per_axis {
            g.per_axis = p;
        }
        g.refinement = if self.evaluation.refinement_factor <= 1 {
            Refinement::None
        } else {
            Refinement::Local {
                factor: self.evaluation.refinement_factor,
            }
        };
        g
    }

    /// The RKHS of the experiment.
    pub fn build_spec(&self) -> Result<RkhsSpec> {
        let max_m = self.max_m();
        match &self.class {
            ClassConfig::SobolevMixed { s, d, spectrum_len } => {
                let len = spectrum_len.unwrap_or(if *d == 1 { 128 * max_m } else { 32 * max_m }).max(4096);
                RkhsSpec::sobolev_mixed(*s, *d, len)
            }
            ClassConfig::LegendreSobolev { s, spectrum_len } => {
                RkhsSpec::legendre_sobolev(*s, spectrum_len.unwrap_or(4096).max(64))
            }
            ClassConfig::Intermediate {
                alpha,
                d,
                truncation_factor,
            } => {
                let seq = AlphaSequence::new(alpha.clone(), *d)?;
                RkhsSpec::intermediate(&seq, truncation_factor * max_m)
            }
        }
    }

    /// Theoretical bound reported next to each row.
    pub fn bound(&self, spec: &RkhsSpec, m: usize) -> Result<Option<BoundReport>> {
        if m < 4 {
            return Ok(None);
        }
        let lambda = ChristoffelRule::for_family(spec.basis().family());
        let mut inputs = BoundInputs::new(m, lambda);
        match &self.class {
            ClassConfig::Intermediate { alpha, d, .. } => {
                let seq = AlphaSequence::new(alpha.clone(), *d)?;
                inputs.alpha = Some(&seq);
                Ok(Some(bound_rhs(BoundName::Thm33, &inputs)?))
            }
            _ => {
                inputs.spectrum = Some(spec.spectrum());
                Ok(Some(bound_rhs(BoundName::Thm22, &inputs)?))
            }
        }
    }
}

fn parse_norm(s: &str) -> Result<NormKind> {
    match s {
        "l2" | "L2" => Ok(NormKind::L2),
        "linf" | "Linf" => Ok(NormKind::Linf),
        other => Err(Error::Config(format!("unknown norm {other}; use l2 or linf"))),
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One row of the error table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub m: usize,
    pub n: usize,
    pub trial: usize,
    pub report: ErrorReport,
    pub gelfand_lower: f64,
}

/// Listing of a run's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub preset: String,
    pub config_hash: String,
    /// "complete" or "partial".
    pub status: String,
    pub error: Option<String>,
    pub files: Vec<String>,
    pub timings_seconds: Vec<(String, f64)>,
    pub all_certified: bool,
}

/// Result of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub records: Vec<RunRecord>,
    pub bounds: Vec<BoundReport>,
    pub rates: Vec<(String, RateFit)>,
}

/// Output directory from the config, overridable.
pub fn output_dir(cfg: &ExperimentConfig, over: Option<&Path>) -> PathBuf {
    match over {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(cfg.output.dir.clone().unwrap_or_else(|| format!("out/{}", cfg.preset))),
    }
}

/// Builds the operator of one (m, trial) cell.
pub fn build_operator(cfg: &ExperimentConfig, spec: &RkhsSpec, m_index: usize, trial: usize) -> Result<RecoveryOperator> {
    let m = cfg.schedule.m[m_index];
    let plan = plan_for(spec, m, cfg.schedule.oversampling, cfg.schedule.seed, stream_id(m_index, trial))?;
    RecoveryOperator::build(spec.basis(), m, &plan, cfg.schedule.weighting)
}

/// Error reports of one operator for the requested norms.
pub fn evaluate_operator(
    op: &RecoveryOperator,
    spec: &RkhsSpec,
    norms: &[NormKind],
    grid: &GridSpec,
) -> Result<Vec<ErrorReport>> {
    let approx = Approximant::Sampled(op);
    let opts = WorstCaseOptions::default();
    norms
        .iter()
        .map(|n| match n {
            NormKind::L2 => worst_case_l2(&approx, spec, &opts),
            NormKind::Linf => worst_case_linf(&approx, spec, grid, &opts),
            NormKind::Lp { .. } => Err(Error::Unsupported("direct Lp worst case".into())),
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Error table with deterministic formatting, rows sorted by (m, trial, norm).
pub fn records_csv(cfg: &ExperimentConfig, records: &[RunRecord], bounds: &[BoundReport]) -> String {
    let mut rows: Vec<&RunRecord> = records.iter().collect();
    rows.sort_by(|a, b| (a.m, a.trial, a.report.norm.label()).cmp(&(b.m, b.trial, b.report.norm.label())));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let bound = bounds
            .iter()
            .find(|b| b.m == r.m)
            .map(|b| fmt(b.value))
            .unwrap_or_else(|| "nan".into());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            cfg.preset,
            cfg.dim(),
            r.m,
            r.n,
            r.trial,
            r.report.norm.label(),
            fmt(r.report.value),
            fmt(r.report.certificate),
            bound,
            cfg.schedule.seed
        ));
    }
    out
}

/// Fits median error against m per norm.
pub fn fit_records(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<Vec<(String, RateFit)>> {
    let mut out = Vec::new();
    let opts = RateFitOptions {
        fixed_gamma: cfg.fit.gamma,
        exclude_smallest: cfg.fit.exclude,
    };
    for norm in cfg.norms() {
        let pairs: Vec<(f64, f64)> = cfg
            .schedule
            .m
            .iter()
            .map(|&m| {
                let vals: Vec<f64> = records
                    .iter()
                    .filter(|r| r.m == m && r.report.norm == norm)
                    .map(|r| r.report.value)
                    .collect();
                (m as f64, median(&vals))
            })
            .collect();
        if pairs.len() >= 4 {
            out.push((norm.label(), fit_rate(&pairs, &opts)?));
        }
    }
    Ok(out)
}

/// Runs every (m, trial) cell, writes the CSV, bounds, rates and manifest.
///
/// Validation happens before any file is written. On a failure after that point a
/// manifest with status "partial" is written and the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        preset: cfg.preset.clone(),
        config_hash: cfg.hash(),
        status: "partial".into(),
        error: None,
        files: vec!["config.toml".into()],
        timings_seconds: Vec::new(),
        all_certified: false,
    };
    fs::write(out_dir.join("config.toml"), cfg.to_toml())?;
    let result = run_cells(cfg, out_dir, &mut manifest);
    manifest.timings_seconds.push(("total".into(), start.elapsed().as_secs_f64()));
    match result {
        Ok((records, bounds, rates)) => {
            manifest.status = "complete".into();
            manifest.all_certified = records.iter().all(|r| r.report.certified);
            manifest.files.push("manifest.json".into());
            fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
            Ok(RunOutcome {
                manifest,
                records,
                bounds,
                rates,
            })
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            manifest.files.push("manifest.json".into());
            fs::write(out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
            Err(e)
        }
    }
}

type Cells = (Vec<RunRecord>, Vec<BoundReport>, Vec<(String, RateFit)>);

fn run_cells(cfg: &ExperimentConfig, out_dir: &Path, manifest: &mut RunManifest) -> Result<Cells> {
    let spec = cfg.build_spec()?;
    let norms = cfg.norms();
    let grid = cfg.grid();
    let mut records = Vec::new();
    let mut bounds = Vec::new();
    for (mi, &m) in cfg.schedule.m.iter().enumerate() {
        let t0 = Instant::now();
        let gelfand = spec.gelfand_lower(m)?;
        let cells: Vec<Result<Vec<RunRecord>>> = (0..cfg.schedule.trials)
            .into_par_iter()
            .map(|trial| {
                let op = build_operator(cfg, &spec, mi, trial)?;
                let reports = evaluate_operator(&op, &spec, &norms, &grid)?;
                Ok(reports
                    .into_iter()
                    .map(|report| RunRecord {
                        m,
                        n: op.n(),
                        trial,
                        report,
                        gelfand_lower: gelfand,
                    })
                    .collect())
            })
            .collect();
        for c in cells {
            records.extend(c?);
        }
        if let Some(b) = cfg.bound(&spec, m)? {
            bounds.push(b);
        }
        manifest.timings_seconds.push((format!("m={m}"), t0.elapsed().as_secs_f64()));
    }
    fs::write(out_dir.join("errors.csv"), records_csv(cfg, &records, &bounds))?;
    manifest.files.push("errors.csv".into());
    fs::write(out_dir.join("bounds.json"), serde_json::to_string_pretty(&bounds)?)?;
    manifest.files.push("bounds.json".into());
    let rates = fit_records(cfg, &records)?;
    let rates_json = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "fit_variable": "m",
        "expected_alpha": cfg.fit.expected_alpha,
        "fits": rates.iter().map(|(n, f)| serde_json::json!({"norm": n, "fit": f})).collect::<Vec<_>>(),
    });
    fs::write(out_dir.join("rates.json"), serde_json::to_string_pretty(&rates_json)?)?;
    manifest.files.push("rates.json".into());
    Ok((records, bounds, rates))
}

/// One invariant check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub m: usize,
    pub trial: Option<usize>,
    pub passed: bool,
    /// Positive when the check holds with room to spare.
    pub margin: f64,
    pub detail: String,
}

/// Machine-readable summary of [`verify_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub preset: String,
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn check(name: &str, m: usize, trial: Option<usize>, margin: f64, detail: String) -> Check {
    Check {
        name: name.to_string(),
        m,
        trial,
        passed: margin >= 0.0,
        margin,
        detail,
    }
}

/// Density normalization and floor for m.
pub fn density_checks(spec: &RkhsSpec, m: usize) -> Result<Vec<Check>> {
    let dens = SamplingDensity::new(spec, m, None)?;
    let mass = spec.mass();
    let space = spec.basis().space();
    let (integral, floor_pts) = match space.kind() {
        DomainKind::Torus => {
            // Trapezoid rule is exact for frequencies below the per-axis count.
            let max_freq = spec
                .basis()
                .frequencies()
                .map(|f| f[..dens.truncation()].iter().map(|k| k.sup_norm()).max().unwrap_or(0))
                .unwrap_or(0) as usize;
            let per_axis = (2 * max_freq + 2).max(16);
            let d = space.dim();
            let total = per_axis.checked_pow(d as u32).unwrap_or(usize::MAX);
            let integral = if total <= 1 << 20 {
                let g = GridSpec::new(per_axis, Refinement::None)?.points(space)?;
                let mut acc = 0.0;
                for x in g.iter() {
                    acc += dens.eval(x)?;
                }
                acc / g.len() as f64
            } else {
                f64::NAN
            };
            let floor = GridSpec::new(floor_axis(d), Refinement::None)?.points(space)?;
            (integral, floor)
        }
        DomainKind::Interval => {
            let (nodes, weights) = gauss_legendre(dens.truncation() + 1);
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(&weights) {
                acc += w * dens.eval(&[*x])?;
            }
            let floor = GridSpec::new(10_000, Refinement::None)?.points(space)?;
            (acc, floor)
        }
    };
    let mut min_rho = f64::INFINITY;
    for x in floor_pts.iter() {
        min_rho = min_rho.min(dens.eval(x)?);
    }
    let floor = 1.0 / (3.0 * mass);
    // The integral is against mu; for the interval mu is Lebesgue measure on [-1, 1].
    let integral_err = (integral - 1.0).abs();
    Ok(vec![
        check(
            "density-normalization",
            m,
            None,
            1e-6 - integral_err,
            format!("integral {integral:.15}"),
        ),
        check(
            "density-floor",
            m,
            None,
            min_rho - (floor - 1e-12),
            format!("min {min_rho:.6e} vs floor {floor:.6e} on {} points", floor_pts.len()),
        ),
    ])
}

fn floor_axis(d: usize) -> usize {
    match d {
        1 => 10_000,
        2 => 100,
        3 => 22,
        _ => 10,
    }
}

/// WLS-specific checks: idempotence and weighted residual orthogonality.
pub fn operator_checks(op: &RecoveryOperator, seed: u64, trial: usize) -> Result<Vec<Check>> {
    let m = op.m();
    let idem = op.idempotence_defect()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<C64> = (0..op.n())
        .map(|_| C64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0))
        .collect();
    let orth = op.residual_orthogonality_defect(&values)?;
    let scale: f64 = values.iter().zip(op.weights()).map(|(v, w)| v.norm() * w).sum::<f64>().max(1.0);
    Ok(vec![
        check("wls-idempotence", m, Some(trial), 1e-9 - idem, format!("defect {idem:.3e}")),
        check(
            "wls-residual-orthogonality",
            m,
            Some(trial),
            1e-8 * scale - orth,
            format!("defect {orth:.3e}, scale {scale:.3e}"),
        ),
    ])
}

/// Runs the invariant suite on the configuration's schedule.
///
/// Per m: density normalization and floor, the dyadic tail bound on ||K_m||_inf, and per
/// trial the lifting ledger, WLS invariants, the Gelfand floor and certificate quality.
pub fn verify_bounds(cfg: &ExperimentConfig) -> Result<VerifySummary> {
    cfg.validate()?;
    let spec = cfg.build_spec()?;
    let grid = cfg.grid();
    let grid_pts = grid.points(spec.basis().space())?;
    let mut checks = Vec::new();
    for (mi, &m) in cfg.schedule.m.iter().enumerate() {
        checks.extend(density_checks(&spec, m)?);
        if m >= 4 && !spec.is_finite() {
            let lambda = ChristoffelRule::for_family(spec.basis().family());
            let (v, r) = dyadic_sigma_sum(spec.spectrum(), lambda, m / 4)?;
            let bound = 2.0 * (v + r);
            // ||K_m||_inf from the stored prefix (a lower estimate of the true value).
            let kt = spec.kernel_tail_sup(m)?;
            checks.push(check(
                "dyadic-tail-bound",
                m,
                None,
                bound - kt,
                format!("sup K_m(x,x) <= {kt:.6e}, dyadic bound {bound:.6e}"),
            ));
        }
        let gelfand = spec.gelfand_lower(m)?;
        for trial in 0..cfg.schedule.trials {
            let op = build_operator(cfg, &spec, mi, trial)?;
            let fns = random_test_functions(50, (4 * m).min(spec.max_index()), cfg.schedule.seed ^ stream_id(mi, trial));
            let ledger = verify_lift(&Approximant::Sampled(&op), &spec, m, &fns, &grid_pts)?;
            let worst = ledger.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min);
            checks.push(Check {
                name: "lift-lemma".into(),
                m,
                trial: Some(trial),
                passed: ledger.violations == 0,
                margin: worst,
                detail: format!("{} violations over {} functions", ledger.violations, ledger.entries.len()),
            });
            checks.extend(operator_checks(&op, cfg.schedule.seed ^ (trial as u64 + 1), trial)?);
            let rep = worst_case_linf(&Approximant::Sampled(&op), &spec, &grid, &WorstCaseOptions::default())?;
            checks.push(check(
                "gelfand-floor",
                m,
                Some(trial),
                rep.upper() - (gelfand - 1e-9),
                format!("value {:.6e} + certificate {:.3e} vs floor {gelfand:.6e}", rep.value, rep.certificate),
            ));
            checks.push(check(
                "certificate",
                m,
                Some(trial),
                crate::worstcase::CERT_ACCEPT * rep.value - rep.certificate,
                format!("certificate {:.3e} of value {:.6e}", rep.certificate, rep.value),
            ));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifySummary {
        preset: cfg.preset.clone(),
        config_hash: cfg.hash(),
        checks,
        passed,
    })
}

/// Grid points of the configuration's coarse grid.
pub fn grid_points(cfg: &ExperimentConfig, spec: &RkhsSpec) -> Result<Points> {
    cfg.grid().points(spec.basis().space())
}

/// Family of the configured class.
pub fn family(cfg: &ExperimentConfig) -> BasisFamily {
    match cfg.class {
        ClassConfig::LegendreSobolev { .. } => BasisFamily::Legendre,
        _ => BasisFamily::Trigonometric,
    }
}
