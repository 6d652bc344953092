use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unirec::basis::BasisSystem;
use unirec::christoffel::{christoffel_exact, christoffel_grid};
use unirec::grid::GridSpec;
use unirec::harness::{
    build_operator, evaluate_operator, output_dir, preset, run_experiment, verify_bounds, ExperimentConfig,
};
use unirec::index_set::hyperbolic_cross;
use unirec::lift::random_test_functions;
use unirec::rate::{fit_rate, median, RateFitOptions};
use unirec::worstcase::expansion_values;
use unirec::{Error, Result, C64};

/// Christoffel-weighted least-squares recovery and certified worst-case errors.
#[derive(Parser)]
#[command(name = "unirec", version)]
struct Cli {
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Christoffel function: closed form and refined grid maximum.
    Christoffel {
        /// trig or legendre.
        #[arg(long, default_value = "trig")]
        family: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Spectrum of the configured class as CSV.
    Spectrum {
        #[command(flatten)]
        source: Source,
    },
    /// Draws a sample plan for one m of the schedule.
    Sample {
        #[command(flatten)]
        source: Source,
        /// Position in the m-schedule.
        #[arg(long, default_value_t = 0)]
        m_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Fits a seeded random function of the unit ball and writes its coefficients.
    Recover {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        m_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Worst-case error reports of one operator.
    Worstcase {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        m_index: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Rate fit of a CSV with columns n (or m) and value.
    Rates {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = unirec::rate::DEFAULT_EXCLUDE)]
        exclude: usize,
    },
    /// Runs the invariant suite; exit code 0 iff every check passes.
    VerifyBounds {
        #[command(flatten)]
        source: Source,
    },
    /// Runs a full experiment.
    Run {
        #[command(flatten)]
        source: Source,
    },
}

fn load(source: &Source) -> Result<ExperimentConfig> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(p), None) => ExperimentConfig::from_file(p)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset("cor-4.1")?,
        (Some(_), Some(_)) => return Err(Error::Config("give either --config or --preset".into())),
    };
    if let Some(s) = source.seed {
        cfg.schedule.seed = s;
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn check_index(cfg: &ExperimentConfig, m_index: usize) -> Result<()> {
    if m_index >= cfg.schedule.m.len() {
        return Err(Error::Config(format!(
            "m-index {m_index} outside a schedule of length {}",
            cfg.schedule.m.len()
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Christoffel { family, d, n, grid } => {
            let system = match family.as_str() {
                "trig" => {
                    let mut level = 1;
                    loop {
                        let set = hyperbolic_cross(level, d)?;
                        if set.len() >= n {
                            break BasisSystem::trigonometric(d, set.indices()[..n].to_vec())?;
                        }
                        level += 1;
                    }
                }
                "legendre" => BasisSystem::legendre(n)?,
                other => return Err(Error::Config(format!("unknown family {other}"))),
            };
            let mut g = GridSpec::default_for(system.space().dim());
            if let Some(p) = grid {
                g.per_axis = p;
            }
            let exact = christoffel_exact(&system, n)?;
            let found = christoffel_grid(&system, n, &g)?;
            let json = serde_json::json!({"n": n, "exact": exact, "grid": found});
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        Command::Spectrum { source } => {
            let cfg = load(&source)?;
            let spec = cfg.build_spec()?;
            write_or_print(source.out.as_deref(), "spectrum.csv", &spec.spectrum().to_csv())?;
        }
        Command::Sample { source, m_index, trial } => {
            let cfg = load(&source)?;
            check_index(&cfg, m_index)?;
            let spec = cfg.build_spec()?;
            let op = build_operator(&cfg, &spec, m_index, trial)?;
            let plan = op.plan();
            write_or_print(source.out.as_deref(), "samples.csv", &plan.to_csv())?;
            if let Some(dir) = source.out.as_deref() {
                fs::write(dir.join("samples.json"), serde_json::to_string_pretty(&plan.sidecar())?)?;
            }
        }
        Command::Recover { source, m_index, trial } => {
            let cfg = load(&source)?;
            check_index(&cfg, m_index)?;
            let spec = cfg.build_spec()?;
            let op = build_operator(&cfg, &spec, m_index, trial)?;
            let m = op.m();
            let f = &random_test_functions(1, (4 * m).min(spec.max_index()), cfg.schedule.seed)[0];
            let coeffs: Vec<C64> = f
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| spec.sigma(k + 1).map(|s| c * s))
                .collect::<Result<_>>()?;
            let values = expansion_values(spec.basis(), op.points(), &coeffs)?;
            let fit = op.apply(&values)?;
            let mut csv = String::from("k,re,im\n");
            for (k, c) in fit.iter().enumerate() {
                csv.push_str(&format!("{},{:.12e},{:.12e}\n", k + 1, c.re, c.im));
            }
            write_or_print(source.out.as_deref(), "coefficients.csv", &csv)?;
            if let Some(dir) = source.out.as_deref() {
                let mut side = op.plan().sidecar();
                side["operator_id"] = op.id().into();
                side["weighting"] = serde_json::to_value(op.weighting())?;
                side["conditioning"] = serde_json::to_value(op.conditioning())?;
                fs::write(dir.join("coefficients.json"), serde_json::to_string_pretty(&side)?)?;
            }
        }
        Command::Worstcase { source, m_index, trial } => {
            let cfg = load(&source)?;
            check_index(&cfg, m_index)?;
            let spec = cfg.build_spec()?;
            let op = build_operator(&cfg, &spec, m_index, trial)?;
            let reports = evaluate_operator(&op, &spec, &cfg.norms(), &cfg.grid())?;
            let text = serde_json::to_string_pretty(&reports)?;
            write_or_print(source.out.as_deref(), "worstcase.json", &format!("{text}\n"))?;
            if reports.iter().any(|r| !r.certified) {
                return Ok(3);
            }
        }
        Command::Rates { input, gamma, exclude } => {
            let text = fs::read_to_string(&input)?;
            let pairs = read_pairs(&text)?;
            let fit = fit_rate(
                &pairs,
                &RateFitOptions {
                    fixed_gamma: gamma,
                    exclude_smallest: exclude,
                },
            )?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
        }
        Command::VerifyBounds { source } => {
            let cfg = load(&source)?;
            let summary = verify_bounds(&cfg)?;
            let text = serde_json::to_string_pretty(&summary)?;
            write_or_print(source.out.as_deref(), "verify.json", &format!("{text}\n"))?;
            if !summary.passed {
                return Ok(3);
            }
        }
        Command::Run { source } => {
            let cfg = load(&source)?;
            let dir = output_dir(&cfg, source.out.as_deref());
            let outcome = run_experiment(&cfg, &dir)?;
            println!("{}", serde_json::to_string_pretty(&outcome.manifest)?);
            if !outcome.manifest.all_certified {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

/// (x, median value) pairs from a CSV with a header naming `n` or `m` and `value`.
fn read_pairs(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config("empty rate table".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let xi = col("n")
        .or_else(|| col("m"))
        .ok_or_else(|| Error::Config("rate table needs an n or m column".into()))?;
    let vi = col("value").ok_or_else(|| Error::Config("rate table needs a value column".into()))?;
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |i: usize| -> Result<f64> {
            f.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad rate table line: {line}")))
        };
        let (x, v) = (parse(xi)?, parse(vi)?);
        match groups.iter_mut().find(|g| g.0 == x) {
            Some(g) => g.1.push(v),
            None => groups.push((x, vec![v])),
        }
    }
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    Ok(groups.into_iter().map(|(x, v)| (x, median(&v))).collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
