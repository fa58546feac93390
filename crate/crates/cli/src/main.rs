//! `tracebound`: run one verification experiment and write its report.
//!
//! Exit status is 0 when every check passes, 1 when some check fails and 2
//! on malformed input or a numerical breakdown.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tracebound_core::experiment::config::{
    BoundCheck, BoundsParams, CircleParams, Experiment, GridSpec, IdentitiesParams, LtParams, ModelSection,
    OutputSpec, RieszParams, SphereCheck, SphereParams, SumRulesParams, TorusParams, ALL_BOUND_CHECKS,
};
use tracebound_core::experiment::{emit, parse_config, parse_model_file, run_experiment, ExperimentConfig, Format};
use tracebound_core::matrix_oracle::GKind;

#[derive(Parser, Debug)]
#[command(name = "tracebound", version, about = "Verify trace identities and universal eigenvalue bounds on exact models")]
struct Cli {
    /// Seed for randomized experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the experiment's default tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Include wall time in the report (makes the output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GKindArg {
    General,
    Unitary,
    SelfAdjoint,
}

impl From<GKindArg> for GKind {
    fn from(k: GKindArg) -> Self {
        match k {
            GKindArg::General => GKind::General,
            GKindArg::Unitary => GKind::Unitary,
            GKindArg::SelfAdjoint => GKind::SelfAdjoint,
        }
    }
}

/// Torus model: a JSON file with `geometry` and optional `potential`.
#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Box half-width per axis of the plane-wave basis.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Quasimomentum, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<f64>>,
}

impl ModelArgs {
    fn section(&self) -> anyhow::Result<ModelSection> {
        let text = fs::read_to_string(&self.config).with_context(|| format!("reading {}", self.config.display()))?;
        let file = parse_model_file(&text).with_context(|| format!("parsing {}", self.config.display()))?;
        Ok(ModelSection {
            geometry: file.geometry,
            potential: file.potential,
            alpha: self.alpha,
            k: self.k.clone(),
            cutoff: self.cutoff,
        })
    }
}

fn grid(s: &str) -> Result<GridSpec, String> {
    GridSpec::parse(s).map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized matrix checks of the trace identities and gap inequalities.
    VerifyIdentities {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Fixed dimension; cycles through 2..=12 when absent.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, value_enum)]
        g_kind: Option<GKindArg>,
        #[arg(long, default_value_t = 3.0)]
        f_sigma: f64,
    },
    /// Eigenvalues with kinetic and potential energies, plus commutator checks.
    TorusSpectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Moment sum rules and the periodic identity for one dual vector.
    SumRules {
        #[command(flatten)]
        model: ModelArgs,
        /// Integer dual-lattice vector, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        q: Vec<i64>,
        #[arg(long = "n", short = 'N')]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
    },
    /// Universal bounds on λ_{N+1} and on eigenvalue means.
    Bounds {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        /// Subset of lambda-next, mean-ratio, difference, gap-polynomial, legendre.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Monotone Riesz-mean ratio along a z grid.
    Riesz {
        #[command(flatten)]
        model: ModelArgs,
        /// `start:stop:count` or `start:stop:spacing:count`.
        #[arg(long, value_parser = grid, allow_hyphen_values = true)]
        z: GridSpec,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
    },
    /// Semiclassical bound and its monotone approach in α.
    LtScan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z: f64,
        #[arg(long, default_value_t = 2.0)]
        sigma: f64,
        /// α grid, e.g. `0.01:1:geometric:20`.
        #[arg(long = "alphas", value_parser = grid)]
        alphas: GridSpec,
        #[arg(long, default_value_t = 1.0)]
        shift_factor: f64,
    },
    /// Lattice-point counting and the circle-problem bounds.
    Circle {
        #[arg(long, default_value_t = 10_000)]
        x_max: u64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Reilly-type bounds and monotone ratios on round spheres.
    Sphere {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 40)]
        levels: usize,
        #[arg(long, default_value_t = 50)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        geom_samples: usize,
        /// Subset of reilly, geom, monotone.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
    },
    /// Run an experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_names<T: serde::de::DeserializeOwned>(names: &[String], what: &str) -> anyhow::Result<Vec<T>> {
    names
        .iter()
        .map(|n| serde_json::from_value(serde_json::Value::String(n.clone())).map_err(|_| anyhow!("unknown {what} '{n}'")))
        .collect()
}

fn experiment(cmd: &Command) -> anyhow::Result<Experiment> {
    Ok(match cmd {
        Command::VerifyIdentities {
            trials,
            dim,
            g_kind,
            f_sigma,
        } => Experiment::Identities(IdentitiesParams {
            trials: *trials,
            dim: *dim,
            g_kind: g_kind.map(Into::into),
            f_sigma: *f_sigma,
        }),
        Command::TorusSpectrum { model, count } => Experiment::Torus(TorusParams {
            model: model.section()?,
            count: *count,
        }),
        Command::SumRules { model, q, n, z } => Experiment::SumRules(SumRulesParams {
            model: model.section()?,
            q: q.clone(),
            n: *n,
            z: *z,
        }),
        Command::Bounds {
            model,
            n_min,
            n_max,
            checks,
        } => Experiment::Bounds(BoundsParams {
            model: model.section()?,
            n_min: *n_min,
            n_max: *n_max,
            checks: match checks {
                Some(c) => parse_names::<BoundCheck>(c, "bound check")?,
                None => ALL_BOUND_CHECKS.to_vec(),
            },
        }),
        Command::Riesz { model, z, tau, sigma } => Experiment::Riesz(RieszParams {
            model: model.section()?,
            tau: *tau,
            z: *z,
            sigma: *sigma,
        }),
        Command::LtScan {
            model,
            z,
            sigma,
            alphas,
            shift_factor,
        } => Experiment::Lt(LtParams {
            model: model.section()?,
            z: *z,
            sigma: *sigma,
            alpha: *alphas,
            shift_factor: *shift_factor,
        }),
        Command::Circle { x_max, grid } => Experiment::Circle(CircleParams {
            x_max: *x_max,
            grid: *grid,
        }),
        Command::Sphere {
            d,
            r,
            levels,
            n_max,
            geom_samples,
            checks,
        } => Experiment::Sphere(SphereParams {
            d: *d,
            r: *r,
            levels: *levels,
            n_max: *n_max,
            geom_samples: *geom_samples,
            checks: match checks {
                Some(c) => parse_names::<SphereCheck>(c, "sphere check")?,
                None => vec![SphereCheck::Reilly, SphereCheck::Geom, SphereCheck::Monotone],
            },
        }),
        Command::Run { .. } => unreachable!("handled by the caller"),
    })
}

/// Resolve the full config; command-line flags win over the file.
fn resolve(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.command {
        Command::Run { config } => {
            let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            parse_config(&text).with_context(|| format!("parsing {}", config.display()))?
        }
        other => ExperimentConfig {
            seed: 42,
            tolerance: None,
            output: None,
            experiment: experiment(other)?,
        },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.tolerance.is_some() {
        cfg.tolerance = cli.tolerance;
    }
    if let Some(path) = &cli.out {
        let format = cli.format.map(Into::into).or(cfg.output.as_ref().map(|o| o.format)).unwrap_or_default();
        cfg.output = Some(OutputSpec {
            path: path.display().to_string(),
            format,
        });
    } else if let (Some(f), Some(o)) = (cli.format, cfg.output.as_mut()) {
        o.format = f.into();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = resolve(cli)?;
    let start = Instant::now();
    let mut report = run_experiment(&cfg)?;
    if cli.timing {
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    match &cfg.output {
        Some(o) => {
            let file = fs::File::create(&o.path).with_context(|| format!("creating {}", o.path))?;
            let mut w = std::io::BufWriter::new(file);
            emit(&report, o.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let format = cli.format.map(Into::into).unwrap_or_default();
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&report, format, &mut lock)?;
            lock.flush()?;
        }
    }
    let s = report.summary;
    eprintln!("{}: {}/{} checks passed", report.kind, s.passed, s.total);
    for r in report.records.iter().filter(|r| !r.pass).take(10) {
        eprintln!("  FAIL {} [{}] slack={:?}", r.name, r.inputs, r.slack);
    }
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
