//! The `npn` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error
//! (unreadable or malformed input), 3 numeric failure.

pub mod document;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::estimators::{entropy_npn, estimate_mi, EstimatorConfig, EstimatorKind};
use crate::io::load_csv;
use crate::matrix::{bandable_eigen_bounds, sym_eigen};
use crate::rank::TiePolicy;
use crate::simulation::{
    run_experiment, sample_bandable_correlation, trial_rng, ExperimentId, ExperimentSpec,
    MarginalTransform,
};

use document::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "npn", version, about = "Nonparanormal mutual information and entropy estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate mutual information (and optionally entropy) of a CSV dataset.
    Estimate(EstimateArgs),
    /// Run one of the Monte Carlo experiments and print MSE summaries.
    Simulate(SimulateArgs),
    /// Print spectral bounds for c-bandable correlation matrices.
    Bandable(BandableArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "gaussian,gauss,rho,tau,knn")]
    pub estimators: Vec<EstimatorKind>,
    /// Projection floor for rho and tau.
    #[arg(long, default_value_t = EstimatorConfig::DEFAULT_Z)]
    pub z: f64,
    /// Projection floor for gauss; 0 leaves it unregularized.
    #[arg(long, default_value_t = 0.0)]
    pub gauss_z: f64,
    #[arg(long, default_value_t = EstimatorConfig::DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = TiePolicy::LiteralIndicator)]
    pub ties: TiePolicy,
    /// Also estimate the joint entropy.
    #[arg(long)]
    pub entropy: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub experiment: u8,
    #[arg(long, default_value_t = ExperimentSpec::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = ExperimentSpec::DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = ExperimentSpec::DEFAULT_D)]
    pub d: usize,
    /// Sweep values; defaults to the experiment's standard grid.
    #[arg(
        long,
        value_delimiter = ',',
        aliases = ["n-grid", "alpha-grid", "beta-grid", "sigma-grid"]
    )]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = MarginalTransform::Exp)]
    pub transform: MarginalTransform,
    #[arg(long, value_delimiter = ',', default_value = "gaussian,gauss,rho,tau,knn")]
    pub estimators: Vec<EstimatorKind>,
    #[arg(long, default_value_t = EstimatorConfig::DEFAULT_Z)]
    pub z: f64,
    /// kNN neighbor count; defaults to 20 for experiment 3 and 2 otherwise.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = TiePolicy::LiteralIndicator)]
    pub ties: TiePolicy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BandableArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub d: usize,
    /// Sample this many boundary matrices and report their extreme eigenvalues.
    #[arg(long)]
    pub verify: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(&a, stdout, stderr),
        Command::Bandable(a) => cmd_bandable(&a, stdout, stderr),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    if err.is_data_error() {
        EXIT_DATA
    } else if matches!(err, Error::DomainError(_)) {
        EXIT_USAGE
    } else {
        EXIT_NUMERIC
    }
}

fn report(stderr: &mut dyn Write, err: &Error) -> i32 {
    let _ = writeln!(stderr, "npn: {}: {err}", err.code());
    exit_code_for(err)
}

fn emit(doc: &ResultDocument, output: &OutputArgs, stdout: &mut dyn Write) -> Result<(), Error> {
    match &output.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            doc.write(output.format, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => doc.write(output.format, stdout),
    }
}

fn estimator_config(kind: EstimatorKind, z: f64, gauss_z: f64, k: usize, ties: TiePolicy) -> EstimatorConfig {
    let cfg = EstimatorConfig::new(kind).with_k(k).with_tie_policy(ties);
    match kind {
        EstimatorKind::Rho | EstimatorKind::Tau => cfg.with_z(z),
        EstimatorKind::Gauss => cfg.with_z(gauss_z),
        _ => cfg,
    }
}

fn cmd_estimate(a: &EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let configs: Vec<EstimatorConfig> = a
        .estimators
        .iter()
        .map(|&kind| estimator_config(kind, a.z, a.gauss_z, a.k, a.ties))
        .collect();
    for cfg in &configs {
        if let Err(e) = cfg.validate() {
            return report(stderr, &e);
        }
    }
    let x = match load_csv(&a.input) {
        Ok(x) => x,
        Err(e) => return report(stderr, &e),
    };

    let mut worst = EXIT_OK;
    let estimates = configs
        .iter()
        .map(|cfg| match estimate_mi(&x, cfg) {
            Ok(est) => EstimateRow {
                estimator: cfg.kind.to_string(),
                value: Some(Num(est.value)),
                lambda_min: est.diagnostics.lambda_min,
                clamped_eigenvalues: cfg.kind.is_rank_based().then_some(est.diagnostics.clamped),
                max_diag_deviation: est.diagnostics.max_diag_deviation,
                error: None,
            },
            Err(e) => {
                let _ = writeln!(stderr, "npn: estimator {}: {}: {e}", cfg.kind, e.code());
                worst = worst.max(exit_code_for(&e));
                EstimateRow::failed(cfg.kind.name(), &e)
            }
        })
        .collect();
    let entropy = a.entropy.then(|| match entropy_npn(&x, a.z, a.k, a.ties) {
        Ok(h) => EntropyRow {
            value: Some(Num(h.value)),
            marginal_entropies: h.marginal_entropies.into_iter().map(Num).collect(),
            mutual_information: Some(h.mutual_information),
            error: None,
        },
        Err(e) => {
            let _ = writeln!(stderr, "npn: entropy: {}: {e}", e.code());
            worst = worst.max(exit_code_for(&e));
            EntropyRow {
                value: None,
                marginal_entropies: Vec::new(),
                mutual_information: None,
                error: Some(format!("{}: {e}", e.code())),
            }
        }
    });

    let doc = ResultDocument::Estimate(EstimateDocument {
        tool: TOOL_NAME,
        tool_version: TOOL_VERSION,
        command: "estimate",
        config: EstimateConfigEcho {
            input: a.input.display().to_string(),
            estimators: a.estimators.iter().map(|k| k.to_string()).collect(),
            z: a.z,
            gauss_z: a.gauss_z,
            k: a.k,
            ties: a.ties.to_string(),
            entropy: a.entropy,
        },
        n: x.n(),
        d: x.d(),
        estimates,
        entropy,
    });
    if let Err(e) = emit(&doc, &a.output, stdout) {
        return report(stderr, &e);
    }
    worst
}

fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let id = match ExperimentId::from_number(a.experiment) {
        Ok(id) => id,
        Err(e) => return report(stderr, &e),
    };
    let mut spec = ExperimentSpec::new(id);
    let k = a.k.unwrap_or(if id == ExperimentId::Outliers {
        ExperimentSpec::OUTLIER_K
    } else {
        EstimatorConfig::DEFAULT_K
    });
    spec.trials = a.trials;
    spec.n = a.n;
    spec.d = a.d;
    spec.transform = a.transform;
    spec.seed = a.seed;
    if let Some(grid) = &a.grid {
        spec.sweep = grid.clone();
    }
    spec.estimators = a
        .estimators
        .iter()
        .map(|&kind| estimator_config(kind, a.z, 0.0, k, a.ties))
        .collect();
    if let Err(e) = spec.validate() {
        return report(stderr, &e);
    }
    let summaries = match run_experiment(&spec) {
        Ok(s) => s,
        Err(e) => return report(stderr, &e),
    };
    let doc = ResultDocument::Simulate(SimulateDocument {
        tool: TOOL_NAME,
        tool_version: TOOL_VERSION,
        command: "simulate",
        config: SimulateConfigEcho {
            experiment: id.number(),
            trials: spec.trials,
            n: spec.n,
            d: spec.effective_d(),
            grid: spec.sweep.clone(),
            transform: spec.transform.to_string(),
            estimators: a.estimators.iter().map(|k| k.to_string()).collect(),
            z: a.z,
            k,
            ties: a.ties.to_string(),
            seed: spec.seed,
        },
        rows: summaries
            .iter()
            .map(|s| SummaryRow {
                experiment: id.number(),
                sweep_param: id.sweep_param(),
                sweep_value: s.sweep_value,
                estimator: s.estimator.to_string(),
                mse: s.mse,
                stderr: s.stderr,
                finite_fraction: s.finite_fraction,
                trials: s.trials,
            })
            .collect(),
    });
    match emit(&doc, &a.output, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => report(stderr, &e),
    }
}

/// Slack allowed between observed eigenvalues and the bounds.
const BANDABLE_SLACK: f64 = 1e-9;

fn cmd_bandable(a: &BandableArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (lower, upper) = match bandable_eigen_bounds(a.c) {
        Ok(b) => b,
        Err(e) => return report(stderr, &e),
    };
    if a.d == 0 {
        return report(stderr, &Error::DomainError("dimension must be positive".into()));
    }
    if lower <= 0.0 {
        let _ = writeln!(
            stderr,
            "npn: warning: lower bound {lower} is not positive; positive definiteness is only guaranteed for c < 1/3"
        );
    }
    let verification = match a.verify {
        None => None,
        Some(draws) => match verify_bandable(a.c, a.d, draws, a.seed) {
            Ok((lo, hi)) => Some(BandableVerification {
                draws,
                min_eigenvalue: lo,
                max_eigenvalue: hi,
                within_bounds: lo >= lower - BANDABLE_SLACK && hi <= upper + BANDABLE_SLACK,
            }),
            Err(e) => return report(stderr, &e),
        },
    };
    let out_of_bounds = verification.as_ref().is_some_and(|v| !v.within_bounds);
    let doc = ResultDocument::Bandable(BandableDocument {
        tool: TOOL_NAME,
        tool_version: TOOL_VERSION,
        command: "bandable",
        config: BandableConfigEcho {
            c: a.c,
            d: a.d,
            verify: a.verify,
            seed: a.seed,
        },
        lower,
        upper,
        positive_definite_guaranteed: lower > 0.0,
        verification,
    });
    if let Err(e) = doc.write(a.format, stdout) {
        return report(stderr, &e);
    }
    if out_of_bounds {
        let _ = writeln!(stderr, "npn: observed eigenvalues fall outside the bounds");
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}

/// Extreme eigenvalues over `draws` random bandable matrices. Even draws sit
/// on the boundary `|A_ij| = c^|i-j|` with random signs; odd draws shrink
/// each entry by a uniform factor.
fn verify_bandable(c: f64, d: usize, draws: usize, seed: u64) -> Result<(f64, f64), Error> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in 0..draws {
        let mut rng = trial_rng(seed, t, 4);
        let a = sample_bandable_correlation(c, d, t % 2 == 0, &mut rng)?;
        let eig = sym_eigen(a.as_sym())?;
        lo = lo.min(eig.min_eigenvalue());
        hi = hi.max(eig.eigenvalues[0]);
    }
    Ok((lo, hi))
}
