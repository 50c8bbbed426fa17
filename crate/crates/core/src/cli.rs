//! Command-line front end: `spiked-wigner <experiment> [--config FILE] [overrides]`
//! and `spiked-wigner theory-table`.
//!
//! Exit status is 0 when every verdict passes, 1 when any fails and 2 on
//! configuration or runtime errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::experiments::{self, parse_override, ExperimentConfig, ExperimentKind, ExperimentReport};
use crate::spectral::Beta;
use crate::theory::{c_theta, neg_inv_gprime, outlier_location, pi_cov, stieltjes_g, variance_kernel};
use crate::{Complex64, Error, Result};

/// Environment variable naming the default report directory.
pub const OUTPUT_DIR_ENV: &str = "SPIKED_WIGNER_OUT";
const DEFAULT_OUTPUT_DIR: &str = "reports";

#[derive(Debug, Parser)]
#[command(
    name = "spiked-wigner",
    version,
    about = "Outliers of spiked Wigner matrices: predictions and Monte Carlo checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outlier locations and their fluctuations
    Outliers(RunArgs),
    /// Residual of the Ξ-matrix proxy over a ladder of sizes
    XiProxy(RunArgs),
    /// Covariance and centering of resolvent bilinear forms
    Resolvent(RunArgs),
    /// Fluctuations of ⟨u, f(X) v⟩ for test functions f
    Testfn(RunArgs),
    /// Steinitz rearrangement of eigenvector families
    SteinitzDemo(RunArgs),
    /// Closed-form quantities for one spike
    TheoryTable(TheoryArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config; its keys replace the defaults of the subcommand
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report directory [default: $SPIKED_WIGNER_OUT or ./reports]
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub beta: Option<u8>,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub truncate: Option<bool>,
    /// Override any top-level config field, value in JSON (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// No replica counter on stderr
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1)]
    pub beta: u8,
}

impl RunArgs {
    fn overrides(&self) -> Result<Vec<(String, Value)>> {
        let mut out = Vec::new();
        let mut flag = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                out.push((key.to_string(), v));
            }
        };
        flag("workers", self.workers.map(Value::from));
        flag("n", self.n.map(Value::from));
        flag("replicas", self.replicas.map(Value::from));
        flag("beta", self.beta.map(Value::from));
        flag("master_seed", self.master_seed.map(Value::from));
        flag("truncate", self.truncate.map(Value::from));
        for s in &self.set {
            out.push(parse_override(s)?);
        }
        Ok(out)
    }

    fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

/// Reads a JSON config file.
pub fn read_config_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Resolves the config of an experiment subcommand.
pub fn resolve_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig> {
    let file = args.config.as_deref().map(read_config_file).transpose()?;
    ExperimentConfig::from_layers(kind, file, &args.overrides()?)
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExperimentReport> {
    let cfg = resolve_config(kind, args)?;
    experiments::set_progress(!args.quiet);
    let report = experiments::run(&cfg)?;
    let dir = args.output_dir();
    let (json, csv) = report.write(&dir, kind.name())?;
    for v in &report.verdicts {
        let _ = writeln!(
            out,
            "{} {}: {} vs {} (tolerance {}, {})",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.empirical,
            v.target,
            v.tolerance,
            v.rule
        );
    }
    let _ = writeln!(out, "report: {}", json.display());
    let _ = writeln!(out, "raw: {}", csv.display());
    let _ = writeln!(
        err,
        "{}: {} replicas ({} skipped) in {:.2} s",
        kind.name(),
        report.replicas,
        report.skipped,
        report.wall_time_secs
    );
    Ok(report)
}

/// `p/q` with `q ≤ 1000` when `x` is that fraction to within rounding.
fn as_fraction(x: f64) -> Option<String> {
    if !x.is_finite() || x.fract() == 0.0 {
        return None;
    }
    (2..=1000u32).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() <= 1e-12 * x.abs().max(1.0)).then(|| format!("{p}/{q}"))
    })
}

fn line(out: &mut dyn Write, name: &str, x: f64) {
    let _ = match as_fraction(x) {
        Some(f) => writeln!(out, "{name} = {x} ({f})"),
        None => writeln!(out, "{name} = {x}"),
    };
}

/// Prints `ρ_θ`, `g(ρ_θ)`, `c_θ`, `−1/g′(ρ_θ)`, the Case B variances,
/// `Π(ρ,ρ)` and the limit variance kernel.
pub fn theory_table(args: &TheoryArgs, out: &mut dyn Write) -> Result<()> {
    let (theta, sigma) = (args.theta, args.sigma);
    let beta = Beta::try_from(args.beta)?;
    line(out, "theta", theta);
    line(out, "sigma", sigma);
    let Some(rho) = outlier_location(theta, sigma)? else {
        let _ = writeln!(out, "rho = none (|theta| <= sigma, no outlier)");
        return Ok(());
    };
    let z = Complex64::new(rho, 0.0);
    let gaussian_variance = theta * theta * sigma * sigma / (theta * theta - sigma * sigma);
    line(out, "rho", rho);
    line(out, "g(rho)", stieltjes_g(z, sigma)?.g.re);
    line(out, "c_theta", c_theta(theta, sigma)?);
    line(out, "-1/g'(rho)", neg_inv_gprime(theta, sigma)?);
    line(out, "gaussian_variance", gaussian_variance);
    line(
        out,
        &format!("diagonal_variance[beta={}]", beta.value()),
        2.0 / beta.as_f64() * gaussian_variance,
    );
    line(out, "pi(rho,rho)", pi_cov(z, z, sigma)?.re);
    line(out, "variance_kernel(rho,rho)", variance_kernel(z, z, sigma)?.re);
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let (kind, args) = match &cli.command {
        Command::TheoryTable(t) => {
            theory_table(t, out)?;
            return Ok(true);
        }
        Command::Outliers(a) => (ExperimentKind::Outliers, a),
        Command::XiProxy(a) => (ExperimentKind::XiProxy, a),
        Command::Resolvent(a) => (ExperimentKind::Resolvent, a),
        Command::Testfn(a) => (ExperimentKind::Testfn, a),
        Command::SteinitzDemo(a) => (ExperimentKind::SteinitzDemo, a),
    };
    Ok(run_experiment(kind, args, out, err)?.passed)
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(as_fraction(4.0 / 3.0).as_deref(), Some("4/3"));
        assert_eq!(as_fraction(1.0 / 12.0).as_deref(), Some("1/12"));
        assert_eq!(as_fraction(2.5).as_deref(), Some("5/2"));
        assert_eq!(as_fraction(3.0), None);
        assert_eq!(as_fraction(std::f64::consts::PI), None);
    }

    #[test]
    fn flags_become_overrides() {
        let cli = Cli::try_parse_from([
            "x",
            "outliers",
            "--n",
            "300",
            "--truncate",
            "true",
            "--set",
            "law={\"kind\":\"rademacher\"}",
        ])
        .unwrap();
        let Command::Outliers(args) = cli.command else { panic!() };
        let cfg = resolve_config(ExperimentKind::Outliers, &args).unwrap();
        assert_eq!(cfg.n, 300);
        assert!(cfg.truncate);
        assert_eq!(cfg.law.kind, crate::ensemble::LawKind::Rademacher);
    }
}
