//! `dpsqkd`: CSV sweeps of phase-error bounds, key rates and asymptotic
//! coefficients, plus the oracle self-check.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid
//! configuration, 3 numerical failure.

mod commands;
mod config;
mod format;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{read_config_file, Settings};

/// Output goes to `<dir>/<command>.csv` when this is set and `--out` is not.
/// Relative `--out` paths are resolved against it too.
const OUT_DIR_ENV: &str = "DPSQKD_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "dpsqkd",
    version,
    about = "Phase-error bounds and key rates for block-randomized DPS QKD"
)]
struct Cli {
    /// key = value file; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout, or $DPSQKD_OUT_DIR/<command>.csv).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ω(λ) on a λ grid with the maximizing pattern and branch.
    Omega(OmegaArgs),
    /// Boundary of the allowed (e, e_ph) region per photon number.
    Region(RegionArgs),
    /// Key rate against transmittance for each truncation.
    Keyrate(KeyrateArgs),
    /// Low-transmission coefficients and threshold error rates.
    Asymptotic(AsymptoticArgs),
    /// Compare the fast path with the brute-force oracle.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OmegaArgs {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// start:stop:points, log:start:stop:points or a comma list [default: 0:12:2401]
    #[arg(long)]
    lambda: Option<String>,
    /// Eigenvalue tolerance [default: 1e-12]
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    n: Option<String>,
    /// Comma list of photon numbers [default: 0,1,2,3]
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args)]
struct KeyrateArgs {
    #[arg(long)]
    n: Option<String>,
    /// Bit error rate.
    #[arg(long)]
    e: Option<String>,
    /// Transmittance grid [default: log:1e-5:1e-1:41]
    #[arg(long)]
    eta: Option<String>,
    /// Comma list of truncations [default: 1,2,3]
    #[arg(long = "nu-bar")]
    nu_bar: Option<String>,
    /// fixed-mean:X (X = nα²), linear:C (α² = Cη), sqrt:C (α² = C√η) or optimize [default: optimize]
    #[arg(long)]
    photon: Option<String>,
}

#[derive(Args)]
struct AsymptoticArgs {
    #[arg(long)]
    n: Option<String>,
    /// Bit error rate grid [default: 0:0.04:81]
    #[arg(long)]
    e: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Block length, at most 8 [default: 5]
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Shift the bit-error operator's diagonal by this amount before
    /// checking; the run must then fail.
    #[arg(long, num_args = 0..=1, default_missing_value = "1e-3")]
    mutate: Option<String>,
}

type Flags = Vec<(&'static str, Option<String>)>;

fn command_flags(cmd: Command) -> (&'static str, &'static [&'static str], Flags) {
    match cmd {
        Command::Omega(a) => (
            "omega",
            commands::OMEGA_KEYS,
            vec![
                ("n", a.n),
                ("nu", a.nu),
                ("lambda", a.lambda),
                ("tol", a.tol),
            ],
        ),
        Command::Region(a) => (
            "region",
            commands::REGION_KEYS,
            vec![("n", a.n), ("nu", a.nu), ("tol", a.tol)],
        ),
        Command::Keyrate(a) => (
            "keyrate",
            commands::KEYRATE_KEYS,
            vec![
                ("n", a.n),
                ("e", a.e),
                ("eta", a.eta),
                ("nu_bar", a.nu_bar),
                ("photon", a.photon),
            ],
        ),
        Command::Asymptotic(a) => (
            "asymptotic",
            commands::ASYMPTOTIC_KEYS,
            vec![("n", a.n), ("e", a.e)],
        ),
        Command::Verify(a) => (
            "verify",
            commands::VERIFY_KEYS,
            vec![
                ("n", a.n),
                ("nu", a.nu),
                ("lambda", a.lambda),
                ("mutate", a.mutate),
            ],
        ),
    }
}

fn output_path(out: Option<&str>, command: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match (out, dir) {
        (Some(p), Some(d)) if Path::new(p).is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(PathBuf::from(p)),
        (None, Some(d)) => Some(d.join(format!("{command}.csv"))),
        (None, None) => None,
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), String> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
            }
            std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(String, Option<PathBuf>), Failure> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let (name, allowed, mut flags) = command_flags(cli.command);
    flags.push(("out", cli.out.map(|p| p.display().to_string())));
    flags.push(("workers", cli.workers));
    let settings = Settings::new(file, flags, allowed)?;

    let workers = match settings.raw("workers") {
        None => None,
        Some(w) => match w.parse::<usize>() {
            Ok(k) if k >= 1 => Some(k),
            _ => {
                return Err(Failure::Config(format!(
                    "workers must be a positive integer, got {w:?}"
                )))
            }
        },
    };
    let path = output_path(settings.raw("out"), name);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Solver(format!("cannot start worker pool: {e}")))?;

    let text = pool.install(|| match name {
        "omega" => commands::omega(settings),
        "region" => commands::region(settings),
        "keyrate" => commands::keyrate(settings),
        "asymptotic" => commands::asymptotic(settings),
        _ => commands::verify(settings),
    });
    match text {
        Ok(t) => Ok((t, path)),
        Err(Failure::Check(report)) => {
            emit(&report, path.as_deref()).map_err(Failure::Solver)?;
            Err(Failure::Check(report))
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, path)) => match emit(&text, path.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Err(Failure::Check(report)) => {
            for line in report.lines().filter(|l| l.contains(",fail,")) {
                eprintln!("check failed: {line}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            ExitCode::from(3)
        }
    }
}
