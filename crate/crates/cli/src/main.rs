use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracpme::harness::{format_checks, TABLE_SIGMAS, TABLE_YS};
use fracpme::{
    march, run_convergence, run_sigma_table, run_validate, Error, RunConfig, SchemeMode, SnapshotSchedule, StudyBase,
    ValidateHooks,
};

#[derive(Parser)]
#[command(name = "fracpme", version, about = "Fractional porous medium solver and convergence checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-point sigma-derivative errors and orders; fails on any deviation
    /// from the reference table.
    SigmaTable {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sigmas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        ys: Option<Vec<f64>>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// March one configuration to its horizon.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Times at which full fields are written.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        snapshots: Option<Vec<f64>>,
        #[arg(long, default_value = "run")]
        out_prefix: String,
    },
    /// Refinement study against the spectral or fine-grid reference.
    Convergence {
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        m: f64,
        /// practical, optimal or minimal:DELTA
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Also write a log-log SVG of the errors.
        #[arg(long)]
        plot: bool,
        /// Write the CSV here instead of stdout; the plot goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle-consistency suite.
    Validate {
        /// Multiplies μ_σ in the bridge check.
        #[arg(long, default_value_t = 1.0, hide = true)]
        mu_scale: f64,
        /// Overrides the principal-value quadrature tolerance.
        #[arg(long, hide = true)]
        pv_tol: Option<f64>,
    },
}

enum Failure {
    Check(String),
    Config(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let root = match &e {
            Error::Level { source, .. } => source.as_ref(),
            other => other,
        };
        match root {
            Error::Config(_)
            | Error::Domain(_)
            | Error::UnsupportedStencil { .. }
            | Error::MeshTooSmall(_)
            | Error::CflViolation { .. }
            | Error::NonConvergentOrder { .. } => Failure::Config(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Check(e.to_string())
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn sigma_table(sigmas: Option<Vec<f64>>, ys: Option<Vec<f64>>, out: Option<PathBuf>) -> Result<(), Failure> {
    let sigmas = sigmas.unwrap_or_else(|| TABLE_SIGMAS.to_vec());
    let ys = ys.unwrap_or_else(|| TABLE_YS.to_vec());
    let table = run_sigma_table(&sigmas, &ys)?;
    emit(&table.csv, out.as_ref())?;
    if table.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("table deviations:\n{}", table.deviations.join("\n"))))
    }
}

fn solve(config: PathBuf, snapshots: Option<Vec<f64>>, prefix: String) -> Result<(), Failure> {
    let run = RunConfig::from_file(&config).map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
    let schedule = snapshots.map_or(SnapshotSchedule::None, SnapshotSchedule::Times);
    let has_snapshots = schedule != SnapshotSchedule::None;
    let tr = march(&run.solver, &run.initial_data, schedule)?;
    let trace_path = format!("{prefix}_trace.csv");
    tr.write_trace(fs::File::create(&trace_path)?)?;
    eprintln!("wrote {trace_path}");
    if has_snapshots {
        let path = format!("{prefix}_snapshots.csv");
        tr.write_snapshots(fs::File::create(&path)?)?;
        eprintln!("wrote {path}");
    }
    let (clamped, violations) = (tr.total_clamped(), tr.total_bound_violations());
    if clamped > 0 || violations > 0 {
        eprintln!("warning: {clamped} clamped brackets, {violations} nodes outside [0, b_max]");
    }
    Ok(())
}

fn convergence(sigma: f64, m: f64, mode: &str, levels: usize, plot: bool, out: Option<PathBuf>) -> Result<(), Failure> {
    let mode: SchemeMode = mode.parse()?;
    let report = run_convergence(sigma, m, mode, levels, &StudyBase::default())?;
    eprintln!("{}", report.summary());
    emit(&report.to_csv(), out.as_ref())?;
    if plot {
        let path = out.map_or_else(|| PathBuf::from("convergence.svg"), |p| p.with_extension("svg"));
        fs::write(&path, report.to_svg())?;
        eprintln!("wrote {}", path.display());
    }
    if report.degenerate || report.errors_strictly_decreasing() {
        Ok(())
    } else {
        Err(Failure::Check("errors do not decrease strictly under refinement".into()))
    }
}

fn validate(mu_scale: f64, pv_tol: Option<f64>) -> Result<(), Failure> {
    if !(mu_scale.is_finite() && mu_scale > 0.0) || pv_tol.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
        return Err(Failure::Config("test hooks must be positive and finite".into()));
    }
    let checks = run_validate(ValidateHooks { mu_scale, pv_tol })?;
    print!("{}", format_checks(&checks));
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} of {} checks failed", checks.len())))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::SigmaTable { sigmas, ys, out } => sigma_table(sigmas, ys, out),
        Command::Solve { config, snapshots, out_prefix } => solve(config, snapshots, out_prefix),
        Command::Convergence { sigma, m, mode, levels, plot, out } => convergence(sigma, m, &mode, levels, plot, out),
        Command::Validate { mu_scale, pv_tol } => validate(mu_scale, pv_tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
