use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use qvac_cli::{emit, parse_config_with, run_experiment, CliError, Experiment, Format};

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

/// Run a qvac experiment and write its report.
#[derive(Parser, Debug)]
#[command(name = "qvac", version)]
struct Args {
    /// algebra-check, bogoliubov-check, vacuum-check, thermo-scan,
    /// entangle-report, overlap-scaling or verify-all
    experiment: String,
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` from the configuration
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Overrides `tolerance` from the configuration
    #[arg(long)]
    tolerance: Option<f64>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let experiment: Experiment = args.experiment.parse()?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Io { path: args.config.display().to_string(), source })?;
    let cfg = parse_config_with(&text, args.tolerance)?;
    let started = Instant::now();
    let report = run_experiment(experiment, &cfg)?;
    let format = match args.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    let (path, _) = emit(&report, format, &dir, started.elapsed())?;
    for inv in report.failures() {
        eprintln!("FAIL {}: {:e} > {:e}", inv.name, inv.value, inv.tolerance);
    }
    println!(
        "{} {}: {}/{} checks passed, report {}",
        if report.passed() { "PASS" } else { "FAIL" },
        report.experiment,
        report.invariants.iter().filter(|i| i.pass).count(),
        report.invariants.len(),
        path.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
