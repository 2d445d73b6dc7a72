use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qherm_cli::config::{apply_override, Format, RunConfig, TaskKind};
use qherm_cli::table::Report;
use qherm_cli::{run, CliError, EXIT_NUMERIC};

/// Quasi-Hermitian oscillator toolkit.
#[derive(Debug, Parser)]
#[command(name = "qherm", version)]
struct Args {
    task: TaskKind,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Suppress the check summary on stderr.
    #[arg(long)]
    quiet: bool,
    /// Override a config entry, e.g. `params.epsilon=0.6`. Repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn load(args: &Args) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config("--config", format!("{}: {e}", args.config.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::config("config", e))?;
    for spec in &args.params {
        apply_override(&mut value, spec)?;
    }
    Ok(value)
}

fn emit(report: &Report, format: Format, path: Option<&PathBuf>) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => report.results.to_csv(),
        Format::Json => report.to_json()? + "\n",
    };
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner(args: &Args) -> Result<i32, CliError> {
    let value = load(args)?;
    let report = run(&value, args.task)?;
    let cfg = RunConfig::from_value(value)?;
    let format = args.format.or(cfg.output.format).unwrap_or_default();
    let path = args.output.as_ref().or(cfg.output.path.as_ref());
    emit(&report, format, path)?;
    if !args.quiet {
        for c in &report.checks {
            eprintln!("{}", c.summary());
        }
    }
    let failed = report.failed();
    if failed.is_empty() {
        return Ok(0);
    }
    let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
    eprintln!(
        "qherm: {} check(s) failed: {}",
        failed.len(),
        names.join(", ")
    );
    Ok(EXIT_NUMERIC)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match main_inner(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qherm: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
