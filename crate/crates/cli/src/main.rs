use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aqs_cli::config::{Command, ConfigFile, Format, RunConfig, RuntimeScalingConfig, Subcommand};
use aqs_cli::run::{run, CliError};
use aqs_cli::validate::{has_errors, validate};
use clap::{Parser, Subcommand as ClapSubcommand};

#[derive(Parser)]
#[command(name = "aqs", version, about = "Adiabatic quantum search in a bosonic environment")]
struct Cli {
    /// TOML run configuration. Without it, built-in defaults are used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.path`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true, env = "AQS_WORKERS")]
    workers: Option<usize>,
    /// Validate the configuration and print it, without running.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(ClapSubcommand)]
enum Sub {
    /// Minimum gap and two-level spectrum.
    Model,
    /// Renormalized tunneling fixed points and critical couplings.
    Renorm,
    /// Phase diagram, critical temperatures and their exponents.
    Critical,
    /// Golden-rule and incoherent transition rates.
    Rates,
    /// Closed and dephasing evolutions.
    Dynamics {
        /// Also measure the time to reach the target success probability.
        #[arg(long)]
        runtime_scaling: bool,
    },
    /// Bogoliubov diagonalization of a quadratic bosonic Hamiltonian.
    Bogoliubov,
}

impl Sub {
    fn kind(&self) -> Subcommand {
        match self {
            Sub::Model => Subcommand::Model,
            Sub::Renorm => Subcommand::Renorm,
            Sub::Critical => Subcommand::Critical,
            Sub::Rates => Subcommand::Rates,
            Sub::Dynamics { .. } => Subcommand::Dynamics,
            Sub::Bogoliubov => Subcommand::Bogoliubov,
        }
    }
}

fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn load(path: &Path, sub: Subcommand) -> Result<(RunConfig, String), CliError> {
    let source = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: ConfigFile = toml::from_str(&source).map_err(|e| {
        let at = e.span().map_or(String::new(), |s| {
            let (l, c) = line_col(&source, s.start);
            format!(":{l}:{c}")
        });
        CliError::Config(format!("{}{at}: {}", path.display(), e.message()))
    })?;
    let config = file
        .select(sub)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((config, source))
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    let sub = cli.command.kind();
    let (mut config, source, base_dir, file) = match &cli.config {
        Some(p) => {
            let (c, s) = load(p, sub)?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (c, Some(s), base, p.display().to_string())
        }
        None => (
            ConfigFile::default().select(sub).expect("defaults select"),
            None,
            PathBuf::from("."),
            "<defaults>".to_owned(),
        ),
    };
    if let Some(o) = cli.output {
        config.output.path = o;
    }
    if let Some(f) = cli.format {
        config.output.format = f;
    }
    if let (Sub::Dynamics { runtime_scaling: true }, Command::Dynamics(d)) = (&cli.command, &mut config.command) {
        d.runtime_scaling.get_or_insert_with(RuntimeScalingConfig::default);
    }

    let diags = validate(&config);
    for d in &diags {
        eprintln!("{}", d.anchored(&file, source.as_deref()));
    }
    if has_errors(&diags) {
        return Err(CliError::Config(format!(
            "{} configuration error(s)",
            diags.iter().filter(|d| d.severity == aqs_cli::validate::Severity::Error).count()
        )));
    }
    if cli.check {
        print!("{}", config.to_toml());
        return Ok(());
    }

    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let (outcome, written) = run(&config, &base_dir, workers)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for note in &outcome.notes {
        if !diags.iter().any(|d| d.to_string() == *note) {
            eprintln!("note: {note}");
        }
    }
    println!("wrote {} files to {}", written.len(), config.output.path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aqs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
