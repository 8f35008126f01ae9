//! Command dispatch and output files, shared by the binary and tests.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse, LoadedConfig};
use crate::error::CliError;
use crate::report::{envelope, to_json_string, validate_report};
use crate::run::{run, Command};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GIE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Parser)]
#[command(name = "gie", version, about = "Two-probe gravitationally induced entanglement scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// Output path; "-" writes to stdout. Defaults to <config stem>-<command>.<ext>
    /// in $GIE_OUT_DIR or the working directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and comparisons.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Suppresses the "wrote <path>" and "ok" messages.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Run the configured mediator once.
    Simulate { config: PathBuf },
    /// Evaluate the outputs over the [sweep] grid.
    Sweep { config: PathBuf },
    /// One row per entry of [[compare.mediators]].
    Compare { config: PathBuf },
    /// Spin-echo classification of the [noise] model.
    Discriminate { config: PathBuf },
    /// Feasibility plan for the experiment.
    Plan { config: PathBuf },
    /// Validate a config without running it.
    Check { config: PathBuf },
}

impl Sub {
    fn parts(&self) -> (Option<Command>, &Path) {
        match self {
            Sub::Simulate { config } => (Some(Command::Simulate), config),
            Sub::Sweep { config } => (Some(Command::Sweep), config),
            Sub::Compare { config } => (Some(Command::Compare), config),
            Sub::Discriminate { config } => (Some(Command::Discriminate), config),
            Sub::Plan { config } => (Some(Command::Plan), config),
            Sub::Check { config } => (None, config),
        }
    }
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// The report and CSV text for one command.
pub struct Rendered {
    pub json: String,
    pub csv: String,
}

pub fn render(command: Command, loaded: &LoadedConfig, seed: u64) -> Result<Rendered, CliError> {
    let start = Instant::now();
    let results = run(command, loaded, seed)?;
    let echo = serde_json::to_value(&loaded.raw)
        .map_err(|e| CliError::Io(format!("config echo: {e}")))?;
    let report = envelope(
        command.as_str(),
        seed,
        echo,
        &loaded.config.constants(),
        &results,
        start.elapsed().as_secs_f64(),
    );
    validate_report(&report).map_err(|e| CliError::Numerical(format!("report schema: {e}")))?;
    let csv = results
        .to_csv()
        .map_err(|e| CliError::Io(format!("csv: {e}")))?;
    Ok(Rendered {
        json: to_json_string(&report),
        csv,
    })
}

fn write(path: &Path, text: &str, quiet: bool) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if !quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::field("--threads", "must be >= 1"));
        }
        // Ignored if a pool already exists in this process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (command, path) = cli.command.parts();
    let loaded = load(path)?;
    let Some(command) = command else {
        if !cli.quiet {
            println!("{}: ok", path.display());
        }
        return Ok(());
    };
    let seed = cli.seed.unwrap_or(loaded.config.seed);
    let out = render(command, &loaded, seed)?;
    let stdout = cli.out.as_deref() == Some(Path::new("-"));
    if stdout {
        let text = match cli.format {
            Format::Json => out.json,
            Format::Csv => out.csv,
            Format::Both => {
                return Err(CliError::field("--format", "`both` needs a file path for --out"))
            }
        };
        std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        return Ok(());
    }
    let base = match &cli.out {
        Some(p) => p.clone(),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
            dir.join(format!("{stem}-{}.json", command.as_str()))
        }
    };
    match cli.format {
        Format::Json => write(&base, &out.json, cli.quiet)?,
        Format::Csv => {
            let p = if cli.out.is_some() { base } else { base.with_extension("csv") };
            write(&p, &out.csv, cli.quiet)?
        }
        Format::Both => {
            write(&base.with_extension("json"), &out.json, cli.quiet)?;
            write(&base.with_extension("csv"), &out.csv, cli.quiet)?;
        }
    }
    Ok(())
}
