use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ratchet_cli::{
    cmd_evolve, cmd_fig, cmd_gamma, cmd_sweep, cmd_verify, CliError, FigureId, RunConfig, Suite,
};

/// Resonant double-well kicked rotor: trajectories, force sweeps and checks.
#[derive(Parser)]
#[command(name = "ratchet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write per-kick observables.
    Evolve {
        /// key=value run configuration.
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override n_kicks from the config.
        #[arg(long)]
        n_kicks: Option<usize>,
    },
    /// Average force over a range of kick strengths.
    Sweep {
        /// key=value run configuration.
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of kicks.
        #[arg(long)]
        n_kicks: Option<usize>,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long, env = "RATCHET_JOBS")]
        jobs: Option<usize>,
    },
    /// Gauss sums for T = 4*pi*R/Q.
    Gamma { r: u64, q: u64 },
    /// Run a verification suite: symmetry, oracle, gamma or all.
    Verify { suite: String },
    /// Reproduce a figure's data: 1, 1-inset, 2a, 2b or 3.
    Fig {
        id: String,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of kicks.
        #[arg(long)]
        n_kicks: Option<usize>,
        #[arg(long, env = "RATCHET_JOBS")]
        jobs: Option<usize>,
    },
}

fn load(path: &Path, n_kicks: Option<usize>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(None, "config", format!("{}: {e}", path.display())))?;
    let mut config = RunConfig::parse(&text)?;
    if let Some(n) = n_kicks {
        config.n_kicks = n;
        config.validate()?;
    }
    Ok(config)
}

fn jobs(requested: Option<usize>) -> Result<usize, CliError> {
    match requested {
        Some(0) => Err(CliError::config(None, "jobs", "must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn with_output(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut out: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = f(&mut out);
    out.flush()?;
    result
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve {
            config,
            out,
            n_kicks,
        } => {
            let config = load(&config, n_kicks)?;
            with_output(out.as_deref(), |w| cmd_evolve(&config, w))
        }
        Command::Sweep {
            config,
            out,
            n_kicks,
            jobs: j,
        } => {
            let config = load(&config, n_kicks)?;
            let j = jobs(j)?;
            with_output(out.as_deref(), |w| cmd_sweep(&config, j, w))
        }
        Command::Gamma { r, q } => with_output(None, |w| cmd_gamma(r, q, w)),
        Command::Verify { suite } => {
            let suite: Suite = suite.parse()?;
            with_output(None, |w| cmd_verify(suite, w))
        }
        Command::Fig {
            id,
            out,
            n_kicks,
            jobs: j,
        } => {
            let id: FigureId = id.parse()?;
            let j = jobs(j)?;
            with_output(out.as_deref(), |w| cmd_fig(id, n_kicks, j, w))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
