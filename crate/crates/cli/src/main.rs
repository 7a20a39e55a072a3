use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use toc_cli::commands::{self, CommandError, DEFAULT_SEED};
use toc_cli::config::Config;

#[derive(Parser)]
#[command(name = "toc", version, about = "Build, evaluate and verify constrained expressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate f (and optional partials) on a uniform grid, as CSV.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Nodes per axis: `N` or `N,M,...`.
        #[arg(long, default_value = "11")]
        grid: String,
        /// Derivative multi-index, e.g. `0,1` for d/dy. Repeatable.
        #[arg(long)]
        partial: Vec<String>,
    },
    /// Check every constraint on sampled boundary points; exits 1 on failure.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Solve the config's [pde] problem and tabulate the solution.
    SolvePde {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "21")]
        grid: String,
    },
    /// Run the Dirichlet/Neumann combination table with random data.
    TableSweep {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// 1-based table rows to run; all when omitted. Repeatable.
        #[arg(long)]
        row: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, config: Option<&Path>, text: &str) -> Result<(), CommandError> {
    match out {
        Some(path) => {
            if config.is_some_and(|c| c == path) {
                return Err(CommandError::Usage("--out must differ from --config".into()));
            }
            fs::write(path, text).map_err(|e| CommandError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| CommandError::Usage(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<bool, CommandError> {
    match cli.command {
        Command::Eval { config, out, grid, partial } => {
            let cfg = Config::load(&config)?;
            let dim = cfg.domain.dim();
            let counts = commands::parse_grid(&grid, dim)?;
            let partials = partial.iter().map(|p| commands::parse_partial(p, dim)).collect::<Result<Vec<_>, _>>()?;
            emit(out.as_deref(), Some(&config), &commands::eval_csv(&cfg, &counts, &partials)?)?;
            Ok(true)
        }
        Command::Verify { config, out, seed, tol } => {
            let cfg = Config::load(&config)?;
            let report = commands::verify(&cfg, seed, tol)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            emit(out.as_deref(), Some(&config), &json)?;
            if !report.passed {
                eprintln!("verification failed");
            }
            Ok(report.passed)
        }
        Command::SolvePde { config, out, grid } => {
            let cfg = Config::load(&config)?;
            let counts = commands::parse_grid(&grid, cfg.domain.dim())?;
            let result = commands::solve_pde(&cfg, &counts)?;
            emit(out.as_deref(), Some(&config), &result.csv)?;
            eprint!("{}", result.summary);
            Ok(true)
        }
        Command::TableSweep { seed, row, out } => {
            let result = commands::table_sweep(&row, seed)?;
            emit(out.as_deref(), None, &result.text)?;
            Ok(result.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
