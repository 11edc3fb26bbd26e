use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod exit;

use exit::Failure;

/// Exact HKZ reduction, orthogonality defects and defect bounds.
#[derive(Parser, Debug)]
#[command(name = "hkz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// HKZ-reduce the Gram matrix in FILE.
    Reduce {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Orthogonality defect of the basis in FILE, with applicable bounds.
    Defect {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Successive minima of the lattice in FILE (rank <= 6).
    Minima {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Table of Hermite constants and defect bounds.
    Bounds {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Re-verify the rank-3 case analysis on an exact grid.
    VerifyProof {
        /// Grid step p/q; must divide 1/2 and be at most 1/50.
        #[arg(long, default_value = "1/100")]
        step: String,
        /// Scan only this case (NEG_KMIN, NEG_KMAX, POS_KMIN, POS_KMAX).
        #[arg(long = "case")]
        case_id: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Add 1/10 to the constant coefficient of every quadratic.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Random-lattice defect experiment.
    Experiment {
        #[arg(long, default_value_t = 3)]
        rank: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        entry_bound: i64,
        /// Per-trial CSV output; the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("HKZ_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            Failure::invalid(format!(
                "HKZ_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::invalid(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Reduce { file, format } => commands::reduce(&file, format),
        Command::Defect { file, format } => commands::defect(&file, format),
        Command::Minima { file, format } => commands::minima(&file, format),
        Command::Bounds { max_rank, format } => commands::bounds(max_rank, format),
        Command::VerifyProof {
            step,
            case_id,
            format,
            inject_fault,
        } => commands::verify_proof(&step, case_id.as_deref(), format, inject_fault),
        Command::Experiment {
            rank,
            trials,
            seed,
            entry_bound,
            out,
            format,
        } => commands::experiment(
            hkz_core::experiments::ExperimentConfig {
                rank,
                trials,
                seed,
                entry_bound,
            },
            out.as_deref(),
            format,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code as u8)
        }
    }
}
