//! `kolmo`: command-line front end for the workbench.
//!
//! Exit status is 0 on success, 2 when arguments or inputs fail validation,
//! and 1 for runtime failures (I/O, aborted computations). Results go to
//! `--out` (written atomically) or stdout; log lines go to stderr.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "kolmo",
    about = "Budgeted Kolmogorov complexity, a priori probabilities, and companion experiments",
    disable_version_flag = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Print the version and the codec layout hash.
    #[arg(long)]
    version: bool,

    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (0: one per core). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Resumable state for `apriori` and `order`, updated after each program length.
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time-bounded exponential Kolmogorov complexity of one number.
    K(commands::KArgs),
    /// Initial segment of the Kolmogorov order.
    Order(commands::OrderArgs),
    /// Incompressibility census of all numbers below 2^bits.
    Census(commands::CensusArgs),
    /// LZ78 upper bound on the description length of a file.
    Lz(commands::LzArgs),
    /// Lower approximation of the a priori semimeasure.
    Apriori(commands::AprioriArgs),
    /// Numeral frequencies in a text.
    Numerals(commands::NumeralsArgs),
    /// Rank agreement between numeral frequencies and an a priori table.
    Compare(commands::CompareArgs),
    /// Multiple-comparisons null simulation.
    Spurious(commands::SpuriousArgs),
    /// N-body integration or divergence probe.
    Nbody(commands::NbodyArgs),
}

/// A failed run, split by exit status.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Runtime(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

pub fn invalid<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Invalid(msg.into()))
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            writeln!(
                buf,
                "level={} target={} {}",
                record.level().as_str().to_lowercase(),
                record.target(),
                record.args()
            )
        })
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        println!(
            "kolmo {} layout {}",
            env!("CARGO_PKG_VERSION"),
            kolmo::codec::layout_hash()
        );
        return ExitCode::SUCCESS;
    }
    init_logging();
    if cli.global.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.workers)
            .build_global()
        {
            log::error!("msg=\"worker pool: {e}\"");
            return ExitCode::from(1);
        }
    }
    let g = &cli.global;
    let result = match cli.command {
        None => invalid("no subcommand given"),
        Some(Command::K(a)) => commands::k(g, a),
        Some(Command::Order(a)) => commands::order(g, a),
        Some(Command::Census(a)) => commands::census(g, a),
        Some(Command::Lz(a)) => commands::lz(g, a),
        Some(Command::Apriori(a)) => commands::apriori(g, a),
        Some(Command::Numerals(a)) => commands::numerals(g, a),
        Some(Command::Compare(a)) => commands::compare(g, a),
        Some(Command::Spurious(a)) => commands::spurious(g, a),
        Some(Command::Nbody(a)) => commands::nbody(g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            log::error!("kind=validation msg={msg:?}");
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            log::error!("kind=runtime msg={:?}", format!("{e:#}"));
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
