use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod io;

use error::{CliError, Code};

#[derive(Debug, Parser)]
#[command(name = "lexichron", version, about = "Lexical distances, divergence times and UPGMA trees from Swadesh wordlists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Primary input: wordlist TSV, matrix JSON, tree file or anchors JSON depending on the subcommand.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Transliteration map (`FROM<TAB>TO` lines).
    #[arg(long, global = true)]
    pub translit: Option<PathBuf>,
    /// Parameters JSON: `{epsilon, gamma}` or `{anchors: [...]}`. Defaults to the published profile.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Replace undefined (zero-overlap) distances with the family-wide mean.
    #[arg(long, global = true)]
    pub impute_missing_pairs: bool,
    /// Warn about pairs sharing fewer meanings than this.
    #[arg(long, global = true, default_value_t = 100)]
    pub min_overlap_warn: usize,
    /// How to treat comma-separated variants in a cell.
    #[arg(long, global = true, value_enum, default_value_t = Variants::First)]
    pub variants: Variants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variants {
    /// Keep the first variant.
    First,
    /// Keep all variants; word distance is the minimum over variant pairs.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreeOn {
    Times,
    Distances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Languages,
    Meanings,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise lexical distances from a wordlist.
    Dist,
    /// Divergence times from a wordlist or distance matrix.
    Time,
    /// UPGMA tree from a wordlist, distance matrix or time matrix.
    Tree {
        /// Cluster on times (years) or on raw lexical distances.
        #[arg(long, value_enum, default_value_t = TreeOn::Times)]
        on: TreeOn,
    },
    /// Fit epsilon and gamma from two dated anchors.
    Calibrate,
    /// Tree stability under random removal of languages or meanings.
    Jackknife {
        #[arg(long, default_value_t = 5)]
        remove_k: usize,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, value_enum, default_value_t = Mode::Languages)]
        mode: Mode,
    },
    /// Distances implied by a reference tree, plus the tree itself.
    Simulate {
        /// Also write a synthetic wordlist with this many meanings.
        #[arg(long)]
        meanings: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = io::RunConfig::validate(cli.common)?;
    match cli.command {
        Command::Dist => commands::cmd_dist(&cfg),
        Command::Time => commands::cmd_time(&cfg),
        Command::Tree { on } => commands::cmd_tree(&cfg, on),
        Command::Calibrate => commands::cmd_calibrate(&cfg),
        Command::Jackknife {
            remove_k,
            replicates,
            mode,
        } => commands::cmd_jackknife(&cfg, remove_k, replicates, mode),
        Command::Simulate { meanings } => commands::cmd_simulate(&cfg, meanings),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Code::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.code as u8)
        }
    }
}
