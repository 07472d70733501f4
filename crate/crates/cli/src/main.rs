//! `burnside` command line: period towers, coset enumeration, element orders,
//! rewriting, abelian invariants, embeddings and certificates.
//!
//! Exit codes: 0 definitive result, 1 usage or data error, 2 inconclusive
//! (budget exhausted), 3 tower stalled (finite group whose exponent does not
//! divide n).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "burnside", version, about = "Period towers and computations in finitely presented groups")]
pub struct Cli {
    /// Report format on standard output.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Live cosets allowed during enumeration.
    #[arg(long, env = "BURNSIDE_MAX_COSETS", default_value_t = burnside::cosets::DEFAULT_MAX_COSETS)]
    pub max_cosets: usize,
    /// Rules allowed during Knuth–Bendix completion.
    #[arg(long, env = "BURNSIDE_KB_MAX_RULES", default_value_t = 20_000)]
    pub kb_max_rules: usize,
    /// Longest rule left-hand side allowed during completion.
    #[arg(long, env = "BURNSIDE_KB_MAX_LEN", default_value_t = 64)]
    pub kb_max_len: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the period tower for rank m and exponent n.
    Tower {
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'n')]
        n: u64,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Candidates examined per rank before giving up.
        #[arg(long, env = "BURNSIDE_MAX_CANDIDATES", default_value_t = 100_000)]
        max_candidates: usize,
        /// Worker threads for candidate evaluation (does not affect results).
        #[arg(long, env = "BURNSIDE_JOBS", default_value_t = 1)]
        jobs: usize,
        /// Re-check every logged verdict from scratch.
        #[arg(long)]
        audit: bool,
        /// Continue from an inconclusive tower report.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Evaluate every reduced word instead of skipping non-cyclically-reduced words and proper powers.
        #[arg(long)]
        no_filters: bool,
    },
    /// Enumerate cosets of a subgroup.
    Coset {
        presentation: PathBuf,
        /// Subgroup generator (repeatable); none means the trivial subgroup.
        #[arg(long = "subgroup")]
        subgroup: Vec<String>,
        #[arg(long, env = "BURNSIDE_MAX_COSETS", default_value_t = burnside::cosets::DEFAULT_MAX_COSETS)]
        max_cosets: usize,
        /// Write the closed coset table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Decide the order of a word.
    Order {
        presentation: PathBuf,
        word: String,
        /// Expected exponent; powers up to 4 times this are tried.
        #[arg(long, default_value_t = 2)]
        n_hint: u64,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Write the infinite-order certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Knuth–Bendix completion over shortlex.
    Kb {
        presentation: PathBuf,
        #[arg(long, env = "BURNSIDE_KB_MAX_RULES", default_value_t = 20_000)]
        kb_max_rules: usize,
        #[arg(long, env = "BURNSIDE_KB_MAX_LEN", default_value_t = 64)]
        kb_max_len: usize,
        /// Count normal forms up to this length.
        #[arg(long, default_value_t = 32)]
        max_len: usize,
        /// Write the rules, one `lhs -> rhs` per line.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Abelian invariants from the Smith normal form of the relation matrix.
    Abelian { presentation: PathBuf },
    /// Search for an embedding into D_2n x (D_2^(k+1))^r.
    Embed {
        /// A presentation (realized by coset enumeration) or a CSV multiplication table.
        group: PathBuf,
        #[arg(short = 'n')]
        n: u64,
        #[arg(long, default_value_t = 4)]
        r_max: usize,
        /// Search steps before giving up.
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        #[arg(long, env = "BURNSIDE_MAX_COSETS", default_value_t = burnside::cosets::DEFAULT_MAX_COSETS)]
        max_cosets: usize,
    },
    /// Center of a finite group.
    Center {
        presentation: PathBuf,
        #[arg(long, env = "BURNSIDE_MAX_COSETS", default_value_t = burnside::cosets::DEFAULT_MAX_COSETS)]
        max_cosets: usize,
    },
    /// Check an infinite-order certificate.
    VerifyCert { certificate: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
