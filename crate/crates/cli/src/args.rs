use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fibavg",
    version,
    about = "Integer averages of Fibonacci and Lucas numbers: scans, audits, ranks"
)]
pub struct Cli {
    /// Worker threads (default: FIBAVG_WORKERS, else all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Jsonl,
    Csv,
    Bfile,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is the average of the first n terms an integer?
    Hit {
        n: u64,
        #[arg(long)]
        lucas: bool,
    },
    /// List every hit in a range
    Scan {
        #[command(flatten)]
        range: Range,
        #[arg(long)]
        lucas: bool,
        /// Resume from / write progress to this checkpoint file
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Indices between checkpoints
        #[arg(long, hide = true, default_value_t = fibavg::scanner::CHECKPOINT_INTERVAL)]
        interval: u64,
        /// Stop after this many checkpoint blocks, as if interrupted
        #[arg(long, hide = true)]
        halt_after: Option<u64>,
    },
    /// Find n such that n and n+t are both Fibonacci hits
    Pairs {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        t: u64,
        #[command(flatten)]
        range: Range,
    },
    /// Check the prime and square-free claims over a range
    Audit {
        #[command(subcommand)]
        which: AuditKind,
    },
    /// Generate and verify members of the constructive families
    Family(FamilyArgs),
    /// Build and verify the tower 2, F_6, F_24, ...
    Tower {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
    },
    /// Rank of apparition of m
    Rank { m: u64 },
    /// Pisano period of m
    Pisano { m: u64 },
    /// Least k with p^r | L_k, if any (p an odd prime)
    LucasRank {
        p: u64,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
    /// Search for primes p with p^2 | F_{p - (p/5)}
    Wss {
        #[command(flatten)]
        range: Range,
        /// Emit a record for every prime tested
        #[arg(long)]
        emit_all: bool,
    },
    /// Check an identity exhaustively and on random large indices
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Range {
    #[arg(long = "from")]
    pub from: u64,
    #[arg(long = "to")]
    pub to: u64,
}

#[derive(Debug, Subcommand)]
pub enum AuditKind {
    /// No odd prime p divides F_1 + ... + F_p
    OddPrimes {
        #[arg(long)]
        to: u64,
    },
    /// Every odd Fibonacci hit is square-free
    Squarefree {
        #[arg(long)]
        to: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    /// 3 * 2^(a+3), Fibonacci
    #[value(name = "33")]
    Doubling,
    /// 2^(a+3) * 3^(b+1) * 5^c, Fibonacci
    #[value(name = "35")]
    SmoothFib,
    /// 2^(a+3) * 3^(b+1) * 5^c, Lucas
    #[value(name = "36")]
    SmoothLucas,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    /// Largest exponent a for the doubling family
    #[arg(long, default_value_t = 5)]
    pub alpha_max: u32,
    /// Single member: exponents a, b, c
    #[arg(long, requires_all = ["beta", "gamma"], conflicts_with = "up_to")]
    pub alpha: Option<u32>,
    #[arg(long, requires_all = ["alpha", "gamma"])]
    pub beta: Option<u32>,
    #[arg(long, requires_all = ["alpha", "beta"])]
    pub gamma: Option<u32>,
    /// All members with index at most this bound
    #[arg(long)]
    pub up_to: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Identity name, or `all`
    #[arg(long)]
    pub identity: String,
    /// Exhaustive range of the primary parameter, `LO..HI`
    #[arg(long)]
    pub range: Option<String>,
    /// Random large-index samples
    #[arg(long, default_value_t = 1000)]
    pub samples: u64,
    /// Upper bound on random indices
    #[arg(long, default_value_t = 1_000_000_000_000)]
    pub max_index: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
