use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "drmmm",
    version,
    about = "Radix-2^k Montgomery multiplication models"
)]
pub struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Montgomery product A*B*2^(-kd) mod M.
    Mul(MulArgs),
    /// Randomized differential verification of all three models.
    Verify(VerifyArgs),
    /// Encoding tables, their LUT INIT rows, or the carry INIT words.
    Tables(TablesArgs),
    /// Latency formulas, dependence bound, level budget and cycle count.
    Analyze(AnalyzeArgs),
    /// Per-iteration trace as JSON.
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Classical,
    Drmmm,
    Hw,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Classical => "classical",
            Mode::Drmmm => "drmmm",
            Mode::Hw => "hw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    TwoStep,
    Merged,
}

/// Datapath options shared by `mul` and `trace`.
#[derive(Debug, Clone, Args)]
pub struct HwArgs {
    /// Window of the iM (or merged) table.
    #[arg(short = 'w', long = "window", default_value_t = 6)]
    pub window: usize,
    /// Window of the iM' table.
    #[arg(long = "w-inv", default_value_t = 6)]
    pub window_inverse: usize,
    #[arg(long, value_enum, default_value_t = Encoding::TwoStep)]
    pub encoding: Encoding,
}

#[derive(Debug, Clone, Args)]
pub struct OperandArgs {
    /// Odd modulus (hex).
    #[arg(short = 'M', long = "modulus")]
    pub m: String,
    /// Multiplicand (hex), below M.
    #[arg(short = 'A')]
    pub a: String,
    /// Multiplier (hex), below M.
    #[arg(short = 'B')]
    pub b: String,
    /// Radix exponent.
    #[arg(short = 'k', default_value_t = 16)]
    pub k: usize,
    /// Pipeline stages.
    #[arg(short = 't', default_value_t = 4)]
    pub t: usize,
    #[arg(long, value_enum, default_value_t = Mode::Hw)]
    pub mode: Mode,
    #[command(flatten)]
    pub hw: HwArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MulArgs {
    #[command(flatten)]
    pub operands: OperandArgs,
    /// Also print A*B mod M.
    #[arg(long)]
    pub corrected: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Modulus bit widths to draw from.
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 64, 256, 1024])]
    pub widths: Vec<usize>,
    /// Radix exponents to draw from.
    #[arg(short = 'k', value_delimiter = ',', default_values_t = [2usize, 4, 8, 16])]
    pub k: Vec<usize>,
    /// Stage counts to draw from.
    #[arg(short = 't', value_delimiter = ',', default_values_t = [1usize, 2, 4, 6])]
    pub t: Vec<usize>,
    /// JSON-lines vector file, checked in addition to the random trials.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Im,
    ImPrime,
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Hex,
    Init,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    /// Print the two carry LUT INIT words and nothing else.
    #[arg(long)]
    pub carry_inits: bool,
    #[arg(short = 'M', long = "modulus", required_unless_present = "carry_inits")]
    pub m: Option<String>,
    #[arg(short = 'w', long = "window", default_value_t = 4)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = TableKind::Im)]
    pub kind: TableKind,
    #[arg(long, value_enum, default_value_t = TableFormat::Hex)]
    pub format: TableFormat,
    #[arg(short = 'k', default_value_t = 4)]
    pub k: usize,
    #[arg(short = 't', default_value_t = 1)]
    pub t: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Modulus width N_M.
    #[arg(long, default_value_t = 1024)]
    pub bits: usize,
    #[arg(short = 'k', default_value_t = 16)]
    pub k: usize,
    #[arg(short = 't', default_value_t = 4)]
    pub t: usize,
    /// Multiplication delay (integer or fraction such as 3/2).
    #[arg(long = "tm", default_value = "1")]
    pub t_m: String,
    /// Addition delay.
    #[arg(long = "ta", default_value = "1")]
    pub t_a: String,
    /// Final reduction delay.
    #[arg(long = "tred", default_value = "0")]
    pub t_red: String,
    /// Update delay, for the delay-based t_max estimate.
    #[arg(long = "tu", requires = "t_q")]
    pub t_u: Option<String>,
    /// Quotient delay, for the delay-based t_max estimate.
    #[arg(long = "tq", requires = "t_u")]
    pub t_q: Option<String>,
    #[arg(short = 'w', long = "window", default_value_t = 6)]
    pub window: usize,
    #[arg(long = "w-inv", default_value_t = 6)]
    pub window_inverse: usize,
    /// Epilogue cycles; the default is the fitted value.
    #[arg(long)]
    pub epilogue: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub operands: OperandArgs,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}
