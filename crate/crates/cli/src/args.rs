use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dso_core::bell::Variant;
use dso_core::catalog::StateSpec;
use dso_core::source_ops::Direction;

#[derive(Debug, Parser)]
#[command(
    name = "dso",
    version,
    about = "Source-operator dilations, DSO feasibility and Bell-inequality checks"
)]
pub struct Cli {
    /// Emit the JSON run report: to stdout, or to PATH when given.
    #[arg(long, global = true, num_args = 0..=1, value_name = "PATH")]
    pub json: Option<Option<PathBuf>>,

    /// Root seed for every random draw.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,

    /// Command-specific tolerance (see each command's help).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_spec(s: &str) -> Result<StateSpec, String> {
    s.parse().map_err(|e: dso_core::Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: dso_core::Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: dso_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct WernerParams {
    /// Local dimension.
    #[arg(long)]
    pub d: usize,
    /// Werner parameter Φ = tr[ρ V] in [-1, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    /// Write the matrix JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a Werner state.
    Werner(WernerParams),

    /// Build the symmetric Werner source-operator (d ≥ 3) or the
    /// three-qubit operator (d = 2) and certify it. --tol sets the
    /// positivity tolerance (default 1e-12).
    Dso(WernerParams),

    /// Check a source-operator file against a state. --tol sets the
    /// marginal tolerance in trace norm (default 1e-10).
    VerifySource {
        #[arg(long, value_parser = parse_spec)]
        state: StateSpec,
        /// Source-operator JSON: a matrix plus "direction".
        #[arg(long)]
        source: PathBuf,
        /// Override the direction stored in the file.
        #[arg(long, value_parser = parse_direction)]
        direction: Option<Direction>,
    },

    /// Decide whether a state has a DSO. --tol is the stopping residual
    /// (default 1e-8).
    Feasibility {
        #[arg(long, value_parser = parse_spec)]
        state: StateSpec,
        #[arg(long, value_parser = parse_direction, default_value = "right")]
        mode: Direction,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        /// Restarts of the CHSH witness search run when projections stall.
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        /// Write the witness source-operator here when one is found.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },

    /// Maximize the CHSH functional. --tol is the slack above 2 before a
    /// value counts as a violation (default 1e-8).
    ChshMax {
        #[arg(long, value_parser = parse_spec)]
        state: StateSpec,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
    },

    /// Search for violations of the perfect-correlation Bell inequality.
    /// --tol is the slack above 0 before a value counts as a violation
    /// (default 1e-8).
    BellCheck {
        #[arg(long, value_parser = parse_spec)]
        state: StateSpec,
        #[arg(long, value_parser = parse_variant, default_value = "first")]
        variant: Variant,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
    },

    /// Sample joint POVM outcomes and compare with the exact statistics.
    Simulate {
        #[arg(long, value_parser = parse_spec)]
        state: StateSpec,
        /// POVM JSON: {"outcomes": [...], "effects": [matrix, ...]}.
        #[arg(long)]
        alice: PathBuf,
        #[arg(long)]
        bob: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
    },

    /// Run the full numerical check suite; exits with 2 if any check fails.
    VerifyTheorems {
        /// Werner dimension for the inequality checks (≥ 3).
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// CHSH restarts.
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        bell_restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
        #[arg(long, default_value_t = 1000)]
        quads: usize,
        #[arg(long, default_value_t = 1000)]
        povm_trials: usize,
        #[arg(long, default_value_t = 100)]
        sampling_trials: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Werner(_) => "werner",
            Command::Dso(_) => "dso",
            Command::VerifySource { .. } => "verify-source",
            Command::Feasibility { .. } => "feasibility",
            Command::ChshMax { .. } => "chsh-max",
            Command::BellCheck { .. } => "bell-check",
            Command::Simulate { .. } => "simulate",
            Command::VerifyTheorems { .. } => "verify-theorems",
        }
    }
}
