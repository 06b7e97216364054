use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Genus-zero Gromov-Witten invariants of CP2, the Kontsevich series and
/// its boundary singularity.
#[derive(Debug, Parser)]
#[command(name = "wdvv-cp2", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Working precision in significant decimal digits (at least 16).
    #[arg(long, global = true, default_value_t = 890)]
    pub digits: u32,

    /// Number of series coefficients. Defaults to 1000, or to the size of
    /// the table given with --table.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,

    /// Coefficient table file. Read by every command except `invariants`,
    /// which writes it.
    #[arg(long, global = true, env = "WDVV_CP2_TABLE")]
    pub table: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Significant digits printed for each real number; capped at --digits.
    #[arg(long, global = true, default_value_t = 30)]
    pub print_digits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// The windows N0 = 500, 700, 900 with N = 1000.
    Paper,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the exact coefficient table A_1..A_n and write it to --output,
    /// or to --table when no --output is given.
    Invariants,

    /// Least-squares fit of A_k k^{7/2} ~ b a^k.
    Fit {
        /// First index of the fit window.
        #[arg(long)]
        n0: Option<usize>,

        /// Last index of the fit window; defaults to the table size.
        #[arg(long)]
        n: Option<usize>,

        #[arg(long, value_enum, conflicts_with_all = ["n0", "n"])]
        preset: Option<Preset>,
    },

    /// Evaluate Phi and its first three derivatives.
    PhiEval {
        /// Points X at which to evaluate; repeat or separate with commas.
        #[arg(long = "x", value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<String>,

        /// Also evaluate at the boundary point X0 = ln(1/a) from the fit.
        #[arg(long)]
        at_boundary: bool,

        /// First index of the fit window used for X0.
        #[arg(long, default_value_t = 900)]
        n0: usize,
    },

    /// Residual of f222 f233 + f333 - f223^2 at (t2, t3) against its bound.
    PdeCheck {
        #[arg(long, allow_negative_numbers = true)]
        t2: String,

        #[arg(long, allow_negative_numbers = true)]
        t3: String,
    },

    /// Canonical coordinates and Jacobian along X = X0 - delta.
    Singularity {
        #[arg(long, default_value = "1", allow_negative_numbers = true)]
        t1: String,

        #[arg(long, default_value = "1")]
        t3: String,

        /// Offsets delta; defaults to ten log-spaced values in [0.02, 0.2].
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,

        /// Only report 27 + 2 Phi' - 3 Phi'' at X0 for the direct sums and
        /// for the refined Phi''.
        #[arg(long)]
        constraint_check: bool,

        /// First index of the fit window used for X0.
        #[arg(long, default_value_t = 900)]
        n0: usize,
    },
}
