//! `qsmooth`: phase-space smoothing of qubit observables from the command line.

mod commands;
mod golden;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "qsmooth",
    version,
    about = "Discrete-Wigner smoothing for one and two qubits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write output here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    State,
    Povm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    FirstOrder,
}

#[derive(Args, Debug, Clone, Default)]
pub struct StateSource {
    /// Named state, e.g. 0, +, -i, 0+, 00+11, phi+
    #[arg(long, conflicts_with = "file")]
    pub state: Option<String>,

    /// JSON state ({"dim","amplitudes"}) or operator ({"dim","matrix"}) file
    #[arg(long)]
    pub file: Option<std::path::PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PovmSource {
    /// Named measurement: z, x, y, a letter per qubit (e.g. zy), or identity
    #[arg(long, conflicts_with = "povm_file")]
    pub povm: Option<String>,

    /// JSON measurement file ({"elements":[{"label","dim","matrix"}]})
    #[arg(long)]
    pub povm_file: Option<std::path::PathBuf>,

    /// Observed outcome label
    #[arg(long)]
    pub outcome: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Wigner table of a state or measurement effect
    Wigner {
        #[command(flatten)]
        source: StateSource,
        #[command(flatten)]
        povm: PovmSource,
        /// How to read an operator file
        #[arg(long, value_enum, default_value_t = Kind::State)]
        kind: Kind,
        /// Register size for a named measurement
        #[arg(long, default_value_t = 1)]
        n_qubits: usize,
    },
    /// Smoothing posterior of a prepared state and an observed outcome
    Smooth {
        #[command(flatten)]
        source: StateSource,
        #[command(flatten)]
        povm: PovmSource,
        /// Comma-separated gates applied between preparation and measurement
        #[arg(long, default_value = "")]
        steps: String,
        /// Time index at which to smooth (0 is just after preparation)
        #[arg(long, default_value_t = 0)]
        at: usize,
    },
    /// Weak measurement of q followed by a projective p measurement
    Aav {
        #[arg(long)]
        dt: f64,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "dz_grid")]
        dz: Option<f64>,
        /// Sweep lo:hi:n (inclusive, n points)
        #[arg(long, allow_hyphen_values = true)]
        dz_grid: Option<String>,
        /// Post-selected p outcome
        #[arg(long, allow_hyphen_values = true, default_value = "+")]
        xi: String,
        #[arg(long, value_enum, default_value_t = Mode::FirstOrder)]
        mode: Mode,
        /// Prepared single-qubit state
        #[arg(long, allow_hyphen_values = true, default_value = "-")]
        psi: String,
    },
    /// Census of pure stabilizer states
    Stabilizers {
        #[arg(long, default_value_t = 2)]
        n_qubits: usize,
    },
    /// Coherence functional of a one-step history
    Histories {
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
        /// Basis of the intermediate projectors: z, x or y
        #[arg(long)]
        basis: char,
        #[arg(long = "final", allow_hyphen_values = true)]
        final_state: String,
    },
    /// Seeded invariant suite and golden-file comparison
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compare regenerated outputs against the files in this directory
        #[arg(long)]
        golden: Option<std::path::PathBuf>,
        /// Write the golden files instead of comparing
        #[arg(long, requires = "golden")]
        bless: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => match commands::emit(&cli, &out.text) {
            Ok(()) => ExitCode::from(out.status),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
