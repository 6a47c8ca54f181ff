use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use heatctl::GainMethod;

use crate::config::CONFIG_HELP;

/// Boundary-control design and simulation for the 1-D semilinear heat
/// equation.
#[derive(Debug, Parser)]
#[command(name = "heatctl", version, after_long_help = CONFIG_HELP)]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write a run manifest (resolved parameters and output list) here.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residue gain gamma and its weight rule.
    Gamma {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Riccati synthesis of the observer-based controller.
    Synthesize {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// CSV tables.
    Tables {
        #[command(subcommand)]
        kind: TableKind,
    },
    /// Closed-loop (or open-loop) Galerkin simulation, written as CSV.
    Simulate {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        /// CSV of field snapshots as x,t,value rows.
        #[arg(long, value_name = "FILE")]
        snapshot_out: Option<PathBuf>,
    },
    /// Largest sampling period with a certified LMI.
    MaxH {
        #[command(flatten)]
        plant: PlantArgs,
        #[command(flatten)]
        design: DesignArgs,
        /// Reaction coefficient of the LMI, below q.
        #[arg(long)]
        q_lmi: Option<f64>,
        /// Bisection resolution.
        #[arg(long)]
        tol: Option<f64>,
        /// Upper end of the searched bracket.
        #[arg(long)]
        h_hi: Option<f64>,
        /// Subgradient iterations per candidate h.
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run a manifest, rewriting its outputs.
    Replay {
        /// Manifest written by --manifest.
        path: PathBuf,
        /// Compare with the recorded files instead of overwriting them.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum TableKind {
    /// Columns N,sigma_max,gamma.
    SigmaTable {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long = "N-max")]
        n_max: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Columns N,gamma_harmonic,gamma_sobolev,ratio.
    GammaCurve {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long = "N-min")]
        n_min: Option<usize>,
        #[arg(long = "N-max")]
        n_max: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
pub struct PlantArgs {
    /// Reaction coefficient.
    #[arg(long)]
    pub q: Option<f64>,
    /// Lipschitz bound of the nonlinearity.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Decay rate to enforce.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Modes in the controller.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Residue gain bound.
    #[arg(long)]
    pub method: Option<GainMethod>,
    /// Require positive definite Riccati solutions even when sigma = 0.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Plant modes.
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Horizon.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Sampling period; 0 for continuous input.
    #[arg(long)]
    pub h: Option<f64>,
    /// Quadrature points.
    #[arg(long = "P")]
    pub p: Option<usize>,
    /// cubic | constant:<v> | eigen:<n> | samples:<file>
    #[arg(long)]
    pub ic: Option<String>,
    /// Snapshot times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Zero input.
    #[arg(long)]
    pub open_loop: bool,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
