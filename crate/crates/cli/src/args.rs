use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthospec_core::DedupStrategy;

#[derive(Debug, Parser)]
#[command(name = "orthospec", version, about = "Orthospectrum identities for hyperbolic manifolds with cusped geodesic boundary")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every Monte-Carlo estimate.
    #[arg(long, global = true, default_value_t = orthospec_core::DEFAULT_SEED)]
    pub seed: u64,

    /// Worker threads for Monte Carlo and packing generation. Results do not
    /// depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// File of `key = value` lines supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the primary output here and timing metadata to `<path>.meta.json`.
    /// Relative paths resolve against $ORTHOSPEC_OUTPUT_DIR when it is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub output: Option<Format>,

    /// Run the invariant suite behind this subcommand instead.
    #[arg(long, global = true)]
    pub self_test: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The cusp coefficient for dimension n.
    CuspCoeff {
        #[arg(long)]
        dimension: Option<u32>,
    },
    /// F_n(ℓ): closed form for n = 3, Monte Carlo otherwise.
    BkFunction {
        #[arg(long)]
        dimension: Option<u32>,
        /// One or more ortholengths.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        length: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Use Monte Carlo even where a closed form exists.
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Compare the closed-form integrals with adaptive quadrature.
    VerifyLemmas {
        /// Requested quadrature tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Measure of vectors based in a hyperbolic ball, optionally under
    /// random isometries.
    MeasureCheck {
        #[arg(long, default_value_t = 3)]
        dimension: u32,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Number of random isometries to compare; 0 measures the ball only.
        #[arg(long, default_value_t = 0)]
        isometries: usize,
    },
    /// Partial orthospectrum of the Apollonian strip packing.
    ApollonianSpectrum {
        #[command(flatten)]
        packing: PackingArgs,
    },
    /// Partial sums of the volume identity for the cut Whitehead link.
    IdentityCheck {
        #[command(flatten)]
        packing: PackingArgs,
    },
    /// CSV series for external plotting.
    PlotData {
        #[arg(long, value_enum, default_value_t = Series::F3)]
        series: Series,
        /// Largest length on the F_3 curve.
        #[arg(long, default_value_t = 6.0)]
        max_length: f64,
        #[arg(long, default_value_t = 120)]
        points: usize,
        #[command(flatten)]
        packing: PackingArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Series {
    /// F_3 on a uniform length grid.
    F3,
    /// S(K) over the curvature schedule.
    Convergence,
    /// Ortholength histogram at the curvature bound.
    Histogram,
}

#[derive(Debug, Args)]
pub struct PackingArgs {
    #[arg(long, default_value_t = 1000)]
    pub curvature_bound: u64,
    #[arg(long, default_value_t = 12.0)]
    pub length_cutoff: f64,
    #[arg(long, default_value_t = DedupStrategy::default())]
    pub strategy: DedupStrategy,
    /// Stop generating after this many circles.
    #[arg(long)]
    pub max_circles: Option<usize>,
}

impl PackingArgs {
    pub fn config(&self) -> orthospec_core::PackingConfig {
        orthospec_core::PackingConfig {
            curvature_bound: self.curvature_bound,
            length_cutoff: self.length_cutoff,
            strategy: self.strategy,
            max_circles: self.max_circles,
            ..Default::default()
        }
    }
}
