use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "entwit",
    version,
    about = "Certify entanglement of joint quantum measurements"
)]
pub struct Cli {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Use one tolerance for Hermiticity, positivity and entanglement tests.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Restarts for product-state and setting optimizers.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Tomographic set identifier.
    #[arg(long, global = true)]
    pub basis: Option<String>,
    /// Let the outer parties adapt their settings to the central outcome.
    #[arg(long, global = true, value_enum)]
    pub per_b_settings: Option<OnOff>,
    /// Write the run record (JSON) here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Wbm,
    WbmPrime,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify a measurement as separable, entangled or undetermined.
    Classify { measurement: PathBuf },
    /// Build a witness for an entangled element and expand it over the tomographic set.
    Witness {
        measurement: Option<PathBuf>,
        /// Element to target; default is the most negative partial transpose.
        #[arg(long)]
        element: Option<usize>,
        #[arg(long, value_enum, conflicts_with_all = ["measurement", "element"])]
        builtin: Option<Builtin>,
        /// Write the bare witness file here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Evaluate the swap-steering functional S for a scenario.
    Steer {
        scenario: PathBuf,
        /// Visibility sweep with this many points (overrides the scenario).
        #[arg(long)]
        sweep: Option<usize>,
        /// Write sweep rows here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Random hidden-state models for the sanity column.
        #[arg(long, default_value_t = 100)]
        sohs_samples: usize,
    },
    /// Evaluate the star-network functional E for a scenario.
    Di {
        scenario: PathBuf,
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Evaluate central measurements that are not rank-one projective.
        #[arg(long)]
        allow_non_rank_one: bool,
        /// Random local models for the sanity column.
        #[arg(long, default_value_t = 100)]
        local_samples: usize,
    },
    /// Direct access to the bound oracles.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Subcommand, Debug)]
pub enum Oracle {
    /// Brute-force local bound of a Bell functional (built-in name or JSON file).
    Lhv { functional: String },
    /// Lowest witness value found over pure product states.
    ProductMin {
        witness: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "witness")]
        builtin: Option<Builtin>,
    },
    /// Search for few-term witnesses detecting a two-qubit measurement.
    TermSearch {
        measurement: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_terms: usize,
        #[arg(long, default_value_t = 16)]
        starts: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
}
