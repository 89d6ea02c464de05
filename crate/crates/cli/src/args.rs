use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Scaled radial-basis-function experiments.
#[derive(Debug, Parser)]
#[command(name = "kscale", version, about)]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error, native norm and bound curves over a range of scales.
    Sweep(SweepArgs),
    /// Run the invariance suites.
    Verify(VerifyArgs),
    /// Fit the small-scale expansion of 1-d interpolants and compare extensions.
    Expand(ExpandArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// key=value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated kernel ids: g, mq, ms3, w3.5.
    #[arg(long)]
    pub kernels: Option<String>,
    /// Comma-separated test functions: runge_good, runge_bad, r3, linf.
    #[arg(long)]
    pub functions: Option<String>,
    /// Sites per axis of the regular grid on [-1, 1]^2: 11 or 21.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub eps_min: Option<String>,
    #[arg(long)]
    pub eps_max: Option<String>,
    #[arg(long)]
    pub eps_count: Option<String>,
    /// Geometric spacing of the scales [default: true].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<String>,
    /// Skip scales whose condition estimate exceeds this [default: 1e14].
    #[arg(long)]
    pub cond_limit: Option<String>,
    /// `-` for stdout, a .csv file, or a directory for one file per function [default: .].
    #[arg(long)]
    pub out: Option<String>,
}

impl SweepArgs {
    pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("kernels", self.kernels.clone()),
            ("functions", self.functions.clone()),
            ("grid", self.grid.clone()),
            ("eps_min", self.eps_min.clone()),
            ("eps_max", self.eps_max.clone()),
            ("eps_count", self.eps_count.clone()),
            ("log", self.log.clone()),
            ("cond_limit", self.cond_limit.clone()),
            ("out", self.out.clone()),
        ]
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run a single suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// List the suites and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// 1-d sites, inline (`-1,0,1`) or a file of numbers.
    #[arg(long, allow_hyphen_values = true)]
    pub sites: Option<String>,
    /// Data values, inline or a file, one per site.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// g or mq [default: g].
    #[arg(long)]
    pub kernel: Option<String>,
    /// Kernel pre-scale [default: 1].
    #[arg(long)]
    pub pre_scale: Option<String>,
    /// Highest even term ε^(2J) [default: 3].
    #[arg(long = "J", id = "J")]
    pub terms: Option<String>,
    #[arg(long)]
    pub eps_min: Option<String>,
    #[arg(long)]
    pub eps_max: Option<String>,
    #[arg(long)]
    pub eps_count: Option<String>,
    /// Also fit ε and ε³ as a check that they vanish.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub odd_powers: Option<String>,
    #[arg(long)]
    pub scan_count: Option<String>,
    #[arg(long)]
    pub cond_limit: Option<String>,
    /// Directory for expansion.csv and expansion.txt, or `-` [default: .].
    #[arg(long)]
    pub out: Option<String>,
}

impl ExpandArgs {
    pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("sites", self.sites.clone()),
            ("values", self.values.clone()),
            ("kernel", self.kernel.clone()),
            ("pre_scale", self.pre_scale.clone()),
            ("terms", self.terms.clone()),
            ("eps_min", self.eps_min.clone()),
            ("eps_max", self.eps_max.clone()),
            ("eps_count", self.eps_count.clone()),
            ("odd_powers", self.odd_powers.clone()),
            ("scan_count", self.scan_count.clone()),
            ("cond_limit", self.cond_limit.clone()),
            ("out", self.out.clone()),
        ]
    }
}
