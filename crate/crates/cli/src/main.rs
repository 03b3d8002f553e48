//! `rsc`: simulate multi-layer networks, cluster them, score partitions and
//! run benchmark sweeps. Every output is plain CSV or TSV text.

mod benchmark;
mod cluster;
mod relabel;
mod score;
mod simulate;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsc_core::TestDistribution;

#[derive(Parser, Debug)]
#[command(name = "rsc", version, about = "Randomized spectral clustering for multi-layer networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a network from one of the preset block models.
    Simulate(simulate::SimulateArgs),
    /// Cluster an edge list with the randomized or the exact method.
    Cluster(cluster::ClusterArgs),
    /// Sweep one model parameter and record per-replicate results.
    Benchmark(benchmark::BenchmarkArgs),
    /// Map arbitrary node ids to dense integers.
    Relabel(relabel::RelabelArgs),
    /// Compare two label files.
    Metrics(score::MetricsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rsc,
    Sc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestDist {
    Gaussian,
    Rademacher,
}

impl From<TestDist> for TestDistribution {
    fn from(d: TestDist) -> Self {
        match d {
            TestDist::Gaussian => TestDistribution::Gaussian,
            TestDist::Rademacher => TestDistribution::Rademacher,
        }
    }
}

/// Solver knobs shared by `cluster` and `benchmark`.
#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// k-means restarts.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Distribution of the random test matrix.
    #[arg(long = "test-dist", value_enum, default_value_t = TestDist::Gaussian)]
    pub test_dist: TestDist,
    /// Use the dense eigendecomposition for the exact method (n <= 2000).
    #[arg(long = "dense-oracle")]
    pub dense_oracle: bool,
}

/// `<prefix><suffix>`, e.g. `run` + `.labels.tsv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Cluster(a) => cluster::run(&a),
        Command::Benchmark(a) => benchmark::run(&a),
        Command::Relabel(a) => relabel::run(&a),
        Command::Metrics(a) => score::run(&a),
    }
}
