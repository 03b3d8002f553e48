use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use rsc_core::io::{read_labels, write_labels};
use rsc_core::metrics::pad_to_common_k;
use rsc_core::{
    ami, ari, load_edge_list, misclassification_rate, rsc_coclustering, rsc_pipeline, sc_coclustering, sc_pipeline,
    Membership, PipelineConfig, ScMode, Timings,
};

use crate::{with_suffix, Method, SolverArgs};

#[derive(Args, Debug)]
pub struct ClusterArgs {
    /// Edge list with `layer i j` lines (1-based layer, 0-based nodes).
    pub edges: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub layers: usize,
    /// Treat each line as a directed edge and co-cluster rows and columns.
    #[arg(long)]
    pub directed: bool,
    /// Number of communities (both sides when directed).
    #[arg(long)]
    pub k: Option<usize>,
    /// Row (sender) communities for directed input.
    #[arg(long)]
    pub ky: Option<usize>,
    /// Column (receiver) communities for directed input.
    #[arg(long)]
    pub kz: Option<usize>,
    /// Edge retention probability.
    #[arg(long, default_value_t = 0.7)]
    pub p: f64,
    /// Krylov power parameter.
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Rsc)]
    pub method: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Ground-truth labels (rows when directed); prints metrics when given.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Ground-truth column labels for directed input.
    #[arg(long = "truth-col")]
    pub truth_col: Option<PathBuf>,
    /// Output prefix for labels and the timing CSV.
    #[arg(long)]
    pub out: PathBuf,
}

fn read_membership(path: &Path) -> anyhow::Result<Membership> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_labels(BufReader::new(file)).with_context(|| format!("reading labels from {}", path.display()))
}

/// Writes labels to `<out><suffix>`.
fn save_labels(out: &Path, suffix: &str, labels: &Membership) -> anyhow::Result<()> {
    let path = with_suffix(out, suffix);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_labels(labels, BufWriter::new(file))?;
    Ok(())
}

/// `metric,value` lines comparing `estimate` against `truth`.
pub fn metric_lines(prefix: &str, truth: &Membership, estimate: &Membership) -> anyhow::Result<Vec<String>> {
    if truth.n() != estimate.n() {
        bail!("truth has {} nodes, estimate has {}", truth.n(), estimate.n());
    }
    let (t, e) = pad_to_common_k(truth, estimate)?;
    let rate = misclassification_rate(&t, &e)?;
    Ok(vec![
        format!("{prefix}misclassification,{rate:.6}"),
        format!("{prefix}fraction_misclassified,{:.6}", rate / 2.0),
        format!("{prefix}ari,{:.6}", ari(truth, estimate)?),
        format!("{prefix}ami,{:.6}", ami(truth, estimate)?),
    ])
}

fn print_timings(t: &Timings) {
    for (stage, secs) in &t.stages {
        println!("time_{stage},{secs:.6}");
    }
    println!("time_total,{:.6}", t.total());
}

pub fn run(a: &ClusterArgs) -> anyhow::Result<()> {
    let file = File::open(&a.edges).with_context(|| format!("opening {}", a.edges.display()))?;
    let net = load_edge_list(BufReader::new(file), a.n, a.layers, a.directed)
        .with_context(|| format!("loading edge list {}", a.edges.display()))?;

    let k = a.ky.or(a.k).context("pass --k (or --ky/--kz for directed input)")?;
    let mut cfg = PipelineConfig::new(k, a.p, a.q, a.seed);
    cfg.kmeans_restarts = a.solver.restarts;
    cfg.test_distribution = a.solver.test_dist.into();
    let mode = if a.solver.dense_oracle { ScMode::Dense } else { ScMode::MatrixFree };
    let stage = match a.method {
        Method::Rsc => "randomized spectral clustering",
        Method::Sc => "exact spectral clustering",
    };

    println!("metric,value");
    if a.directed {
        cfg.k_col = Some(a.kz.or(a.k).unwrap_or(k));
        let out = match a.method {
            Method::Rsc => rsc_coclustering(&net, &cfg),
            Method::Sc => sc_coclustering(&net, &cfg, mode),
        }
        .context(stage)?;
        save_labels(&a.out, ".row_labels.tsv", &out.rows.labels)?;
        save_labels(&a.out, ".col_labels.tsv", &out.cols.labels)?;
        fs::write(with_suffix(&a.out, ".timings.csv"), out.timings.to_csv())?;
        print_timings(&out.timings);
        if let Some(path) = &a.truth {
            for line in metric_lines("row_", &read_membership(path)?, &out.rows.labels)? {
                println!("{line}");
            }
        }
        if let Some(path) = &a.truth_col {
            for line in metric_lines("col_", &read_membership(path)?, &out.cols.labels)? {
                println!("{line}");
            }
        }
    } else {
        if a.ky.is_some() || a.kz.is_some() {
            bail!("--ky/--kz apply to directed input only; use --k");
        }
        let out = match a.method {
            Method::Rsc => rsc_pipeline(&net, &cfg),
            Method::Sc => sc_pipeline(&net, &cfg, mode),
        }
        .context(stage)?;
        save_labels(&a.out, ".labels.tsv", &out.result.labels)?;
        fs::write(with_suffix(&a.out, ".timings.csv"), out.timings.to_csv())?;
        print_timings(&out.timings);
        if let Some(path) = &a.truth {
            for line in metric_lines("", &read_membership(path)?, &out.result.labels)? {
                println!("{line}");
            }
        }
    }
    Ok(())
}
