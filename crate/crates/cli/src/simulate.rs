use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rsc_core::io::write_labels;
use rsc_core::sim::sample;
use rsc_core::{model_preset, write_edge_list};

use crate::with_suffix;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Preset block model, 1 to 4 (4 is directed).
    #[arg(long, default_value_t = 1)]
    pub model: u8,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub layers: usize,
    /// Sparsity scale applied to every block matrix.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes `<out>.edges.tsv` and `<out>.labels.tsv`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(a: &SimulateArgs) -> anyhow::Result<()> {
    let model = model_preset(a.model, a.n, a.layers, a.rho).context("building the block model")?;
    let net = sample(&model, a.seed).context("sampling the network")?;

    let edges = with_suffix(&a.out, ".edges.tsv");
    let file = File::create(&edges).with_context(|| format!("creating {}", edges.display()))?;
    write_edge_list(&net, BufWriter::new(file), false)?;

    let labels = with_suffix(&a.out, ".labels.tsv");
    write_labels(model.rows(), BufWriter::new(File::create(&labels)?))?;
    if let Some(cols) = model.cols() {
        let path = with_suffix(&a.out, ".col_labels.tsv");
        write_labels(cols, BufWriter::new(File::create(&path)?))?;
    }
    println!(
        "wrote {} edges over {} layers ({}) to {}",
        net.edge_count(),
        net.num_layers(),
        if net.is_directed() { "directed" } else { "undirected" },
        edges.display()
    );
    Ok(())
}
