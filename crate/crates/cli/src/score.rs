use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use rsc_core::io::read_labels;

use crate::cluster::metric_lines;

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Reference labels (`node<TAB>label`).
    pub truth: PathBuf,
    /// Estimated labels (`node<TAB>label`).
    pub estimate: PathBuf,
    /// Allow different community counts by padding both to the larger one.
    #[arg(long = "pad-k")]
    pub pad_k: bool,
}

pub fn run(a: &MetricsArgs) -> anyhow::Result<()> {
    let load = |p: &PathBuf| -> anyhow::Result<_> {
        let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        read_labels(BufReader::new(file)).with_context(|| format!("reading labels from {}", p.display()))
    };
    let truth = load(&a.truth)?;
    let estimate = load(&a.estimate)?;
    if truth.k() != estimate.k() && !a.pad_k {
        bail!("community counts differ ({} vs {}); pass --pad-k to compare anyway", truth.k(), estimate.k());
    }
    println!("metric,value");
    for line in metric_lines("", &truth, &estimate)? {
        println!("{line}");
    }
    Ok(())
}
