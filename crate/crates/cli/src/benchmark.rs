use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use rsc_core::eig::DENSE_EIG_GUARD;
use rsc_core::pipeline::exact_power;
use rsc_core::sim::sample;
use rsc_core::{
    ami, ari, misclassification_rate, model_preset, rsc_coclustering, rsc_pipeline, sc_coclustering, sc_pipeline,
    BlockModel, Membership, MultiLayerNetwork, PipelineConfig, ScMode,
};

use crate::{with_suffix, Method, SolverArgs};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    N,
    #[value(name = "L", alias = "layers")]
    L,
    Rho,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    #[arg(long, default_value_t = 1)]
    pub model: u8,
    /// Parameter swept over `--values`.
    #[arg(long, value_enum, default_value_t = Axis::N)]
    pub axis: Axis,
    /// Comma-separated grid for the swept parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub layers: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Communities (row and column communities for Model 4).
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Comma-separated sampling probabilities for the randomized method.
    #[arg(long, value_delimiter = ',', default_value = "0.7")]
    pub p: Vec<f64>,
    /// Comma-separated power parameters for the randomized method.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub q: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    /// Base seed; replicate `r` uses `seed + r` for both the network and the solver.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Methods to run; the exact method is skipped above n = 2000.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rsc,sc")]
    pub method: Vec<Method>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output prefix; writes `<out>.runs.csv` and `<out>.summary.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

/// One clustering run of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: u8,
    pub axis: &'static str,
    pub value: f64,
    pub n: usize,
    pub layers: usize,
    pub rho: f64,
    pub k: usize,
    pub method: &'static str,
    pub p: f64,
    /// Krylov power; `None` for the dense eigensolver.
    pub q: Option<usize>,
    pub replicate: usize,
    pub seed: u64,
    pub misclassification: Option<f64>,
    /// Column-side rate for directed models.
    pub misclassification_col: Option<f64>,
    pub ari: Option<f64>,
    pub ami: Option<f64>,
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

pub const RUN_HEADER: &str = "model,axis,value,n,layers,rho,k,method,p,q,replicate,seed,\
misclassification,misclassification_col,ari,ami,seconds,error";

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl RunRecord {
    pub fn to_csv_row(&self) -> String {
        let error = self.error.as_deref().unwrap_or("").replace([',', '\n', '"'], " ");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.axis,
            self.value,
            self.n,
            self.layers,
            self.rho,
            self.k,
            self.method,
            self.p,
            opt(&self.q),
            self.replicate,
            self.seed,
            opt(&self.misclassification),
            opt(&self.misclassification_col),
            opt(&self.ari),
            opt(&self.ami),
            opt(&self.seconds),
            error
        )
    }
}

struct Scores {
    rate: f64,
    rate_col: Option<f64>,
    ari: f64,
    ami: f64,
    seconds: f64,
}

fn score(model: &BlockModel, rows: &Membership, cols: Option<&Membership>, seconds: f64) -> rsc_core::Result<Scores> {
    let truth = model.rows();
    let rate_col = match (model.cols(), cols) {
        (Some(t), Some(c)) => Some(misclassification_rate(t, c)?),
        _ => None,
    };
    Ok(Scores {
        rate: misclassification_rate(truth, rows)?,
        rate_col,
        ari: ari(truth, rows)?,
        ami: ami(truth, rows)?,
        seconds,
    })
}

fn run_method(
    net: &MultiLayerNetwork,
    model: &BlockModel,
    method: Method,
    cfg: &PipelineConfig,
    mode: ScMode,
) -> rsc_core::Result<Scores> {
    if net.is_directed() {
        let out = match method {
            Method::Rsc => rsc_coclustering(net, cfg)?,
            Method::Sc => sc_coclustering(net, cfg, mode)?,
        };
        score(model, &out.rows.labels, Some(&out.cols.labels), out.timings.total())
    } else {
        let out = match method {
            Method::Rsc => rsc_pipeline(net, cfg)?,
            Method::Sc => sc_pipeline(net, cfg, mode)?,
        };
        score(model, &out.result.labels, None, out.timings.total())
    }
}

/// Model parameters at one grid value of the sweep.
fn grid_point(a: &BenchmarkArgs, value: f64) -> anyhow::Result<(usize, usize, f64)> {
    let as_count = |v: f64, name: &str| -> anyhow::Result<usize> {
        if v < 1.0 || v.fract() != 0.0 {
            bail!("{name} grid values must be positive integers, got {v}");
        }
        Ok(v as usize)
    };
    Ok(match a.axis {
        Axis::N => (as_count(value, "n")?, a.layers, a.rho),
        Axis::L => (a.n, as_count(value, "L")?, a.rho),
        Axis::Rho => (a.n, a.layers, value),
    })
}

/// Runs the whole sweep and returns one record per grid point, method,
/// hyperparameter setting and replicate.
pub fn sweep(a: &BenchmarkArgs) -> anyhow::Result<Vec<RunRecord>> {
    if a.replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    let axis = match a.axis {
        Axis::N => "n",
        Axis::L => "L",
        Axis::Rho => "rho",
    };
    let mode = if a.solver.dense_oracle { ScMode::Dense } else { ScMode::MatrixFree };
    let mut records = Vec::new();
    for &value in &a.values {
        let (n, layers, rho) = grid_point(a, value)?;
        for r in 0..a.replicates {
            let seed = a.seed.wrapping_add(r as u64);
            let base = RunRecord {
                model: a.model,
                axis,
                value,
                n,
                layers,
                rho,
                k: a.k,
                method: "rsc",
                p: 1.0,
                q: None,
                replicate: r,
                seed,
                misclassification: None,
                misclassification_col: None,
                ari: None,
                ami: None,
                seconds: None,
                error: None,
            };
            let sampled = model_preset(a.model, n, layers, rho).and_then(|m| Ok((sample(&m, seed)?, m)));
            let mut jobs: Vec<(Method, f64, Option<usize>)> = Vec::new();
            for &method in &a.method {
                match method {
                    Method::Rsc => {
                        for &p in &a.p {
                            for &q in &a.q {
                                jobs.push((Method::Rsc, p, Some(q)));
                            }
                        }
                    }
                    Method::Sc if n <= DENSE_EIG_GUARD => {
                        let q = (mode == ScMode::MatrixFree).then(|| exact_power(n, a.k));
                        jobs.push((Method::Sc, 1.0, q));
                    }
                    Method::Sc => {}
                }
            }
            for (method, p, q) in jobs {
                let mut rec =
                    RunRecord { method: if method == Method::Rsc { "rsc" } else { "sc" }, p, q, ..base.clone() };
                let result = sampled.as_ref().map_err(|e| e.to_string()).and_then(|(net, model)| {
                    let mut cfg = PipelineConfig::new(a.k, p, q.unwrap_or(0), seed);
                    cfg.kmeans_restarts = a.solver.restarts;
                    cfg.test_distribution = a.solver.test_dist.into();
                    run_method(net, model, method, &cfg, mode).map_err(|e| e.to_string())
                });
                match result {
                    Ok(s) => {
                        rec.misclassification = Some(s.rate);
                        rec.misclassification_col = s.rate_col;
                        rec.ari = Some(s.ari);
                        rec.ami = Some(s.ami);
                        rec.seconds = Some(s.seconds);
                    }
                    Err(e) => rec.error = Some(e),
                }
                records.push(rec);
            }
        }
    }
    Ok(records)
}

/// Per-(grid value, method, p, q) means over the successful replicates.
pub fn summarize(records: &[RunRecord]) -> String {
    #[derive(Default)]
    struct Acc {
        runs: usize,
        failures: usize,
        rate: Vec<f64>,
        rate_col: Vec<f64>,
        ari: Vec<f64>,
        ami: Vec<f64>,
        seconds: Vec<f64>,
    }
    // grid value, method, p (as bits) and q identify a summary row
    type Key<'a> = (u64, &'a str, u64, Option<usize>);
    let mut groups: BTreeMap<Key, (&RunRecord, Acc)> = BTreeMap::new();
    let mut order = Vec::new();
    for r in records {
        let key = (r.value.to_bits(), r.method, r.p.to_bits(), r.q);
        let entry = groups.entry(key).or_insert_with(|| {
            order.push(key);
            (r, Acc::default())
        });
        let acc = &mut entry.1;
        acc.runs += 1;
        if r.error.is_some() {
            acc.failures += 1;
            continue;
        }
        acc.rate.extend(r.misclassification);
        acc.rate_col.extend(r.misclassification_col);
        acc.ari.extend(r.ari);
        acc.ami.extend(r.ami);
        acc.seconds.extend(r.seconds);
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            String::new()
        } else {
            (v.iter().sum::<f64>() / v.len() as f64).to_string()
        }
    };
    let mut out = String::from(
        "model,axis,value,n,layers,rho,k,method,p,q,replicates,failures,\
mean_misclassification,mean_misclassification_col,mean_ari,mean_ami,mean_seconds\n",
    );
    for key in order {
        let (r, acc) = &groups[&key];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.axis,
            r.value,
            r.n,
            r.layers,
            r.rho,
            r.k,
            r.method,
            r.p,
            opt(&r.q),
            acc.runs,
            acc.failures,
            mean(&acc.rate),
            mean(&acc.rate_col),
            mean(&acc.ari),
            mean(&acc.ami),
            mean(&acc.seconds)
        );
    }
    out
}

pub fn run(a: &BenchmarkArgs) -> anyhow::Result<()> {
    let records = sweep(a)?;
    let mut runs = String::from(RUN_HEADER);
    runs.push('\n');
    for r in &records {
        runs.push_str(&r.to_csv_row());
        runs.push('\n');
    }
    let runs_path = with_suffix(&a.out, ".runs.csv");
    fs::write(&runs_path, runs).with_context(|| format!("writing {}", runs_path.display()))?;
    let summary_path = with_suffix(&a.out, ".summary.csv");
    fs::write(&summary_path, summarize(&records)).with_context(|| format!("writing {}", summary_path.display()))?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    println!("runs,{}", records.len());
    println!("failed,{failed}");
    if failed > 0 {
        bail!("{failed} of {} runs failed; see the error column of {}", records.len(), runs_path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(value: f64, method: &'static str, rate: Option<f64>, error: Option<&str>) -> RunRecord {
        RunRecord {
            model: 1,
            axis: "n",
            value,
            n: value as usize,
            layers: 4,
            rho: 0.1,
            k: 3,
            method,
            p: 0.7,
            q: Some(4),
            replicate: 0,
            seed: 0,
            misclassification: rate,
            misclassification_col: None,
            ari: rate.map(|_| 1.0),
            ami: rate.map(|_| 1.0),
            seconds: rate.map(|_| 0.5),
            error: error.map(str::to_string),
        }
    }

    #[test]
    fn summary_means_skip_failures() {
        let records = vec![
            rec(200.0, "rsc", Some(0.1), None),
            rec(200.0, "rsc", Some(0.3), None),
            rec(200.0, "rsc", None, Some("boom")),
            rec(400.0, "rsc", Some(0.0), None),
        ];
        let csv = summarize(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[2], "200");
        assert_eq!(first[10], "3");
        assert_eq!(first[11], "1");
        assert!((first[12].parse::<f64>().unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(first[13], "");
    }

    #[test]
    fn csv_row_matches_header_width() {
        let r = rec(200.0, "sc", None, Some("bad, \"quoted\"\nthing"));
        let fields = r.to_csv_row().split(',').count();
        assert_eq!(fields, RUN_HEADER.split(',').count());
    }
}
