//! End-to-end clustering: randomized spectral clustering (RSC), the exact
//! spectral clustering baseline (SC), and their directed co-clustering forms.

use std::fmt::Write as _;
use std::time::Instant;

use crate::eig::{
    default_power, dense_top_eigs, krylov_basis, pad_basis, rayleigh_ritz, Embedding, KrylovConfig, TestDistribution,
    DENSE_EIG_GUARD,
};
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::graph::MultiLayerNetwork;
use crate::kmeans::{kmeans_with, ClusterResult};
use crate::sketch::{build_operator, dense_reference, sparsify_with, DebiasedOperator, SamplingConfig, Variant};

/// Inputs of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of communities (row communities for co-clustering).
    pub k: usize,
    /// Column communities for co-clustering; defaults to `k`.
    pub k_col: Option<usize>,
    pub p: f64,
    pub q: usize,
    pub seed: u64,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    pub test_distribution: TestDistribution,
    pub execution: Execution,
}

impl PipelineConfig {
    pub fn new(k: usize, p: f64, q: usize, seed: u64) -> Self {
        Self {
            k,
            k_col: None,
            p,
            q,
            seed,
            kmeans_restarts: 10,
            kmeans_max_iter: 300,
            test_distribution: TestDistribution::Gaussian,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k_col == Some(0) {
            return Err(invalid("community counts must be at least 1"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(invalid(format!("sampling probability must lie in (0, 1], got {}", self.p)));
        }
        if self.kmeans_restarts == 0 {
            return Err(invalid("k-means restarts must be at least 1"));
        }
        Ok(())
    }

    fn col_k(&self) -> usize {
        self.k_col.unwrap_or(self.k)
    }
}

/// Wall-clock seconds per pipeline stage, in execution order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((stage.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    fn absorb(&mut self, prefix: &str, other: Timings) {
        for (name, secs) in other.stages {
            self.stages.push((format!("{prefix}{name}"), secs));
        }
    }

    pub fn get(&self, stage: &str) -> Option<f64> {
        self.stages.iter().find(|(s, _)| s == stage).map(|&(_, t)| t)
    }

    pub fn total(&self) -> f64 {
        self.stages.iter().map(|(_, t)| t).sum()
    }

    /// `stage,seconds` CSV with a trailing `total` row, microsecond resolution.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,seconds\n");
        for (stage, secs) in &self.stages {
            let _ = writeln!(out, "{stage},{secs:.6}");
        }
        let _ = writeln!(out, "total,{:.6}", self.total());
        out
    }
}

/// Labels, embedding and stage timings of one clustering run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub result: ClusterResult,
    pub embedding: Embedding,
    pub timings: Timings,
}

/// Row and column results of a co-clustering run.
#[derive(Debug, Clone)]
pub struct CoClusterOutput {
    pub rows: ClusterResult,
    pub cols: ClusterResult,
    pub row_embedding: Embedding,
    pub col_embedding: Embedding,
    pub timings: Timings,
}

/// How the exact baseline computes its eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScMode {
    /// Materialize the aggregate and run a full dense eigendecomposition.
    /// Limited to `n <= 2000`.
    Dense,
    /// Apply the exact aggregate matrix-free with a high-accuracy block
    /// Krylov solve (`q = ceil(log2 n) + 4`).
    #[default]
    MatrixFree,
}

/// Krylov power used by the matrix-free exact baseline, capped by `n`.
pub fn exact_power(n: usize, k: usize) -> usize {
    let cap = (n / k.max(1)).saturating_sub(1);
    (default_power(n) + 4).min(cap)
}

/// Krylov solve, Rayleigh-Ritz and k-means on one operator.
fn spectral_branch(
    op: &DebiasedOperator<'_>,
    k: usize,
    q: usize,
    cfg: &PipelineConfig,
) -> Result<(ClusterResult, Embedding, Timings)> {
    let mut t = Timings::default();
    let krylov = KrylovConfig::new(k, q, cfg.seed)?.with_distribution(cfg.test_distribution);
    let basis = t.time("krylov", || -> Result<_> {
        let q = krylov_basis(op, &krylov)?;
        pad_basis(q, k, cfg.seed)
    })?;
    let embedding = t.time("rayleigh_ritz", || rayleigh_ritz(op, &basis, k))?;
    let result = t.time("kmeans", || {
        kmeans_with(&embedding.vectors, k, cfg.seed, cfg.kmeans_restarts, cfg.kmeans_max_iter, cfg.execution)
    })?;
    Ok((result, embedding, t))
}

/// Dense eigendecomposition followed by k-means.
fn dense_branch(
    op: &DebiasedOperator<'_>,
    k: usize,
    cfg: &PipelineConfig,
) -> Result<(ClusterResult, Embedding, Timings)> {
    let mut t = Timings::default();
    let m = t.time("dense_matrix", || dense_reference(op))?;
    let embedding = t.time("eigen", || dense_top_eigs(&m, k))?;
    drop(m);
    let result = t.time("kmeans", || {
        kmeans_with(&embedding.vectors, k, cfg.seed, cfg.kmeans_restarts, cfg.kmeans_max_iter, cfg.execution)
    })?;
    Ok((result, embedding, t))
}

/// Randomized spectral clustering of an undirected multi-layer network:
/// sample edges, build the bias-corrected operator, block Krylov eigensolve,
/// then k-means on the embedding rows. No `n x n` matrix is ever formed.
pub fn rsc_pipeline(net: &MultiLayerNetwork, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    if net.is_directed() {
        return Err(invalid("rsc_pipeline expects an undirected network; use rsc_coclustering"));
    }
    let mut timings = Timings::default();
    let sampling = SamplingConfig::new(cfg.p, cfg.seed)?;
    let sampled = timings.time("sparsify", || sparsify_with(net, sampling, cfg.execution))?;
    let op = timings.time("operator", || build_operator(&sampled, cfg.p, Variant::Undirected))?;
    let op = op.with_execution(cfg.execution);
    let (result, embedding, t) = spectral_branch(&op, cfg.k, cfg.q, cfg)?;
    timings.absorb("", t);
    Ok(PipelineOutput { result, embedding, timings })
}

fn dense_guard(n: usize) -> Result<()> {
    if n > DENSE_EIG_GUARD {
        return Err(Error::Capacity { what: "dense spectral clustering", requested: n, limit: DENSE_EIG_GUARD });
    }
    Ok(())
}

/// Exact spectral clustering on `(1/(Ln)) Σ_l (A_l² − D_l)`. Only `k`, the
/// seed, the k-means settings and the test distribution are read from `cfg`.
pub fn sc_pipeline(net: &MultiLayerNetwork, cfg: &PipelineConfig, mode: ScMode) -> Result<PipelineOutput> {
    cfg.validate()?;
    if net.is_directed() {
        return Err(invalid("sc_pipeline expects an undirected network; use sc_coclustering"));
    }
    if mode == ScMode::Dense {
        dense_guard(net.n())?;
    }
    let mut timings = Timings::default();
    let op = timings.time("operator", || build_operator(net, 1.0, Variant::ExactUndirected))?;
    let op = op.with_execution(cfg.execution);
    let (result, embedding, t) = match mode {
        ScMode::Dense => dense_branch(&op, cfg.k, cfg)?,
        ScMode::MatrixFree => spectral_branch(&op, cfg.k, exact_power(net.n(), cfg.k), cfg)?,
    };
    timings.absorb("", t);
    Ok(PipelineOutput { result, embedding, timings })
}

type Branch = Result<(ClusterResult, Embedding, Timings)>;

fn assemble(mut timings: Timings, rows: Branch, cols: Branch) -> Result<CoClusterOutput> {
    let (rows, row_embedding, rt) = rows?;
    let (cols, col_embedding, ct) = cols?;
    timings.absorb("row_", rt);
    timings.absorb("col_", ct);
    Ok(CoClusterOutput { rows, cols, row_embedding, col_embedding, timings })
}

/// Randomized spectral co-clustering of a directed network: one shared
/// sampling pass, then independent row (`Ã Ãᵀ`, `k`) and column
/// (`Ãᵀ Ã`, `k_col`) branches.
pub fn rsc_coclustering(net: &MultiLayerNetwork, cfg: &PipelineConfig) -> Result<CoClusterOutput> {
    cfg.validate()?;
    if !net.is_directed() {
        return Err(invalid("co-clustering expects a directed network"));
    }
    let mut timings = Timings::default();
    let sampling = SamplingConfig::new(cfg.p, cfg.seed)?;
    let sampled = timings.time("sparsify", || sparsify_with(net, sampling, cfg.execution))?;
    let (rows, cols) = cfg.execution.join(
        || -> Branch {
            let op = build_operator(&sampled, cfg.p, Variant::Row)?.with_execution(cfg.execution);
            spectral_branch(&op, cfg.k, cfg.q, cfg)
        },
        || -> Branch {
            let op = build_operator(&sampled, cfg.p, Variant::Col)?.with_execution(cfg.execution);
            spectral_branch(&op, cfg.col_k(), cfg.q, cfg)
        },
    );
    assemble(timings, rows, cols)
}

/// Exact directed spectral co-clustering on `M^R` and `M^C`.
pub fn sc_coclustering(net: &MultiLayerNetwork, cfg: &PipelineConfig, mode: ScMode) -> Result<CoClusterOutput> {
    cfg.validate()?;
    if !net.is_directed() {
        return Err(invalid("co-clustering expects a directed network"));
    }
    if mode == ScMode::Dense {
        dense_guard(net.n())?;
    }
    let branch = |variant: Variant, k: usize| -> Branch {
        let op = build_operator(net, 1.0, variant)?.with_execution(cfg.execution);
        match mode {
            ScMode::Dense => dense_branch(&op, k, cfg),
            ScMode::MatrixFree => spectral_branch(&op, k, exact_power(net.n(), k), cfg),
        }
    };
    let (rows, cols) =
        cfg.execution.join(|| branch(Variant::ExactRow, cfg.k), || branch(Variant::ExactCol, cfg.col_k()));
    assemble(Timings::default(), rows, cols)
}
