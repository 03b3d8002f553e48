//! Edge sampling and the bias-corrected aggregate of squared adjacency
//! matrices, applied without ever forming an `n x n` matrix.
//!
//! For sampled layers `Ã_l` (retained edges rescaled to `1/p`) and
//! retained-edge degrees `d̃_l`, the undirected operator is
//!
//! ```text
//! M̄ = (1/L) Σ_l [ Ã_l Ã_l / n − diag(d̃_l) / (n p²) ]
//! ```
//!
//! The directed row (column) variant replaces `Ã_l Ã_l` by `Ã_l Ã_lᵀ`
//! (`Ã_lᵀ Ã_l`) and uses out-degrees (in-degrees). The exact variants are the
//! same formulas on the unsampled network with `p = 1`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::graph::{degrees, DegreeMode, DegreeVector, MultiLayerNetwork, SparseLayer};
use crate::operator::SymmetricOperator;
use crate::seed::{self, Stage};

/// Largest `n` for which [`dense_reference`] will materialize the operator.
pub const DENSE_GUARD: usize = 2000;

/// Edge retention probability and the seed of the sampling streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    p: f64,
    seed: u64,
}

impl SamplingConfig {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(invalid(format!("sampling probability must lie in (0, 1], got {p}")));
        }
        Ok(Self { p, seed })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Keeps each edge independently with probability `p`, rescaled to `1/p`.
///
/// Undirected networks draw once per unordered pair (visiting `i < j`) and
/// mirror the outcome; directed networks draw once per ordered pair. Only
/// stored edges are visited.
pub fn sparsify(net: &MultiLayerNetwork, cfg: SamplingConfig) -> Result<MultiLayerNetwork> {
    sparsify_with(net, cfg, Execution::default())
}

pub fn sparsify_with(net: &MultiLayerNetwork, cfg: SamplingConfig, exec: Execution) -> Result<MultiLayerNetwork> {
    if let Some(l) = net.layers().iter().position(|ly| ly.values().iter().any(|&v| v != 1.0)) {
        return Err(invalid(format!("layer {l} is not binary; sampling expects 0/1 adjacency")));
    }
    let p = cfg.p;
    let directed = net.is_directed();
    let layers = exec.map_indexed(net.num_layers(), |l| {
        let layer = net.layer(l);
        let mut rng = seed::stream(cfg.seed, Stage::Sparsify, l as u64);
        let mut kept = Vec::with_capacity((layer.nnz() as f64 * p) as usize + 16);
        for (i, j, _) in layer.entries() {
            if (directed || i < j) && rng.random::<f64>() < p {
                kept.push((i, j));
            }
        }
        SparseLayer::from_pairs(net.n(), kept, 1.0 / p, !directed)
    });
    Ok(MultiLayerNetwork::from_parts(net.n(), layers, directed))
}

/// Which aggregate an operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Sampled undirected layers, `Ã Ã`.
    Undirected,
    /// Sampled directed layers, `Ã Ãᵀ` with out-degrees.
    Row,
    /// Sampled directed layers, `Ãᵀ Ã` with in-degrees.
    Col,
    ExactUndirected,
    ExactRow,
    ExactCol,
}

impl Variant {
    pub fn is_exact(self) -> bool {
        matches!(self, Variant::ExactUndirected | Variant::ExactRow | Variant::ExactCol)
    }

    fn shape(self) -> Shape {
        match self {
            Variant::Undirected | Variant::ExactUndirected => Shape::Square,
            Variant::Row | Variant::ExactRow => Shape::Row,
            Variant::Col | Variant::ExactCol => Shape::Col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Square,
    Row,
    Col,
}

/// Matrix-free bias-corrected aggregate over the layers of a network.
#[derive(Debug, Clone)]
pub struct DebiasedOperator<'a> {
    net: &'a MultiLayerNetwork,
    /// Transposes, cached for the directed variants only.
    transposed: Vec<SparseLayer>,
    degrees: Vec<DegreeVector>,
    p: f64,
    variant: Variant,
    exec: Execution,
}

/// Captures the layers and their retained-edge degrees for `variant`.
pub fn build_operator(net: &MultiLayerNetwork, p: f64, variant: Variant) -> Result<DebiasedOperator<'_>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("sampling probability must lie in (0, 1], got {p}")));
    }
    if variant.is_exact() {
        if p != 1.0 {
            return Err(invalid("exact operators require p = 1"));
        }
        if net.layers().iter().any(|ly| ly.values().iter().any(|&v| v != 1.0)) {
            return Err(invalid("exact operators require an unsampled 0/1 network"));
        }
    }
    let shape = variant.shape();
    match shape {
        Shape::Square => {
            if net.is_directed() && !net.layers().iter().all(SparseLayer::is_symmetric) {
                return Err(invalid("undirected variant needs symmetric layers"));
            }
        }
        Shape::Row | Shape::Col => {
            if !net.is_directed() {
                return Err(invalid("row/column variants need a directed network"));
            }
        }
    }
    let mode = if shape == Shape::Col { DegreeMode::Col } else { DegreeMode::Row };
    let degrees = net.layers().iter().map(|ly| degrees(ly, mode)).collect();
    let transposed = match shape {
        Shape::Square => Vec::new(),
        _ => net.layers().iter().map(SparseLayer::transpose).collect(),
    };
    Ok(DebiasedOperator { net, transposed, degrees, p, variant, exec: Execution::default() })
}

impl<'a> DebiasedOperator<'a> {
    /// Switches the execution strategy used by [`apply`](Self::apply).
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn n(&self) -> usize {
        self.net.n()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn network(&self) -> &'a MultiLayerNetwork {
        self.net
    }

    pub fn degrees(&self) -> &[DegreeVector] {
        &self.degrees
    }

    /// One layer's term `Ã(ÃX)/n − diag(d̃)X/(np²)` (or its directed form).
    fn layer_term(&self, l: usize, x: &DMatrix<f64>, exec: Execution) -> DMatrix<f64> {
        let a = self.net.layer(l);
        let mut y = match self.variant.shape() {
            Shape::Square => a.mul_block(&a.mul_block(x, exec), exec),
            Shape::Row => a.mul_block(&self.transposed[l].mul_block(x, exec), exec),
            Shape::Col => self.transposed[l].mul_block(&a.mul_block(x, exec), exec),
        };
        let n = self.n() as f64;
        let corr = 1.0 / (n * self.p * self.p);
        let d = &self.degrees[l].values;
        for c in 0..y.ncols() {
            for i in 0..y.nrows() {
                y[(i, c)] = y[(i, c)] / n - d[i] * x[(i, c)] * corr;
            }
        }
        y
    }

    /// `Op X` using an explicit execution strategy. Layer terms are summed in
    /// layer order, so every strategy gives the same bits.
    pub fn apply_with(&self, x: &DMatrix<f64>, exec: Execution) -> Result<DMatrix<f64>> {
        if x.nrows() != self.n() {
            return Err(invalid(format!("block has {} rows, operator is {}", x.nrows(), self.n())));
        }
        if x.ncols() == 0 {
            return Err(invalid("block must have at least one column"));
        }
        let num_layers = self.net.num_layers();
        let mut acc = DMatrix::zeros(self.n(), x.ncols());
        let width = exec.width();
        let mut start = 0;
        while start < num_layers {
            let end = (start + width).min(num_layers);
            let terms = exec.map_indexed(end - start, |k| self.layer_term(start + k, x, exec));
            for t in terms {
                acc += t;
            }
            start = end;
        }
        acc /= num_layers as f64;
        Ok(acc)
    }
}

impl SymmetricOperator for DebiasedOperator<'_> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.apply_with(x, self.exec)
    }
}

/// Dense `(1/(Ln)) Σ_l Ã_l Ã_l` (or its directed form) and the matching
/// diagonal `(1/(Ln p²)) Σ_l d̃_l`, built from explicit sparse outer products
/// rather than through [`DebiasedOperator::apply`].
fn dense_terms(op: &DebiasedOperator<'_>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = op.n();
    if n > DENSE_GUARD {
        return Err(Error::Capacity { what: "dense operator", requested: n, limit: DENSE_GUARD });
    }
    let mut squares = DMatrix::zeros(n, n);
    let mut diag = DVector::zeros(n);
    for (l, a) in op.net.layers().iter().enumerate() {
        let at = a.transpose();
        // (left, right): entry (i, j) gains left[k][i] * right[k][j] for every k
        let (left, right) = match op.variant.shape() {
            Shape::Square => (&at, a),
            Shape::Row => (&at, &at),
            Shape::Col => (a, a),
        };
        for k in 0..n {
            let (li, lv) = left.row(k);
            let (rj, rv) = right.row(k);
            for (&i, &vi) in li.iter().zip(lv) {
                for (&j, &vj) in rj.iter().zip(rv) {
                    squares[(i, j)] += vi * vj;
                }
            }
        }
        for (i, d) in op.degrees[l].values.iter().enumerate() {
            diag[i] += d;
        }
    }
    let scale = 1.0 / (op.net.num_layers() as f64 * n as f64);
    squares *= scale;
    diag *= scale / (op.p * op.p);
    Ok((squares, diag))
}

/// Materializes the operator as a dense `n x n` matrix (`n <= 2000`).
pub fn dense_reference(op: &DebiasedOperator<'_>) -> Result<DMatrix<f64>> {
    let (mut m, diag) = dense_terms(op)?;
    for i in 0..m.nrows() {
        m[(i, i)] -= diag[i];
    }
    Ok(m)
}

/// The squared aggregate without the degree correction, `(1/(Ln)) Σ_l Ã_l Ã_l`.
pub fn dense_uncorrected(op: &DebiasedOperator<'_>) -> Result<DMatrix<f64>> {
    Ok(dense_terms(op)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;
    use crate::operator::SymmetricOperator;
    use crate::sim::{model_preset, sample_msbm, sample_mscbm};
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn net_from(text: &str, n: usize, l: usize, directed: bool) -> MultiLayerNetwork {
        load_edge_list(text.as_bytes(), n, l, directed).unwrap()
    }

    fn random_block(n: usize, b: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, b, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn sampling_config_bounds() {
        assert!(SamplingConfig::new(0.0, 1).is_err());
        assert!(SamplingConfig::new(1.2, 1).is_err());
        assert!(SamplingConfig::new(f64::NAN, 1).is_err());
        assert!(SamplingConfig::new(1.0, 1).is_ok());
    }

    #[test]
    fn full_retention_is_identity() {
        let net = sample_msbm(&model_preset(1, 80, 4, 0.3).unwrap(), 1).unwrap();
        let s = sparsify(&net, SamplingConfig::new(1.0, 9).unwrap()).unwrap();
        assert_eq!(s, net);
    }

    #[test]
    fn retained_edges_are_rescaled() {
        let net = sample_msbm(&model_preset(1, 80, 4, 0.3).unwrap(), 1).unwrap();
        let s = sparsify(&net, SamplingConfig::new(0.5, 3).unwrap()).unwrap();
        assert!(s.nnz() > 0 && s.nnz() < net.nnz());
        for ly in s.layers() {
            assert!(ly.values().iter().all(|&v| v == 2.0));
            assert!(ly.is_symmetric());
        }
        for (l, ly) in s.layers().iter().enumerate() {
            assert!(ly.entries().all(|(i, j, _)| net.layer(l).get(i, j) == 1.0));
        }
        assert_eq!(s, sparsify(&net, SamplingConfig::new(0.5, 3).unwrap()).unwrap());
    }

    #[test]
    fn retained_count_is_binomial() {
        let net = sample_msbm(&model_preset(1, 400, 4, 0.2).unwrap(), 11).unwrap();
        let m = net.edge_count() as f64;
        let p = 0.7;
        let s = sparsify(&net, SamplingConfig::new(p, 5).unwrap()).unwrap();
        let kept = s.edge_count() as f64;
        assert!((kept - p * m).abs() <= 3.0 * (m * p * (1.0 - p)).sqrt());
    }

    #[test]
    fn directed_sampling_is_per_ordered_pair() {
        let net = sample_mscbm(&model_preset(4, 200, 2, 0.5).unwrap(), 2).unwrap();
        let s = sparsify(&net, SamplingConfig::new(0.5, 8).unwrap()).unwrap();
        assert!(s.is_directed());
        // with independent draws some reciprocated pairs keep only one direction
        let reciprocal_split =
            s.layer(0).entries().any(|(i, j, _)| net.layer(0).get(j, i) == 1.0 && s.layer(0).get(j, i) == 0.0);
        assert!(reciprocal_split);
    }

    #[test]
    fn sampling_rejects_weighted_input() {
        let net = net_from("1 0 1 2.5\n", 2, 1, false);
        assert!(sparsify(&net, SamplingConfig::new(0.5, 0).unwrap()).is_err());
    }

    #[test]
    fn single_edge_operator_is_zero() {
        let net = net_from("1 0 1\n", 2, 1, false);
        let op = build_operator(&net, 1.0, Variant::Undirected).unwrap();
        assert_eq!(dense_reference(&op).unwrap().amax(), 0.0);
    }

    #[test]
    fn path_graph_operator() {
        let net = net_from("1 0 1\n1 1 2\n", 3, 1, false);
        let op = build_operator(&net, 1.0, Variant::Undirected).unwrap();
        let third = 1.0 / 3.0;
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, third, 0.0, 0.0, 0.0, third, 0.0, 0.0]);
        let dense = dense_reference(&op).unwrap();
        assert!((&dense - &expected).amax() < 1e-15);
        let e0 = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let y = op.apply(&e0).unwrap();
        assert!((y[(2, 0)] - third).abs() < 1e-15 && y[(0, 0)] == 0.0 && y[(1, 0)] == 0.0);
        assert_eq!(op.apply(&DMatrix::zeros(3, 2)).unwrap(), DMatrix::zeros(3, 2));
    }

    #[test]
    fn empty_network_is_zero_operator() {
        let net = net_from("", 5, 2, false);
        let op = build_operator(&net, 0.5, Variant::Undirected).unwrap();
        assert_eq!(op.apply(&random_block(5, 2, 0)).unwrap().amax(), 0.0);
    }

    #[test]
    fn variant_compatibility() {
        let und = net_from("1 0 1\n", 3, 1, false);
        let dir = net_from("1 0 1\n", 3, 1, true);
        assert!(build_operator(&und, 1.0, Variant::Row).is_err());
        assert!(build_operator(&dir, 1.0, Variant::Undirected).is_err());
        assert!(build_operator(&dir, 0.5, Variant::ExactRow).is_err());
        assert!(build_operator(&und, 0.0, Variant::Undirected).is_err());
        let sampled = sparsify(
            &sample_msbm(&model_preset(1, 60, 2, 0.5).unwrap(), 1).unwrap(),
            SamplingConfig::new(0.5, 1).unwrap(),
        )
        .unwrap();
        assert!(build_operator(&sampled, 1.0, Variant::ExactUndirected).is_err());
        let op = build_operator(&und, 1.0, Variant::Undirected).unwrap();
        assert!(op.apply(&DMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn matrix_free_matches_dense_all_variants() {
        let und = sample_msbm(&model_preset(1, 150, 4, 0.3).unwrap(), 4).unwrap();
        let dir = sample_mscbm(&model_preset(4, 150, 4, 0.3).unwrap(), 4).unwrap();
        let su = sparsify(&und, SamplingConfig::new(0.6, 2).unwrap()).unwrap();
        let sd = sparsify(&dir, SamplingConfig::new(0.6, 2).unwrap()).unwrap();
        let cases = [
            (&su, 0.6, Variant::Undirected),
            (&sd, 0.6, Variant::Row),
            (&sd, 0.6, Variant::Col),
            (&und, 1.0, Variant::ExactUndirected),
            (&dir, 1.0, Variant::ExactRow),
            (&dir, 1.0, Variant::ExactCol),
        ];
        let x = random_block(150, 3, 77);
        for (net, p, v) in cases {
            let op = build_operator(net, p, v).unwrap();
            let dense = dense_reference(&op).unwrap();
            assert!((&dense - dense.transpose()).amax() < 1e-12, "{v:?}");
            let diff = (op.apply(&x).unwrap() - &dense * &x).amax();
            assert!(diff < 1e-10, "{v:?}: {diff}");
            // dense oracle equals apply on the identity
            let eye = DMatrix::identity(150, 150);
            assert!((op.apply(&eye).unwrap() - &dense).amax() < 1e-12);
        }
    }

    #[test]
    fn symmetry_of_bilinear_form() {
        let dir = sample_mscbm(&model_preset(4, 120, 4, 0.4).unwrap(), 6).unwrap();
        let s = sparsify(&dir, SamplingConfig::new(0.7, 1).unwrap()).unwrap();
        for v in [Variant::Row, Variant::Col] {
            let op = build_operator(&s, 0.7, v).unwrap();
            for t in 0..100 {
                let x = random_block(120, 1, 2 * t);
                let y = random_block(120, 1, 2 * t + 1);
                let lhs = y.dot(&op.apply(&x).unwrap());
                let rhs = x.dot(&op.apply(&y).unwrap());
                assert!((lhs - rhs).abs() <= 1e-8 * x.norm() * y.norm());
            }
        }
    }

    #[test]
    fn block_apply_equals_columnwise() {
        let net = sample_msbm(&model_preset(2, 100, 4, 0.3).unwrap(), 3).unwrap();
        let op = build_operator(&net, 1.0, Variant::ExactUndirected).unwrap();
        let x = random_block(100, 4, 1);
        let block = op.apply(&x).unwrap();
        for c in 0..4 {
            let col = op.apply(&x.columns(c, 1).into_owned()).unwrap();
            assert_eq!(block.column(c), col.column(0));
        }
    }

    #[test]
    fn sequential_and_parallel_agree_exactly() {
        let net = sample_msbm(&model_preset(1, 300, 6, 0.2).unwrap(), 3).unwrap();
        let op = build_operator(&net, 1.0, Variant::ExactUndirected).unwrap();
        let x = random_block(300, 3, 2);
        let a = op.apply_with(&x, Execution::Sequential).unwrap();
        let b = op.apply_with(&x, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_sampling_equals_exact_operator() {
        let net = sample_msbm(&model_preset(3, 120, 4, 0.3).unwrap(), 8).unwrap();
        let s = sparsify(&net, SamplingConfig::new(1.0, 0).unwrap()).unwrap();
        let a = build_operator(&s, 1.0, Variant::Undirected).unwrap();
        let b = build_operator(&net, 1.0, Variant::ExactUndirected).unwrap();
        let x = random_block(120, 2, 5);
        assert_eq!(a.apply(&x).unwrap(), b.apply(&x).unwrap());
    }

    #[test]
    fn dense_guard() {
        let net = net_from("", DENSE_GUARD + 1, 1, false);
        let op = build_operator(&net, 1.0, Variant::ExactUndirected).unwrap();
        assert!(matches!(dense_reference(&op), Err(Error::Capacity { .. })));
    }
}
