//! Multi-layer stochastic block model (SBM) and stochastic co-block model
//! (ScBM) generators, the population matrix and the four simulation presets.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::graph::{MultiLayerNetwork, SparseLayer};
use crate::seed::{self, Stage};

/// Largest `n` for which [`population_pi`] materializes the dense matrix.
pub const POPULATION_GUARD: usize = 5000;

/// Community labels in `[0, k)`, one per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    labels: Vec<usize>,
    k: usize,
}

impl Membership {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("community count must be at least 1"));
        }
        if let Some(&bad) = labels.iter().find(|&&g| g >= k) {
            return Err(invalid(format!("label {bad} outside 0..{k}")));
        }
        Ok(Self { labels, k })
    }

    /// Uses `max label + 1` as the community count.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(1, |m| m + 1);
        Self::new(labels, k)
    }

    /// Contiguous assignment: the first `sizes[0]` nodes get label 0, and so on.
    pub fn contiguous(sizes: &[usize]) -> Result<Self> {
        let labels = sizes.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect();
        Self::new(labels, sizes.len())
    }

    /// Contiguous assignment with community sizes `round(prop * n)`; the last
    /// community takes the remainder.
    pub fn from_proportions(n: usize, props: &[f64]) -> Result<Self> {
        let mut sizes = Vec::with_capacity(props.len());
        let mut used = 0usize;
        for (g, &pr) in props.iter().enumerate() {
            let s = if g + 1 == props.len() {
                n.saturating_sub(used)
            } else {
                ((pr * n as f64).round() as usize).min(n - used)
            };
            used += s;
            sizes.push(s);
        }
        Self::contiguous(&sizes)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &g in &self.labels {
            s[g] += 1;
        }
        s
    }

    /// Node indices of each community, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k];
        for (i, &g) in self.labels.iter().enumerate() {
            m[g].push(i);
        }
        m
    }

    /// Widens the label range to `k` without changing any label.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.labels.clone(), k)
    }

    /// The `n x k` 0/1 membership matrix.
    pub fn theta(&self) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.n(), self.k);
        for (i, &g) in self.labels.iter().enumerate() {
            t[(i, g)] = 1.0;
        }
        t
    }
}

/// Block probabilities `rho * B_{l,0}` for every layer plus the memberships.
///
/// An undirected model has only row memberships and square symmetric blocks;
/// a directed (co-block) model also carries column memberships and
/// `K_y x K_z` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    rows: Membership,
    cols: Option<Membership>,
    blocks: Vec<DMatrix<f64>>,
    rho: f64,
}

impl BlockModel {
    pub fn new(rows: Membership, cols: Option<Membership>, blocks: Vec<DMatrix<f64>>, rho: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid("a block model needs at least one layer"));
        }
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(invalid(format!("rho must be nonnegative, got {rho}")));
        }
        let kz = match &cols {
            Some(c) => {
                if c.n() != rows.n() {
                    return Err(invalid("row and column memberships cover different node counts"));
                }
                c.k()
            }
            None => rows.k(),
        };
        for (l, b) in blocks.iter().enumerate() {
            if b.shape() != (rows.k(), kz) {
                return Err(invalid(format!("layer {l} block is {:?}, expected ({}, {kz})", b.shape(), rows.k())));
            }
            if let Some(v) = b.iter().find(|&&v| !(0.0..=1.0).contains(&(rho * v))) {
                return Err(invalid(format!("layer {l}: edge probability {} outside [0, 1]", rho * v)));
            }
            if cols.is_none() && (b - b.transpose()).amax() > 1e-12 {
                return Err(invalid(format!("layer {l}: undirected block matrix is not symmetric")));
            }
        }
        Ok(Self { rows, cols, blocks, rho })
    }

    pub fn rows(&self) -> &Membership {
        &self.rows
    }

    /// Column memberships of a directed model.
    pub fn cols(&self) -> Option<&Membership> {
        self.cols.as_ref()
    }

    pub fn is_directed(&self) -> bool {
        self.cols.is_some()
    }

    pub fn n(&self) -> usize {
        self.rows.n()
    }

    pub fn num_layers(&self) -> usize {
        self.blocks.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Unscaled block matrix `B_{l,0}`.
    pub fn base_block(&self, l: usize) -> &DMatrix<f64> {
        &self.blocks[l]
    }

    /// Edge probabilities `rho * B_{l,0}` of layer `l`.
    pub fn block(&self, l: usize) -> DMatrix<f64> {
        &self.blocks[l] * self.rho
    }

    /// Copy with a different sparsity scale.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.rows.clone(), self.cols.clone(), self.blocks.clone(), rho)
    }
}

/// Dense population matrix `(1/L) sum_l P_l^2 / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMatrix {
    pub matrix: DMatrix<f64>,
}

/// Calls `f(k)` for each success of `total` independent Bernoulli(`prob`)
/// trials, jumping between successes with geometric skips.
fn bernoulli_positions<R: Rng>(total: u64, prob: f64, rng: &mut R, mut f: impl FnMut(u64)) {
    if total == 0 || prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        (0..total).for_each(f);
        return;
    }
    let log_q = (-prob).ln_1p();
    let mut pos = 0u64;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (total - pos) as f64 {
            return;
        }
        pos += skip as u64;
        f(pos);
        pos += 1;
        if pos >= total {
            return;
        }
    }
}

/// Unordered pairs `{members[s], members[t]}`, `s < t`, each kept with `prob`.
fn sample_triangle<R: Rng>(members: &[usize], prob: f64, rng: &mut R, out: &mut Vec<(usize, usize)>) {
    let m = members.len() as u64;
    if m < 2 {
        return;
    }
    // row s covers linear positions [start(s), start(s + 1))
    let start = |s: u64| s * m - s * (s + 1) / 2;
    let mut row = 0u64;
    bernoulli_positions(m * (m - 1) / 2, prob, rng, |pos| {
        while start(row + 1) <= pos {
            row += 1;
        }
        let col = row + 1 + (pos - start(row));
        out.push((members[row as usize], members[col as usize]));
    });
}

/// Pairs `(rows[s], cols[t])` with `rows[s] != cols[t]`, each kept with `prob`.
fn sample_rectangle<R: Rng>(rows: &[usize], cols: &[usize], prob: f64, rng: &mut R, out: &mut Vec<(usize, usize)>) {
    let w = cols.len() as u64;
    bernoulli_positions(rows.len() as u64 * w, prob, rng, |pos| {
        let (i, j) = (rows[(pos / w) as usize], cols[(pos % w) as usize]);
        if i != j {
            out.push((i, j));
        }
    });
}

/// Samples an undirected multi-layer SBM: for each layer and each pair
/// `i < j`, an edge appears with probability `rho * B_{l, g_i g_j}`.
pub fn sample_msbm(model: &BlockModel, seed: u64) -> Result<MultiLayerNetwork> {
    sample_msbm_with(model, seed, Execution::default())
}

pub fn sample_msbm_with(model: &BlockModel, seed: u64, exec: Execution) -> Result<MultiLayerNetwork> {
    if model.is_directed() {
        return Err(invalid("sample_msbm needs an undirected model; use sample_mscbm"));
    }
    let n = model.n();
    let members = model.rows.members();
    let k = model.rows.k();
    let layers = exec.map_indexed(model.num_layers(), |l| {
        let mut rng = seed::stream(seed, Stage::Generate, l as u64);
        let probs = model.block(l);
        let mut pairs = Vec::new();
        for a in 0..k {
            for b in a..k {
                let p = probs[(a, b)];
                if a == b {
                    sample_triangle(&members[a], p, &mut rng, &mut pairs);
                } else {
                    sample_rectangle(&members[a], &members[b], p, &mut rng, &mut pairs);
                }
            }
        }
        SparseLayer::from_pairs(n, pairs, 1.0, true)
    });
    Ok(MultiLayerNetwork::from_parts(n, layers, false))
}

/// Samples a directed multi-layer ScBM: every ordered pair `i != j` carries an
/// edge with probability `rho * B_{l, g_i^y g_j^z}`. Not symmetrized.
pub fn sample_mscbm(model: &BlockModel, seed: u64) -> Result<MultiLayerNetwork> {
    sample_mscbm_with(model, seed, Execution::default())
}

pub fn sample_mscbm_with(model: &BlockModel, seed: u64, exec: Execution) -> Result<MultiLayerNetwork> {
    let cols = model.cols.as_ref().ok_or_else(|| invalid("sample_mscbm needs column memberships"))?;
    let n = model.n();
    let row_members = model.rows.members();
    let col_members = cols.members();
    let layers = exec.map_indexed(model.num_layers(), |l| {
        let mut rng = seed::stream(seed, Stage::Generate, l as u64);
        let probs = model.block(l);
        let mut pairs = Vec::new();
        for (a, rm) in row_members.iter().enumerate() {
            for (b, cm) in col_members.iter().enumerate() {
                sample_rectangle(rm, cm, probs[(a, b)], &mut rng, &mut pairs);
            }
        }
        SparseLayer::from_pairs(n, pairs, 1.0, false)
    });
    Ok(MultiLayerNetwork::from_parts(n, layers, true))
}

/// Samples with whichever generator matches the model.
pub fn sample(model: &BlockModel, seed: u64) -> Result<MultiLayerNetwork> {
    if model.is_directed() {
        sample_mscbm(model, seed)
    } else {
        sample_msbm(model, seed)
    }
}

/// Eigenvector basis shared by Models 1, 3 and 4 (rows of `U`).
fn basis_u() -> Matrix3<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix3::new(0.5, 0.5, -h, 0.5, 0.5, h, h, -h, 0.0)
}

/// Right basis of Model 4.
fn basis_v() -> Matrix3<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix3::new(h, -h, 0.0, 0.5, 0.5, -h, 0.5, 0.5, h)
}

/// Orthonormal completion of Model 2's basis. Its published columns are
/// rounded to two digits; the first column is exactly `(1/2, 1/2, 1/sqrt 2)`
/// and the other two are re-orthonormalized against it.
fn basis_u_model2() -> Matrix3<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c1 = Vector3::new(0.5, 0.5, h);
    let raw = Vector3::new(0.84, -0.46, -0.27);
    let c2 = (raw - c1 * c1.dot(&raw)).normalize();
    let c3 = c2.cross(&c1);
    Matrix3::from_columns(&[c1, c2, c3])
}

fn factor(left: &Matrix3<f64>, diag: [f64; 3], right: &Matrix3<f64>) -> DMatrix<f64> {
    let d = Matrix3::from_diagonal(&Vector3::from(diag));
    let b = left * d * right.transpose();
    DMatrix::from_fn(3, 3, |i, j| b[(i, j)])
}

fn symmetrized(b: DMatrix<f64>) -> DMatrix<f64> {
    (&b + b.transpose()) * 0.5
}

/// The two block matrices `(B^(1), B^(2))` of a preset, unscaled.
pub fn preset_blocks(id: u8) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let u = basis_u();
    Ok(match id {
        1 => (symmetrized(factor(&u, [1.5, 0.2, 0.4], &u)), symmetrized(factor(&u, [1.5, 0.2, -0.4], &u))),
        2 => {
            let u2 = basis_u_model2();
            (symmetrized(factor(&u2, [1.5, 0.4, 0.0], &u2)), symmetrized(factor(&u2, [1.5, -0.4, 0.0], &u2)))
        }
        3 => (symmetrized(factor(&u, [1.5, 0.2, 0.4], &u)), symmetrized(factor(&u, [1.0, 0.4, 0.2], &u))),
        4 => {
            let v = basis_v();
            (factor(&u, [1.5, 0.2, 0.4], &v), factor(&u, [1.5, 0.2, -0.4], &v))
        }
        _ => return Err(invalid(format!("model id must be 1..=4, got {id}"))),
    })
}

/// Simulation presets. The first `floor(L/2)` layers use `B^(1)`, the rest
/// `B^(2)`, so an odd `L` gives the second matrix one extra layer;
/// communities are contiguous with proportions (0.3, 0.4, 0.3), and Model 4's
/// column communities use (0.4, 0.3, 0.3).
pub fn model_preset(id: u8, n: usize, num_layers: usize, rho: f64) -> Result<BlockModel> {
    if num_layers == 0 {
        return Err(invalid("presets need at least one layer"));
    }
    let (b1, b2) = preset_blocks(id)?;
    let blocks = (0..num_layers).map(|l| if l < num_layers / 2 { b1.clone() } else { b2.clone() }).collect();
    let rows = Membership::from_proportions(n, &[0.3, 0.4, 0.3])?;
    let cols = if id == 4 { Some(Membership::from_proportions(n, &[0.4, 0.3, 0.3])?) } else { None };
    BlockModel::new(rows, cols, blocks, rho)
}

/// `(1/L) sum_l P_l^2 / n` with `P_l = Theta B_l Theta^T`, diagonal included.
pub fn population_pi(model: &BlockModel) -> Result<PopulationMatrix> {
    if model.is_directed() {
        return Err(invalid("population matrix is defined for undirected models"));
    }
    let n = model.n();
    if n > POPULATION_GUARD {
        return Err(Error::Capacity { what: "population matrix", requested: n, limit: POPULATION_GUARD });
    }
    // P_l^2 = Theta (B_l N B_l) Theta^T with N = diag(community sizes)
    let sizes = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        model.rows.k(),
        model.rows.sizes().into_iter().map(|s| s as f64),
    ));
    let scale = 1.0 / (model.num_layers() as f64 * n as f64);
    let mut core = DMatrix::zeros(model.rows.k(), model.rows.k());
    for l in 0..model.num_layers() {
        let b = model.block(l);
        core += &b * &sizes * &b * scale;
    }
    let g = model.rows.labels();
    Ok(PopulationMatrix { matrix: DMatrix::from_fn(n, n, |i, j| core[(g[i], g[j])]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn one_block(n: usize, b: f64, rho: f64, layers: usize) -> BlockModel {
        let rows = Membership::contiguous(&[n]).unwrap();
        BlockModel::new(rows, None, vec![DMatrix::from_element(1, 1, b); layers], rho).unwrap()
    }

    #[test]
    fn rho_zero_gives_empty_layers() {
        let m = model_preset(1, 50, 4, 0.0).unwrap();
        let net = sample_msbm(&m, 3).unwrap();
        assert_eq!(net.nnz(), 0);
        let m4 = model_preset(4, 50, 4, 0.0).unwrap();
        assert_eq!(sample_mscbm(&m4, 3).unwrap().nnz(), 0);
    }

    #[test]
    fn probability_one_is_complete() {
        let net = sample_msbm(&one_block(12, 1.0, 1.0, 2), 9).unwrap();
        for ly in net.layers() {
            assert_eq!(ly.nnz(), 12 * 11);
        }
        let rows = Membership::contiguous(&[9]).unwrap();
        let m = BlockModel::new(rows.clone(), Some(rows), vec![DMatrix::from_element(1, 1, 1.0)], 1.0).unwrap();
        let d = sample_mscbm(&m, 1).unwrap();
        assert_eq!(d.layer(0).nnz(), 9 * 8);
        assert!(d.is_directed());
    }

    #[test]
    fn probabilities_outside_unit_interval_rejected() {
        assert!(model_preset(1, 30, 2, 2.0).is_err());
        let rows = Membership::contiguous(&[3]).unwrap();
        assert!(BlockModel::new(rows, None, vec![DMatrix::from_element(1, 1, -0.1)], 1.0).is_err());
    }

    #[test]
    fn preset_sizes_and_errors() {
        let m = model_preset(1, 10, 2, 0.1).unwrap();
        assert_eq!(m.rows().sizes(), vec![3, 4, 3]);
        assert!(model_preset(1, 10, 0, 0.1).is_err());
        let odd = model_preset(1, 10, 3, 0.1).unwrap();
        assert_ne!(odd.base_block(0), odd.base_block(1));
        assert_eq!(odd.base_block(1), odd.base_block(2));
        assert!(model_preset(5, 10, 2, 0.1).is_err());
        let m4 = model_preset(4, 10, 2, 0.1).unwrap();
        assert_eq!(m4.cols().unwrap().sizes(), vec![4, 3, 3]);
    }

    #[test]
    fn preset_entries_follow_factorizations() {
        let (b1, b2) = preset_blocks(1).unwrap();
        assert!((b1[(0, 0)] - 0.625).abs() < 1e-12);
        assert!((b1[(2, 2)] - 0.85).abs() < 1e-12);
        assert!((b2[(0, 1)] - 0.625).abs() < 1e-12);
        let (m4, _) = preset_blocks(4).unwrap();
        assert!((m4[(2, 0)] - 0.85).abs() < 1e-12);
        assert!((m4[(0, 1)] - 0.625).abs() < 1e-12);
        // Model 2's displayed approximations
        let (c1, c2) = preset_blocks(2).unwrap();
        let shown1 = [[0.66, 0.22, 0.44], [0.22, 0.46, 0.58], [0.44, 0.58, 0.78]];
        let shown2 = [[0.09, 0.53, 0.62], [0.53, 0.29, 0.48], [0.62, 0.48, 0.72]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((c1[(i, j)] - shown1[i][j]).abs() < 0.02, "B1[{i},{j}] = {}", c1[(i, j)]);
                assert!((c2[(i, j)] - shown2[i][j]).abs() < 0.02, "B2[{i},{j}] = {}", c2[(i, j)]);
            }
        }
    }

    #[test]
    fn model2_sum_of_squares_has_rank_two() {
        let m = model_preset(2, 30, 4, 1.0).unwrap();
        let mut s = DMatrix::zeros(3, 3);
        for l in 0..4 {
            let b = m.block(l);
            s += &b * &b;
        }
        let mut ev: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        assert!(ev[1] > 1e-3);
        assert!(ev[2] < 1e-12 * ev[0]);
    }

    #[test]
    fn population_single_block() {
        let pi = population_pi(&one_block(7, 0.6, 1.0, 1)).unwrap();
        for v in pi.matrix.iter() {
            assert!((v - 0.36).abs() < 1e-14);
        }
        let zero = population_pi(&model_preset(1, 20, 2, 0.0).unwrap()).unwrap();
        assert_eq!(zero.matrix.amax(), 0.0);
    }

    #[test]
    fn population_matches_direct_formula_and_guard() {
        let m = model_preset(3, 40, 4, 0.3).unwrap();
        let pi = population_pi(&m).unwrap();
        let theta = m.rows().theta();
        let mut direct = DMatrix::zeros(40, 40);
        for l in 0..4 {
            let p = &theta * m.block(l) * theta.transpose();
            direct += &p * &p / (4.0 * 40.0);
        }
        assert!((&pi.matrix - direct).amax() < 1e-14);
        let big = one_block(POPULATION_GUARD + 1, 0.5, 1.0, 1);
        assert!(matches!(population_pi(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_symmetric() {
        let m = model_preset(1, 120, 4, 0.3).unwrap();
        let a = sample_msbm(&m, 42).unwrap();
        let b = sample_msbm(&m, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_msbm(&m, 43).unwrap());
        for ly in a.layers() {
            assert!(ly.is_symmetric());
            assert!(ly.entries().all(|(i, j, _)| i != j));
        }
        let seq = sample_msbm_with(&m, 42, Execution::Sequential).unwrap();
        assert_eq!(a, seq);
    }

    #[test]
    fn geometric_skips_match_bernoulli_rate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let total = 200_000u64;
        let p = 0.03;
        let mut count = 0u64;
        let mut last = None;
        bernoulli_positions(total, p, &mut rng, |k| {
            assert!(k < total);
            assert!(last.is_none_or(|l| k > l));
            last = Some(k);
            count += 1;
        });
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        assert!((count as f64 - total as f64 * p).abs() < 4.0 * sd);
    }

    #[test]
    fn triangle_decoding_covers_every_pair() {
        let members: Vec<usize> = (10..17).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut out = Vec::new();
        sample_triangle(&members, 1.0, &mut rng, &mut out);
        let mut expected = Vec::new();
        for s in 0..7 {
            for t in s + 1..7 {
                expected.push((members[s], members[t]));
            }
        }
        assert_eq!(out, expected);
    }
}
