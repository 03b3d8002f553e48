//! Randomized block Krylov eigensolver for symmetric operators, plus a dense
//! solver used as the exact baseline and as a test oracle.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::operator::SymmetricOperator;
use crate::seed::{self, Stage};

/// Largest matrix accepted by [`dense_top_eigs`].
pub const DENSE_EIG_GUARD: usize = 2000;

/// Relative tolerance below which a residual column counts as dependent.
const DROP_TOL: f64 = 1e-10;

/// Entry distribution of the random test matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TestDistribution {
    #[default]
    Gaussian,
    Rademacher,
}

impl FromStr for TestDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(invalid(format!("unknown test distribution `{other}`"))),
        }
    }
}

impl fmt::Display for TestDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::Rademacher => "rademacher",
        })
    }
}

/// Target rank, power parameter and randomness of the Krylov solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovConfig {
    pub k: usize,
    pub q: usize,
    pub seed: u64,
    pub distribution: TestDistribution,
}

impl KrylovConfig {
    pub fn new(k: usize, q: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("target rank must be at least 1"));
        }
        Ok(Self { k, q, seed, distribution: TestDistribution::Gaussian })
    }

    pub fn with_distribution(mut self, distribution: TestDistribution) -> Self {
        self.distribution = distribution;
        self
    }
}

/// Power parameter `ceil(log2 n)`.
pub fn default_power(n: usize) -> usize {
    (n.max(2) as f64).log2().ceil() as usize
}

/// Approximate leading eigenvectors (orthonormal columns) and their
/// eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
}

impl Embedding {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Frobenius distance between the projectors onto two embeddings' spans.
    pub fn subspace_distance(&self, other: &Embedding) -> f64 {
        let a = &self.vectors * self.vectors.transpose();
        let b = &other.vectors * other.vectors.transpose();
        (a - b).norm()
    }
}

/// `n x k` matrix of i.i.d. standard normal or ±1 entries.
pub fn draw_test_matrix(n: usize, k: usize, dist: TestDistribution, seed: u64) -> Result<DMatrix<f64>> {
    if k > n {
        return Err(invalid(format!("test matrix needs k <= n, got k = {k}, n = {n}")));
    }
    let mut rng = seed::stream(seed, Stage::TestMatrix, 0);
    let mut data = Vec::with_capacity(n * k);
    for _ in 0..n * k {
        data.push(match dist {
            TestDistribution::Gaussian => StandardNormal.sample(&mut rng),
            TestDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        });
    }
    Ok(DMatrix::from_vec(n, k, data))
}

/// Growing orthonormal basis.
struct Basis {
    cols: Vec<DVector<f64>>,
}

impl Basis {
    /// Orthogonalizes each column of `block` against the basis (two passes of
    /// classical Gram-Schmidt), keeps the ones whose residual exceeds
    /// `DROP_TOL * ||block||_F`, and returns the accepted columns.
    fn extend(&mut self, block: &DMatrix<f64>) -> DMatrix<f64> {
        let tol = DROP_TOL * block.norm();
        let first = self.cols.len();
        for c in 0..block.ncols() {
            let mut v: DVector<f64> = block.column(c).into_owned();
            for _ in 0..2 {
                for q in &self.cols {
                    let h = q.dot(&v);
                    v.axpy(-h, q, 1.0);
                }
            }
            let norm = v.norm();
            if norm > tol && norm > 0.0 {
                self.cols.push(v / norm);
            }
        }
        if self.cols.len() == first {
            DMatrix::zeros(block.nrows(), 0)
        } else {
            DMatrix::from_columns(&self.cols[first..])
        }
    }

    fn into_matrix(self, n: usize) -> DMatrix<f64> {
        if self.cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&self.cols)
        }
    }
}

/// Orthonormal basis of `span{Op Ω, Op³ Ω, ..., Op^(2q+1) Ω}`.
///
/// Each new block is `Op²` applied to the previous orthonormalized block and
/// re-orthogonalized against everything accumulated so far. Numerically
/// dependent columns are dropped, so the result can have fewer than
/// `(q + 1) k` columns.
pub fn krylov_basis<O: SymmetricOperator + ?Sized>(op: &O, cfg: &KrylovConfig) -> Result<DMatrix<f64>> {
    let n = op.dim();
    if (cfg.q + 1) * cfg.k > n {
        return Err(invalid(format!("(q + 1) k = {} exceeds operator dimension {n}", (cfg.q + 1) * cfg.k)));
    }
    let omega = draw_test_matrix(n, cfg.k, cfg.distribution, cfg.seed)?;
    let mut basis = Basis { cols: Vec::new() };
    let mut block = basis.extend(&op.apply(&omega)?);
    for _ in 0..cfg.q {
        if block.ncols() == 0 {
            break;
        }
        let next = op.apply(&op.apply(&block)?)?;
        block = basis.extend(&next);
    }
    Ok(basis.into_matrix(n))
}

/// Extends an orthonormal basis with random Gaussian directions until it has
/// at least `k` columns. Used when the Krylov space collapses (for example on
/// an all-zero operator) and the caller still needs `k` coordinates.
pub fn pad_basis(q: DMatrix<f64>, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    if k > n {
        return Err(invalid(format!("cannot pad a basis of dimension {n} to {k} columns")));
    }
    if q.ncols() >= k {
        return Ok(q);
    }
    let mut basis = Basis { cols: q.column_iter().map(|c| c.into_owned()).collect() };
    let mut rng = seed::stream(seed, Stage::Padding, 0);
    while basis.cols.len() < k {
        let v = DMatrix::from_fn(n, 1, |_, _| StandardNormal.sample(&mut rng));
        basis.extend(&v);
    }
    Ok(basis.into_matrix(n))
}

/// Flips each column so its largest-magnitude entry is positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

/// Top-`k` eigenpairs of a symmetric matrix by algebraic value.
fn top_eigenpairs(sym: DMatrix<f64>, k: usize) -> (DMatrix<f64>, Vec<f64>) {
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(k);
    let vecs = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (vecs, order.iter().map(|&i| eig.eigenvalues[i]).collect())
}

/// Rayleigh-Ritz extraction: eigenpairs of `C = Qᵀ Op Q` lifted back by `Q`.
pub fn rayleigh_ritz<O: SymmetricOperator + ?Sized>(op: &O, q: &DMatrix<f64>, k: usize) -> Result<Embedding> {
    if q.nrows() != op.dim() {
        return Err(invalid("basis and operator dimensions differ"));
    }
    if q.ncols() < k || k == 0 {
        return Err(Error::RankDeficient { available: q.ncols(), requested: k });
    }
    let c = q.transpose() * op.apply(q)?;
    let c = (&c + c.transpose()) * 0.5;
    let (u_k, values) = top_eigenpairs(c, k);
    let mut vectors = q * u_k;
    fix_signs(&mut vectors);
    Ok(Embedding { vectors, values })
}

/// Full symmetric eigendecomposition, keeping the top `k` by algebraic value.
pub fn dense_top_eigs(matrix: &DMatrix<f64>, k: usize) -> Result<Embedding> {
    let n = matrix.nrows();
    if !matrix.is_square() {
        return Err(invalid("matrix must be square"));
    }
    if n > DENSE_EIG_GUARD {
        return Err(Error::Capacity { what: "dense eigensolver", requested: n, limit: DENSE_EIG_GUARD });
    }
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got k = {k}")));
    }
    let asym = (matrix - matrix.transpose()).amax();
    if asym > 1e-8 {
        return Err(invalid(format!("matrix is not symmetric (max asymmetry {asym:e})")));
    }
    let (mut vectors, values) = top_eigenpairs((matrix + matrix.transpose()) * 0.5, k);
    fix_signs(&mut vectors);
    Ok(Embedding { vectors, values })
}

/// Scree heuristic: the `k` in `[1, max_k)` maximizing
/// `|values[k-1]| / (|values[k]| + 1e-12)`. Ties go to the smaller `k`.
pub fn select_k_by_eigengap(values: &[f64], max_k: usize) -> Result<usize> {
    if values.len() < 2 {
        return Err(invalid("need at least two eigenvalues"));
    }
    let hi = max_k.min(values.len());
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..hi.max(2) {
        let ratio = values[k - 1].abs() / (values[k].abs() + 1e-12);
        if ratio > best.1 {
            best = (k, ratio);
        }
    }
    Ok(best.0)
}
