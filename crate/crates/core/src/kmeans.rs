//! Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::seed::{self, Stage};
use crate::sim::Membership;

/// Outcome of one k-means fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Membership,
    /// `k x d` centroids, one per row.
    pub centroids: DMatrix<f64>,
    /// Total within-cluster squared distance.
    pub inertia: f64,
    /// Lloyd iterations performed by the winning restart.
    pub iterations: usize,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

/// Row-major copy of the points.
struct Points {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Points {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid and its squared distance; ties go to the lower index.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.iter().enumerate() {
        let dist = sq_dist(x, mu);
        if dist < best.1 {
            best = (c, dist);
        }
    }
    best
}

fn plus_plus_init<R: Rng>(pts: &Points, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![pts.row(rng.random_range(0..pts.n)).to_vec()];
    let mut d2: Vec<f64> = (0..pts.n).map(|i| sq_dist(pts.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = pts.n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..pts.n)
        };
        let c = pts.row(pick).to_vec();
        for (i, slot) in d2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(pts.row(i), &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Assigns every point, then moves the farthest point of a multi-member
/// cluster into each empty cluster. Returns the inertia.
fn assign(pts: &Points, centroids: &mut [Vec<f64>], labels: &mut [usize], exec: Execution) -> f64 {
    let mut near = vec![(0usize, 0.0f64); pts.n];
    exec.fill(&mut near, 4096, |i| nearest(pts.row(i), centroids));
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for (slot, &(c, _)) in labels.iter_mut().zip(&near) {
        *slot = c;
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = (0..pts.n)
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| near[a].1.total_cmp(&near[b].1).then(b.cmp(&a)));
        if let Some(i) = donor {
            counts[labels[i]] -= 1;
            labels[i] = empty;
            counts[empty] = 1;
            near[i] = (empty, 0.0);
            centroids[empty] = pts.row(i).to_vec();
        }
    }
    near.iter().map(|&(_, d)| d).sum()
}

fn means(pts: &Points, labels: &[usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut sums = vec![vec![0.0; pts.d]; k];
    let mut counts = vec![0usize; k];
    for (i, &g) in labels.iter().enumerate() {
        counts[g] += 1;
        for (s, x) in sums[g].iter_mut().zip(pts.row(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
        }
    }
}

struct Fit {
    labels: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd<R: Rng>(pts: &Points, k: usize, max_iter: usize, rng: &mut R, exec: Execution) -> Fit {
    let mut centroids = plus_plus_init(pts, k, rng);
    let mut labels = vec![0usize; pts.n];
    let mut inertia = assign(pts, &mut centroids, &mut labels, exec);
    let mut trace = vec![inertia];
    let mut iterations = 0;
    let mut next = labels.clone();
    for it in 1..=max_iter {
        means(pts, &labels, &mut centroids);
        inertia = assign(pts, &mut centroids, &mut next, exec);
        trace.push(inertia);
        iterations = it;
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
    }
    Fit { labels, centroids, inertia, iterations, trace }
}

/// Clusters the rows of `rows` into `k` groups. Runs `restarts` independent
/// seeded fits and keeps the one with the smallest inertia (earliest restart
/// on ties).
pub fn kmeans(rows: &DMatrix<f64>, k: usize, seed: u64, restarts: usize, max_iter: usize) -> Result<ClusterResult> {
    kmeans_with(rows, k, seed, restarts, max_iter, Execution::default())
}

pub fn kmeans_with(
    rows: &DMatrix<f64>,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    exec: Execution,
) -> Result<ClusterResult> {
    let (n, d) = rows.shape();
    if k == 0 || k > n {
        return Err(invalid(format!("k-means needs 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if d == 0 {
        return Err(invalid("k-means needs at least one feature column"));
    }
    if restarts == 0 {
        return Err(invalid("k-means needs at least one restart"));
    }
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        data.extend(rows.row(i).iter());
    }
    let pts = Points { data, n, d };
    let fits = exec.map_indexed(restarts, |r| {
        let mut rng = seed::stream(seed, Stage::KMeans, r as u64);
        lloyd(&pts, k, max_iter, &mut rng, exec)
    });
    let best =
        fits.into_iter().reduce(|best, f| if f.inertia < best.inertia { f } else { best }).expect("restarts >= 1");
    Ok(ClusterResult {
        labels: Membership::new(best.labels, k)?,
        centroids: DMatrix::from_fn(k, d, |c, j| best.centroids[c][j]),
        inertia: best.inertia,
        iterations: best.iterations,
        inertia_trace: best.trace,
    })
}
