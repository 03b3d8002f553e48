//! Partition comparison: permutation-minimized misclassification rate,
//! adjusted Rand index and adjusted mutual information.

use crate::error::{invalid, Result};
use crate::sim::Membership;

/// Largest `K` for which the matching is found by enumerating permutations.
const BRUTE_FORCE_MAX_K: usize = 8;

/// Co-occurrence counts of two labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionTable {
    /// `counts[a][b]` is the number of nodes labeled `a` by the first
    /// partition and `b` by the second.
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl ConfusionTable {
    pub fn new(a: &Membership, b: &Membership) -> Result<Self> {
        if a.n() != b.n() {
            return Err(invalid(format!("label vectors differ in length: {} vs {}", a.n(), b.n())));
        }
        let mut counts = vec![vec![0u64; b.k()]; a.k()];
        for (&x, &y) in a.labels().iter().zip(b.labels()) {
            counts[x][y] += 1;
        }
        Ok(Self { counts, n: a.n() as u64 })
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let k2 = self.counts.first().map_or(0, Vec::len);
        (0..k2).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }
}

/// Largest total of `table[i][perm[i]]` over all permutations, by enumeration.
pub fn max_matching_brute(table: &[Vec<u64>]) -> u64 {
    fn go(table: &[Vec<u64>], row: usize, used: &mut [bool], acc: u64, best: &mut u64) {
        if row == table.len() {
            *best = (*best).max(acc);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                go(table, row + 1, used, acc + table[row][c], best);
                used[c] = false;
            }
        }
    }
    let mut best = 0;
    go(table, 0, &mut vec![false; table.len()], 0, &mut best);
    best
}

/// Largest total of `table[i][perm[i]]` over all permutations, by the
/// Hungarian algorithm (potentials form, `O(K³)`).
pub fn max_matching_hungarian(table: &[Vec<u64>]) -> u64 {
    let k = table.len();
    if k == 0 {
        return 0;
    }
    let top = table.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| top - table[i][j] as i64;
    // 1-based arrays; column 0 is the virtual start
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=k).map(|j| table[owner[j] - 1][j - 1]).sum()
}

fn max_matching(table: &[Vec<u64>]) -> u64 {
    if table.len() <= BRUTE_FORCE_MAX_K {
        max_matching_brute(table)
    } else {
        max_matching_hungarian(table)
    }
}

/// `min_Ψ (1/n) ||Θ̂Ψ − Θ||₀` over label permutations. Every misassigned node
/// contributes two nonzeros, so the value lies in `[0, 2]`.
pub fn misclassification_rate(truth: &Membership, estimate: &Membership) -> Result<f64> {
    if truth.k() != estimate.k() {
        return Err(invalid(format!("community counts differ: {} vs {}", truth.k(), estimate.k())));
    }
    let table = ConfusionTable::new(truth, estimate)?;
    if table.n == 0 {
        return Ok(0.0);
    }
    let matched = max_matching(&table.counts);
    Ok(2.0 * (table.n - matched) as f64 / table.n as f64)
}

/// Widens both memberships to the larger of their community counts.
pub fn pad_to_common_k(a: &Membership, b: &Membership) -> Result<(Membership, Membership)> {
    let k = a.k().max(b.k());
    Ok((a.with_k(k)?, b.with_k(k)?))
}

fn comb2(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand index. Returns 1 for identical partitions; when the
/// expected and maximal index coincide (only possible for identical trivial
/// partitions) the value is 1 as well.
///
/// The pair counts are kept as integers and the index is evaluated as one
/// ratio `(2N·I − 2·Sa·Sb) / (N·(Sa + Sb) − 2·Sa·Sb)`, so small cases come
/// out exact.
pub fn ari(a: &Membership, b: &Membership) -> Result<f64> {
    let table = ConfusionTable::new(a, b)?;
    let index: i128 = table.counts.iter().flatten().map(|&c| comb2(c)).sum();
    let sa: i128 = table.row_sums().into_iter().map(comb2).sum();
    let sb: i128 = table.col_sums().into_iter().map(comb2).sum();
    let total = comb2(table.n);
    if total == 0 {
        return Ok(1.0);
    }
    let num = 2 * total * index - 2 * sa * sb;
    let den = total * (sa + sb) - 2 * sa * sb;
    if den == 0 {
        return Ok(if num == 0 { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}

fn entropy(sizes: &[u64], n: f64) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Expected mutual information under the hypergeometric permutation model.
fn expected_mutual_info(rows: &[u64], cols: &[u64], n: u64) -> f64 {
    let mut ln_fact = vec![0.0f64; n as usize + 1];
    for k in 1..=n as usize {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in rows {
        for &bj in cols {
            let lo = 1.max((ai + bj).saturating_sub(n));
            let hi = ai.min(bj);
            let fixed =
                ln_fact[ai as usize] + ln_fact[bj as usize] + ln_fact[(n - ai) as usize] + ln_fact[(n - bj) as usize]
                    - ln_fact[n as usize];
            for nij in lo..=hi {
                let x = nij as f64;
                let term = (x / nf) * (nf * x / (ai as f64 * bj as f64)).ln();
                let log_p = fixed
                    - ln_fact[nij as usize]
                    - ln_fact[(ai - nij) as usize]
                    - ln_fact[(bj - nij) as usize]
                    - ln_fact[(n + nij - ai - bj) as usize];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information with max-entropy normalization:
/// `(MI − E[MI]) / (max(H(a), H(b)) − E[MI])`. Two single-cluster
/// partitions score 1.
pub fn ami(a: &Membership, b: &Membership) -> Result<f64> {
    let table = ConfusionTable::new(a, b)?;
    let rows: Vec<u64> = table.row_sums().into_iter().filter(|&s| s > 0).collect();
    let cols: Vec<u64> = table.col_sums().into_iter().filter(|&s| s > 0).collect();
    let n = table.n;
    if n == 0 || (rows.len() == cols.len() && (rows.len() <= 1 || rows.len() as u64 == n)) {
        return Ok(1.0);
    }
    let nf = n as f64;
    let ra = table.row_sums();
    let cb = table.col_sums();
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let x = c as f64;
                mi += (x / nf) * (nf * x / (ra[i] as f64 * cb[j] as f64)).ln();
            }
        }
    }
    let emi = expected_mutual_info(&rows, &cols, n);
    let h = entropy(&rows, nf).max(entropy(&cols, nf));
    let mut denom = h - emi;
    denom = if denom < 0.0 { denom.min(-f64::EPSILON) } else { denom.max(f64::EPSILON) };
    Ok((mi - emi) / denom)
}
