//! Sparse multi-layer graphs: storage, ingestion, degrees and the sparse
//! matrix-vector kernels every operator is built on.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;

/// Rows per parallel chunk in the sparse kernels.
const ROW_CHUNK: usize = 2048;

/// One layer's weighted adjacency matrix in compressed sparse row form.
///
/// Column indices inside a row are strictly increasing, the diagonal is
/// always empty and all values are nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLayer {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseLayer {
    /// Layer with no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, indptr: vec![0; n + 1], indices: Vec::new(), values: Vec::new() }
    }

    /// Builds a layer from `(row, col, value)` triplets in any order.
    ///
    /// Rejects out-of-range indices, diagonal entries, negative or non-finite
    /// values and repeated `(row, col)` pairs.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= n || j >= n {
                return Err(invalid(format!("entry ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(invalid(format!("diagonal entry at node {i}")));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("entry ({i}, {j}) has invalid value {v}")));
            }
        }
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = triplets.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(invalid(format!("duplicate entry ({}, {})", w[0].0, w[0].1)));
        }
        Ok(Self::from_sorted(n, &triplets))
    }

    /// `triplets` must be sorted by `(row, col)`, unique and already validated.
    pub(crate) fn from_sorted(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut indptr = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            indptr[i + 1] += 1;
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Self {
            n,
            indptr,
            indices: triplets.iter().map(|t| t.1).collect(),
            values: triplets.iter().map(|t| t.2).collect(),
        }
    }

    /// Builds from unweighted pairs, sorting and mirroring as requested.
    /// Pairs must be valid (in range, off-diagonal, unique per orientation).
    pub(crate) fn from_pairs(n: usize, pairs: Vec<(usize, usize)>, value: f64, mirror: bool) -> Self {
        let mut all = if mirror {
            let mut v = Vec::with_capacity(pairs.len() * 2);
            for &(i, j) in &pairs {
                v.push((i, j));
                v.push((j, i));
            }
            v
        } else {
            pairs
        };
        all.sort_unstable();
        let trip: Vec<_> = all.into_iter().map(|(i, j)| (i, j, value)).collect();
        Self::from_sorted(n, &trip)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    /// Iterates all entries as `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Explicit transpose, used to turn `A^T x` into a row-ordered kernel.
    pub fn transpose(&self) -> SparseLayer {
        let mut counts = vec![0usize; self.n + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (i, j, v) in self.entries() {
            let slot = next[j];
            indices[slot] = i;
            values[slot] = v;
            next[j] += 1;
        }
        SparseLayer { n: self.n, indptr, indices, values }
    }

    /// True when `(i, j, v)` is stored iff `(j, i, v)` is.
    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(i, j, v)| {
            let (cols, vals) = self.row(j);
            matches!(cols.binary_search(&i), Ok(k) if vals[k] == v)
        })
    }

    /// `A x` for one column, row sums in index order.
    #[inline]
    pub(crate) fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(i);
        let mut acc = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            acc += v * x[j];
        }
        acc
    }

    /// Writes `A x` into `out` for a single column.
    pub(crate) fn mul_vec_into(&self, x: &[f64], out: &mut [f64], exec: Execution) {
        exec.fill(out, ROW_CHUNK, |i| self.row_dot(i, x));
    }

    /// `A X` for a dense block, column by column.
    pub(crate) fn mul_block(&self, x: &DMatrix<f64>, exec: Execution) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let xs = xc.as_slice();
            let mut oc = out.column_mut(c);
            self.mul_vec_into(xs, oc.as_mut_slice(), exec);
        }
        out
    }
}

/// `L` layers over a shared node set.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLayerNetwork {
    n: usize,
    layers: Vec<SparseLayer>,
    directed: bool,
}

impl MultiLayerNetwork {
    /// Validates that all layers share `n`, that there is at least one layer
    /// and, for undirected networks, that every layer is symmetric.
    pub fn new(n: usize, layers: Vec<SparseLayer>, directed: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(invalid("a network needs at least one layer"));
        }
        if let Some((l, layer)) = layers.iter().enumerate().find(|(_, ly)| ly.n() != n) {
            return Err(invalid(format!("layer {l} has {} nodes, expected {n}", layer.n())));
        }
        if !directed {
            if let Some(l) = layers.iter().position(|ly| !ly.is_symmetric()) {
                return Err(invalid(format!("layer {l} is not symmetric in an undirected network")));
            }
        }
        Ok(Self { n, layers, directed })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts(n: usize, layers: Vec<SparseLayer>, directed: bool) -> Self {
        Self { n, layers, directed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SparseLayer] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &SparseLayer {
        &self.layers[l]
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Total stored entries over all layers.
    pub fn nnz(&self) -> usize {
        self.layers.iter().map(SparseLayer::nnz).sum()
    }

    /// Number of edges: stored entries, halved for undirected networks.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.nnz()
        } else {
            self.nnz() / 2
        }
    }

    /// Same layers reinterpreted as a directed network.
    pub fn into_directed(self) -> Self {
        Self { directed: true, ..self }
    }

    /// Relabels node `i` as `perm[i]` in every layer.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(invalid("permutation length differs from node count"));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(invalid("not a permutation"));
            }
        }
        let layers = self
            .layers
            .iter()
            .map(|ly| {
                let mut t: Vec<_> = ly.entries().map(|(i, j, v)| (perm[i], perm[j], v)).collect();
                t.sort_unstable_by_key(|&(i, j, _)| (i, j));
                SparseLayer::from_sorted(self.n, &t)
            })
            .collect();
        Ok(Self::from_parts(self.n, layers, self.directed))
    }
}

/// Per-node degrees of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    pub values: Vec<f64>,
}

impl DegreeVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Which side of the adjacency matrix a degree counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    /// Out-degree: nonzeros per row.
    Row,
    /// In-degree: nonzeros per column.
    Col,
}

/// Counts nonzero entries per row or per column. Values are ignored, so for
/// a sampled layer this is the number of retained edges.
pub fn degrees(layer: &SparseLayer, mode: DegreeMode) -> DegreeVector {
    let mut values = vec![0.0; layer.n];
    match mode {
        DegreeMode::Row => {
            for (i, d) in values.iter_mut().enumerate() {
                *d = (layer.indptr[i + 1] - layer.indptr[i]) as f64;
            }
        }
        DegreeMode::Col => {
            for &j in &layer.indices {
                values[j] += 1.0;
            }
        }
    }
    DegreeVector { values }
}

/// `A x`, or `A^T x` when `transpose` is set.
pub fn spmv(layer: &SparseLayer, x: &[f64], transpose: bool) -> Result<Vec<f64>> {
    if x.len() != layer.n {
        return Err(invalid(format!("vector length {} does not match layer size {}", x.len(), layer.n)));
    }
    let mut out = vec![0.0; layer.n];
    if transpose {
        for (i, j, v) in layer.entries() {
            out[j] += v * x[i];
        }
    } else {
        layer.mul_vec_into(x, &mut out, Execution::Sequential);
    }
    Ok(out)
}

/// Reads a `layer i j [value]` edge list.
///
/// Layers are 1-based, nodes 0-based. Blank lines and lines starting with `#`
/// are skipped. Repeated edges are kept once (first value wins); undirected
/// edges are stored in both orientations.
pub fn load_edge_list<R: BufRead>(reader: R, n: usize, num_layers: usize, directed: bool) -> Result<MultiLayerNetwork> {
    if num_layers == 0 {
        return Err(invalid("layer count must be at least 1"));
    }
    let mut per_layer: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); num_layers];
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `layer i j [value]`, got {} fields", fields.len()),
            });
        }
        let parse_idx = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse { line: lineno, message: format!("bad {what} `{s}`") })
        };
        let layer = parse_idx(fields[0], "layer")?;
        let i = parse_idx(fields[1], "node")?;
        let j = parse_idx(fields[2], "node")?;
        let value = match fields.get(3) {
            Some(s) => {
                s.parse::<f64>().map_err(|_| Error::Parse { line: lineno, message: format!("bad value `{s}`") })?
            }
            None => 1.0,
        };
        if layer == 0 || layer > num_layers {
            return Err(invalid(format!("line {lineno}: layer {layer} outside 1..={num_layers}")));
        }
        if i >= n || j >= n {
            return Err(invalid(format!("line {lineno}: node index outside 0..{n}")));
        }
        if i == j {
            return Err(invalid(format!("line {lineno}: self-loop at node {i}")));
        }
        if !(value.is_finite() && value > 0.0) {
            return Err(invalid(format!("line {lineno}: edge value must be positive")));
        }
        let (a, b) = if directed { (i, j) } else { (i.min(j), i.max(j)) };
        per_layer[layer - 1].push((a, b, value));
    }

    let layers = per_layer
        .into_iter()
        .map(|mut t| {
            // stable sort so dedup keeps the first occurrence
            t.sort_by_key(|&(i, j, _)| (i, j));
            t.dedup_by_key(|e| (e.0, e.1));
            if !directed {
                let mirrored: Vec<_> = t.iter().map(|&(i, j, v)| (j, i, v)).collect();
                t.extend(mirrored);
                t.sort_unstable_by_key(|&(i, j, _)| (i, j));
            }
            SparseLayer::from_sorted(n, &t)
        })
        .collect();
    Ok(MultiLayerNetwork::from_parts(n, layers, directed))
}

/// Writes the network as `layer<TAB>i<TAB>j` lines, with a trailing value
/// column when `with_values` is set. Undirected edges are written once with
/// `i < j`.
pub fn write_edge_list<W: Write>(net: &MultiLayerNetwork, mut w: W, with_values: bool) -> Result<()> {
    for (l, layer) in net.layers().iter().enumerate() {
        for (i, j, v) in layer.entries() {
            if !net.is_directed() && i > j {
                continue;
            }
            if with_values {
                writeln!(w, "{}\t{i}\t{j}\t{v}", l + 1)?;
            } else {
                writeln!(w, "{}\t{i}\t{j}", l + 1)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
