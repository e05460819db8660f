//! Exact k-th nearest-neighbour distances under the Euclidean metric.
//!
//! Two routes compute the same quantity: an `O(N²m)` brute-force scan and a
//! kd-tree search. Both accumulate squared distances with the same
//! coordinate order, so their outputs are bitwise identical.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// An `N × m` collection of observations stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl Sample {
    /// Builds a sample from row-major coordinates.
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSample("dimension must be at least 1".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidSample(format!(
                "{} coordinates cannot form rows of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "non-finite coordinate in row {}",
                pos / dim
            )));
        }
        let n = data.len() / dim;
        Ok(Self { data, n, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidSample(format!(
                    "row {i} has {} columns, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    /// One-dimensional sample from a list of values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Returns `a · X`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * a).collect(),
            n: self.n,
            dim: self.dim,
        }
    }

    /// Euclidean norm of each row.
    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// Distances from every sample point to its k-th nearest neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborDistances {
    pub k: usize,
    pub distances: Vec<f64>,
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// Finds a pair of identical rows, if any, reported as `(smaller, larger)` index.
pub fn find_duplicate(sample: &Sample) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..sample.n()).collect();
    order.sort_by(|&i, &j| lexicographic(sample.row(i), sample.row(j)).then(i.cmp(&j)));
    order.windows(2).find_map(|w| {
        (lexicographic(sample.row(w[0]), sample.row(w[1])) == Ordering::Equal)
            .then(|| (w[0].min(w[1]), w[0].max(w[1])))
    })
}

fn validate(sample: &Sample, k: usize) -> Result<()> {
    if k == 0 || k >= sample.n() {
        return Err(Error::Arity { k, n: sample.n() });
    }
    if let Some((first, second)) = find_duplicate(sample) {
        return Err(Error::DuplicatePoints { first, second });
    }
    Ok(())
}

/// Reference implementation: scans all pairs.
pub fn knn_distances_brute(sample: &Sample, k: usize) -> Result<NeighborDistances> {
    validate(sample, k)?;
    let n = sample.n();
    let distances = (0..n)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n - 1),
            |buf, i| {
                buf.clear();
                let xi = sample.row(i);
                buf.extend(
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| squared_distance(xi, sample.row(j))),
                );
                let (_, kth, _) = buf.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
                kth.sqrt()
            },
        )
        .collect();
    Ok(NeighborDistances { k, distances })
}

/// Exact search through a kd-tree.
pub fn knn_distances_indexed(sample: &Sample, k: usize) -> Result<NeighborDistances> {
    validate(sample, k)?;
    let tree = KdTree::build(sample);
    let distances = (0..sample.n())
        .into_par_iter()
        .map_init(
            || Candidates::new(k),
            |cands, i| {
                cands.reset();
                tree.search(sample.row(i), Some(i), cands);
                cands.kth_squared().sqrt()
            },
        )
        .collect();
    Ok(NeighborDistances { k, distances })
}

/// Selects the neighbour search route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Brute,
    #[default]
    Indexed,
}

pub fn knn_distances(sample: &Sample, k: usize, backend: Backend) -> Result<NeighborDistances> {
    match backend {
        Backend::Brute => knn_distances_brute(sample, k),
        Backend::Indexed => knn_distances_indexed(sample, k),
    }
}

const LEAF_SIZE: usize = 10;

#[derive(Debug)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable kd-tree over the rows of a [`Sample`], split at the median of
/// the axis with the widest spread.
#[derive(Debug)]
pub struct KdTree<'a> {
    sample: &'a Sample,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn build(sample: &'a Sample) -> Self {
        let mut tree = Self {
            sample,
            order: (0..sample.n()).collect(),
            nodes: Vec::new(),
        };
        tree.build_range(0, sample.n());
        tree
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let sample = self.sample;
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            sample.row(a)[axis]
                .total_cmp(&sample.row(b)[axis])
                .then(a.cmp(&b))
        });
        let value = sample.row(self.order[mid])[axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_range(start, mid);
        let right = self.build_range(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let dim = self.sample.dim();
        let mut best = (0, f64::NEG_INFINITY);
        for axis in 0..dim {
            let (lo, hi) = self.order[start..end]
                .iter()
                .map(|&i| self.sample.row(i)[axis])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            if hi - lo > best.1 {
                best = (axis, hi - lo);
            }
        }
        best.0
    }

    /// The `k` nearest rows to `query` as `(index, distance)`, nearest first,
    /// optionally excluding one row index.
    pub fn nearest(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
        let mut cands = Candidates::new(k);
        self.search(query, exclude, &mut cands);
        cands
            .items
            .iter()
            .map(|&(d2, i)| (i, d2.sqrt()))
            .collect()
    }

    fn search(&self, query: &[f64], exclude: Option<usize>, cands: &mut Candidates) {
        if !self.nodes.is_empty() {
            self.search_node(0, query, exclude, cands);
        }
    }

    fn search_node(&self, id: usize, query: &[f64], exclude: Option<usize>, cands: &mut Candidates) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) != exclude {
                        cands.offer(squared_distance(query, self.sample.row(i)), i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search_node(near, query, exclude, cands);
                // The plane distance is a floating-point lower bound on every
                // squared distance on the far side, so pruning stays exact.
                if !cands.is_full() || diff * diff <= cands.kth_squared() {
                    self.search_node(far, query, exclude, cands);
                }
            }
        }
    }
}

/// Bounded candidate list ordered by `(squared distance, index)`.
struct Candidates {
    k: usize,
    items: Vec<(f64, usize)>,
}

impl Candidates {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn reset(&mut self) {
        self.items.clear();
    }

    fn is_full(&self) -> bool {
        self.items.len() == self.k
    }

    fn kth_squared(&self) -> f64 {
        self.items.last().map_or(f64::INFINITY, |c| c.0)
    }

    #[inline]
    fn offer(&mut self, d2: f64, index: usize) {
        let key = (d2, index);
        if self.is_full() {
            let last = self.items[self.k - 1];
            if (key.0, key.1) >= (last.0, last.1) {
                return;
            }
            self.items.pop();
        }
        let pos = self
            .items
            .partition_point(|&(d, i)| (d, i) < (key.0, key.1));
        self.items.insert(pos, key);
    }
}
