//! Simple graphs and complete weighted graphs.

use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

const WORD: usize = 64;

/// A simple undirected graph on `0..n` stored as a dense bit matrix.
///
/// Values are immutable once built; editing operations return new graphs.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD).max(1);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set(u, v, true);
            }
        }
        g
    }

    /// Builds a graph from unordered pairs. Duplicate pairs collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u},{v}) has an endpoint outside 0..{n}"));
            }
            if u == v {
                return invalid(format!("loop ({u},{v}) is not allowed"));
            }
            g.set(u, v, true);
        }
        Ok(g)
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut g = Self::empty(a + b);
        for u in 0..a {
            for v in a..a + b {
                g.set(u, v, true);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        if n >= 3 {
            for u in 0..n {
                g.set(u, (u + 1) % n, true);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for u in 1..n {
            g.set(u - 1, u, true);
        }
        g
    }

    /// Erdős–Rényi `G(n, p)`. Pairs are visited in lexicographic order.
    pub fn random(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("edge probability {p} is outside [0,1]"));
        }
        let mut rng = rng::from_seed(seed);
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    g.set(u, v, true);
                }
            }
        }
        Ok(g)
    }

    /// Samples an `n`-vertex graph from a weighted graph on `k <= n` vertices.
    ///
    /// Vertex `v` belongs to group `v * k / n`, so the groups are contiguous
    /// and near-equal; the pair `uv` is an edge with probability
    /// `weight(group(u), group(v))`.
    pub fn sample_from_weighted(r: &WeightedGraph, n: usize, seed: u64) -> Result<Self> {
        let k = r.k();
        if n < k {
            return invalid(format!("cannot sample {n} vertices from {k} groups"));
        }
        let group = |v: usize| v * k / n;
        let mut rng = rng::from_seed(seed);
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < r.get(group(u), group(v)) {
                    g.set(u, v, true);
                }
            }
        }
        Ok(g)
    }

    /// `K_{m,m}` plus `extra` edges inside the parts, chosen uniformly
    /// without replacement. Deleting them leaves a bipartite graph, so the
    /// distance to triangle-freeness is at most `extra / (2m)^2`.
    pub fn planted_bipartite(m: usize, extra: usize, seed: u64) -> Result<Self> {
        let per_part = m * m.saturating_sub(1) / 2;
        if extra > 2 * per_part {
            return invalid(format!("only {} pairs lie inside the parts", 2 * per_part));
        }
        let mut g = Self::complete_bipartite(m, m);
        let mut rng = rng::from_seed(seed);
        let mut picks = rand::seq::index::sample(&mut rng, 2 * per_part, extra).into_vec();
        picks.sort_unstable();
        for idx in picks {
            let (part, mut r) = (idx / per_part, idx % per_part);
            // Unrank r as the pair (u, v), u < v, in lexicographic order.
            let mut u = 0;
            while r >= m - 1 - u {
                r -= m - 1 - u;
                u += 1;
            }
            let v = u + 1 + r;
            g.set(part * m + u, part * m + v, true);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    /// Neighbourhood of `u` as a bitset of `words()` words.
    #[inline]
    pub fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words..(u + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            (u + 1..self.n)
                .filter(move |&v| self.has_edge(u, v))
                .map(move |v| (u, v))
        })
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.has_edge(u, v))
    }

    pub fn complement(&self) -> Self {
        let mut g = Self::empty(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    g.set(u, v, true);
                }
            }
        }
        g
    }

    /// The subgraph induced by `verts`, relabelled so that `verts[a]` becomes `a`.
    pub fn induced_subgraph(&self, verts: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        for &v in verts {
            if v >= self.n {
                return invalid(format!("vertex {v} is outside 0..{}", self.n));
            }
            if std::mem::replace(&mut seen[v], true) {
                return invalid(format!("vertex {v} is listed twice"));
            }
        }
        let mut g = Self::empty(verts.len());
        for (a, &u) in verts.iter().enumerate() {
            for (b, &v) in verts.iter().enumerate().skip(a + 1) {
                if self.has_edge(u, v) {
                    g.set(a, b, true);
                }
            }
        }
        Ok(g)
    }

    /// Induced subgraph on a uniformly random `q`-subset, in sampled order.
    pub fn random_induced_subgraph(&self, q: usize, seed: u64) -> Result<Self> {
        if q > self.n {
            return invalid(format!("cannot sample {q} of {} vertices", self.n));
        }
        let mut rng = rng::from_seed(seed);
        let verts = rand::seq::index::sample(&mut rng, self.n, q).into_vec();
        self.induced_subgraph(&verts)
    }

    /// A copy with every listed pair flipped.
    pub fn with_flipped(&self, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut g = self.clone();
        for &(u, v) in pairs {
            if u >= self.n || v >= self.n || u == v {
                return invalid(format!("cannot flip pair ({u},{v})"));
            }
            g.flip(u, v);
        }
        Ok(g)
    }

    /// The 0/1 weighted graph with zero diagonal.
    pub fn to_weighted(&self) -> WeightedGraph {
        let n = self.n;
        let mut w = vec![0.0; n * n];
        for (u, v) in self.edges() {
            w[u * n + v] = 1.0;
            w[v * n + u] = 1.0;
        }
        WeightedGraph { k: n, w }
    }

    #[inline]
    pub(crate) fn set(&mut self, u: usize, v: usize, on: bool) {
        let (wu, bu) = (u * self.words + v / WORD, 1u64 << (v % WORD));
        let (wv, bv) = (v * self.words + u / WORD, 1u64 << (u % WORD));
        if on {
            self.bits[wu] |= bu;
            self.bits[wv] |= bv;
        } else {
            self.bits[wu] &= !bu;
            self.bits[wv] &= !bv;
        }
    }

    #[inline]
    pub(crate) fn flip(&mut self, u: usize, v: usize) {
        let on = !self.has_edge(u, v);
        self.set(u, v, on);
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// On-disk form: `{"n": n, "edges": [[u, v], ...]}`.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(j.n, &edges)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        Self {
            n: g.n,
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

/// A complete weighted graph with loops: a symmetric `k x k` matrix with
/// entries in `[0, 1]`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightedGraphJson", into = "WeightedGraphJson")]
pub struct WeightedGraph {
    k: usize,
    w: Vec<f64>,
}

/// Entries farther than this from their transpose are rejected.
const SYMMETRY_TOL: f64 = 1e-12;

impl WeightedGraph {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            w: vec![0.0; k * k],
        }
    }

    pub fn constant(k: usize, p: f64) -> Result<Self> {
        Self::from_row_major(k, vec![p; k * k])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if let Some(i) = rows.iter().position(|r| r.len() != k) {
            return invalid(format!("row {i} has {} entries, expected {k}", rows[i].len()));
        }
        Self::from_row_major(k, rows.concat())
    }

    /// Validates symmetry and range; near-symmetric pairs are averaged.
    pub fn from_row_major(k: usize, mut w: Vec<f64>) -> Result<Self> {
        if w.len() != k * k {
            return invalid(format!("expected {} weights, got {}", k * k, w.len()));
        }
        for i in 0..k {
            for j in i..k {
                let (a, b) = (w[i * k + j], w[j * k + i]);
                if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                    return invalid(format!("weight at ({i},{j}) is outside [0,1]"));
                }
                if (a - b).abs() > SYMMETRY_TOL {
                    return invalid(format!("weights at ({i},{j}) and ({j},{i}) differ"));
                }
                let m = if a == b { a } else { 0.5 * (a + b) };
                w[i * k + j] = m;
                w[j * k + i] = m;
            }
        }
        Ok(Self { k, w })
    }

    pub(crate) fn from_raw(k: usize, w: Vec<f64>) -> Self {
        debug_assert_eq!(w.len(), k * k);
        Self { k, w }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.k + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.w.chunks(self.k.max(1)).map(<[f64]>::to_vec).take(self.k).collect()
    }

    /// `out(i, j) = self(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k;
        let mut w = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                w[i * k + j] = self.get(perm[i], perm[j]);
            }
        }
        Self { k, w }
    }
}

impl fmt::Debug for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedGraph")
            .field("k", &self.k)
            .field("w", &self.rows())
            .finish()
    }
}

/// On-disk form: `{"k": k, "w": [[...], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct WeightedGraphJson {
    k: usize,
    w: Vec<Vec<f64>>,
}

impl TryFrom<WeightedGraphJson> for WeightedGraph {
    type Error = Error;

    fn try_from(j: WeightedGraphJson) -> Result<Self> {
        if j.w.len() != j.k {
            return invalid(format!("\"k\" is {} but \"w\" has {} rows", j.k, j.w.len()));
        }
        Self::from_rows(&j.w)
    }
}

impl From<WeightedGraph> for WeightedGraphJson {
    fn from(g: WeightedGraph) -> Self {
        Self {
            k: g.k,
            w: g.rows(),
        }
    }
}
