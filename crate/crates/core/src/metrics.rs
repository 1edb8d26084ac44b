//! Distances between graphs, between weighted graphs, and to `Forb(F)`.
//!
//! Two conventions coexist and are never converted silently:
//! [`edit_distance`] counts unordered pairs (`|E xor E'| / n^2`), while
//! [`d1`] and the cut distance average over ordered pairs including the
//! diagonal. For two plain graphs viewed as weighted graphs,
//! `d1 = 2 * edit_distance`.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimator::PropertySpec;
use crate::graph::{Graph, WeightedGraph};
use crate::hom::find_induced_copy;
use crate::rng;

/// `|E(a) xor E(b)| / n^2` over unordered pairs.
pub fn edit_distance(a: &Graph, b: &Graph) -> Result<f64> {
    let n = a.n();
    if b.n() != n {
        return invalid(format!("graphs have {} and {} vertices", n, b.n()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let diff: u64 = (0..n)
        .map(|u| {
            a.row(u)
                .iter()
                .zip(b.row(u))
                .map(|(x, y)| (x ^ y).count_ones() as u64)
                .sum::<u64>()
        })
        .sum::<u64>()
        / 2;
    Ok(diff as f64 / (n * n) as f64)
}

/// `(1/k^2) sum_{(i,j)} |a(i,j) - b(i,j)|`.
pub fn d1(a: &WeightedGraph, b: &WeightedGraph) -> Result<f64> {
    let k = a.k();
    if b.k() != k {
        return invalid(format!("weighted graphs have {} and {} vertices", k, b.k()));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let s: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / (k * k) as f64)
}

/// Largest `k` for which [`d1_up_to_relabeling`] searches permutations.
pub const RELABEL_CAP: usize = 10;

/// `min_perm d1(a, b o perm)` with the minimizing `perm`, where
/// `(b o perm)(i, j) = b(perm[i], perm[j])`.
///
/// Branch and bound over permutations; ties go to the lexicographically
/// smallest permutation.
pub fn d1_up_to_relabeling(a: &WeightedGraph, b: &WeightedGraph) -> Result<(f64, Vec<usize>)> {
    let k = a.k();
    if b.k() != k {
        return invalid(format!("weighted graphs have {} and {} vertices", k, b.k()));
    }
    if k > RELABEL_CAP {
        return Err(Error::CapExceeded {
            what: "vertices for relabeling search",
            value: k as u128,
            cap: RELABEL_CAP as u128,
        });
    }
    if k == 0 {
        return Ok((0.0, Vec::new()));
    }
    let identity: Vec<usize> = (0..k).collect();
    let mut best = (d1(a, b)? * (k * k) as f64, identity);
    let mut perm = Vec::with_capacity(k);
    let mut used = vec![false; k];
    relabel_search(a, b, &mut perm, &mut used, 0.0, &mut best);
    Ok((best.0 / (k * k) as f64, best.1))
}

fn relabel_search(
    a: &WeightedGraph,
    b: &WeightedGraph,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    partial: f64,
    best: &mut (f64, Vec<usize>),
) {
    let k = a.k();
    let i = perm.len();
    if i == k {
        if partial < best.0 {
            *best = (partial, perm.clone());
        }
        return;
    }
    for x in 0..k {
        if used[x] {
            continue;
        }
        let mut cost = partial + (a.get(i, i) - b.get(x, x)).abs();
        for (j, &y) in perm.iter().enumerate() {
            cost += 2.0 * (a.get(i, j) - b.get(x, y)).abs();
        }
        if cost >= best.0 {
            continue;
        }
        used[x] = true;
        perm.push(x);
        relabel_search(a, b, perm, used, cost, best);
        perm.pop();
        used[x] = false;
    }
}

/// Maximizers of the cut form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutWitness {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `(1/k^2) sum_{x,y} alpha(x) (a(x,y) - b(x,y)) beta(y)`, signed.
    pub value: f64,
}

impl CutWitness {
    /// Re-evaluates the normalized form on a difference matrix.
    pub fn evaluate(&self, diff: &[f64]) -> f64 {
        let k = self.alpha.len();
        let mut s = 0.0;
        for x in 0..k {
            if self.alpha[x] == 0.0 {
                continue;
            }
            for y in 0..k {
                s += self.alpha[x] * diff[x * k + y] * self.beta[y];
            }
        }
        s / (k * k).max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutDistance {
    /// `|witness.value|`.
    pub value: f64,
    pub witness: CutWitness,
}

/// Largest `k` for exact cut distance (`2^k` patterns).
pub const CUT_EXACT_CAP: usize = 22;

fn difference(a: &WeightedGraph, b: &WeightedGraph) -> Result<Vec<f64>> {
    if a.k() != b.k() {
        return invalid(format!("weighted graphs have {} and {} vertices", a.k(), b.k()));
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect())
}

/// Exact cut distance.
///
/// The form is bilinear, so its maximum over `[0,1]^V x [0,1]^V` is
/// attained at 0/1 vectors: every `alpha in {0,1}^k` is enumerated (Gray
/// code order) and the best `beta` for it is the positive or the negative
/// part of `alpha^T D`.
pub fn cut_distance_exact(a: &WeightedGraph, b: &WeightedGraph) -> Result<CutDistance> {
    let diff = difference(a, b)?;
    cut_norm_exact(&diff, a.k())
}

pub(crate) fn cut_norm_exact(diff: &[f64], k: usize) -> Result<CutDistance> {
    if k > CUT_EXACT_CAP {
        return Err(Error::CapExceeded {
            what: "vertices for exact cut norm",
            value: k as u128,
            cap: CUT_EXACT_CAP as u128,
        });
    }
    let mut col = vec![0.0; k];
    let mut alpha: u64 = 0;
    let (mut best, mut best_alpha, mut best_positive) = (0.0f64, 0u64, true);
    for step in 1..(1u64 << k) {
        let bit = step.trailing_zeros() as usize;
        alpha ^= 1 << bit;
        let row = &diff[bit * k..(bit + 1) * k];
        if alpha >> bit & 1 == 1 {
            col.iter_mut().zip(row).for_each(|(c, r)| *c += r);
        } else {
            col.iter_mut().zip(row).for_each(|(c, r)| *c -= r);
        }
        let (mut pos, mut neg) = (0.0, 0.0);
        for &c in &col {
            if c > 0.0 {
                pos += c;
            } else {
                neg -= c;
            }
        }
        if pos > best {
            (best, best_alpha, best_positive) = (pos, alpha, true);
        }
        if neg > best {
            (best, best_alpha, best_positive) = (neg, alpha, false);
        }
    }
    Ok(witness_from_alpha(diff, k, best_alpha, best_positive))
}

/// Rebuilds `beta` and the value from scratch for a chosen `alpha`.
fn witness_from_alpha(diff: &[f64], k: usize, alpha: u64, positive: bool) -> CutDistance {
    let alpha_v: Vec<f64> = (0..k).map(|x| (alpha >> x & 1) as f64).collect();
    let mut col = vec![0.0; k];
    for x in (0..k).filter(|&x| alpha >> x & 1 == 1) {
        for y in 0..k {
            col[y] += diff[x * k + y];
        }
    }
    let beta: Vec<f64> = col
        .iter()
        .map(|&c| if (positive && c > 0.0) || (!positive && c < 0.0) { 1.0 } else { 0.0 })
        .collect();
    let mut w = CutWitness {
        alpha: alpha_v,
        beta,
        value: 0.0,
    };
    w.value = w.evaluate(diff);
    CutDistance {
        value: w.value.abs(),
        witness: w,
    }
}

/// Lower bound on the cut distance by alternating maximization.
///
/// Each restart draws a random 0/1 `alpha`, then for both signs alternates
/// "best `beta` for `alpha`" and "best `alpha` for `beta`" until the value
/// stops improving. The running maximum over restarts is returned, so more
/// restarts never give a smaller value for the same seed.
pub fn cut_distance_heuristic(a: &WeightedGraph, b: &WeightedGraph, restarts: usize, seed: u64) -> Result<CutDistance> {
    let diff = difference(a, b)?;
    Ok(cut_norm_heuristic(&diff, a.k(), restarts, seed))
}

pub(crate) fn cut_norm_heuristic(diff: &[f64], k: usize, restarts: usize, seed: u64) -> CutDistance {
    let mut rng = rng::from_seed(seed);
    let mut best = CutDistance {
        value: 0.0,
        witness: CutWitness {
            alpha: vec![0.0; k],
            beta: vec![0.0; k],
            value: 0.0,
        },
    };
    let mut alpha0 = vec![false; k];
    for _ in 0..restarts {
        alpha0.iter_mut().for_each(|a| *a = rng.random::<bool>());
        for sign in [1.0, -1.0] {
            let (value, alpha, beta) = alternate(diff, k, &alpha0, sign);
            if value > best.value + 1e-15 {
                let to_f = |v: &[bool]| v.iter().map(|&b| b as u8 as f64).collect::<Vec<_>>();
                let mut w = CutWitness {
                    alpha: to_f(&alpha),
                    beta: to_f(&beta),
                    value: 0.0,
                };
                w.value = w.evaluate(diff);
                best = CutDistance {
                    value: w.value.abs(),
                    witness: w,
                };
            }
        }
    }
    best
}

/// Returns `(sign * form, alpha, beta)` at the fixed point, unnormalized
/// form divided by `k^2`.
fn alternate(diff: &[f64], k: usize, start: &[bool], sign: f64) -> (f64, Vec<bool>, Vec<bool>) {
    let mut alpha = start.to_vec();
    let mut beta = vec![false; k];
    let mut value = f64::NEG_INFINITY;
    loop {
        // beta from alpha
        let mut col = vec![0.0; k];
        for x in (0..k).filter(|&x| alpha[x]) {
            for y in 0..k {
                col[y] += diff[x * k + y];
            }
        }
        for y in 0..k {
            beta[y] = sign * col[y] > 0.0;
        }
        // alpha from beta
        let mut row = vec![0.0; k];
        for (x, r) in row.iter_mut().enumerate() {
            for y in (0..k).filter(|&y| beta[y]) {
                *r += diff[x * k + y];
            }
        }
        let mut v = 0.0;
        for x in 0..k {
            alpha[x] = sign * row[x] > 0.0;
            if alpha[x] {
                v += sign * row[x];
            }
        }
        let v = v / (k * k).max(1) as f64;
        if v <= value + 1e-15 {
            return (value.max(0.0), alpha, beta);
        }
        value = v;
    }
}

/// Largest graph the exact distance oracle accepts by default.
pub const ORACLE_CAP: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyDistance {
    /// `edits / n^2`.
    pub value: f64,
    pub edits: usize,
    /// An optimal graph in `Forb(F)` on the same vertex set.
    #[serde(skip)]
    pub witness: Graph,
    /// Flipped pairs `(u, v)`, `u < v`, in the order they were chosen.
    pub flipped: Vec<(usize, usize)>,
}

/// Exact `dist(G, Forb(F))` with an optimal witness, for `n <= ORACLE_CAP`.
pub fn distance_to_property_exact(g: &Graph, spec: &PropertySpec) -> Result<PropertyDistance> {
    distance_to_property_capped(g, spec, ORACLE_CAP)
}

/// Iterative deepening on the number of flipped pairs.
///
/// At each node an induced copy of some pattern is located; any solution
/// must flip one of its pairs, so the search branches on those pairs
/// (existing edges first). Pairs tried in earlier sibling branches stay
/// fixed in later ones, and a pair is never flipped twice. Every edit set
/// of each size is covered, so the first budget that succeeds is optimal.
pub fn distance_to_property_capped(g: &Graph, spec: &PropertySpec, cap: usize) -> Result<PropertyDistance> {
    let n = g.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "vertices for exact property distance",
            value: n as u128,
            cap: cap as u128,
        });
    }
    let family = spec.family();
    if n >= 1 && family.iter().any(|f| f.n() == 1) {
        return Err(Error::PropertyEmpty { n });
    }
    let mut work = g.clone();
    let mut locked = vec![false; n * n];
    let mut flipped = Vec::new();
    for budget in 0..=n * n.saturating_sub(1) / 2 {
        if flip_search(&mut work, family, budget, &mut locked, &mut flipped) {
            let value = if n == 0 { 0.0 } else { flipped.len() as f64 / (n * n) as f64 };
            return Ok(PropertyDistance {
                value,
                edits: flipped.len(),
                witness: work,
                flipped,
            });
        }
    }
    Err(Error::PropertyEmpty { n })
}

fn flip_search(
    g: &mut Graph,
    family: &[Graph],
    budget: usize,
    locked: &mut [bool],
    flipped: &mut Vec<(usize, usize)>,
) -> bool {
    let Some(copy) = find_induced_copy(g, family) else {
        return true;
    };
    if budget == 0 {
        return false;
    }
    let n = g.n();
    let img = &copy.image;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..img.len() {
        for b in a + 1..img.len() {
            let (u, v) = (img[a].min(img[b]), img[a].max(img[b]));
            pairs.push((u, v));
        }
    }
    pairs.sort_by_key(|&(u, v)| !g.has_edge(u, v));
    let mut fixed_here = Vec::new();
    let mut found = false;
    for (u, v) in pairs {
        if locked[u * n + v] {
            continue;
        }
        locked[u * n + v] = true;
        g.flip(u, v);
        flipped.push((u, v));
        if flip_search(g, family, budget - 1, locked, flipped) {
            found = true;
            break;
        }
        flipped.pop();
        g.flip(u, v);
        fixed_here.push((u, v));
    }
    if found {
        return true;
    }
    for (u, v) in fixed_here {
        locked[u * n + v] = false;
    }
    false
}
