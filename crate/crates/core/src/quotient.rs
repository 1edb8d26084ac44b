//! Reduced graphs, blown-up reduced graphs and almost reducibility.
//!
//! For an equipartition `V = {V_i}` of `G`, `G(V_i, V_j)` counts ordered
//! adjacent pairs `(u, v)` with `u in V_i`, `v in V_j`; an edge inside a
//! class is counted twice. The reduced graph has weight
//! `G(V_i, V_j) / (|V_i| |V_j|)`, diagonal included.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, WeightedGraph};
use crate::hom::RationalWeightedGraph;
use crate::metrics::{d1, d1_up_to_relabeling};
use crate::partition::{enumerate_equipartitions_capped, equipartition_count, random_equipartition, Equipartition, ENUMERATION_CAP};
use crate::rng;

/// Ordered adjacent-pair counts between classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCount {
    k: usize,
    counts: Vec<u64>,
}

impl PairCount {
    pub fn new(g: &Graph, p: &Equipartition) -> Result<Self> {
        check_sizes(g, p)?;
        let k = p.k();
        let mut counts = vec![0u64; k * k];
        for (u, v) in g.edges() {
            let (a, b) = (p.class_of(u), p.class_of(v));
            counts[a * k + b] += 1;
            counts[b * k + a] += 1;
        }
        Ok(Self { k, counts })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }
}

fn check_sizes(g: &Graph, p: &Equipartition) -> Result<()> {
    if g.n() != p.n() {
        return invalid(format!("partition is on {} vertices, graph has {}", p.n(), g.n()));
    }
    Ok(())
}

/// The reduced graph `G/V` on `k` vertices.
pub fn reduce(g: &Graph, p: &Equipartition) -> Result<WeightedGraph> {
    let counts = PairCount::new(g, p)?;
    let (k, s) = (p.k(), p.sizes());
    let mut w = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            w[i * k + j] = counts.get(i, j) as f64 / (s[i] * s[j]) as f64;
        }
    }
    Ok(WeightedGraph::from_raw(k, w))
}

/// The reduced graph with exact rational weights.
pub fn reduce_exact(g: &Graph, p: &Equipartition) -> Result<RationalWeightedGraph> {
    let counts = PairCount::new(g, p)?;
    let (k, s) = (p.k(), p.sizes());
    let mut w = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            w.push(BigRational::new(
                BigInt::from(counts.get(i, j)),
                BigInt::from(s[i] * s[j]),
            ));
        }
    }
    RationalWeightedGraph::new(k, w)
}

/// The blown-up reduced graph `G_V` on the `n` original vertices: the pair
/// `(u, v)` with `u in V_i`, `v in V_j` gets weight `G/V(i, j)`; this
/// includes the diagonal `(u, u)`.
pub fn blow_up_reduced(g: &Graph, p: &Equipartition) -> Result<WeightedGraph> {
    let r = reduce(g, p)?;
    Ok(blow_up(&r, p))
}

pub(crate) fn blow_up(r: &WeightedGraph, p: &Equipartition) -> WeightedGraph {
    let n = p.n();
    let mut w = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            w[u * n + v] = r.get(p.class_of(u), p.class_of(v));
        }
    }
    WeightedGraph::from_raw(n, w)
}

/// The mean-square weight of `G_V`, i.e. `sum_ij |V_i||V_j| R(i,j)^2 / n^2`.
pub fn energy(r: &WeightedGraph, p: &Equipartition) -> f64 {
    let (k, s) = (p.k(), p.sizes());
    let n = p.n() as f64;
    let mut e = 0.0;
    for i in 0..k {
        for j in 0..k {
            e += (s[i] * s[j]) as f64 * r.get(i, j).powi(2);
        }
    }
    e / (n * n)
}

/// How to search for an equipartition witnessing membership in `R(R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SearchMode {
    /// Every equipartition, and every way of matching its classes to `R`.
    Exact,
    /// Seeded steepest descent from `restarts` random starts. One-sided.
    Heuristic { restarts: usize, seed: u64 },
}

/// Work bound for exact searches: equipartitions times class relabelings.
pub const EXACT_SEARCH_CAP: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reducibility {
    pub member: bool,
    /// A labeled equipartition with `d1(G/V, R) <= 2/k`, classes matched to
    /// the vertices of `R` by index.
    pub witness: Option<Equipartition>,
    /// Smallest `d1(G/V, R)` the search saw; the minimum in exact mode.
    pub best_distance: f64,
    pub exhaustive: bool,
}

/// Decides `G in R(R)`: is there an equipartition of `G` into `|V(R)|`
/// classes whose reduced graph is within `2/|V(R)|` of `R` in `d1`?
///
/// In exact mode, reduced graphs are compared up to relabeling of classes,
/// which is the same as ranging over labeled equipartitions.
pub fn is_almost_reducible(g: &Graph, r: &WeightedGraph, mode: SearchMode) -> Result<Reducibility> {
    let k = r.k();
    let n = g.n();
    if k == 0 || k > n {
        return invalid(format!("cannot split {n} vertices into {k} classes"));
    }
    let threshold = 2.0 / k as f64;
    match mode {
        SearchMode::Exact => {
            check_exact_work(n, k)?;
            let mut best: Option<(f64, Equipartition)> = None;
            for p in enumerate_equipartitions_capped(n, k, ENUMERATION_CAP)? {
                let q = reduce(g, &p)?;
                let (d, perm) = d1_up_to_relabeling(&q, r)?;
                if best.as_ref().is_none_or(|(b, _)| d < *b) {
                    best = Some((d, relabel(&p, &perm)));
                }
            }
            let (d, p) = best.expect("k <= n admits an equipartition");
            let member = d <= threshold;
            Ok(Reducibility {
                member,
                witness: member.then_some(p),
                best_distance: d,
                exhaustive: true,
            })
        }
        SearchMode::Heuristic { restarts, seed } => {
            let (d, p) = local_search(g, k, restarts, seed, |q| d1(q, r).expect("same k"))?;
            let member = d <= threshold;
            Ok(Reducibility {
                member,
                witness: member.then_some(p),
                best_distance: d,
                exhaustive: false,
            })
        }
    }
}

pub(crate) fn check_exact_work(n: usize, k: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "ground set for equipartition enumeration",
            value: n as u128,
            cap: ENUMERATION_CAP as u128,
        });
    }
    let relabelings: u128 = (1..=k as u128).product();
    let work = equipartition_count(n, k).saturating_mul(relabelings);
    if work > EXACT_SEARCH_CAP {
        return Err(Error::CapExceeded {
            what: "equipartitions times relabelings",
            value: work,
            cap: EXACT_SEARCH_CAP,
        });
    }
    Ok(())
}

/// `perm[i]` is the vertex of the target matched to class `i` of `p`; the
/// result renames class `i` to `perm[i]`.
pub(crate) fn relabel(p: &Equipartition, perm: &[usize]) -> Equipartition {
    let class_of = p.assignment().iter().map(|&c| perm[c]).collect();
    Equipartition::new(class_of, p.k()).expect("relabeling keeps sizes")
}

/// Steepest descent over labeled equipartitions into `k` classes.
///
/// Moves are swaps of two vertices in different classes, and moves of a
/// single vertex from a class of size `ceil(n/k)` to one of size
/// `floor(n/k)`; both keep the partition equitable. Returns the best value
/// over all restarts and its partition. Ties go to the earlier restart.
pub(crate) fn local_search<F>(
    g: &Graph,
    k: usize,
    restarts: usize,
    seed: u64,
    mut objective: F,
) -> Result<(f64, Equipartition)>
where
    F: FnMut(&WeightedGraph) -> f64,
{
    let n = g.n();
    let mut best: Option<(f64, Equipartition)> = None;
    for restart in 0..restarts.max(1) {
        let start = random_equipartition(n, k, rng::derive(seed, restart as u64))?;
        let mut state = QuotientState::new(g, &start);
        let mut current = objective(&state.weights());
        loop {
            let mut best_move: Option<(f64, Move)> = None;
            let consider = |value: f64, mv: Move, best_move: &mut Option<(f64, Move)>| {
                if value < current - 1e-12 && best_move.as_ref().is_none_or(|(b, _)| value < *b) {
                    *best_move = Some((value, mv));
                }
            };
            for u in 0..n {
                for v in u + 1..n {
                    let (a, b) = (state.class_of[u], state.class_of[v]);
                    if a == b {
                        continue;
                    }
                    state.move_vertex(g, u, b);
                    state.move_vertex(g, v, a);
                    let value = objective(&state.weights());
                    state.move_vertex(g, v, b);
                    state.move_vertex(g, u, a);
                    consider(value, Move::Swap(u, v), &mut best_move);
                }
            }
            if !n.is_multiple_of(k) {
                let big = n / k + 1;
                for u in 0..n {
                    let a = state.class_of[u];
                    if state.sizes[a] != big {
                        continue;
                    }
                    for b in 0..k {
                        if state.sizes[b] == big {
                            continue;
                        }
                        state.move_vertex(g, u, b);
                        let value = objective(&state.weights());
                        state.move_vertex(g, u, a);
                        consider(value, Move::Shift(u, b), &mut best_move);
                    }
                }
            }
            match best_move {
                Some((value, Move::Swap(u, v))) => {
                    let (a, b) = (state.class_of[u], state.class_of[v]);
                    state.move_vertex(g, u, b);
                    state.move_vertex(g, v, a);
                    current = value;
                }
                Some((value, Move::Shift(u, b))) => {
                    state.move_vertex(g, u, b);
                    current = value;
                }
                None => break,
            }
        }
        if best.as_ref().is_none_or(|(b, _)| current < *b) {
            let p = Equipartition::new(state.class_of.clone(), k)?;
            best = Some((current, p));
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Clone, Copy)]
enum Move {
    Swap(usize, usize),
    Shift(usize, usize),
}

/// Pair counts maintained under single-vertex moves.
struct QuotientState {
    k: usize,
    class_of: Vec<usize>,
    sizes: Vec<usize>,
    counts: Vec<i64>,
    /// `nb[v * k + c]`: neighbours of `v` in class `c`.
    nb: Vec<i64>,
}

impl QuotientState {
    fn new(g: &Graph, p: &Equipartition) -> Self {
        let (n, k) = (g.n(), p.k());
        let mut nb = vec![0i64; n * k];
        let mut counts = vec![0i64; k * k];
        for (u, v) in g.edges() {
            let (a, b) = (p.class_of(u), p.class_of(v));
            nb[u * k + b] += 1;
            nb[v * k + a] += 1;
            counts[a * k + b] += 1;
            counts[b * k + a] += 1;
        }
        Self {
            k,
            class_of: p.assignment().to_vec(),
            sizes: p.sizes().to_vec(),
            counts,
            nb,
        }
    }

    fn move_vertex(&mut self, g: &Graph, u: usize, to: usize) {
        let k = self.k;
        let from = self.class_of[u];
        if from == to {
            return;
        }
        for c in 0..k {
            let d = self.nb[u * k + c];
            self.counts[from * k + c] -= d;
            self.counts[c * k + from] -= d;
        }
        for w in g.neighbors(u) {
            self.nb[w * k + from] -= 1;
            self.nb[w * k + to] += 1;
        }
        for c in 0..k {
            let d = self.nb[u * k + c];
            self.counts[to * k + c] += d;
            self.counts[c * k + to] += d;
        }
        self.class_of[u] = to;
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
    }

    fn weights(&self) -> WeightedGraph {
        let k = self.k;
        let mut w = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                w[i * k + j] = self.counts[i * k + j] as f64 / (self.sizes[i] * self.sizes[j]) as f64;
            }
        }
        WeightedGraph::from_raw(k, w)
    }
}

/// Slack for flooring `(R - S) |V_i| |V_j|`, which is an integer minus a
/// product of floats.
const FLOOR_SLACK: f64 = 1e-9;

/// Edits `G` between classes so that its reduced graph approaches `S`.
///
/// With `R = G/V`, for each class pair `i < j` this removes exactly
/// `floor((R(i,j) - S(i,j)) |V_i||V_j|)` cross edges when `R(i,j) > S(i,j)`
/// and adds `floor((S(i,j) - R(i,j)) |V_i||V_j|)` cross non-edges when
/// `S(i,j) > R(i,j)`. Pairs inside a class are untouched. Candidate pairs
/// `(u, v)`, `u < v`, are taken in lexicographic order.
pub fn round_to_target(g: &Graph, p: &Equipartition, s: &WeightedGraph) -> Result<Graph> {
    let k = p.k();
    if s.k() != k {
        return invalid(format!("target has {} vertices, partition has {k} classes", s.k()));
    }
    let counts = PairCount::new(g, p)?;
    let sizes = p.sizes();
    // Signed number of edges to add (positive) or remove (negative) per class pair.
    let mut delta = vec![0i64; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let cells = (sizes[i] * sizes[j]) as f64;
            let have = counts.get(i, j) as f64;
            let want = s.get(i, j) * cells;
            let d = if have > want {
                -((have - want + FLOOR_SLACK).floor() as i64)
            } else {
                (want - have + FLOOR_SLACK).floor() as i64
            };
            delta[i * k + j] = d;
        }
    }
    let mut out = g.clone();
    let n = g.n();
    for u in 0..n {
        for v in u + 1..n {
            let (a, b) = (p.class_of(u), p.class_of(v));
            if a == b {
                continue;
            }
            let idx = a.min(b) * k + a.max(b);
            let d = &mut delta[idx];
            let edge = g.has_edge(u, v);
            if *d < 0 && edge {
                out.set(u, v, false);
                *d += 1;
            } else if *d > 0 && !edge {
                out.set(u, v, true);
                *d -= 1;
            }
        }
    }
    assert!(
        delta.iter().all(|&d| d == 0),
        "edit counts exceed available pairs; target was not reachable from G/V"
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bip() -> Equipartition {
        Equipartition::new(vec![0, 1, 0, 1], 2).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(&Graph::cycle(4), &bip()).unwrap();
        assert_eq!(r.rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let r = reduce(&Graph::empty(5), &random_equipartition(5, 2, 1).unwrap()).unwrap();
        assert!(r.as_slice().iter().all(|&w| w == 0.0));
        let r = reduce(&Graph::complete(4), &Equipartition::single(4).unwrap()).unwrap();
        assert_eq!(r.rows(), vec![vec![0.75]]);
    }

    #[test]
    fn pair_counts_double_intra_edges() {
        let g = Graph::random(11, 0.5, 4).unwrap();
        let p = random_equipartition(11, 3, 4).unwrap();
        let c = PairCount::new(&g, &p).unwrap();
        for i in 0..3 {
            assert_eq!(c.get(i, i) % 2, 0);
            for j in 0..3 {
                assert_eq!(c.get(i, j), c.get(j, i));
                assert!(c.get(i, j) as usize <= p.sizes()[i] * p.sizes()[j]);
            }
        }
    }

    #[test]
    fn blow_up_examples() {
        let b = blow_up_reduced(&Graph::cycle(4), &bip()).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                let want = if (u + v) % 2 == 1 { 1.0 } else { 0.0 };
                assert_eq!(b.get(u, v), want);
            }
        }
        let k22 = Graph::complete_bipartite(2, 2);
        let p = Equipartition::new(vec![0, 0, 1, 1], 2).unwrap();
        let b = blow_up_reduced(&k22, &p).unwrap();
        assert_eq!(b, k22.to_weighted());
    }

    #[test]
    fn almost_reducible_examples() {
        let r = WeightedGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let res = is_almost_reducible(&Graph::cycle(4), &r, SearchMode::Exact).unwrap();
        assert!(res.member);
        assert_eq!(res.best_distance, 0.0);
        assert_eq!(res.witness.unwrap().canonical().assignment(), &[0, 1, 0, 1]);

        let one = WeightedGraph::constant(1, 0.3).unwrap();
        for g in [Graph::complete(5), Graph::empty(3), Graph::random(7, 0.5, 1).unwrap()] {
            assert!(is_almost_reducible(&g, &one, SearchMode::Exact).unwrap().member);
        }

        // Every partition of K4 into pairs reduces to [[.5,1],[1,.5]].
        let res = is_almost_reducible(&Graph::complete(4), &r, SearchMode::Exact).unwrap();
        assert!(res.member);
        assert!((res.best_distance - 0.25).abs() < 1e-15);
    }

    #[test]
    fn heuristic_reducibility_finds_planted_structure() {
        let r = WeightedGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let g = Graph::complete_bipartite(10, 10);
        let res = is_almost_reducible(&g, &r, SearchMode::Heuristic { restarts: 4, seed: 3 }).unwrap();
        assert!(res.member);
        assert_eq!(res.best_distance, 0.0);
        let w = res.witness.unwrap();
        assert_eq!(reduce(&g, &w).unwrap(), r);
    }

    #[test]
    fn exact_mode_respects_caps() {
        let r = WeightedGraph::zeros(2);
        assert!(matches!(
            is_almost_reducible(&Graph::empty(17), &r, SearchMode::Exact),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn rounding_examples() {
        let g = Graph::random(9, 0.5, 2).unwrap();
        let p = random_equipartition(9, 3, 2).unwrap();
        let r = reduce(&g, &p).unwrap();
        assert_eq!(round_to_target(&g, &p, &r).unwrap(), g);

        let p = Equipartition::new(vec![0, 0, 1, 1], 2).unwrap();
        let s = WeightedGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let out = round_to_target(&Graph::empty(4), &p, &s).unwrap();
        assert_eq!(out, Graph::complete_bipartite(2, 2));
    }

    #[test]
    fn energy_of_single_class_is_squared_density() {
        let g = Graph::complete(4);
        let p = Equipartition::single(4).unwrap();
        let r = reduce(&g, &p).unwrap();
        assert!((energy(&r, &p) - 0.5625).abs() < 1e-15);
    }
}
