//! Induced homomorphism weights and densities.
//!
//! For a map `phi: V(F) -> V(R)` the weight is the product over all pairs
//! `ab` of `F` of `R(phi a, phi b)` (edges) or `1 - R(phi a, phi b)`
//! (non-edges). Maps need not be injective: collisions read the diagonal,
//! which is zero for a plain graph. The density is the average weight over
//! all `|V(R)|^|V(F)|` maps.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng as _;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, WeightedGraph};
use crate::rng;

/// Default bound on map evaluations for exact densities.
pub const DEFAULT_WORK_CAP: u128 = 100_000_000;

/// Weighted graph with exact rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalWeightedGraph {
    k: usize,
    w: Vec<BigRational>,
}

impl RationalWeightedGraph {
    pub fn new(k: usize, w: Vec<BigRational>) -> Result<Self> {
        if w.len() != k * k {
            return invalid(format!("expected {} weights, got {}", k * k, w.len()));
        }
        let (zero, one) = (BigRational::zero(), BigRational::one());
        for i in 0..k {
            for j in 0..k {
                let x = &w[i * k + j];
                if *x < zero || *x > one || *x != w[j * k + i] {
                    return invalid(format!("weight at ({i},{j}) is not a symmetric value in [0,1]"));
                }
            }
        }
        Ok(Self { k, w })
    }

    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n();
        let mut w = vec![BigRational::zero(); n * n];
        for (u, v) in g.edges() {
            w[u * n + v] = BigRational::one();
            w[v * n + u] = BigRational::one();
        }
        Self { k: n, w }
    }

    /// Exact binary expansion of each float weight.
    pub fn from_weighted(r: &WeightedGraph) -> Self {
        let w = r
            .as_slice()
            .iter()
            .map(|&x| BigRational::from_float(x).expect("weights are finite"))
            .collect();
        Self { k: r.k(), w }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.w[i * self.k + j]
    }
}

/// Pairs `(a, b)`, `a < b`, of a pattern grouped by their larger endpoint.
struct PatternPairs {
    f: usize,
    /// `later[b]` lists `(a, is_edge)` for every `a < b`.
    later: Vec<Vec<(usize, bool)>>,
}

impl PatternPairs {
    fn new(f: &Graph) -> Self {
        let later = (0..f.n())
            .map(|b| (0..b).map(|a| (a, f.has_edge(a, b))).collect())
            .collect();
        Self { f: f.n(), later }
    }
}

/// `hom_phi(F, R)` for one map `phi`.
pub fn hom_weight(f: &Graph, r: &WeightedGraph, phi: &[usize]) -> Result<f64> {
    if phi.len() != f.n() {
        return invalid(format!("map has {} images for {} pattern vertices", phi.len(), f.n()));
    }
    if let Some(&x) = phi.iter().find(|&&x| x >= r.k()) {
        return invalid(format!("image {x} is outside 0..{}", r.k()));
    }
    let mut w = 1.0;
    for a in 0..f.n() {
        for b in a + 1..f.n() {
            let x = r.get(phi[a], phi[b]);
            w *= if f.has_edge(a, b) { x } else { 1.0 - x };
        }
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MonteCarlo {
    pub samples: u64,
    pub seed: u64,
}

/// Exact when `|V(R)|^|V(F)| <= work_cap`, otherwise Monte-Carlo if
/// configured, otherwise an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensityOptions {
    pub work_cap: u128,
    pub monte_carlo: Option<MonteCarlo>,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            work_cap: DEFAULT_WORK_CAP,
            monte_carlo: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Density {
    pub value: f64,
    /// Standard error of the mean; `None` for exact values.
    pub std_error: Option<f64>,
    pub exact: bool,
    pub maps_evaluated: u128,
}

fn map_count(k: usize, f: usize) -> u128 {
    (k as u128).checked_pow(f as u32).unwrap_or(u128::MAX)
}

fn check_pattern(f: &Graph) -> Result<()> {
    if f.n() == 0 {
        return invalid("pattern must have at least one vertex");
    }
    Ok(())
}

/// Exact `hom(F, R)` under the default work cap.
pub fn hom_density_weighted(f: &Graph, r: &WeightedGraph) -> Result<f64> {
    hom_density_weighted_with(f, r, &DensityOptions::default()).map(|d| d.value)
}

pub fn hom_density_weighted_with(f: &Graph, r: &WeightedGraph, opts: &DensityOptions) -> Result<Density> {
    check_pattern(f)?;
    let maps = map_count(r.k(), f.n());
    if maps <= opts.work_cap {
        let pairs = PatternPairs::new(f);
        let mut phi = vec![0usize; f.n()];
        let total = weighted_sum(&pairs, r, &mut phi, 0);
        return Ok(Density {
            value: total / maps as f64,
            std_error: None,
            exact: true,
            maps_evaluated: maps,
        });
    }
    match opts.monte_carlo {
        Some(mc) => hom_density_mc(f, r, mc),
        None => Err(Error::CapExceeded {
            what: "maps for exact density",
            value: maps,
            cap: opts.work_cap,
        }),
    }
}

/// Sum of weights over all completions of `phi[..depth]`, accumulated per
/// level so the summation order is fixed.
fn weighted_sum(pairs: &PatternPairs, r: &WeightedGraph, phi: &mut [usize], depth: usize) -> f64 {
    if depth == pairs.f {
        return 1.0;
    }
    let mut total = 0.0;
    for x in 0..r.k() {
        let mut factor = 1.0;
        for &(a, edge) in &pairs.later[depth] {
            let w = r.get(phi[a], x);
            factor *= if edge { w } else { 1.0 - w };
            if factor == 0.0 {
                break;
            }
        }
        if factor == 0.0 {
            continue;
        }
        phi[depth] = x;
        total += factor * weighted_sum(pairs, r, phi, depth + 1);
    }
    total
}

/// Mean weight over `samples` uniform random maps.
pub fn hom_density_mc(f: &Graph, r: &WeightedGraph, mc: MonteCarlo) -> Result<Density> {
    check_pattern(f)?;
    if mc.samples == 0 {
        return invalid("Monte-Carlo needs at least one sample");
    }
    if r.k() == 0 {
        return invalid("host has no vertices");
    }
    let mut rng = rng::from_seed(mc.seed);
    let mut phi = vec![0usize; f.n()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..mc.samples {
        for x in phi.iter_mut() {
            *x = rng.random_range(0..r.k());
        }
        let w = hom_weight(f, r, &phi)?;
        sum += w;
        sum_sq += w * w;
    }
    let m = mc.samples as f64;
    let mean = sum / m;
    let var = if mc.samples > 1 {
        ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Density {
        value: mean,
        std_error: Some((var / m).sqrt()),
        exact: false,
        maps_evaluated: mc.samples as u128,
    })
}

/// Exact `hom(F, G)` for a plain graph host under the default work cap.
pub fn hom_density_graph(f: &Graph, g: &Graph) -> Result<f64> {
    hom_density_graph_with(f, g, &DensityOptions::default()).map(|d| d.value)
}

pub fn hom_density_graph_with(f: &Graph, g: &Graph, opts: &DensityOptions) -> Result<Density> {
    check_pattern(f)?;
    let maps = map_count(g.n(), f.n());
    if maps <= opts.work_cap {
        let count = induced_hom_count(f, g);
        return Ok(Density {
            value: (count as f64) / (maps as f64),
            std_error: None,
            exact: true,
            maps_evaluated: maps,
        });
    }
    match opts.monte_carlo {
        Some(mc) => hom_density_mc(f, &g.to_weighted(), mc),
        None => Err(Error::CapExceeded {
            what: "maps for exact density",
            value: maps,
            cap: opts.work_cap,
        }),
    }
}

/// Number of (not necessarily injective) maps `V(F) -> V(G)` that are
/// induced homomorphisms.
pub fn induced_hom_count(f: &Graph, g: &Graph) -> u128 {
    let pairs = PatternPairs::new(f);
    let mut phi = vec![0usize; f.n()];
    count_maps(&pairs, g, &mut phi, 0)
}

fn count_maps(pairs: &PatternPairs, g: &Graph, phi: &mut [usize], depth: usize) -> u128 {
    if depth == pairs.f {
        return 1;
    }
    let mut total = 0;
    for x in 0..g.n() {
        let ok = pairs.later[depth]
            .iter()
            .all(|&(a, edge)| g.has_edge(phi[a], x) == edge);
        if ok {
            phi[depth] = x;
            total += count_maps(pairs, g, phi, depth + 1);
        }
    }
    total
}

/// Exact rational `hom(F, G)` for a plain graph host.
pub fn hom_density_graph_exact(f: &Graph, g: &Graph) -> Result<BigRational> {
    check_pattern(f)?;
    let maps = map_count(g.n(), f.n());
    if maps > DEFAULT_WORK_CAP {
        return Err(Error::CapExceeded {
            what: "maps for exact density",
            value: maps,
            cap: DEFAULT_WORK_CAP,
        });
    }
    let count = induced_hom_count(f, g);
    Ok(BigRational::new(BigInt::from(count), BigInt::from(maps)))
}

/// Exact rational `hom(F, R)`.
pub fn hom_density_rational(f: &Graph, r: &RationalWeightedGraph) -> Result<BigRational> {
    check_pattern(f)?;
    let maps = map_count(r.k(), f.n());
    if maps > DEFAULT_WORK_CAP {
        return Err(Error::CapExceeded {
            what: "maps for exact density",
            value: maps,
            cap: DEFAULT_WORK_CAP,
        });
    }
    let pairs = PatternPairs::new(f);
    let one = BigRational::one();
    // Complements computed once.
    let co: Vec<BigRational> = r.w.iter().map(|x| &one - x).collect();
    let mut phi = vec![0usize; f.n()];
    let total = rational_sum(&pairs, r, &co, &mut phi, 0);
    Ok(total / BigRational::from_integer(BigInt::from(maps)))
}

fn rational_sum(
    pairs: &PatternPairs,
    r: &RationalWeightedGraph,
    co: &[BigRational],
    phi: &mut [usize],
    depth: usize,
) -> BigRational {
    if depth == pairs.f {
        return BigRational::one();
    }
    let k = r.k;
    let mut total = BigRational::zero();
    for x in 0..k {
        let mut factor = BigRational::one();
        for &(a, edge) in &pairs.later[depth] {
            let idx = phi[a] * k + x;
            let w = if edge { &r.w[idx] } else { &co[idx] };
            if w.is_zero() {
                factor = BigRational::zero();
                break;
            }
            factor *= w;
        }
        if factor.is_zero() {
            continue;
        }
        phi[depth] = x;
        total += factor * rational_sum(pairs, r, co, phi, depth + 1);
    }
    total
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// An injective map from a pattern into a host that is an induced embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InducedCopy {
    /// Index of the pattern in the family.
    pub pattern: usize,
    /// `image[a]` is the host vertex of pattern vertex `a`.
    pub image: Vec<usize>,
}

/// Searches for an induced copy of any pattern in `family`.
///
/// Returns `None` when `g` is induced-`family`-free.
pub fn find_induced_copy(g: &Graph, family: &[Graph]) -> Option<InducedCopy> {
    family.iter().enumerate().find_map(|(i, f)| {
        find_embedding(f, g).map(|image| InducedCopy { pattern: i, image })
    })
}

/// Membership in `Forb(family)` with a copy when it fails.
pub fn is_induced_free(g: &Graph, family: &[Graph]) -> (bool, Option<InducedCopy>) {
    let copy = find_induced_copy(g, family);
    (copy.is_none(), copy)
}

/// First injective induced embedding of `f` into `g` in lexicographic order
/// of image tuples.
pub fn find_embedding(f: &Graph, g: &Graph) -> Option<Vec<usize>> {
    if f.n() > g.n() {
        return None;
    }
    if f.n() == 0 {
        return Some(Vec::new());
    }
    let words = g.words();
    let n = g.n();
    let mut full = vec![0u64; words];
    for v in 0..n {
        full[v / 64] |= 1 << (v % 64);
    }
    let pairs = PatternPairs::new(f);
    let mut image = vec![0usize; f.n()];
    let mut used = vec![0u64; words];
    if embed(&pairs, g, &full, &mut used, &mut image, 0) {
        Some(image)
    } else {
        None
    }
}

fn embed(pairs: &PatternPairs, g: &Graph, full: &[u64], used: &mut [u64], image: &mut [usize], depth: usize) -> bool {
    if depth == pairs.f {
        return true;
    }
    // Candidates: unused host vertices consistent with every earlier image.
    let mut cand: Vec<u64> = full.iter().zip(used.iter()).map(|(f, u)| f & !u).collect();
    for &(a, edge) in &pairs.later[depth] {
        let row = g.row(image[a]);
        for (c, (&r, &f)) in cand.iter_mut().zip(row.iter().zip(full)) {
            *c &= if edge { r } else { !r & f };
        }
    }
    for (wi, &word) in cand.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let x = wi * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            image[depth] = x;
            used[wi] |= 1 << (x % 64);
            let ok = embed(pairs, g, full, used, image, depth + 1);
            used[wi] &= !(1 << (x % 64));
            if ok {
                return true;
            }
        }
    }
    false
}

/// `prod a_i - prod b_i` as the telescoping sum
/// `sum_j prod_{i<j} a_i (a_j - b_j) prod_{i>j} b_i`.
pub fn telescoping_difference(a: &[BigRational], b: &[BigRational]) -> BigRational {
    assert_eq!(a.len(), b.len());
    let t = a.len();
    let mut total = BigRational::zero();
    for j in 0..t {
        let mut term = &a[j] - &b[j];
        for x in &a[..j] {
            term *= x;
        }
        for x in &b[j + 1..] {
            term *= x;
        }
        total += term;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1(p: f64) -> WeightedGraph {
        WeightedGraph::constant(1, p).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(hom_weight(&Graph::complete(2), &r1(0.5), &[0, 0]).unwrap(), 0.5);
        assert_eq!(hom_weight(&Graph::empty(2), &r1(0.5), &[0, 0]).unwrap(), 0.5);
        let r = WeightedGraph::from_rows(&[vec![0.4, 0.0], vec![0.0, 0.9]]).unwrap();
        assert_eq!(hom_weight(&Graph::complete(3), &r, &[0, 1, 1]).unwrap(), 0.0);
        assert!(hom_weight(&Graph::complete(3), &r, &[0, 1]).is_err());
        assert!(hom_weight(&Graph::complete(3), &r, &[0, 1, 2]).is_err());
    }

    #[test]
    fn weighted_density_examples() {
        let r = WeightedGraph::from_rows(&[vec![0.3, 0.8], vec![0.8, 0.1]]).unwrap();
        assert_eq!(hom_density_weighted(&Graph::complete(1), &r).unwrap(), 1.0);
        assert_eq!(hom_density_weighted(&Graph::complete(2), &r1(0.37)).unwrap(), 0.37);
        let bip = WeightedGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(hom_density_weighted(&Graph::complete(3), &bip).unwrap(), 0.0);
        assert!(hom_density_weighted(&Graph::empty(0), &bip).is_err());
    }

    #[test]
    fn graph_density_examples() {
        for n in 1..=4 {
            assert_eq!(hom_density_graph(&Graph::complete(3), &Graph::complete_bipartite(n, n)).unwrap(), 0.0);
        }
        let d = hom_density_graph(&Graph::complete(3), &Graph::complete(3)).unwrap();
        assert!((d - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(hom_density_graph(&Graph::complete(2), &Graph::cycle(4)).unwrap(), 0.5);
        let exact = hom_density_graph_exact(&Graph::complete(3), &Graph::complete(3)).unwrap();
        assert_eq!(exact, BigRational::new(2.into(), 9.into()));
    }

    #[test]
    fn graph_and_weighted_paths_agree() {
        let g = Graph::random(7, 0.5, 3).unwrap();
        for f in [Graph::path(3), Graph::cycle(4), Graph::complete(3)] {
            let a = hom_density_graph(&f, &g).unwrap();
            let b = hom_density_weighted(&f, &g.to_weighted()).unwrap();
            let c = rational_to_f64(&hom_density_rational(&f, &RationalWeightedGraph::from_graph(&g)).unwrap());
            assert!((a - b).abs() < 1e-14 && (a - c).abs() < 1e-14, "{a} {b} {c}");
        }
    }

    #[test]
    fn cap_is_enforced_without_fallback() {
        let opts = DensityOptions {
            work_cap: 10,
            monte_carlo: None,
        };
        let err = hom_density_graph_with(&Graph::complete(3), &Graph::complete(4), &opts).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { value: 64, cap: 10, .. }));
        let opts = DensityOptions {
            work_cap: 10,
            monte_carlo: Some(MonteCarlo { samples: 1000, seed: 1 }),
        };
        let d = hom_density_graph_with(&Graph::complete(3), &Graph::complete(4), &opts).unwrap();
        assert!(!d.exact && d.std_error.is_some());
    }

    #[test]
    fn induced_copies() {
        let fam = [Graph::complete(3)];
        assert!(is_induced_free(&Graph::complete_bipartite(3, 3), &fam).0);
        let (free, copy) = is_induced_free(&Graph::complete(4), &fam);
        assert!(!free);
        assert_eq!(copy.unwrap().image, vec![0, 1, 2]);
        let (free, copy) = is_induced_free(&Graph::cycle(5), &[Graph::path(4)]);
        assert!(!free);
        let image = copy.unwrap().image;
        let sub = Graph::cycle(5).induced_subgraph(&image).unwrap();
        assert_eq!(sub, Graph::path(4));
        // P3 is not induced in K4 even though it is a subgraph.
        assert!(is_induced_free(&Graph::complete(4), &[Graph::path(3)]).0);
    }

    #[test]
    fn embedding_on_wide_graph() {
        let mut g = Graph::empty(130);
        for (u, v) in [(3, 70), (70, 129), (3, 129)] {
            g.set(u, v, true);
        }
        assert_eq!(find_embedding(&Graph::complete(3), &g), Some(vec![3, 70, 129]));
    }

    #[test]
    fn telescoping_small() {
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let a = [q(1, 2), q(2, 3), q(-5, 7)];
        let b = [q(3, 4), q(1, 9), q(4, 5)];
        let direct = a.iter().product::<BigRational>() - b.iter().product::<BigRational>();
        assert_eq!(telescoping_difference(&a, &b), direct);
    }
}
