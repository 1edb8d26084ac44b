//! Inequality suites over seeded random and exhaustive instances.
//!
//! Each suite returns a [`SuiteOutcome`] with the number of instances
//! checked, the number of violations, the smallest slack seen (negative
//! means violated) and a description of the first violation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng as _;
use serde::Serialize;

use crate::error::Result;
use crate::estimator::{build_codebook, codebook_estimate, size_floor, CodebookConfig, PropertySpec};
use crate::graph::{Graph, WeightedGraph};
use crate::hom::{
    find_induced_copy, hom_density_graph, hom_density_graph_exact, hom_density_mc, hom_density_rational,
    hom_density_weighted, telescoping_difference, MonteCarlo,
};
use crate::metrics::{cut_distance_exact, d1, distance_to_property_exact, edit_distance};
use crate::partition::{enumerate_equipartitions, random_equipartition, Equipartition};
use crate::quotient::{blow_up_reduced, reduce, reduce_exact, round_to_target, SearchMode};
use crate::regularity::{fk_partition, verify_fk, FkConfig, FkVerdict};
use crate::rng::{self, Rng};

/// Absolute slack for floating-point inequality checks.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
    /// Smallest `bound - value` over all checks; `None` if nothing ran.
    pub worst_margin: Option<f64>,
    pub first_violation: Option<String>,
}

impl SuiteOutcome {
    fn new(name: impl Into<String>) -> Self {
        SuiteOutcome {
            name: name.into(),
            checked: 0,
            violations: 0,
            worst_margin: None,
            first_violation: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }

    /// Records one check with slack `margin`; `ok` decides pass or fail.
    fn record(&mut self, margin: f64, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if self.worst_margin.is_none_or(|w| margin < w) {
            self.worst_margin = Some(margin);
        }
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }
}

/// `K2, P3, K3, C4, K4, P4`.
pub fn standard_patterns() -> Vec<(&'static str, Graph)> {
    vec![
        ("K2", Graph::complete(2)),
        ("P3", Graph::path(3)),
        ("K3", Graph::complete(3)),
        ("C4", Graph::cycle(4)),
        ("K4", Graph::complete(4)),
        ("P4", Graph::path(4)),
    ]
}

fn pairs(f: &Graph) -> i32 {
    (f.n() * f.n().saturating_sub(1) / 2) as i32
}

/// A symmetric matrix with independent uniform entries on and above the
/// diagonal.
pub fn random_weighted(k: usize, rng: &mut Rng) -> WeightedGraph {
    let mut w = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let x: f64 = rng.random();
            w[i * k + j] = x;
            w[j * k + i] = x;
        }
    }
    WeightedGraph::from_row_major(k, w).expect("uniform weights are valid")
}

/// A perturbation of `r` by at most `eps` per entry, clamped to `[0, 1]`.
fn perturbed(r: &WeightedGraph, eps: f64, rng: &mut Rng) -> WeightedGraph {
    let k = r.k();
    let mut w = r.as_slice().to_vec();
    for i in 0..k {
        for j in i..k {
            let x = (w[i * k + j] + rng.random_range(-eps..=eps)).clamp(0.0, 1.0);
            w[i * k + j] = x;
            w[j * k + i] = x;
        }
    }
    WeightedGraph::from_row_major(k, w).expect("clamped weights are valid")
}

/// The hosts of the quotient-density suite: `K_n`, `C_n` and every `K_{a,b}`
/// for each `n` in range, plus `random` graphs with `n` cycling through the
/// range and edge probability drawn uniformly.
pub fn density_hosts(n_min: usize, n_max: usize, random: usize, seed: u64) -> Vec<Graph> {
    let mut hosts = Vec::new();
    for n in n_min..=n_max {
        hosts.push(Graph::complete(n));
        if n >= 3 {
            hosts.push(Graph::cycle(n));
        }
        for a in 1..=n / 2 {
            hosts.push(Graph::complete_bipartite(a, n - a));
        }
    }
    let mut rng = rng::from_seed(seed);
    let span = n_max - n_min + 1;
    for i in 0..random {
        let n = n_min + i % span;
        let p: f64 = rng.random();
        hosts.push(Graph::random(n, p, rng.random()).expect("p in [0,1)"));
    }
    hosts
}

/// Which side of the quotient-density inequality to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientForm {
    /// `hom(F, G/V)` over every equipartition.
    Reduced,
    /// `hom(F, G/V)` restricted to `k | n`.
    ReducedDivisible,
    /// `hom(F, G_V)`, the blown-up reduced graph.
    BlownUp,
}

/// `hom(F, G/V) >= hom(F, G)^C(f,2)` for every equipartition into
/// `k in ks` classes.
///
/// For `n <= rational_max_n`, and for any float margin under `1e-6`, the
/// decision is made in exact rational arithmetic; otherwise the float
/// margin must be at least `-SLACK`.
pub fn quotient_density(hosts: &[Graph], ks: &[usize], form: QuotientForm, rational_max_n: usize) -> Result<SuiteOutcome> {
    let name = match form {
        QuotientForm::Reduced => "quotient-density",
        QuotientForm::ReducedDivisible => "quotient-density (k | n)",
        QuotientForm::BlownUp => "quotient-density (blown-up)",
    };
    let mut out = SuiteOutcome::new(name);
    let patterns = standard_patterns();
    for g in hosts {
        let n = g.n();
        for (fname, f) in &patterns {
            let base = hom_density_graph(f, g)?;
            let rhs = base.powi(pairs(f));
            let mut exact_rhs = None;
            for &k in ks {
                if k > n || (form == QuotientForm::ReducedDivisible && n % k != 0) {
                    continue;
                }
                for p in enumerate_equipartitions(n, k)? {
                    let lhs = match form {
                        QuotientForm::BlownUp => hom_density_weighted(f, &blow_up_reduced(g, &p)?)?,
                        _ => hom_density_weighted(f, &reduce(g, &p)?)?,
                    };
                    let margin = lhs - rhs;
                    let ok = if form != QuotientForm::BlownUp && (n <= rational_max_n || margin.abs() < 1e-6) {
                        let r = exact_rhs.get_or_insert_with(|| {
                            let h = hom_density_graph_exact(f, g).expect("within cap");
                            num_traits::pow(h, pairs(f) as usize)
                        });
                        let l = hom_density_rational(f, &reduce_exact(g, &p)?)?;
                        &l >= r
                    } else {
                        margin >= -SLACK
                    };
                    out.record(margin, ok, || {
                        format!(
                            "F = {fname}, G = {:?}, classes = {:?}: hom(F, G/V) = {lhs}, hom(F, G)^C(f,2) = {rhs}",
                            g.edges().collect::<Vec<_>>(),
                            p.assignment()
                        )
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `|hom(F, R1) - hom(F, R2)| <= f^2 d_cut(R1, R2)` on `count` seeded pairs
/// with `1 <= k <= max_k`. Pairs alternate between independent matrices,
/// small perturbations and 0/1 matrices.
pub fn cut_counting(count: usize, max_k: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("cut-counting");
    let mut rng = rng::from_seed(seed);
    let patterns = standard_patterns();
    for i in 0..count {
        let k = 1 + i % max_k;
        let a = random_weighted(k, &mut rng);
        let b = match i % 3 {
            0 => random_weighted(k, &mut rng),
            1 => perturbed(&a, 0.05, &mut rng),
            _ => Graph::random(k, 0.5, rng.random())?.to_weighted(),
        };
        let cut = cut_distance_exact(&a, &b)?.value;
        for (fname, f) in &patterns {
            let diff = (hom_density_weighted(f, &a)? - hom_density_weighted(f, &b)?).abs();
            let bound = (f.n() * f.n()) as f64 * cut;
            let margin = bound - diff;
            out.record(margin, margin >= -SLACK, || {
                format!("pair {i}, k = {k}, F = {fname}: |difference| = {diff}, bound = {bound}")
            });
        }
    }
    Ok(out)
}

/// `|hom(F, G/V) - hom(F, G_V)| <= 2kf/n` for `n in ns`, `k | n`,
/// `k <= 4`, patterns on at most three vertices.
pub fn blow_up_closeness(ns: &[usize], graphs: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("blow-up closeness");
    let mut rng = rng::from_seed(seed);
    let patterns: Vec<_> = standard_patterns().into_iter().filter(|(_, f)| f.n() <= 3).collect();
    for i in 0..graphs {
        let n = ns[i % ns.len()];
        let g = Graph::random(n, rng.random(), rng.random())?;
        for k in (1..=4).filter(|k| n.is_multiple_of(*k)) {
            let p = random_equipartition(n, k, rng.random())?;
            let r = reduce(&g, &p)?;
            let b = blow_up_reduced(&g, &p)?;
            for (fname, f) in &patterns {
                let diff = (hom_density_weighted(f, &r)? - hom_density_weighted(f, &b)?).abs();
                let bound = 2.0 * (k * f.n()) as f64 / n as f64;
                let margin = bound - diff;
                out.record(margin, margin >= -SLACK, || {
                    format!("graph {i}, n = {n}, k = {k}, F = {fname}: difference {diff} > {bound}")
                });
            }
        }
    }
    Ok(out)
}

/// `d_cut <= d1` on `count` seeded pairs with `1 <= k <= max_k`; at `k = 1`
/// the two must be equal.
pub fn cut_below_d1(count: usize, max_k: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("cut below d1");
    let mut rng = rng::from_seed(seed);
    for i in 0..count {
        let k = 1 + i % max_k;
        let a = random_weighted(k, &mut rng);
        let b = if i % 2 == 0 {
            random_weighted(k, &mut rng)
        } else {
            perturbed(&a, 0.1, &mut rng)
        };
        let cut = cut_distance_exact(&a, &b)?.value;
        let l1 = d1(&a, &b)?;
        let margin = l1 - cut;
        let ok = if k == 1 { (cut - l1).abs() <= 1e-15 } else { margin >= -1e-12 };
        out.record(margin, ok, || format!("pair {i}, k = {k}: d_cut = {cut}, d1 = {l1}"));
    }
    Ok(out)
}

/// The telescoping product identity in exact rationals for `t <= max_t`.
pub fn telescoping(count: usize, max_t: usize, seed: u64) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("telescoping identity");
    let mut rng = rng::from_seed(seed);
    let draw = |rng: &mut Rng| {
        let num: i64 = rng.random_range(-50..=50);
        let den: i64 = rng.random_range(1..=20);
        BigRational::new(BigInt::from(num), BigInt::from(den))
    };
    for i in 0..count {
        let t = 1 + i % max_t;
        let a: Vec<_> = (0..t).map(|_| draw(&mut rng)).collect();
        let b: Vec<_> = (0..t).map(|_| draw(&mut rng)).collect();
        let direct = a.iter().product::<BigRational>() - b.iter().product::<BigRational>();
        let sum = telescoping_difference(&a, &b);
        let gap = (&direct - &sum).abs();
        out.record(-gap.to_f64().unwrap_or(f64::INFINITY), gap.is_zero(), || {
            format!("t = {t}: direct {direct}, telescoped {sum}")
        });
    }
    out
}

/// Deletes an edge of each induced copy of `f` until none is left.
fn repair(mut g: Graph, f: &Graph, rng: &mut Rng) -> Graph {
    let family = std::slice::from_ref(f);
    while let Some(copy) = find_induced_copy(&g, family) {
        let img = &copy.image;
        let edges: Vec<_> = f.edges().map(|(a, b)| (img[a], img[b])).collect();
        let (u, v) = edges[rng.random_range(0..edges.len())];
        g.set(u, v, false);
    }
    g
}

/// `hom(F, G) <= C(f,2) / n` for `G` in `Forb({F})`, `n_min <= n <= n_max`.
///
/// Members come from the structured families where they apply, and from
/// seeded random graphs with edges of induced copies deleted until the
/// graph is `F`-free.
pub fn injectivity_slack(n_min: usize, n_max: usize, per_pattern: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("injectivity slack");
    let mut rng = rng::from_seed(seed);
    for (fname, f) in standard_patterns() {
        let family = std::slice::from_ref(&f);
        let mut members: Vec<Graph> = Vec::new();
        for n in n_min..=n_max {
            members.extend(
                [Graph::empty(n), Graph::complete(n), Graph::cycle(n), Graph::complete_bipartite(n / 2, n - n / 2)]
                    .into_iter()
                    .filter(|g| find_induced_copy(g, family).is_none()),
            );
        }
        for i in 0..per_pattern {
            let n = n_min + i % (n_max - n_min + 1);
            let g = Graph::random(n, rng.random(), rng.random())?;
            members.push(repair(g, &f, &mut rng));
        }
        for g in &members {
            let h = hom_density_graph(&f, g)?;
            let bound = pairs(&f) as f64 / g.n() as f64;
            let margin = bound - h;
            out.record(margin, margin >= -SLACK, || {
                format!("F = {fname}, G = {:?}: hom = {h} > {bound}", g.edges().collect::<Vec<_>>())
            });
        }
    }
    Ok(out)
}

/// The rounding construction: with `R = G/V` and a random target `S`, the
/// rounded graph `H` has `d1(H/V, S) <= 2/k` and, in the ordered-pair
/// convention, `2 dist(G, H) <= d1(R, S)`.
///
/// `n` is drawn from `ceil(k^(3/2))..=n_max`. Below that floor some class
/// pair has fewer than `k` cells and the first bound can fail.
pub fn rounding_construction(count: usize, n_max: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("rounding construction");
    let mut rng = rng::from_seed(seed);
    for i in 0..count {
        let k = 2 + i % 2;
        let n = rng.random_range(size_floor(k) as usize..=n_max);
        let g = Graph::random(n, rng.random(), rng.random())?;
        let p = random_equipartition(n, k, rng.random())?;
        let s = random_weighted(k, &mut rng);
        let r = reduce(&g, &p)?;
        let h = round_to_target(&g, &p, &s)?;
        let after = d1(&reduce(&h, &p)?, &s)?;
        let cap = 2.0 / k as f64;
        out.record(cap - after, after <= cap + SLACK, || {
            format!("instance {i}, n = {n}, k = {k}: d1(H/V, S) = {after} > {cap}")
        });
        let moved = 2.0 * edit_distance(&g, &h)?;
        let budget = d1(&r, &s)?;
        out.record(budget - moved, moved <= budget + SLACK, || {
            format!("instance {i}, n = {n}, k = {k}: 2 dist(G, H) = {moved} > d1(R, S) = {budget}")
        });
    }
    Ok(out)
}

/// Weak regular partitions on `count` seeded graphs with `n_min <= n <= n_max`:
/// certified, agreeing with [`verify_fk`], at most `n` classes and
/// non-decreasing energy.
pub fn fk_certification(count: usize, n_min: usize, n_max: usize, gamma: f64, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("weak regularity");
    let mut rng = rng::from_seed(seed);
    for i in 0..count {
        let n = n_min + i % (n_max - n_min + 1);
        let g = Graph::random(n, rng.random(), rng.random())?;
        let cfg = FkConfig::new(gamma, 2, rng.random());
        let r = fk_partition(&g, &cfg)?;
        let verdict = verify_fk(&g, &r.partition, gamma)?;
        let agree = matches!(verdict, FkVerdict::Certified { pass: true, value } if (value - r.gamma_achieved).abs() <= 1e-12);
        let drop = r
            .energy
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let ok = r.certified && agree && r.partition.k() <= n && drop >= -1e-12;
        out.record(gamma - r.gamma_achieved, ok, || {
            format!(
                "graph {i}, n = {n}, seed = {}: certified = {}, verdict = {verdict:?}, classes = {}, energy = {:?}",
                cfg.seed,
                r.certified,
                r.partition.k(),
                r.energy
            )
        });
    }
    Ok(out)
}

/// Fixed oracle values: `(K4, {K3}) = 1/8`, `(K6, {K3}) = 1/6`,
/// `(K3,3, {K3}) = 0`.
pub fn oracle_anchors() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("oracle anchors");
    let spec = PropertySpec::new(vec![Graph::complete(3)], None)?;
    for (name, g, want) in [
        ("K4", Graph::complete(4), 2.0 / 16.0),
        ("K6", Graph::complete(6), 6.0 / 36.0),
        ("K3,3", Graph::complete_bipartite(3, 3), 0.0),
    ] {
        let got = distance_to_property_exact(&g, &spec)?.value;
        out.record(-(got - want).abs(), (got - want).abs() < 1e-15, || format!("{name}: {got} != {want}"));
    }
    Ok(out)
}

/// For triangle-free graphs on at most `n_max` vertices, a codebook built
/// from the graph itself gives estimate 0, as does the oracle.
pub fn codebook_self_match(count: usize, n_max: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("codebook self-match");
    let mut rng = rng::from_seed(seed);
    let k3 = Graph::complete(3);
    let spec = PropertySpec::new(vec![k3.clone()], None)?;
    for i in 0..count {
        let n = rng.random_range(3..=n_max);
        let g = repair(Graph::random(n, rng.random(), rng.random())?, &k3, &mut rng);
        let cfg = CodebookConfig {
            max_classes: 2,
            gamma: 0.25,
            k0: 2,
            seed: rng.random(),
        };
        let book = build_codebook(std::slice::from_ref(&g), &cfg, Some(&spec))?;
        let est = codebook_estimate(&g, &book, SearchMode::Exact)?.estimate;
        let oracle = distance_to_property_exact(&g, &spec)?.value;
        out.record(-est.max(oracle), est == 0.0 && oracle == 0.0, || {
            format!("graph {i}, edges {:?}: estimate {est}, oracle {oracle}", g.edges().collect::<Vec<_>>())
        });
    }
    Ok(out)
}

/// Monte-Carlo densities with `samples` draws land within four standard
/// errors of the exact value.
pub fn monte_carlo_consistency(count: usize, samples: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("monte-carlo consistency");
    let mut rng = rng::from_seed(seed);
    let patterns = standard_patterns();
    for i in 0..count {
        let k = rng.random_range(2..=6);
        let r = random_weighted(k, &mut rng);
        let (fname, f) = &patterns[i % patterns.len()];
        let exact = hom_density_weighted(f, &r)?;
        let mc = hom_density_mc(f, &r, MonteCarlo { samples, seed: rng.random() })?;
        let se = mc.std_error.unwrap_or(0.0).max(1e-12);
        let margin = 4.0 * se - (mc.value - exact).abs();
        out.record(margin, margin >= 0.0, || {
            format!("instance {i}, F = {fname}, k = {k}: mc {} vs exact {exact}, se {se}", mc.value)
        });
    }
    Ok(out)
}

/// Every suite, scaled by `max_n`.
pub fn run_all(max_n: usize, seed: u64) -> Result<Vec<SuiteOutcome>> {
    let max_n = max_n.max(4);
    let hosts = density_hosts(4, max_n, 200, seed);
    let s = |i: u64| rng::derive(seed, i);
    let ns: Vec<usize> = [8, 12].into_iter().filter(|&n| n <= max_n.max(8) + 4).collect();
    Ok(vec![
        quotient_density(&hosts, &[1, 2, 3], QuotientForm::Reduced, 6)?,
        quotient_density(&hosts, &[1, 2, 3], QuotientForm::ReducedDivisible, 6)?,
        quotient_density(&hosts, &[1, 2, 3], QuotientForm::BlownUp, 0)?,
        cut_counting(500, 8, s(1))?,
        blow_up_closeness(&ns, 100, s(2))?,
        cut_below_d1(1000, 10, s(3))?,
        telescoping(200, 8, s(4)),
        injectivity_slack(4, max_n, 40, s(5))?,
        rounding_construction(100, max_n + 4, s(6))?,
        fk_certification(50, 8, 20.min(max_n + 12), 0.15, s(7))?,
        oracle_anchors()?,
        codebook_self_match(20, max_n.min(8), s(8))?,
        monte_carlo_consistency(12, 100_000, s(9))?,
    ])
}

/// Equipartitions of `0..n` into `k` classes with the first `n mod k`
/// classes larger, vertices assigned in order.
pub fn contiguous_equipartition(n: usize, k: usize) -> Result<Equipartition> {
    let sizes = crate::partition::class_sizes(n, k);
    let mut class_of = Vec::with_capacity(n);
    for (c, &s) in sizes.iter().enumerate() {
        class_of.extend(std::iter::repeat_n(c, s));
    }
    Equipartition::new(class_of, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(cut_counting(30, 5, 1).unwrap().passed());
        assert!(cut_below_d1(60, 6, 1).unwrap().passed());
        assert!(telescoping(40, 8, 1).passed());
        assert!(blow_up_closeness(&[8, 12], 6, 1).unwrap().passed());
        assert!(oracle_anchors().unwrap().passed());
        assert!(rounding_construction(30, 10, 1).unwrap().passed());
    }

    #[test]
    fn divisible_quotient_density_holds() {
        let hosts = density_hosts(4, 6, 10, 3);
        let out = quotient_density(&hosts, &[1, 2, 3], QuotientForm::ReducedDivisible, 5).unwrap();
        assert!(out.passed(), "{out:?}");
    }

    #[test]
    fn unequal_classes_can_break_the_quotient_bound() {
        // K4 into classes of sizes 2, 1, 1: hom(K2, G/V) = 13/18 < 3/4.
        let g = Graph::complete(4);
        let out = quotient_density(&[g], &[3], QuotientForm::Reduced, 4).unwrap();
        assert!(out.violations > 0);
        let p = contiguous_equipartition(4, 3).unwrap();
        let r = reduce(&Graph::complete(4), &p).unwrap();
        assert!((hom_density_weighted(&Graph::complete(2), &r).unwrap() - 13.0 / 18.0).abs() < 1e-15);
    }
}
