//! A constructive Frieze-Kannan weak regular partition.
//!
//! Starting from a random equipartition, each round looks for a cut
//! witness `(alpha, beta)` of `G - G_V`. If its value is above `gamma`,
//! every class is split four ways by the pair of indicators and the result
//! is re-equalized. The energy `sum |V_i||V_j| R(i,j)^2 / n^2` is bounded by
//! one, which bounds the number of useful rounds.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::metrics::{cut_norm_exact, cut_norm_heuristic, CutDistance, CUT_EXACT_CAP};
use crate::partition::{random_equipartition, Equipartition};
use crate::quotient::{blow_up, energy, reduce};
use crate::rng;

/// Restarts used for the alternating witness search above the exact range.
pub const HEURISTIC_RESTARTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FkConfig {
    pub gamma: f64,
    pub k0: usize,
    /// `None` means `ceil(2 / gamma^2) + 1`.
    pub max_rounds: Option<usize>,
    pub seed: u64,
}

impl FkConfig {
    pub fn new(gamma: f64, k0: usize, seed: u64) -> Self {
        FkConfig {
            gamma,
            k0,
            max_rounds: None,
            seed,
        }
    }

    pub fn round_budget(&self) -> usize {
        self.max_rounds.unwrap_or_else(|| default_rounds(self.gamma))
    }
}

pub fn default_rounds(gamma: f64) -> usize {
    (2.0 / (gamma * gamma)).ceil() as usize + 1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkResult {
    pub partition: Equipartition,
    /// Cut distance between `G` and `G_V` for the returned partition: exact
    /// if `exact`, otherwise a lower bound from the heuristic.
    pub gamma_achieved: f64,
    pub rounds: usize,
    /// Exact verification ran and `gamma_achieved <= gamma`.
    pub certified: bool,
    pub exact: bool,
    /// Energy after each round, starting with the initial partition.
    pub energy: Vec<f64>,
    /// Class count after each round, starting with `k0`.
    pub classes: Vec<usize>,
    /// Witness value found in each round, one per partition examined.
    pub witness: Vec<f64>,
}

/// `G - G_V` as a dense `n x n` row-major matrix.
fn residual(g: &Graph, p: &Equipartition) -> Result<Vec<f64>> {
    let r = reduce(g, p)?;
    let b = blow_up(&r, p);
    let n = g.n();
    let mut d: Vec<f64> = b.as_slice().iter().map(|x| -x).collect();
    for (u, v) in g.edges() {
        d[u * n + v] += 1.0;
        d[v * n + u] += 1.0;
    }
    Ok(d)
}

fn witness(g: &Graph, p: &Equipartition, seed: u64) -> Result<(CutDistance, bool)> {
    let n = g.n();
    let d = residual(g, p)?;
    if n <= CUT_EXACT_CAP {
        Ok((cut_norm_exact(&d, n)?, true))
    } else {
        Ok((cut_norm_heuristic(&d, n, HEURISTIC_RESTARTS, seed), false))
    }
}

fn partition_energy(g: &Graph, p: &Equipartition) -> Result<f64> {
    Ok(energy(&reduce(g, p)?, p))
}

pub fn fk_partition(g: &Graph, cfg: &FkConfig) -> Result<FkResult> {
    let n = g.n();
    let FkConfig { gamma, k0, seed, .. } = *cfg;
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    if k0 == 0 || n < k0 {
        return invalid(format!("need 1 <= k0 <= n, got k0 = {k0}, n = {n}"));
    }
    let budget = cfg.round_budget();
    let class_cap = 4usize
        .checked_pow(budget.min(64) as u32)
        .and_then(|m| m.checked_mul(k0))
        .map_or(n, |c| c.min(n));

    let mut p = random_equipartition(n, k0, seed)?;
    let mut out = FkResult {
        partition: p.clone(),
        gamma_achieved: 0.0,
        rounds: 0,
        certified: false,
        exact: false,
        energy: vec![partition_energy(g, &p)?],
        classes: vec![k0],
        witness: Vec::new(),
    };
    loop {
        let (w, exact) = witness(g, &p, rng::derive(seed, out.rounds as u64 + 1))?;
        out.witness.push(w.value);
        out.gamma_achieved = w.value;
        out.exact = exact;
        if w.value <= gamma || out.rounds >= budget {
            break;
        }
        let marks: Vec<usize> = (0..n)
            .map(|v| 2 * w.witness.alpha[v] as usize + w.witness.beta[v] as usize)
            .collect();
        let next = p.split_classes(&marks)?;
        if next.k() > class_cap || next.k() == p.k() {
            break;
        }
        p = next;
        out.rounds += 1;
        out.energy.push(partition_energy(g, &p)?);
        out.classes.push(p.k());
    }
    out.certified = out.exact && out.gamma_achieved <= gamma;
    out.partition = p;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FkVerdict {
    /// Exact cut distance; `pass` iff `value <= gamma`.
    Certified { pass: bool, value: f64 },
    /// A heuristic witness already exceeds `gamma`.
    Refuted { lower_bound: f64 },
    Unknown { lower_bound: f64 },
}

impl FkVerdict {
    pub fn value(&self) -> f64 {
        match *self {
            FkVerdict::Certified { value, .. } => value,
            FkVerdict::Refuted { lower_bound } | FkVerdict::Unknown { lower_bound } => lower_bound,
        }
    }
}

/// Checks `d_cut(G, G_V) <= gamma`, exactly for `n <= 22`.
pub fn verify_fk(g: &Graph, p: &Equipartition, gamma: f64) -> Result<FkVerdict> {
    if p.n() != g.n() {
        return invalid(format!("partition of {} vertices for a graph on {}", p.n(), g.n()));
    }
    let (w, exact) = witness(g, p, 0)?;
    Ok(if exact {
        FkVerdict::Certified {
            pass: w.value <= gamma,
            value: w.value,
        }
    } else if w.value > gamma {
        FkVerdict::Refuted { lower_bound: w.value }
    } else {
        FkVerdict::Unknown { lower_bound: w.value }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::cut_distance_exact;
    use crate::quotient::blow_up_reduced;

    #[test]
    fn empty_graph_is_one_class() {
        let r = fk_partition(&Graph::empty(7), &FkConfig::new(0.3, 1, 4)).unwrap();
        assert_eq!((r.partition.k(), r.gamma_achieved, r.rounds), (1, 0.0, 0));
        assert!(r.certified);
    }

    #[test]
    fn bipartition_of_complete_bipartite() {
        let g = Graph::complete_bipartite(4, 4);
        let hit = (0..200)
            .find(|&s| {
                let p = random_equipartition(8, 2, s).unwrap();
                (0..4).all(|v| p.class_of(v) == p.class_of(0))
            })
            .unwrap();
        let r = fk_partition(&g, &FkConfig::new(0.01, 2, hit)).unwrap();
        assert_eq!((r.gamma_achieved, r.rounds), (0.0, 0));
        assert!(r.certified);
    }

    #[test]
    fn certified_results_match_exact_cut_distance() {
        for seed in 0..6 {
            let g = Graph::random(14, 0.5, seed).unwrap();
            let r = fk_partition(&g, &FkConfig::new(0.2, 2, seed)).unwrap();
            assert!(r.certified && r.gamma_achieved <= 0.2);
            let exact = cut_distance_exact(&g.to_weighted(), &blow_up_reduced(&g, &r.partition).unwrap()).unwrap();
            assert!((exact.value - r.gamma_achieved).abs() < 1e-12);
            match verify_fk(&g, &r.partition, 0.2).unwrap() {
                FkVerdict::Certified { pass, .. } => assert!(pass),
                v => panic!("{v:?}"),
            }
        }
    }

    #[test]
    fn large_graphs_use_the_heuristic() {
        let g = Graph::random(64, 0.5, 2).unwrap();
        let r = fk_partition(&g, &FkConfig::new(0.2, 2, 2)).unwrap();
        assert!(!r.exact && !r.certified);
        assert!(r.partition.k() >= 2 && r.partition.k() <= 64);
        assert!(matches!(
            verify_fk(&g, &r.partition, 0.2).unwrap(),
            FkVerdict::Refuted { .. } | FkVerdict::Unknown { .. }
        ));
    }

    #[test]
    fn verify_examples() {
        let p = Equipartition::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        assert_eq!(
            verify_fk(&Graph::empty(6), &p, 0.1).unwrap(),
            FkVerdict::Certified { pass: true, value: 0.0 }
        );
        assert_eq!(
            verify_fk(&Graph::complete_bipartite(3, 3), &p, 1e-6).unwrap(),
            FkVerdict::Certified { pass: true, value: 0.0 }
        );
        // C4 with classes {0,1},{2,3}: R = [[1/2,1/2],[1/2,1/2]] and the
        // residual is +-1/2 on pairs, -1/2 on the diagonal.
        let p = Equipartition::new(vec![0, 0, 1, 1], 2).unwrap();
        let v = verify_fk(&Graph::cycle(4), &p, 0.05).unwrap();
        let expect = cut_distance_exact(&Graph::cycle(4).to_weighted(), &blow_up_reduced(&Graph::cycle(4), &p).unwrap()).unwrap();
        assert_eq!(v.value(), expect.value);
        assert_eq!(v.value(), 0.125);
    }

    #[test]
    fn rejects_bad_config() {
        let g = Graph::empty(4);
        assert!(fk_partition(&g, &FkConfig::new(0.0, 1, 0)).is_err());
        assert!(fk_partition(&g, &FkConfig::new(1.0, 1, 0)).is_err());
        assert!(fk_partition(&g, &FkConfig::new(0.5, 5, 0)).is_err());
        assert!(fk_partition(&g, &FkConfig::new(0.5, 0, 0)).is_err());
    }
}
