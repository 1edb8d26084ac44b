//! Estimators of the distance to `Forb(F)`.
//!
//! [`sample_estimate`] solves the problem exactly on small random induced
//! subgraphs. [`codebook_estimate`] compares reduced graphs of the input
//! with a finite codebook of reduced graphs of known members; because the
//! codebook is never complete, its output is an upper bound and is flagged
//! as one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, WeightedGraph};
use crate::hom::{hom_density_graph_with, is_induced_free, DensityOptions, MonteCarlo};
use crate::metrics::{d1, d1_up_to_relabeling, distance_to_property_exact, ORACLE_CAP, RELABEL_CAP};
use crate::partition::{enumerate_equipartitions_capped, Equipartition, ENUMERATION_CAP};
use crate::quotient::{check_exact_work, local_search, reduce, relabel, SearchMode};
use crate::regularity::{fk_partition, FkConfig};
use crate::rng;

/// Constants of the removal lemma for a family: every graph on at least
/// `n0` vertices that is far from the property has a pattern on at most
/// `M` vertices with induced density at least `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalConstants {
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub n0: usize,
}

/// A hereditary property `Forb(family)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PropertySpecJson")]
pub struct PropertySpec {
    family: Vec<Graph>,
    #[serde(skip_serializing_if = "Option::is_none")]
    removal: Option<RemovalConstants>,
}

#[derive(Deserialize)]
struct PropertySpecJson {
    family: Vec<Graph>,
    #[serde(default)]
    removal: Option<RemovalConstants>,
}

impl TryFrom<PropertySpecJson> for PropertySpec {
    type Error = Error;

    fn try_from(j: PropertySpecJson) -> Result<Self> {
        PropertySpec::new(j.family, j.removal)
    }
}

impl PropertySpec {
    pub fn new(family: Vec<Graph>, removal: Option<RemovalConstants>) -> Result<Self> {
        if let Some(i) = family.iter().position(|f| f.n() == 0) {
            return invalid(format!("pattern {i} has no vertices"));
        }
        if let Some(r) = removal {
            if !(r.delta > 0.0 && r.delta <= 1.0) {
                return invalid(format!("delta must lie in (0, 1], got {}", r.delta));
            }
            if r.m == 0 || r.n0 == 0 {
                return invalid("M and n0 must be positive");
            }
        }
        Ok(Self { family, removal })
    }

    pub fn family(&self) -> &[Graph] {
        &self.family
    }

    pub fn removal(&self) -> Option<&RemovalConstants> {
        self.removal.as_ref()
    }

    pub fn contains(&self, g: &Graph) -> bool {
        is_induced_free(g, &self.family).0
    }
}

/// `ceil` that ignores representation error just above an integer.
fn ceil_guarded(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Class count and regularity parameter for codebook entries:
/// `k0 = ceil(max(n0, 2/delta, 4 M^2 / delta^(M^2)))` and
/// `gamma = delta^(M^2) / (8 M^2)`.
pub fn attest_constants(delta: f64, m: usize, n0: usize) -> Result<(usize, f64)> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid(format!("delta must lie in (0, 1], got {delta}"));
    }
    if m == 0 || n0 == 0 {
        return invalid("M and n0 must be positive");
    }
    let m2 = (m as f64) * (m as f64);
    let small = delta.powf(m2);
    let too_big = || {
        Error::Invalid(format!(
            "delta^(-M^2) is not representable for delta = {delta}, M = {m}; use a smaller M or a larger delta"
        ))
    };
    if small == 0.0 || !small.is_finite() {
        return Err(too_big());
    }
    let k0 = (n0 as f64).max(2.0 / delta).max(4.0 * m2 / small);
    let k0 = ceil_guarded(k0);
    // Keep k0 exactly representable as an integer.
    if !k0.is_finite() || k0 > (1u64 << 53) as f64 {
        return Err(too_big());
    }
    Ok((k0 as usize, small / (8.0 * m2)))
}

/// Median; the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EstimateConfig {
    Sample {
        s: usize,
        trials: usize,
        seed: u64,
    },
    Codebook {
        #[serde(rename = "K")]
        max_classes: usize,
        gamma: f64,
        search: SearchMode,
    },
}

/// The partition and codebook entry that achieved a codebook estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodebookMatch {
    pub entry: usize,
    /// Classes are numbered to match the vertices of the entry.
    pub partition: Equipartition,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub config: EstimateConfig,
    pub estimate: f64,
    pub trial_values: Vec<f64>,
    pub aggregation: &'static str,
    /// True when the estimate only bounds the estimated quantity from above.
    pub upper_bound: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<CodebookMatch>,
}

/// Median over `trials` of the exact distance to the property of a random
/// induced subgraph on `s` vertices. Trial `t` uses seed `seed + t`.
pub fn sample_estimate(g: &Graph, spec: &PropertySpec, s: usize, trials: usize, seed: u64) -> Result<EstimateReport> {
    if s > g.n() {
        return invalid(format!("sample size {s} exceeds {} vertices", g.n()));
    }
    if s > ORACLE_CAP {
        return Err(Error::CapExceeded {
            what: "sample size for the exact oracle",
            value: s as u128,
            cap: ORACLE_CAP as u128,
        });
    }
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let mut values = Vec::with_capacity(trials);
    for t in 0..trials {
        let sub = g.random_induced_subgraph(s, rng::derive(seed, t as u64))?;
        values.push(distance_to_property_exact(&sub, spec)?.value);
    }
    Ok(EstimateReport {
        config: EstimateConfig::Sample { s, trials, seed },
        estimate: median(&values),
        trial_values: values,
        aggregation: "median",
        upper_bound: false,
        argmin: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Index of the member in the list passed to [`build_codebook`].
    pub member: usize,
    pub n: usize,
    pub classes: usize,
    pub rounds: usize,
    pub certified: bool,
    pub gamma_achieved: f64,
    /// `Some(true)` if membership in the property was checked; `None` if
    /// the member was trusted.
    pub checked: Option<bool>,
    /// Later members whose reduced graphs duplicated this entry.
    #[serde(default)]
    pub duplicates: Vec<usize>,
}

/// Reduced graphs of members of a property, each from a weak regular
/// partition with at most `K` classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodebookJson")]
pub struct AttestationCodebook {
    #[serde(rename = "K")]
    pub max_classes: usize,
    pub gamma: f64,
    pub entries: Vec<WeightedGraph>,
    pub provenance: Vec<Provenance>,
}

#[derive(Deserialize)]
struct CodebookJson {
    #[serde(rename = "K")]
    max_classes: usize,
    gamma: f64,
    entries: Vec<WeightedGraph>,
    #[serde(default)]
    provenance: Vec<Provenance>,
}

impl TryFrom<CodebookJson> for AttestationCodebook {
    type Error = Error;

    fn try_from(j: CodebookJson) -> Result<Self> {
        if let Some(i) = j.entries.iter().position(|e| e.k() > j.max_classes || e.k() == 0) {
            return invalid(format!("entry {i} has {} vertices, K is {}", j.entries[i].k(), j.max_classes));
        }
        if !j.provenance.is_empty() && j.provenance.len() != j.entries.len() {
            return invalid("provenance must have one record per entry");
        }
        Ok(Self {
            max_classes: j.max_classes,
            gamma: j.gamma,
            entries: j.entries,
            provenance: j.provenance,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodebookConfig {
    #[serde(rename = "K")]
    pub max_classes: usize,
    pub gamma: f64,
    /// Initial class count for each member's partition.
    pub k0: usize,
    pub seed: u64,
}

/// Entries closer than this in `d1` (up to relabeling) are merged.
pub const DEDUP_TOL: f64 = 1e-6;

fn same_entry(a: &WeightedGraph, b: &WeightedGraph) -> Result<bool> {
    if a.k() != b.k() {
        return Ok(false);
    }
    let d = if a.k() <= RELABEL_CAP.min(8) {
        d1_up_to_relabeling(a, b)?.0
    } else {
        d1(a, b)?
    };
    Ok(d < DEDUP_TOL)
}

/// Reduced graphs of weak regular partitions of each member.
///
/// Refinement is limited to `floor(log4(K / k0))` rounds so that no entry
/// has more than `K` vertices. With `spec`, every member is checked for
/// membership first.
pub fn build_codebook(members: &[Graph], cfg: &CodebookConfig, spec: Option<&PropertySpec>) -> Result<AttestationCodebook> {
    let CodebookConfig {
        max_classes,
        gamma,
        k0,
        seed,
    } = *cfg;
    if k0 == 0 || k0 > max_classes {
        return invalid(format!("need 1 <= k0 <= K, got k0 = {k0}, K = {max_classes}"));
    }
    let mut rounds = 0;
    while k0.saturating_mul(4usize.saturating_pow(rounds as u32 + 1)) <= max_classes {
        rounds += 1;
    }
    let mut entries: Vec<WeightedGraph> = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    for (i, g) in members.iter().enumerate() {
        let checked = match spec {
            Some(spec) => {
                if let Some(copy) = is_induced_free(g, spec.family()).1 {
                    return invalid(format!(
                        "member {i} contains pattern {} at vertices {:?}",
                        copy.pattern, copy.image
                    ));
                }
                Some(true)
            }
            None => None,
        };
        let fk = fk_partition(
            g,
            &FkConfig {
                gamma,
                k0,
                max_rounds: Some(rounds),
                seed,
            },
        )?;
        let r = reduce(g, &fk.partition)?;
        let mut dup = None;
        for (j, e) in entries.iter().enumerate() {
            if same_entry(&r, e)? {
                dup = Some(j);
                break;
            }
        }
        match dup {
            Some(j) => provenance[j].duplicates.push(i),
            None => {
                entries.push(r);
                provenance.push(Provenance {
                    member: i,
                    n: g.n(),
                    classes: fk.partition.k(),
                    rounds: fk.rounds,
                    certified: fk.certified,
                    gamma_achieved: fk.gamma_achieved,
                    checked,
                    duplicates: Vec::new(),
                });
            }
        }
    }
    Ok(AttestationCodebook {
        max_classes,
        gamma,
        entries,
        provenance,
    })
}

/// Smallest `n` with `n >= K^(3/2)`, i.e. `n^2 >= K^3`.
pub fn size_floor(max_classes: usize) -> u128 {
    let cube = (max_classes as u128).pow(3);
    let mut n = (cube as f64).sqrt() as u128;
    while n * n < cube {
        n += 1;
    }
    while n > 0 && (n - 1) * (n - 1) >= cube {
        n -= 1;
    }
    n
}

/// `min` over equipartitions `P` of `G` and entries `S` with `|V(S)|`
/// classes of `d1(G/P, S)`.
///
/// Exact mode ranges over every equipartition; heuristic mode runs a seeded
/// local search per class count and is a further upper bound.
pub fn codebook_estimate(g: &Graph, book: &AttestationCodebook, mode: SearchMode) -> Result<EstimateReport> {
    let n = g.n();
    if book.entries.is_empty() {
        return invalid("codebook has no entries");
    }
    let floor = size_floor(book.max_classes);
    if (n as u128) < floor {
        return invalid(format!(
            "n = {n} is below the floor K^(3/2) for K = {} (needs n >= {floor})",
            book.max_classes
        ));
    }
    let mut ks: Vec<usize> = book.entries.iter().map(WeightedGraph::k).filter(|&k| k <= n).collect();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return invalid(format!("no entry has at most {n} vertices"));
    }
    let mut best: Option<CodebookMatch> = None;
    for &k in &ks {
        let idx: Vec<usize> = (0..book.entries.len()).filter(|&i| book.entries[i].k() == k).collect();
        let candidate = match mode {
            SearchMode::Exact => exact_match(g, k, &idx, book)?,
            SearchMode::Heuristic { restarts, seed } => heuristic_match(g, k, &idx, book, restarts, seed)?,
        };
        if best.as_ref().is_none_or(|b| candidate.distance < b.distance) {
            best = Some(candidate);
        }
    }
    let best = best.expect("at least one class count");
    Ok(EstimateReport {
        config: EstimateConfig::Codebook {
            max_classes: book.max_classes,
            gamma: book.gamma,
            search: mode,
        },
        estimate: best.distance,
        trial_values: vec![best.distance],
        aggregation: "median",
        upper_bound: true,
        argmin: Some(best),
    })
}

fn exact_match(g: &Graph, k: usize, idx: &[usize], book: &AttestationCodebook) -> Result<CodebookMatch> {
    check_exact_work(g.n(), k)?;
    let mut best: Option<CodebookMatch> = None;
    for p in enumerate_equipartitions_capped(g.n(), k, ENUMERATION_CAP)? {
        let q = reduce(g, &p)?;
        for &i in idx {
            let (d, perm) = d1_up_to_relabeling(&q, &book.entries[i])?;
            if best.as_ref().is_none_or(|b| d < b.distance) {
                best = Some(CodebookMatch {
                    entry: i,
                    partition: relabel(&p, &perm),
                    distance: d,
                });
            }
        }
    }
    Ok(best.expect("k <= n admits an equipartition"))
}

fn heuristic_match(
    g: &Graph,
    k: usize,
    idx: &[usize],
    book: &AttestationCodebook,
    restarts: usize,
    seed: u64,
) -> Result<CodebookMatch> {
    let nearest = |q: &WeightedGraph| {
        idx.iter()
            .map(|&i| (d1(q, &book.entries[i]).expect("same k"), i))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("nonempty")
    };
    let (distance, partition) = local_search(g, k, restarts, seed, |q| nearest(q).0)?;
    let entry = nearest(&reduce(g, &partition)?).1;
    Ok(CodebookMatch {
        entry,
        partition,
        distance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    /// Index of the densest eligible pattern in the family.
    pub pattern: usize,
    pub density: f64,
    pub exact: bool,
    pub std_error: Option<f64>,
    /// `density >= delta`.
    pub at_least_delta: bool,
    /// Every eligible pattern with its density, in family order.
    pub densities: Vec<(usize, f64)>,
}

/// The pattern on at most `M` vertices with the largest induced density in
/// `G`. Densities are exact within the work cap and Monte-Carlo beyond it.
pub fn removal_probe(g: &Graph, spec: &PropertySpec, mc_samples: u64, seed: u64) -> Result<ProbeResult> {
    removal_probe_with(g, spec, mc_samples, seed, crate::hom::DEFAULT_WORK_CAP)
}

pub fn removal_probe_with(g: &Graph, spec: &PropertySpec, mc_samples: u64, seed: u64, work_cap: u128) -> Result<ProbeResult> {
    let Some(removal) = spec.removal() else {
        return invalid("the probe needs removal constants in the spec");
    };
    let opts = DensityOptions {
        work_cap,
        monte_carlo: (mc_samples > 0).then_some(MonteCarlo { samples: mc_samples, seed }),
    };
    let mut densities = Vec::new();
    let mut best: Option<(usize, crate::hom::Density)> = None;
    for (i, f) in spec.family().iter().enumerate() {
        if f.n() > removal.m {
            continue;
        }
        let d = hom_density_graph_with(f, g, &opts)?;
        densities.push((i, d.value));
        if best.as_ref().is_none_or(|(_, b)| d.value > b.value) {
            best = Some((i, d));
        }
    }
    let Some((pattern, d)) = best else {
        return invalid(format!("no pattern has at most M = {} vertices", removal.m));
    };
    Ok(ProbeResult {
        pattern,
        density: d.value,
        exact: d.exact,
        std_error: d.std_error,
        at_least_delta: d.value >= removal.delta,
        densities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3_free() -> PropertySpec {
        PropertySpec::new(vec![Graph::complete(3)], None).unwrap()
    }

    #[test]
    fn attest_constant_examples() {
        assert_eq!(attest_constants(0.5, 2, 10).unwrap(), (256, 1.0 / 512.0));
        assert_eq!(attest_constants(1.0, 1, 1).unwrap(), (4, 0.125));
        assert_eq!(attest_constants(0.5, 1, 3).unwrap(), (8, 1.0 / 16.0));
        assert_eq!(attest_constants(1.0 / 3.0, 1, 1).unwrap().0, 12);
        assert!(attest_constants(0.0, 1, 1).is_err());
        assert!(attest_constants(1.5, 1, 1).is_err());
        assert!(attest_constants(0.5, 0, 1).is_err());
        assert!(attest_constants(0.01, 30, 1).is_err());
    }

    #[test]
    fn median_rule() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn sample_estimate_examples() {
        let spec = k3_free();
        let r = sample_estimate(&Graph::complete_bipartite(6, 6), &spec, 6, 9, 1).unwrap();
        assert_eq!((r.estimate, r.trial_values.len()), (0.0, 9));
        let r = sample_estimate(&Graph::complete(8), &spec, 6, 9, 1).unwrap();
        assert!(r.trial_values.iter().all(|&v| v == 6.0 / 36.0));
        assert_eq!(r.estimate, 6.0 / 36.0);
        assert_eq!(sample_estimate(&Graph::empty(20), &spec, 5, 3, 0).unwrap().estimate, 0.0);
        assert!(sample_estimate(&Graph::empty(4), &spec, 5, 3, 0).is_err());
        assert!(matches!(
            sample_estimate(&Graph::empty(20), &spec, 9, 3, 0),
            Err(Error::CapExceeded { .. })
        ));
    }

    fn cfg(max_classes: usize, gamma: f64, k0: usize, seed: u64) -> CodebookConfig {
        CodebookConfig {
            max_classes,
            gamma,
            k0,
            seed,
        }
    }

    #[test]
    fn codebook_examples() {
        let book = build_codebook(&[Graph::empty(12)], &cfg(4, 0.1, 1, 0), None).unwrap();
        assert_eq!(book.entries.len(), 1);
        assert!(book.entries[0].as_slice().iter().all(|&x| x == 0.0));

        let g = Graph::complete_bipartite(6, 6);
        let seed = (0..500)
            .find(|&s| {
                let p = crate::partition::random_equipartition(12, 2, s).unwrap();
                (0..6).all(|v| p.class_of(v) == p.class_of(0))
            })
            .unwrap();
        let book = build_codebook(std::slice::from_ref(&g), &cfg(2, 0.01, 2, seed), Some(&k3_free())).unwrap();
        assert_eq!(book.entries, vec![WeightedGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()]);

        let h = Graph::cycle(8);
        let book = build_codebook(&[h.clone(), h.clone()], &cfg(4, 0.1, 2, 3), None).unwrap();
        assert_eq!(book.entries.len(), 1);
        assert_eq!(book.provenance[0].duplicates, vec![1]);

        assert!(build_codebook(&[Graph::complete(4)], &cfg(4, 0.1, 2, 0), Some(&k3_free())).is_err());
    }

    #[test]
    fn codebook_estimate_examples() {
        let book = AttestationCodebook {
            max_classes: 2,
            gamma: 0.1,
            entries: vec![WeightedGraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()],
            provenance: Vec::new(),
        };
        let r = codebook_estimate(&Graph::cycle(4), &book, SearchMode::Exact).unwrap();
        assert_eq!(r.estimate, 0.0);
        let p = r.argmin.unwrap().partition;
        assert_eq!(p.class_of(0), p.class_of(2));
        assert_eq!(p.class_of(1), p.class_of(3));
        assert!(r.upper_bound);

        // Every bipartition of K4 reduces to [[1/2,1],[1,1/2]].
        let r = codebook_estimate(&Graph::complete(4), &book, SearchMode::Exact).unwrap();
        assert_eq!(r.estimate, 0.25);

        let g = Graph::random(8, 0.4, 5).unwrap();
        let own = build_codebook(std::slice::from_ref(&g), &cfg(2, 0.1, 2, 1), None).unwrap();
        assert_eq!(codebook_estimate(&g, &own, SearchMode::Exact).unwrap().estimate, 0.0);
        let h = codebook_estimate(&g, &own, SearchMode::Heuristic { restarts: 4, seed: 1 }).unwrap();
        assert!(h.estimate >= 0.0);
    }

    #[test]
    fn codebook_estimate_preconditions() {
        let book = AttestationCodebook {
            max_classes: 4,
            gamma: 0.1,
            entries: vec![WeightedGraph::zeros(4)],
            provenance: Vec::new(),
        };
        assert_eq!(size_floor(4), 8);
        assert_eq!(size_floor(2), 3);
        assert!(codebook_estimate(&Graph::empty(7), &book, SearchMode::Exact).is_err());
        assert!(codebook_estimate(&Graph::empty(8), &book, SearchMode::Exact).is_ok());
        let empty = AttestationCodebook {
            entries: Vec::new(),
            ..book
        };
        assert!(codebook_estimate(&Graph::empty(8), &empty, SearchMode::Exact).is_err());
    }

    #[test]
    fn probe_examples() {
        let removal = |delta, m| Some(RemovalConstants { delta, m, n0: 1 });
        let spec = PropertySpec::new(vec![Graph::complete(3)], removal(0.1, 3)).unwrap();
        let p = removal_probe(&Graph::complete(6), &spec, 0, 0).unwrap();
        assert_eq!((p.pattern, p.density, p.at_least_delta), (0, 120.0 / 216.0, true));
        let p = removal_probe(&Graph::complete_bipartite(4, 4), &spec, 0, 0).unwrap();
        assert_eq!((p.density, p.at_least_delta), (0.0, false));
        let spec = PropertySpec::new(vec![Graph::complete(2)], removal(0.5, 2)).unwrap();
        let p = removal_probe(&Graph::empty(5), &spec, 0, 0).unwrap();
        assert_eq!((p.density, p.at_least_delta), (0.0, false));
        let spec = PropertySpec::new(vec![Graph::complete(4)], removal(0.5, 3)).unwrap();
        assert!(removal_probe(&Graph::empty(5), &spec, 0, 0).is_err());
        assert!(removal_probe(&Graph::empty(5), &k3_free(), 0, 0).is_err());
    }
}
