//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes an edge list (the CLI text format) and returns JSON.
//! The `*_json` functions hold the logic so they can be tested natively.

use forbdist::checks::standard_patterns;
use forbdist::hom::{hom_density_graph, hom_density_weighted};
use forbdist::io::{format_edge_list, parse_edge_list};
use forbdist::partition::random_equipartition;
use forbdist::quotient::reduce;
use forbdist::regularity::{fk_partition, FkConfig};
use forbdist::{Equipartition, Graph, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest graph the page accepts; keeps the pattern densities quick.
pub const MAX_N: usize = 64;

fn parse(edges: &str) -> Result<Graph> {
    let g = parse_edge_list(edges)?;
    if g.n() > MAX_N {
        return Err(forbdist::Error::CapExceeded {
            what: "vertices in the demo",
            value: g.n() as u128,
            cap: MAX_N as u128,
        });
    }
    Ok(g)
}

/// Vertices listed class by class, for drawing the adjacency matrix.
fn class_order(p: &Equipartition) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.n()).collect();
    order.sort_by_key(|&v| (p.class_of(v), v));
    order
}

fn quotient_view(g: &Graph, p: &Equipartition) -> Result<Value> {
    let r = reduce(g, p)?;
    Ok(json!({
        "n": g.n(),
        "edges": g.edges().collect::<Vec<_>>(),
        "order": class_order(p),
        "class_of": p.assignment(),
        "sizes": p.sizes(),
        "reduced": r.rows(),
    }))
}

pub fn generate_text(kind: &str, n: usize, p: f64, seed: u64) -> Result<String> {
    let g = match kind {
        "random" => Graph::random(n, p, seed)?,
        "planted" => {
            let m = n / 2;
            let extra = (p * (m * m) as f64).round() as usize;
            Graph::planted_bipartite(m, extra.min(m * m.saturating_sub(1)), seed)?
        }
        "cycle" => Graph::cycle(n),
        "complete" => Graph::complete(n),
        "bipartite" => Graph::complete_bipartite(n / 2, n - n / 2),
        _ => return Err(forbdist::Error::Invalid(format!("unknown graph kind {kind:?}"))),
    };
    Ok(format_edge_list(&g))
}

/// Reduced graph under a seeded random equipartition.
pub fn quotient_json(edges: &str, k: usize, seed: u64) -> Result<String> {
    let g = parse(edges)?;
    let p = random_equipartition(g.n(), k, seed)?;
    Ok(quotient_view(&g, &p)?.to_string())
}

/// For each standard pattern F: `hom(F, G)`, `hom(F, G/V)` and the lower
/// bound `hom(F, G)^C(f,2)`.
pub fn densities_json(edges: &str, k: usize, seed: u64) -> Result<String> {
    let g = parse(edges)?;
    let p = random_equipartition(g.n(), k, seed)?;
    let r = reduce(&g, &p)?;
    let mut rows = Vec::new();
    for (name, f) in standard_patterns() {
        let host = hom_density_graph(&f, &g)?;
        let quotient = hom_density_weighted(&f, &r)?;
        let pairs = (f.n() * (f.n() - 1) / 2) as i32;
        rows.push(json!({"pattern": name, "host": host, "quotient": quotient, "bound": host.powi(pairs)}));
    }
    Ok(json!({"k": p.k(), "sizes": p.sizes(), "rows": rows}).to_string())
}

/// Weak regular partition, with the reduced graph for display.
pub fn fk_json(edges: &str, gamma: f64, k0: usize, seed: u64) -> Result<String> {
    let g = parse(edges)?;
    let res = fk_partition(&g, &FkConfig::new(gamma, k0, seed))?;
    let mut view = quotient_view(&g, &res.partition)?;
    view["fk"] = json!({
        "gamma_achieved": res.gamma_achieved,
        "rounds": res.rounds,
        "certified": res.certified,
        "exact": res.exact,
        "energy": res.energy,
        "classes": res.classes,
    });
    Ok(view.to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn generate(kind: &str, n: usize, p: f64, seed: u32) -> std::result::Result<String, JsError> {
    js(generate_text(kind, n, p, seed.into()))
}

#[wasm_bindgen]
pub fn quotient(edges: &str, k: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(quotient_json(edges, k, seed.into()))
}

#[wasm_bindgen]
pub fn densities(edges: &str, k: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(densities_json(edges, k, seed.into()))
}

#[wasm_bindgen]
pub fn weak_regular(edges: &str, gamma: f64, k0: usize, seed: u32) -> std::result::Result<String, JsError> {
    js(fk_json(edges, gamma, k0, seed.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_json(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn quotient_of_complete_bipartite() {
        let text = generate_text("bipartite", 8, 0.0, 0).unwrap();
        let v = parse_json(&quotient_json(&text, 2, 1).unwrap());
        assert_eq!(v["n"], 8);
        assert_eq!(v["order"].as_array().unwrap().len(), 8);
        let sizes: Vec<u64> = v["sizes"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert_eq!(sizes, [4, 4]);
    }

    #[test]
    fn quotient_densities_respect_the_bound_when_k_divides_n() {
        let text = generate_text("random", 12, 0.5, 3).unwrap();
        let v = parse_json(&densities_json(&text, 3, 2).unwrap());
        for row in v["rows"].as_array().unwrap() {
            assert!(row["quotient"].as_f64().unwrap() >= row["bound"].as_f64().unwrap() - 1e-9, "{row}");
        }
    }

    #[test]
    fn weak_regular_on_planted_graph() {
        let text = generate_text("planted", 20, 0.1, 4).unwrap();
        let v = parse_json(&fk_json(&text, 0.2, 2, 0).unwrap());
        assert_eq!(v["fk"]["exact"], true);
        assert!(!v["fk"]["energy"].as_array().unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(quotient_json("3 1\n0 7\n", 2, 0).is_err());
        assert!(generate_text("star", 5, 0.0, 0).is_err());
        let big = generate_text("cycle", MAX_N + 1, 0.0, 0).unwrap();
        assert!(quotient_json(&big, 2, 0).is_err());
    }
}
