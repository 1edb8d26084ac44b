use forbdist::estimator::size_floor;
use forbdist::graph::{Graph, WeightedGraph};
use forbdist::hom::hom_density_weighted;
use forbdist::io::{format_edge_list, parse_edge_list};
use forbdist::metrics::{cut_distance_exact, cut_distance_heuristic, d1, edit_distance};
use forbdist::partition::{random_equipartition, Equipartition};
use forbdist::quotient::{blow_up_reduced, energy, reduce, round_to_target};
use forbdist::regularity::{fk_partition, FkConfig};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, any::<u64>(), 0.0..=1.0f64).prop_map(|(n, s, p)| Graph::random(n, p, s).unwrap())
}

fn weighted(k: usize) -> impl Strategy<Value = WeightedGraph> {
    proptest::collection::vec(0.0..=1.0f64, k * (k + 1) / 2).prop_map(move |upper| {
        let mut w = vec![0.0; k * k];
        let mut it = upper.into_iter();
        for i in 0..k {
            for j in i..k {
                let x = it.next().unwrap();
                w[i * k + j] = x;
                w[j * k + i] = x;
            }
        }
        WeightedGraph::from_row_major(k, w).unwrap()
    })
}

fn triple() -> impl Strategy<Value = (WeightedGraph, WeightedGraph, WeightedGraph)> {
    (1..=6usize).prop_flat_map(|k| (weighted(k), weighted(k), weighted(k)))
}

fn graph_with_partition(max_n: usize) -> impl Strategy<Value = (Graph, Equipartition)> {
    (graph(max_n), any::<u64>(), 1..=4usize).prop_map(|(g, s, k)| {
        let k = k.min(g.n());
        let p = random_equipartition(g.n(), k, s).unwrap();
        (g, p)
    })
}

proptest! {
    #[test]
    fn split_keeps_an_equipartition(n in 1..40usize, k in 1..6usize, seed: u64, marks in proptest::collection::vec(0..4usize, 40)) {
        let k = k.min(n);
        let p = random_equipartition(n, k, seed).unwrap();
        let q = p.split_classes(&marks[..n]).unwrap();
        let (lo, hi) = (q.sizes().iter().min().unwrap(), q.sizes().iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        let mut cells: Vec<(usize, usize)> = (0..n).map(|v| (p.class_of(v), marks[v])).collect();
        cells.sort();
        cells.dedup();
        prop_assert_eq!(q.k(), cells.len());
        prop_assert_eq!(q.sizes().iter().sum::<usize>(), n);
    }

    #[test]
    fn reduced_graphs_are_valid((g, p) in graph_with_partition(14)) {
        let r = reduce(&g, &p).unwrap();
        prop_assert!(r.as_slice().iter().all(|&x| (0.0..=1.0).contains(&x)));
        let e = energy(&r, &p);
        prop_assert!((0.0..=1.0).contains(&e));
        // The blow-up averages to the same class densities.
        let b = blow_up_reduced(&g, &p).unwrap();
        let n = g.n() as f64;
        let total: f64 = b.as_slice().iter().sum();
        prop_assert!((total - 2.0 * g.edge_count() as f64).abs() < 1e-9 * n * n);
    }

    #[test]
    fn rounding_lands_near_the_target((g, p) in graph_with_partition(12), s in weighted(4)) {
        let k = p.k();
        let rows: Vec<Vec<f64>> = s.rows().into_iter().take(k).map(|r| r[..k].to_vec()).collect();
        let s = WeightedGraph::from_rows(&rows).unwrap();
        // The bound needs every class pair to span at least k cells.
        prop_assume!(g.n() as u128 >= size_floor(k));
        let h = round_to_target(&g, &p, &s).unwrap();
        prop_assert!(d1(&reduce(&h, &p).unwrap(), &s).unwrap() <= 2.0 / k as f64 + 1e-9);
    }

    #[test]
    fn distances_are_symmetric_and_metric((a, b, c) in triple()) {
        let dab = d1(&a, &b).unwrap();
        prop_assert_eq!(dab, d1(&b, &a).unwrap());
        prop_assert!(d1(&a, &c).unwrap() <= dab + d1(&b, &c).unwrap() + 1e-12);
        let cab = cut_distance_exact(&a, &b).unwrap().value;
        prop_assert!((cab - cut_distance_exact(&b, &a).unwrap().value).abs() <= 1e-12);
        let cac = cut_distance_exact(&a, &c).unwrap().value;
        prop_assert!(cac <= cab + cut_distance_exact(&b, &c).unwrap().value + 1e-12);
        prop_assert!(cab <= dab + 1e-12);
    }

    #[test]
    fn edit_distance_is_metric(n in 1..12usize, s1: u64, s2: u64, s3: u64) {
        let (a, b, c) = (Graph::random(n, 0.5, s1).unwrap(), Graph::random(n, 0.5, s2).unwrap(), Graph::random(n, 0.5, s3).unwrap());
        let ab = edit_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, edit_distance(&b, &a).unwrap());
        // Exact on the integer counts behind the quotients.
        let count = |d: f64| (d * (n * n) as f64).round() as u64;
        prop_assert!(count(edit_distance(&a, &c).unwrap()) <= count(ab) + count(edit_distance(&b, &c).unwrap()));
        prop_assert_eq!(d1(&a.to_weighted(), &b.to_weighted()).unwrap(), 2.0 * ab);
    }

    #[test]
    fn heuristic_cut_is_a_lower_bound((a, b, _) in triple(), restarts in 1..6usize, seed: u64) {
        let h = cut_distance_heuristic(&a, &b, restarts, seed).unwrap();
        let e = cut_distance_exact(&a, &b).unwrap();
        prop_assert!(h.value <= e.value + 1e-12);
        let d: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect();
        prop_assert!((h.witness.evaluate(&d) - h.witness.value).abs() <= 1e-12);
        prop_assert!((e.witness.evaluate(&d) - e.witness.value).abs() <= 1e-12);
    }

    #[test]
    fn densities_lie_in_the_unit_interval(r in (1..=5usize).prop_flat_map(weighted), which in 0..5usize) {
        let f = [Graph::empty(1), Graph::complete(2), Graph::path(3), Graph::complete(3), Graph::cycle(4)][which].clone();
        let h = hom_density_weighted(&f, &r).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&h));
        if f.n() == 1 {
            prop_assert!((h - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_regularity_is_deterministic_and_bounded(g in graph(16), seed: u64) {
        prop_assume!(g.n() >= 2);
        let cfg = FkConfig::new(0.2, 2, seed);
        let a = fk_partition(&g, &cfg).unwrap();
        prop_assert_eq!(&a, &fk_partition(&g, &cfg).unwrap());
        prop_assert!(a.partition.k() >= 2 && a.partition.k() <= g.n());
        prop_assert!(a.classes.windows(2).all(|w| w[1] > w[0] && w[1] <= 4 * w[0]));
        prop_assert!(a.certified == (a.gamma_achieved <= 0.2));
    }

    #[test]
    fn formats_round_trip(g in graph(20), seed: u64, k in 1..5usize) {
        prop_assert_eq!(&parse_edge_list(&format_edge_list(&g)).unwrap(), &g);
        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(&serde_json::from_str::<Graph>(&json).unwrap(), &g);
        let p = random_equipartition(g.n(), k.min(g.n()), seed).unwrap();
        prop_assert_eq!(&Equipartition::from_text(&p.to_text()).unwrap(), &p);
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(&serde_json::from_str::<Equipartition>(&json).unwrap(), &p);
        let r = reduce(&g, &p).unwrap();
        let back: WeightedGraph = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }
}
