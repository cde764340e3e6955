mod common;

use biparsdp::certify::{certify_bipartite, certify_forest, certify_sign_cycle};
use biparsdp::graph::{bipartition, build_graph, cycle_basis, cycle_edges, edge_signs, Sign, SparsityGraph};
use biparsdp::io::{instance_to_json, parse_instance};
use biparsdp::qcqp::{dehomogenize, evaluate_quadratic, homogenize};
use biparsdp::transform::{
    build_connecting_perturbation, build_full_graph_perturbation, sign_split_transform,
};
use biparsdp::{certify, CertifyOptions, GeneralQcqpInstance, QcqpInstance, SymMatrix, Verdict};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_x(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

fn cycle_condition(g: &SparsityGraph, signs: &[f64]) -> bool {
    cycle_basis(g).cycles.iter().all(|c| {
        let prod: f64 = cycle_edges(c)
            .iter()
            .map(|e| signs[g.edges().binary_search(e).unwrap()])
            .product();
        let want = if c.len() % 2 == 0 { 1.0 } else { -1.0 };
        prod == want
    })
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn quadratic_is_even(seed in any::<u64>(), n in 1usize..8) {
        let mut r = rng(seed);
        let q = random_sym(&mut r, n, 0.6);
        let x = random_x(&mut r, n);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(evaluate_quadratic(&q, &x).unwrap(), evaluate_quadratic(&q, &neg).unwrap());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), n in 1usize..7, m in 1usize..4) {
        let mut r = rng(seed);
        let q0 = random_sym(&mut r, n, 0.5);
        let cons = (0..m).map(|_| (random_sym(&mut r, n, 0.5), r.gen_range(-2.0..5.0))).collect();
        let inst = QcqpInstance::from_parts(q0, cons).unwrap();
        let back = parse_instance(&instance_to_json(&inst)).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(instance_to_json(&back), instance_to_json(&inst));
    }

    #[test]
    fn homogenized_values_match(seed in any::<u64>(), n in 1usize..6, m in 1usize..3) {
        let mut r = rng(seed);
        let q0 = random_sym(&mut r, n, 0.5);
        let cons = (0..m).map(|_| (random_sym(&mut r, n, 0.5), 1.0)).collect();
        let lin = |r: &mut ChaCha8Rng| (0..n).map(|_| r.gen_range(-2.0..2.0)).collect::<Vec<f64>>();
        let q = lin(&mut r);
        let qs = (0..m).map(|_| lin(&mut r)).collect();
        let g = GeneralQcqpInstance::new(QcqpInstance::from_parts(q0, cons).unwrap(), q, qs).unwrap();
        let h = homogenize(&g);
        let x = random_x(&mut r, n);
        let mut xt = vec![1.0];
        xt.extend(&x);
        for p in 0..=m {
            let a = g.evaluate(p, &x).unwrap();
            let b = evaluate_quadratic(h.matrix(p), &xt).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        let scaled: Vec<f64> = xt.iter().map(|v| -2.0 * v).collect();
        let back = dehomogenize(&scaled).unwrap();
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bipartition_matches_brute_force(seed in any::<u64>(), n in 1usize..11, d in 0.1f64..0.6) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, d);
        let b = bipartition(&g);
        prop_assert_eq!(b.bipartite, brute_force_bipartite(&g));
        let basis_even = cycle_basis(&g).cycles.iter().all(|c| c.len() % 2 == 0);
        prop_assert_eq!(b.bipartite, basis_even);
        if b.bipartite {
            for &(i, j) in g.edges() {
                prop_assert!(b.parts.0.contains(&i) != b.parts.0.contains(&j));
            }
        } else {
            prop_assert!(b.witness.len() % 2 == 1);
            for (i, j) in cycle_edges(&b.witness) {
                prop_assert!(g.has_edge(i, j));
            }
        }
    }

    #[test]
    fn opposite_entries_are_never_definite(seed in any::<u64>(), n in 2usize..7, m in 1usize..4) {
        let mut r = rng(seed);
        let q0 = random_sym(&mut r, n, 0.6);
        let cons = (0..m).map(|_| (random_sym(&mut r, n, 0.6), 1.0)).collect();
        let inst = QcqpInstance::from_parts(q0, cons).unwrap();
        let g = build_graph(&inst, 0.0);
        let signs = edge_signs(&inst, &g, 0.0);
        for ((i, j), s) in signs.iter() {
            let pos = inst.matrices().any(|q| q.get(i, j) > 0.0);
            let neg = inst.matrices().any(|q| q.get(i, j) < 0.0);
            if pos && neg {
                prop_assert_eq!(s, Sign::Mixed);
            }
        }
    }

    #[test]
    fn transform_preserves_values(seed in any::<u64>(), n in 2usize..7, m in 1usize..4) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.5);
        let (inst, _) = random_sign_definite(&mut r, &g, m);
        let delta = r.gen_range(0.1..3.0);
        let t = sign_split_transform(&inst, delta, 0.0).unwrap();
        let x = random_x(&mut r, n);
        let mut xz = x.clone();
        xz.extend(x.iter().map(|v| -v));
        for p in 0..=m {
            let a = evaluate_quadratic(inst.matrix(p), &x).unwrap();
            let b = evaluate_quadratic(t.transformed.matrix(p), &xz).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "p={} {} vs {}", p, a, b);
        }
        let coupling = t.transformed.matrix(m + 1);
        prop_assert!(evaluate_quadratic(coupling, &xz).unwrap().abs() < 1e-12);
        for i in 0..2 * n {
            prop_assert_eq!(coupling.get(i, i), 1.0);
        }
        for q in t.transformed.matrices() {
            for i in 0..2 * n {
                for j in i + 1..2 * n {
                    prop_assert!(q.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn transformed_bipartite_iff_cycle_condition(seed in any::<u64>(), n in 2usize..8, d in 0.2f64..0.8) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, d);
        let (inst, signs) = random_sign_definite(&mut r, &g, 1);
        let t = sign_split_transform(&inst, 1.0, 0.0).unwrap();
        let tb = bipartition(&build_graph(&t.transformed, 0.0)).bipartite;
        prop_assert_eq!(tb, cycle_condition(&g, &signs));
    }

    #[test]
    fn sign_cycle_ignores_diagonal_rescaling(seed in any::<u64>(), n in 2usize..7, d in 0.2f64..0.8) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, d);
        let (inst, _) = random_sign_definite(&mut r, &g, 2);
        let scale: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..5.0)).collect();
        let rescale = |q: &SymMatrix| {
            let mut o = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    o.set(i, j, scale[i] * q.get(i, j) * scale[j]);
                }
            }
            o
        };
        let scaled = QcqpInstance::from_parts(
            rescale(inst.objective()),
            inst.constraints().iter().map(|c| (rescale(&c.matrix), c.rhs)).collect(),
        )
        .unwrap();
        let opts = CertifyOptions::default();
        let a = certify_sign_cycle(&inst, &opts);
        let b = certify_sign_cycle(&scaled, &opts);
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.cycle_checks, b.cycle_checks);
        prop_assert_eq!(a.sign_summary, b.sign_summary);
    }

    #[test]
    fn perturbations_are_negative_semidefinite(seed in any::<u64>(), n in 2usize..9, d in 0.1f64..0.5) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, d);
        let (inst, _) = random_sign_definite(&mut r, &g, 1);
        let eps = r.gen_range(1e-3..1.0);
        let mut built = Vec::new();
        if let Ok(p) = build_connecting_perturbation(&inst, eps, 0.0) {
            built.push(p);
        }
        if let Ok(p) = build_full_graph_perturbation(&inst, eps, 0.0) {
            built.push(p);
        }
        for p in built {
            prop_assert!(p.p.max_eigenvalue() <= 1e-12);
            for i in 0..n {
                let row: f64 = (0..n).map(|j| p.p.get(i, j)).sum();
                prop_assert_eq!(row, 0.0);
            }
            let diff = p.instance.objective().add(&inst.objective().scaled(-1.0));
            prop_assert!(diff.add(&p.p.scaled(-eps)).frobenius_norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn forest_and_bipartite_rules_agree(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let g = random_tree(&mut r, n);
        let (inst, _) = random_sign_definite(&mut r, &g, 1);
        let opts = CertifyOptions::default();
        let f = certify_forest(&inst, &opts);
        let positive = !f.per_edge.is_empty()
            && f.per_edge.iter().all(|e| e.mu_min.is_some_and(|v| v > opts.mu_tol));
        prop_assume!(positive);
        let b = certify_bipartite(&inst, &opts);
        prop_assert_eq!(f.verdict, b.verdict);
    }

    #[test]
    fn stricter_tolerance_never_adds_certificates(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.5);
        let (inst, _) = random_sign_definite(&mut r, &g, 1);
        let loose = certify(&inst, &CertifyOptions::default());
        let strict = certify(&inst, &CertifyOptions { mu_tol: 1e-2, ..CertifyOptions::default() });
        if loose.verdict == Verdict::NotCertified {
            prop_assert_ne!(strict.verdict, Verdict::CertifiedExact);
        }
    }
}
