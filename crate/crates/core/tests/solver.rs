mod common;

use biparsdp::relaxation::{complementarity_residual, extract_rank1, numerical_rank, solve_relaxation};
use biparsdp::sdp::{
    max_min_eigen_combination, minimize_linear_functional_over_dual_cone, solve, SdpProblem, SolveStatus,
};
use biparsdp::{QcqpInstance, SymMatrix};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn one_dimensional_family_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let c: f64 = rng.gen_range(-5.0..5.0);
        let u: f64 = rng.gen_range(0.1..10.0);
        let p = SdpProblem::new(
            SymMatrix::from_diagonal(&[c]),
            vec![SymMatrix::identity(1)],
            vec![u],
        )
        .unwrap();
        let s = solve(&p, 1e-8).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        let want = if c < 0.0 { c * u } else { 0.0 };
        assert!(
            (s.primal_obj - want).abs() < 1e-6 * (1.0 + want.abs()),
            "c={c} u={u}: {}",
            s.primal_obj
        );
    }
}

#[test]
fn one_dimensional_family_embedded_in_2x2() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let c: f64 = rng.gen_range(-5.0..5.0);
        let u: f64 = rng.gen_range(0.1..10.0);
        let p = SdpProblem::new(
            SymMatrix::from_diagonal(&[c, 0.0]),
            vec![SymMatrix::from_diagonal(&[1.0, 0.0])],
            vec![u],
        )
        .unwrap();
        let s = solve(&p, 1e-8).unwrap();
        // X_22 is free in a zero-cost direction, so only values are compared.
        let want = if c < 0.0 { c * u } else { 0.0 };
        if s.status == SolveStatus::Optimal {
            assert!((s.primal_obj - want).abs() < 1e-5 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn optimal_solutions_satisfy_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.gen_range(2..6);
        let inst = random_nonnegative_bipartite(&mut rng, n, 2);
        let prob = biparsdp::relaxation::build_relaxation(&inst);
        let s = solve(&prob, 1e-8).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        let eps = 1e-7;
        assert!(s.x.min_eigenvalue() >= -eps);
        assert!(s.y.iter().all(|&v| v >= -eps));
        assert!(s.s.min_eigenvalue() >= -eps);
        assert!((s.primal_obj - s.dual_obj).abs() <= 1e-8 * (1.0 + s.primal_obj.abs()) * 10.0);
        assert!(s.primal_obj >= s.dual_obj - 1e-8 * (1.0 + s.primal_obj.abs()) * 10.0);
        assert!(s.residuals.primal_feas <= 1e-8 && s.residuals.dual_feas <= 1e-8);
        // Recompute the residuals from the returned iterates.
        for (p, a) in prob.a.iter().enumerate() {
            assert!((a.dot(&s.x) + s.slack[p] - prob.b[p]).abs() <= 1e-6 * (1.0 + prob.b[p].abs()));
        }
        let mut s_of_y = prob.c.clone();
        for (p, a) in prob.a.iter().enumerate() {
            s_of_y.axpy(s.y[p], a);
        }
        assert!(s_of_y.add(&s.s.scaled(-1.0)).frobenius_norm() < 1e-6);
    }
}

#[test]
fn edge_minimum_monotone_in_box() {
    let inst = cycle4();
    let mut prev = f64::INFINITY;
    let mut feasible = 0;
    for cap in [1.0, 5.0, 10.0, 100.0, 1e4, 1e6] {
        match minimize_linear_functional_over_dual_cone(&inst, 2, 3, cap, 1e-8) {
            Ok(r) => {
                assert!(r.value <= prev + 1e-6, "cap {cap}: {} after {prev}", r.value);
                prev = r.value;
                feasible += 1;
            }
            Err(biparsdp::Error::DualSideEmpty) => assert_eq!(feasible, 0, "cap {cap} lost feasibility"),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(feasible >= 3);
}

#[test]
fn small_box_is_flagged() {
    let r = minimize_linear_functional_over_dual_cone(&cycle4(), 2, 3, 5.0, 1e-8);
    // With y <= 5 no feasible S(y) exists or the box binds.
    match r {
        Ok(f) => assert!(!f.attained),
        Err(e) => assert!(matches!(
            e,
            biparsdp::Error::DualSideEmpty | biparsdp::Error::Solver(_)
        )),
    }
}

#[test]
fn empty_dual_side_is_reported() {
    // S(y) = diag(-1, -1) + y diag(1, -1) is never PSD.
    let inst = QcqpInstance::from_parts(
        sym(&[&[-1.0, 1.0], &[1.0, -1.0]]),
        vec![(sym(&[&[1.0, 0.5], &[0.5, -1.0]]), 1.0)],
    )
    .unwrap();
    let r = minimize_linear_functional_over_dual_cone(&inst, 0, 1, 1e6, 1e-8);
    assert!(matches!(r, Err(biparsdp::Error::DualSideEmpty)), "{r:?}");
}

#[test]
fn eigen_combination_trivial_cases() {
    let id = QcqpInstance::from_parts(SymMatrix::zeros(2), vec![(SymMatrix::identity(2), 1.0)]).unwrap();
    let e = max_min_eigen_combination(&id, 1e-8).unwrap();
    assert!((e.t_star - 1.0).abs() < 1e-12);
    assert_eq!(e.y, vec![1.0]);
    let indef = QcqpInstance::from_parts(
        SymMatrix::zeros(2),
        vec![(SymMatrix::from_diagonal(&[1.0, -1.0]), 1.0)],
    )
    .unwrap();
    assert!(max_min_eigen_combination(&indef, 1e-8).unwrap().t_star <= 0.0);
    let pair = QcqpInstance::from_parts(
        SymMatrix::zeros(2),
        vec![
            (SymMatrix::from_diagonal(&[1.0, -1.0]), 1.0),
            (SymMatrix::from_diagonal(&[-1.0, 3.0]), 1.0),
        ],
    )
    .unwrap();
    // lambda_min(diag(y - (1-y), -y + 3(1-y))) is maximized at y = 2/3 with value 1/3.
    let e = max_min_eigen_combination(&pair, 1e-8).unwrap();
    assert!((e.t_star - 1.0 / 3.0).abs() < 1e-6, "{}", e.t_star);
}

#[test]
fn rank_of_perturbed_outer_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let n = rng.gen_range(2..7);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        let x = SymMatrix::outer(&v).add(&SymMatrix::identity(n).scaled(1e-12));
        assert_eq!(numerical_rank(&x, 1e-6), 1);
    }
}

#[test]
fn rank_one_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..50 {
        let n = rng.gen_range(1..8);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let back = extract_rank1(&SymMatrix::outer(&x), 1e-6).unwrap();
        let sign = if back.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        for (a, b) in back.iter().zip(&x) {
            assert!((sign * a - b).abs() < 1e-10, "{back:?} vs {x:?}");
        }
    }
}

#[test]
fn complementarity_on_cycle4_optimum() {
    let inst = cycle4();
    let r = solve_relaxation(&inst, 1e-8, 1e-6).unwrap();
    let c = complementarity_residual(&inst, &r.x_star, &r.y_star).unwrap();
    assert!(c <= 1e-6 * (1.0 + r.x_star.frobenius_norm()), "{c}");
    assert!((r.complementarity - c).abs() < 1e-12);
    assert!(r.s_of_y.min_eigenvalue() >= -1e-7);
}

#[test]
fn small_relaxation_matches_grid_oracle() {
    let inst = small();
    let (oracle, x) = grid_minimum_2d(&inst, 3.0);
    assert!((oracle + 7.6742).abs() < 1e-3, "{oracle} at {x:?}");
    let r = solve_relaxation(&inst, 1e-8, 1e-6).unwrap();
    assert!((r.primal_value - oracle).abs() < 1e-3);
}
