#![allow(dead_code)]

use biparsdp::graph::SparsityGraph;
use biparsdp::{QcqpInstance, SymMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn sym(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// 2x2 instance with one constraint.
pub fn small() -> QcqpInstance {
    QcqpInstance::from_parts(
        sym(&[&[-3.0, -1.0], &[-1.0, -2.0]]),
        vec![(sym(&[&[3.0, 4.0], &[4.0, 6.0]]), 1.0)],
    )
    .unwrap()
}

/// 4-cycle instance with two constraints.
pub fn cycle4() -> QcqpInstance {
    QcqpInstance::from_parts(cycle4_q0(), vec![(cycle4_q1(), 10.0), (cycle4_q2(), 10.0)]).unwrap()
}

pub fn cycle4_q0() -> SymMatrix {
    sym(&[
        &[0.0, -2.0, 0.0, 2.0],
        &[-2.0, 0.0, -1.0, 0.0],
        &[0.0, -1.0, 5.0, 1.0],
        &[2.0, 0.0, 1.0, -4.0],
    ])
}

pub fn cycle4_q1() -> SymMatrix {
    sym(&[
        &[5.0, 2.0, 0.0, 1.0],
        &[2.0, -1.0, 3.0, 0.0],
        &[0.0, 3.0, 3.0, -1.0],
        &[1.0, 0.0, -1.0, 4.0],
    ])
}

pub fn cycle4_q2() -> SymMatrix {
    sym(&[
        &[-1.0, 1.0, 0.0, 0.0],
        &[1.0, 4.0, -1.0, 0.0],
        &[0.0, -1.0, 6.0, 1.0],
        &[0.0, 0.0, 1.0, -2.0],
    ])
}

pub const CYCLE4_X: [[f64; 4]; 4] = [
    [61.12, -65.13, 13.45, -54.87],
    [-65.13, 69.41, -14.34, 58.48],
    [13.45, -14.34, 2.961, -12.08],
    [-54.87, 58.48, -12.08, 49.27],
];

pub const CYCLE4_XVEC: [f64; 4] = [7.818, -8.331, 1.721, -7.019];

/// Sign pattern (1,2)+ (1,3)- (1,4)+ (2,3)+ (3,4)+ with no (2,4) entry.
pub fn split_example() -> QcqpInstance {
    let q0 = sym(&[
        &[-1.0, 1.0, -1.0, 2.0],
        &[1.0, -2.0, 1.5, 0.0],
        &[-1.0, 1.5, 0.5, 0.5],
        &[2.0, 0.0, 0.5, -1.0],
    ]);
    let q1 = sym(&[
        &[4.0, 0.5, -0.5, 0.0],
        &[0.5, 4.0, 0.0, 0.0],
        &[-0.5, 0.0, 4.0, 1.0],
        &[0.0, 0.0, 1.0, 4.0],
    ]);
    QcqpInstance::from_parts(q0, vec![(q1, 2.0)]).unwrap()
}

/// Block-diagonal doubling of [`small`]: two components, two constraints.
pub fn small_doubled() -> QcqpInstance {
    let s = small();
    let zero = SymMatrix::zeros(2);
    let blockdiag = |a: &SymMatrix, b: &SymMatrix| {
        let mut m = SymMatrix::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, a.get(i, j));
                m.set(i + 2, j + 2, b.get(i, j));
            }
        }
        m
    };
    let q = s.matrix(1);
    QcqpInstance::from_parts(
        blockdiag(s.objective(), s.objective()),
        vec![(blockdiag(q, &zero), 1.0), (blockdiag(&zero, q), 1.0)],
    )
    .unwrap()
}

/// Random connected bipartite graph on `n >= 2` vertices. Vertices 0 and 1
/// sit on opposite sides, so every later vertex has an earlier neighbor
/// candidate across.
pub fn random_bipartite_graph(rng: &mut ChaCha8Rng, n: usize) -> SparsityGraph {
    let side: Vec<bool> = (0..n)
        .map(|v| if v < 2 { v == 1 } else { rng.gen_bool(0.5) })
        .collect();
    let mut edges = Vec::new();
    for v in 1..n {
        let across: Vec<usize> = (0..v).filter(|&u| side[u] != side[v]).collect();
        edges.push((across[rng.gen_range(0..across.len())], v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if side[i] != side[j] && rng.gen_bool(0.3) {
                edges.push((i, j));
            }
        }
    }
    SparsityGraph::from_edges(n, edges)
}

/// Connected bipartite instance with `Q^0_ij > 0` on every edge, nonnegative
/// constraint off-diagonals, a positive definite `Q^1` and `b > 0`.
pub fn random_nonnegative_bipartite(rng: &mut ChaCha8Rng, n: usize, m: usize) -> QcqpInstance {
    let g = random_bipartite_graph(rng, n);
    let mut q0 = SymMatrix::zeros(n);
    for i in 0..n {
        q0.set(i, i, rng.gen_range(-3.0..1.0));
    }
    for &(i, j) in g.edges() {
        q0.set(i, j, rng.gen_range(0.1..2.0));
    }
    let mut cons = Vec::new();
    for p in 0..m {
        let mut q = SymMatrix::zeros(n);
        for &(i, j) in g.edges() {
            if p == 0 || rng.gen_bool(0.5) {
                q.set(i, j, rng.gen_range(0.0..1.5));
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| q.get(i, j)).sum();
            let d = if p == 0 {
                row + rng.gen_range(0.5..2.0)
            } else {
                rng.gen_range(-1.0..3.0)
            };
            q.set(i, i, d);
        }
        cons.push((q, rng.gen_range(1.0..5.0)));
    }
    QcqpInstance::from_parts(q0, cons).unwrap()
}

/// Random symmetric matrix with entries in `[-1, 1]` and about `density`
/// of off-diagonal entries nonzero.
pub fn random_sym(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SymMatrix {
    let mut q = SymMatrix::zeros(n);
    for i in 0..n {
        q.set(i, i, rng.gen_range(-1.0..1.0));
        for j in i + 1..n {
            if rng.gen_bool(density) {
                q.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
    q
}

/// Minimum of a 2-variable QCQP by repeated grid refinement over the
/// feasible part of `[-r, r]^2`.
pub fn grid_minimum_2d(inst: &QcqpInstance, r: f64) -> (f64, [f64; 2]) {
    assert_eq!(inst.n(), 2);
    let steps = 400;
    let mut center = [0.0, 0.0];
    let mut half = r;
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for _ in 0..8 {
        let h = 2.0 * half / steps as f64;
        for a in 0..=steps {
            for b in 0..=steps {
                let x = [center[0] - half + a as f64 * h, center[1] - half + b as f64 * h];
                if inst.max_violation(&x).unwrap() > 0.0 {
                    continue;
                }
                let v = inst.objective_value(&x).unwrap();
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        center = best.1;
        half *= 0.1;
    }
    best
}

/// Erdos-Renyi graph.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparsityGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    SparsityGraph::from_edges(n, edges)
}

/// Instance on `g` where every edge carries one sign in every matrix.
/// `Q^1` is strictly diagonally dominant and `b > 0`. Returns the edge signs
/// aligned with `g.edges()`.
pub fn random_sign_definite(rng: &mut ChaCha8Rng, g: &SparsityGraph, m: usize) -> (QcqpInstance, Vec<f64>) {
    let n = g.n();
    let signs: Vec<f64> = g
        .edges()
        .iter()
        .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let mut mats = Vec::new();
    for p in 0..=m {
        let mut q = SymMatrix::zeros(n);
        for (&(i, j), s) in g.edges().iter().zip(&signs) {
            if p <= 1 || rng.gen_bool(0.5) {
                q.set(i, j, s * rng.gen_range(0.1..1.0));
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| q.get(i, j).abs()).sum();
            let d = if p == 1 {
                row + rng.gen_range(0.5..2.0)
            } else {
                rng.gen_range(-2.0..2.0)
            };
            q.set(i, i, d);
        }
        mats.push(q);
    }
    let q0 = mats.remove(0);
    let cons = mats.into_iter().map(|q| (q, rng.gen_range(1.0..4.0))).collect();
    (QcqpInstance::from_parts(q0, cons).unwrap(), signs)
}

/// Random tree on `n` vertices.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> SparsityGraph {
    SparsityGraph::from_edges(n, (1..n).map(|v| (rng.gen_range(0..v), v)))
}

/// 2-coloring by trying every assignment.
pub fn brute_force_bipartite(g: &SparsityGraph) -> bool {
    let n = g.n();
    (0u32..1 << n).any(|mask| g.edges().iter().all(|&(i, j)| (mask >> i & 1) != (mask >> j & 1)))
}
