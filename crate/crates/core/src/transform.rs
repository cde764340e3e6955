//! Sign-splitting and epsilon-perturbation constructions.
//!
//! The sign split writes each `Q^p = D^p + 2 N^p_+ - 2 N^p_-` with
//! nonnegative `N^p_+`, `N^p_-` and introduces `z = -x`:
//!
//! ```text
//! min  (x,z)^T [D^0 + 2N^0_+, N^0_-; N^0_-, O] (x,z)
//! s.t. (x,z)^T [D^p + 2N^p_+, N^p_-; N^p_-, O] (x,z) <= b_p
//!      ||x + z||^2 <= 0
//! ```
//!
//! All off-diagonal entries of the result are nonnegative.

use serde::{Deserialize, Serialize};

use crate::certify::{certify, CertifyOptions, Verdict};
use crate::error::{Error, Result};
use crate::graph::{build_graph, connected_components, edge_signs, negative_laplacian, Sign, SparsityGraph};
use crate::matrix::SymMatrix;
use crate::qcqp::{Constraint, QcqpInstance};
use crate::relaxation::solve_relaxation;

pub const DEFAULT_DELTA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformMapping {
    pub original_n: usize,
    pub original_m: usize,
    /// Variables `original_n + 1 ..= 2 original_n` (1-based) hold `z = -x`.
    pub z_offset: usize,
    /// 1-based index of the `||x + z||^2 <= 0` constraint.
    pub coupling_constraint: usize,
    pub description: String,
}

#[derive(Debug, Clone)]
pub struct TransformResult {
    pub transformed: QcqpInstance,
    pub delta: f64,
    pub mapping: TransformMapping,
}

/// `(D, N_+, N_-)` for one matrix.
fn split(q: &SymMatrix, delta: f64) -> (SymMatrix, SymMatrix, SymMatrix) {
    let n = q.n();
    let mut d = SymMatrix::zeros(n);
    let mut pos = SymMatrix::zeros(n);
    let mut neg = SymMatrix::zeros(n);
    for i in 0..n {
        d.set(i, i, q.get(i, i) + 2.0 * delta);
        neg.set(i, i, delta);
        for j in i + 1..n {
            let v = q.get(i, j);
            if v > 0.0 {
                pos.set(i, j, 0.5 * v);
            } else if v < 0.0 {
                neg.set(i, j, -0.5 * v);
            }
        }
    }
    (d, pos, neg)
}

fn split_block(q: &SymMatrix, delta: f64) -> SymMatrix {
    let (d, pos, neg) = split(q, delta);
    SymMatrix::block2(&d.add(&pos.scaled(2.0)), &neg, &SymMatrix::zeros(q.n()))
}

/// Builds the `2n`-variable nonnegative off-diagonal instance.
///
/// Rejects instances with a mixed-sign edge (entries within `zero_tol` of
/// zero are ignored when classifying).
pub fn sign_split_transform(inst: &QcqpInstance, delta: f64, zero_tol: f64) -> Result<TransformResult> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let g = build_graph(inst, zero_tol);
    let signs = edge_signs(inst, &g, zero_tol);
    if let Some((i, j)) = signs.first_mixed() {
        return Err(Error::NotSignDefinite(i + 1, j + 1));
    }
    let n = inst.n();
    let m = inst.m();
    let objective = split_block(inst.objective(), delta);
    let mut constraints: Vec<Constraint> = inst
        .constraints()
        .iter()
        .map(|c| Constraint {
            matrix: split_block(&c.matrix, delta),
            rhs: c.rhs,
        })
        .collect();
    let eye = SymMatrix::identity(n);
    constraints.push(Constraint {
        matrix: SymMatrix::block2(&eye, &eye, &eye),
        rhs: 0.0,
    });
    let transformed = QcqpInstance::new(objective, constraints)?;
    Ok(TransformResult {
        transformed,
        delta,
        mapping: TransformMapping {
            original_n: n,
            original_m: m,
            z_offset: n,
            coupling_constraint: m + 1,
            description: format!(
                "variables {}..{} hold z = -x; constraint {} is ||x + z||^2 <= 0",
                n + 1,
                2 * n,
                m + 1
            ),
        },
    })
}

/// Returns the first half of `(x, z)` after checking `||x + z|| <= tol (1 + ||x||)`.
pub fn recover_from_transformed(x_tilde: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !x_tilde.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "transformed vector has odd length {}",
            x_tilde.len()
        )));
    }
    let n = x_tilde.len() / 2;
    let (x, z) = x_tilde.split_at(n);
    let residual = x
        .iter()
        .zip(z)
        .map(|(a, b)| (a + b) * (a + b))
        .sum::<f64>()
        .sqrt();
    let norm_x = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let bound = tol * (1.0 + norm_x);
    if residual > bound {
        return Err(Error::CouplingViolated { residual, bound });
    }
    Ok(x.to_vec())
}

#[derive(Debug, Clone)]
pub struct PerturbedInstance {
    /// Same constraints, objective `Q^0 + epsilon P`.
    pub instance: QcqpInstance,
    pub epsilon: f64,
    pub p: SymMatrix,
    /// Connecting edges (0-based); empty for the full-graph variant.
    pub f: Vec<(usize, usize)>,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {eps}"
        )))
    }
}

/// Joins the components of the sparsity graph by a path over their smallest
/// vertices and adds `epsilon` times the negative Laplacian of that path.
pub fn build_connecting_perturbation(
    inst: &QcqpInstance,
    epsilon: f64,
    zero_tol: f64,
) -> Result<PerturbedInstance> {
    check_epsilon(epsilon)?;
    let comps = connected_components(&build_graph(inst, zero_tol));
    if comps.len() < 2 {
        return Err(Error::NothingToConnect);
    }
    let reps: Vec<usize> = comps
        .iter()
        .map(|c| *c.iter().min().expect("components are nonempty"))
        .collect();
    let f: Vec<(usize, usize)> = reps
        .windows(2)
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .collect();
    let p = negative_laplacian(&SparsityGraph::from_edges(inst.n(), f.iter().copied()));
    let mut obj = inst.objective().clone();
    obj.axpy(epsilon, &p);
    Ok(PerturbedInstance {
        instance: inst.with_objective(obj)?,
        epsilon,
        p,
        f,
    })
}

/// Adds `epsilon` times the negative Laplacian of the whole sparsity graph.
pub fn build_full_graph_perturbation(
    inst: &QcqpInstance,
    epsilon: f64,
    zero_tol: f64,
) -> Result<PerturbedInstance> {
    check_epsilon(epsilon)?;
    let g = build_graph(inst, zero_tol);
    if g.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let p = negative_laplacian(&g);
    let mut obj = inst.objective().clone();
    obj.axpy(epsilon, &p);
    Ok(PerturbedInstance {
        instance: inst.with_objective(obj)?,
        epsilon,
        p,
        f: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    Connect,
    FullLaplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub verdict: Option<Verdict>,
    pub applied_rule: Option<String>,
    pub primal_value: Option<f64>,
    /// `min S(y*; epsilon)_kl` over edges of the perturbed graph at the
    /// relaxation's dual optimum.
    pub min_edge_entry: Option<f64>,
    pub error: Option<String>,
}

/// Certifies and solves each perturbed instance along a decreasing sequence.
pub fn epsilon_sweep_validation(
    inst: &QcqpInstance,
    epsilons: &[f64],
    mode: PerturbationMode,
    opts: &CertifyOptions,
) -> Result<Vec<SweepPoint>> {
    if epsilons.is_empty()
        || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0))
        || epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::NotDecreasing);
    }
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let built = match mode {
            PerturbationMode::Connect => build_connecting_perturbation(inst, eps, opts.zero_tol),
            PerturbationMode::FullLaplacian => build_full_graph_perturbation(inst, eps, opts.zero_tol),
        }?;
        let pert = &built.instance;
        let mut point = SweepPoint {
            epsilon: eps,
            verdict: None,
            applied_rule: None,
            primal_value: None,
            min_edge_entry: None,
            error: None,
        };
        let report = certify(pert, opts);
        point.verdict = Some(report.verdict);
        point.applied_rule = report.applied_rule.map(|r| r.to_string());
        match solve_relaxation(pert, opts.solver_tol, opts.rank_tol) {
            Ok(r) => {
                point.primal_value = Some(r.primal_value);
                let g = build_graph(pert, opts.zero_tol);
                point.min_edge_entry = g
                    .edges()
                    .iter()
                    .map(|&(k, l)| r.s_of_y.get(k, l))
                    .reduce(f64::min);
            }
            Err(e) => point.error = Some(e.to_string()),
        }
        out.push(point);
    }
    Ok(out)
}

/// Edge classes of the transformed graph, as 1-based pairs: same-side edges
/// from positive edges, cross edges from negative edges, and the `(i, i+n)` links.
pub fn edge_classes(inst: &QcqpInstance, zero_tol: f64) -> Result<[Vec<(usize, usize)>; 3]> {
    let g = build_graph(inst, zero_tol);
    let signs = edge_signs(inst, &g, zero_tol);
    if let Some((i, j)) = signs.first_mixed() {
        return Err(Error::NotSignDefinite(i + 1, j + 1));
    }
    let n = inst.n();
    let mut same = Vec::new();
    let mut cross = Vec::new();
    for ((i, j), s) in signs.iter() {
        match s {
            Sign::Positive => same.push((i + 1, j + 1)),
            Sign::Negative => {
                cross.push((i + 1, j + 1 + n));
                cross.push((j + 1, i + 1 + n));
            }
            Sign::Mixed => unreachable!(),
        }
    }
    cross.sort_unstable();
    let links = (1..=n).map(|i| (i, i + n)).collect();
    Ok([same, cross, links])
}
