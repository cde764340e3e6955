//! Small auxiliary SDPs over the multipliers `y` of a QCQP.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ipm::{solve_conic, ConicProblem, IpmSettings};
use super::{check_tol, SolveStatus};
use crate::error::{Error, Result};
use crate::qcqp::QcqpInstance;

/// Result of optimizing `S(y)_kl` over `{y : 0 <= y <= y_cap, S(y) >= 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeFunctional {
    pub value: f64,
    /// `false` when some `y_p` sits on the box `y_cap`, so `value` may not be
    /// the true optimum over the unbounded set.
    pub attained: bool,
    pub y: Vec<f64>,
}

/// Fraction of `y_cap` above which a multiplier counts as box-active.
const BOX_ACTIVE: f64 = 0.99;

fn check_pair(inst: &QcqpInstance, k: usize, l: usize) -> Result<()> {
    if k >= inst.n() || l >= inst.n() || k == l {
        return Err(Error::InvalidArgument(format!(
            "({}, {}) is not an off-diagonal pair of a {}x{} instance",
            k + 1,
            l + 1,
            inst.n(),
            inst.n()
        )));
    }
    Ok(())
}

fn edge_functional(
    inst: &QcqpInstance,
    k: usize,
    l: usize,
    y_cap: f64,
    tol: f64,
    maximize: bool,
) -> Result<EdgeFunctional> {
    inst.require_constraints()?;
    check_pair(inst, k, l)?;
    check_tol(tol)?;
    if !(y_cap.is_finite() && y_cap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "y_cap must be positive, got {y_cap}"
        )));
    }
    let n = inst.n();
    let m = inst.m();
    let sign = if maximize { 1.0 } else { -1.0 };
    // S = C - sum y_p A_p with A_p = -Q^p; the box rows are 0 <= y_p <= y_cap.
    let a: Vec<DMatrix<f64>> = (1..=m).map(|p| -inst.matrix(p).as_dense()).collect();
    let b = DVector::from_fn(m, |p, _| sign * inst.matrix(p + 1).get(k, l));
    let mut c_lin = DVector::zeros(2 * m);
    let mut a_lin = DMatrix::zeros(m, 2 * m);
    for p in 0..m {
        a_lin[(p, p)] = -1.0;
        a_lin[(p, m + p)] = 1.0;
        c_lin[m + p] = y_cap;
    }
    let prob = ConicProblem {
        c: inst.objective().as_dense().clone(),
        a,
        c_lin,
        a_lin,
        b,
    };
    debug_assert_eq!(prob.n(), n);
    let sol = solve_conic(&prob, &IpmSettings::with_tol(tol));
    match sol.status {
        SolveStatus::Optimal => {}
        SolveStatus::DualInfeasible => return Err(Error::DualSideEmpty),
        other => return Err(Error::Solver(other)),
    }
    let y: Vec<f64> = sol.y.iter().map(|v| v.max(0.0)).collect();
    let attained = y.iter().all(|&v| v < BOX_ACTIVE * y_cap);
    Ok(EdgeFunctional {
        value: inst.s_entry(&y, k, l),
        attained,
        y,
    })
}

/// `min S(y)_kl` over `0 <= y <= y_cap` with `S(y) = Q^0 + sum_p y_p Q^p >= 0`.
///
/// Indices are 0-based.
pub fn minimize_linear_functional_over_dual_cone(
    inst: &QcqpInstance,
    k: usize,
    l: usize,
    y_cap: f64,
    tol: f64,
) -> Result<EdgeFunctional> {
    edge_functional(inst, k, l, y_cap, tol, false)
}

/// `max S(y)_kl` over the same set.
pub fn maximize_linear_functional_over_dual_cone(
    inst: &QcqpInstance,
    k: usize,
    l: usize,
    y_cap: f64,
    tol: f64,
) -> Result<EdgeFunctional> {
    edge_functional(inst, k, l, y_cap, tol, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCombination {
    /// `max_{y in simplex} lambda_min(sum_p y_p Q^p)`.
    pub t_star: f64,
    /// Maximizer on the simplex.
    pub y: Vec<f64>,
    /// `y / t_star` when `t_star > 0`, so that `sum_p y_bar_p Q^p >= I`.
    pub y_bar: Option<Vec<f64>>,
}

/// Best smallest eigenvalue of a convex combination of the constraint matrices.
pub fn max_min_eigen_combination(inst: &QcqpInstance, tol: f64) -> Result<EigenCombination> {
    inst.require_constraints()?;
    check_tol(tol)?;
    let m = inst.m();
    let n = inst.n();
    let (t_star, y) = if m == 1 {
        (inst.matrix(1).min_eigenvalue(), vec![1.0])
    } else {
        // Eliminate y_m = 1 - sum_{p<m} y_p; variables are (y_1..y_{m-1}, t).
        let qm = inst.matrix(m).as_dense();
        let mut a: Vec<DMatrix<f64>> = (1..m).map(|p| qm - inst.matrix(p).as_dense()).collect();
        a.push(DMatrix::identity(n, n));
        let mut b = DVector::zeros(m);
        b[m - 1] = 1.0;
        let mut c_lin = DVector::zeros(m);
        let mut a_lin = DMatrix::zeros(m, m);
        for p in 0..m - 1 {
            a_lin[(p, p)] = -1.0;
            a_lin[(p, m - 1)] = 1.0;
        }
        c_lin[m - 1] = 1.0;
        let prob = ConicProblem {
            c: qm.clone(),
            a,
            c_lin,
            a_lin,
            b,
        };
        let sol = solve_conic(&prob, &IpmSettings::with_tol(tol));
        if sol.status != SolveStatus::Optimal {
            return Err(Error::Solver(sol.status));
        }
        let mut y: Vec<f64> = sol.y.iter().take(m - 1).map(|v| v.max(0.0)).collect();
        let last = (1.0 - y.iter().sum::<f64>()).max(0.0);
        y.push(last);
        let total: f64 = y.iter().sum();
        for v in &mut y {
            *v /= total;
        }
        // Report the eigenvalue of the returned combination, not the solver's t.
        let mut comb = crate::matrix::SymMatrix::zeros(n);
        for (p, &yp) in y.iter().enumerate() {
            comb.axpy(yp, inst.matrix(p + 1));
        }
        (comb.min_eigenvalue(), y)
    };
    let y_bar = (t_star > 0.0).then(|| y.iter().map(|v| v / t_star).collect());
    Ok(EigenCombination { t_star, y, y_bar })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorCheck {
    /// Largest `s <= 1` found with some `X >= sI` and `Q^p . X <= b_p - s`.
    pub margin: f64,
    /// `margin > threshold`.
    pub holds: bool,
}

/// Checks that the relaxation's feasible set has a strictly feasible point.
pub fn relaxation_interior_margin(inst: &QcqpInstance, tol: f64, threshold: f64) -> Result<InteriorCheck> {
    inst.require_constraints()?;
    check_tol(tol)?;
    let n = inst.n();
    let m = inst.m();
    let b = inst.rhs();

    if b.iter().all(|&v| v > 0.0) {
        // X = tau I with tau small enough is strictly feasible.
        let max_tr = (1..=m).map(|p| inst.matrix(p).trace()).fold(0.0, f64::max);
        let min_b = b.iter().copied().fold(f64::INFINITY, f64::min);
        let tau = if max_tr > 0.0 {
            (0.5 * min_b / max_tr).min(1.0)
        } else {
            1.0
        };
        let margin = (1..=m)
            .map(|p| b[p - 1] - tau * inst.matrix(p).trace())
            .fold(tau, f64::min)
            .min(1.0);
        return Ok(InteriorCheck {
            margin,
            holds: margin > threshold,
        });
    }

    // Variables (X_ij for i <= j, s); maximize s.
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let nv = pairs.len() + 1;
    let mut a = Vec::with_capacity(nv);
    for &(i, j) in &pairs {
        let mut e = DMatrix::zeros(n, n);
        e[(i, j)] = -1.0;
        e[(j, i)] = -1.0;
        a.push(e);
    }
    a.push(DMatrix::identity(n, n));
    let mut rhs = DVector::zeros(nv);
    rhs[nv - 1] = 1.0;

    let n_lin = m + 2;
    let mut c_lin = DVector::zeros(n_lin);
    let mut a_lin = DMatrix::zeros(nv, n_lin);
    for p in 0..m {
        let q = inst.matrix(p + 1);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            a_lin[(k, p)] = if i == j { q.get(i, i) } else { 2.0 * q.get(i, j) };
        }
        a_lin[(nv - 1, p)] = 1.0;
        c_lin[p] = b[p];
    }
    a_lin[(nv - 1, m)] = 1.0;
    c_lin[m] = 1.0;
    let radius = 1e3 * (n as f64 + b.iter().map(|v| v.abs()).sum::<f64>());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if i == j {
            a_lin[(k, m + 1)] = 1.0;
        }
    }
    c_lin[m + 1] = radius;

    let prob = ConicProblem {
        c: DMatrix::zeros(n, n),
        a,
        c_lin,
        a_lin,
        b: rhs,
    };
    let sol = solve_conic(&prob, &IpmSettings::with_tol(tol));
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let margin = sol.y[nv - 1];
    Ok(InteriorCheck {
        margin,
        holds: margin > threshold,
    })
}
