//! Shor relaxation and rank-1 recovery.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::qcqp::QcqpInstance;
use crate::sdp::{self, SdpProblem, SolveStatus};

pub const DEFAULT_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelaxationResult {
    pub status: SolveStatus,
    pub x_star: SymMatrix,
    pub y_star: Vec<f64>,
    /// `Q^0 + sum_p y_p Q^p` at `y_star`.
    pub s_of_y: SymMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    pub numeric_rank: usize,
    pub x: Option<Vec<f64>>,
    /// Signed `x^T Q^0 x - dual_value` when `x` was extracted.
    pub gap: Option<f64>,
    pub complementarity: f64,
    pub iterations: usize,
}

/// `min Q^0.X s.t. Q^p.X <= b_p, X >= 0`.
pub fn build_relaxation(inst: &QcqpInstance) -> SdpProblem {
    SdpProblem::new(
        inst.objective().clone(),
        inst.constraints().iter().map(|c| c.matrix.clone()).collect(),
        inst.rhs(),
    )
    .expect("instance dimensions are validated on construction")
}

pub fn solve_relaxation(inst: &QcqpInstance, tol: f64, rank_tol: f64) -> Result<RelaxationResult> {
    let sol = sdp::solve(&build_relaxation(inst), tol)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let mut y_star: Vec<f64> = sol.y.iter().map(|v| v.max(0.0)).collect();
    let mut x_star = sol.x;
    let (mut primal_value, mut dual_value) = (sol.primal_obj, sol.dual_obj);
    let numeric_rank = numerical_rank(&x_star, rank_tol);
    let mut x = match numeric_rank {
        0 => Some(vec![0.0; inst.n()]),
        1 => Some(extract_rank1(&x_star, rank_tol)?),
        _ => None,
    };
    let mut complementarity = complementarity_residual(inst, &x_star, &y_star)?;
    if numeric_rank == 1 {
        let v = x.as_ref().expect("rank one");
        if let Some((xp, yp)) = polish_rank1(inst, v, &y_star, &sol.slack, tol) {
            let xx = SymMatrix::outer(&xp);
            let c = complementarity_residual(inst, &xx, &yp)?;
            if c < complementarity {
                complementarity = c;
                primal_value = inst.objective().dot(&xx);
                dual_value = -inst.rhs().iter().zip(&yp).map(|(b, y)| b * y).sum::<f64>();
                x_star = xx;
                y_star = yp;
                x = Some(xp);
            }
        }
    }
    let s_of_y = inst.s_of_y(&y_star);
    let gap = match &x {
        Some(v) => Some(inst.objective_value(v)? - dual_value),
        None => None,
    };
    Ok(RelaxationResult {
        status: sol.status,
        x_star,
        y_star,
        s_of_y,
        primal_value,
        dual_value,
        numeric_rank,
        x,
        gap,
        complementarity,
        iterations: sol.iterations,
    })
}

/// Newton refinement of `S(y) x = 0`, `x^T Q^p x = b_p` (p active) from an
/// interior-point rank-one estimate. Inactive multipliers stay at zero.
/// Returns `None` unless the refined point is dual feasible, primal feasible
/// and converged.
fn polish_rank1(
    inst: &QcqpInstance,
    x0: &[f64],
    y0: &[f64],
    slack: &[f64],
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (inst.n(), inst.m());
    let active: Vec<usize> = (0..m).filter(|&p| y0[p] > slack[p].max(0.0)).collect();
    let k = active.len();
    let b = inst.rhs();
    let scale = 1.0 + inst.matrices().map(|q| q.frobenius_norm()).fold(0.0, f64::max);
    let mut x = DVector::from_column_slice(x0);
    let mut y = y0.to_vec();
    for (p, v) in y.iter_mut().enumerate() {
        if !active.contains(&p) {
            *v = 0.0;
        }
    }
    let residual = |x: &DVector<f64>, y: &[f64]| -> DVector<f64> {
        let mut f = DVector::zeros(n + k);
        f.rows_mut(0, n).copy_from(&(inst.s_of_y(y).as_dense() * x));
        for (r, &p) in active.iter().enumerate() {
            let q = inst.matrix(p + 1).as_dense();
            f[n + r] = x.dot(&(q * x)) - b[p];
        }
        f
    };
    let target = 1e-13 * scale * (1.0 + x.norm_squared());
    let mut f = residual(&x, &y);
    for _ in 0..30 {
        if f.norm() <= target {
            break;
        }
        let mut jac = DMatrix::zeros(n + k, n + k);
        jac.view_mut((0, 0), (n, n)).copy_from(inst.s_of_y(&y).as_dense());
        for (r, &p) in active.iter().enumerate() {
            let qx = inst.matrix(p + 1).as_dense() * &x;
            jac.view_mut((0, n + r), (n, 1)).copy_from(&qx);
            jac.view_mut((n + r, 0), (1, n))
                .copy_from(&(qx.transpose() * 2.0));
        }
        let step = jac.lu().solve(&(-&f))?;
        x += step.rows(0, n);
        for (r, &p) in active.iter().enumerate() {
            y[p] += step[n + r];
        }
        f = residual(&x, &y);
        if !f.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    if f.norm() > target.max(tol) {
        return None;
    }
    let s = inst.s_of_y(&y);
    let xs: Vec<f64> = x.iter().copied().collect();
    let feasible = active.iter().all(|&p| y[p] >= 0.0)
        && s.min_eigenvalue() >= -tol * (1.0 + s.frobenius_norm())
        && inst.max_violation(&xs).ok()? <= tol * (1.0 + b.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    if !feasible {
        return None;
    }
    let mut xs = xs;
    if let Some(first) = xs.iter().find(|c| c.abs() > 1e-12 * x.amax()) {
        if *first < 0.0 {
            xs.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Some((xs, y))
}

/// Number of eigenvalues above `rank_tol * max(lambda_max, 1)`.
pub fn numerical_rank(x: &SymMatrix, rank_tol: f64) -> usize {
    let eig = x.eigenvalues();
    let lmax = eig.last().copied().unwrap_or(0.0);
    let cut = rank_tol * lmax.max(1.0);
    eig.iter().filter(|&&v| v > cut).count()
}

/// `sqrt(lambda_1) v_1` with the first nonzero coordinate made positive.
pub fn extract_rank1(x: &SymMatrix, rank_tol: f64) -> Result<Vec<f64>> {
    let r = numerical_rank(x, rank_tol);
    if r != 1 {
        return Err(Error::RankPrecondition(r));
    }
    let (vals, vecs) = x.eigen();
    let n = x.n();
    let scale = vals[n - 1].max(0.0).sqrt();
    let mut v: Vec<f64> = (0..n).map(|i| scale * vecs[(i, n - 1)]).collect();
    let pivot = v.iter().map(|c| c.abs()).fold(0.0, f64::max) * 1e-12;
    if let Some(first) = v.iter().find(|c| c.abs() > pivot) {
        if *first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok(v)
}

/// `||X S(y)||_F`.
pub fn complementarity_residual(inst: &QcqpInstance, x: &SymMatrix, y: &[f64]) -> Result<f64> {
    if x.n() != inst.n() || y.len() != inst.m() {
        return Err(Error::DimensionMismatch(format!(
            "expected {}x{} X and {} multipliers",
            inst.n(),
            inst.n(),
            inst.m()
        )));
    }
    let s = inst.s_of_y(y);
    Ok((x.as_dense() * s.as_dense()).norm())
}
