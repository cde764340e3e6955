//! Dense SDP solving.
//!
//! [`SdpProblem`] is the inequality form used by the relaxation:
//!
//! ```text
//! min <C, X>  s.t.  <A_i, X> <= b_i,  X >= 0
//! ```
//!
//! with dual `max -b.y  s.t.  C + sum_i y_i A_i >= 0, y >= 0`. Slacks are
//! carried in a nonnegative-orthant block next to the PSD block.

mod ipm;
mod systems;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

pub use ipm::{solve_conic, ConicProblem, ConicSolution, IpmSettings};
pub use systems::{
    max_min_eigen_combination, maximize_linear_functional_over_dual_cone,
    minimize_linear_functional_over_dual_cone, relaxation_interior_margin, EdgeFunctional, EigenCombination,
    InteriorCheck,
};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    NumericalLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal infeasible",
            SolveStatus::DualInfeasible => "dual infeasible or primal unbounded",
            SolveStatus::NumericalLimit => "numerical limit reached before tolerances were met",
        };
        f.write_str(s)
    }
}

/// Relative residuals of a primal-dual pair, plus the complementarity
/// `sqrt(tr(XSXS) + ||u z||^2)`, i.e. `||X^{1/2} S X^{1/2}||_F` on the PSD block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal_feas: f64,
    pub dual_feas: f64,
    pub gap: f64,
    pub complementarity: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub c: SymMatrix,
    pub a: Vec<SymMatrix>,
    pub b: Vec<f64>,
}

impl SdpProblem {
    pub fn new(c: SymMatrix, a: Vec<SymMatrix>, b: Vec<f64>) -> Result<Self> {
        let n = c.n();
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint matrices but {} right-hand sides",
                a.len(),
                b.len()
            )));
        }
        if let Some(i) = a.iter().position(|m| m.n() != n) {
            return Err(Error::DimensionMismatch(format!(
                "constraint matrix {} is {}x{}, objective is {}x{}",
                i + 1,
                a[i].n(),
                a[i].n(),
                n,
                n
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side".into()));
        }
        Ok(SdpProblem { c, a, b })
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: SymMatrix,
    /// Multipliers of the inequalities, `y >= 0`.
    pub y: Vec<f64>,
    /// `b - A(X)`.
    pub slack: Vec<f64>,
    /// `C + sum_i y_i A_i`.
    pub s: SymMatrix,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 && tol <= 1e-4 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, 1e-4], got {tol}"
        )))
    }
}

pub fn solve(prob: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    check_tol(tol)?;
    let m = prob.m();
    let conic = ConicProblem {
        c: prob.c.as_dense().clone(),
        a: prob.a.iter().map(|a| a.as_dense().clone()).collect(),
        c_lin: DVector::zeros(m),
        a_lin: DMatrix::identity(m, m),
        b: DVector::from_column_slice(&prob.b),
    };
    let sol = solve_conic(&conic, &IpmSettings::with_tol(tol));
    // The conic dual variable w satisfies w <= 0; the inequality multipliers are y = -w.
    let y: Vec<f64> = sol.y.iter().map(|w| -w).collect();
    Ok(SdpSolution {
        status: sol.status,
        x: SymMatrix::symmetrize(&sol.x),
        y,
        slack: sol.u.iter().copied().collect(),
        s: SymMatrix::symmetrize(&sol.s),
        primal_obj: sol.primal_obj,
        dual_obj: sol.dual_obj,
        residuals: sol.residuals,
        iterations: sol.iterations,
    })
}
