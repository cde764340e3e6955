//! Infeasible-start primal-dual path-following method for one PSD block plus
//! one nonnegative-orthant block.
//!
//! ```text
//! (P)  min  <C, X> + c_lin . u   s.t.  <A_i, X> + a_i . u = b_i,  X >= 0, u >= 0
//! (D)  max  b . y                s.t.  S = C - sum_i y_i A_i >= 0,
//!                                      z = c_lin - sum_i y_i a_i >= 0
//! ```
//!
//! Search directions use the HKM scaling (`dX = (Rc - X dS) S^-1`, then
//! symmetrized) with a Mehrotra predictor-corrector step.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, LU};

use super::{Residuals, SolveStatus};

/// Problem in block standard form; see the module docs.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub c: DMatrix<f64>,
    pub a: Vec<DMatrix<f64>>,
    pub c_lin: DVector<f64>,
    /// `m x n_lin`; row `i` is `a_i`.
    pub a_lin: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl ConicProblem {
    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn n_lin(&self) -> usize {
        self.c_lin.len()
    }

    fn check(&self) {
        let n = self.n();
        assert_eq!(self.c.ncols(), n);
        assert_eq!(self.a.len(), self.m());
        assert!(self.a.iter().all(|a| a.nrows() == n && a.ncols() == n));
        assert_eq!(self.a_lin.nrows(), self.m());
        assert_eq!(self.a_lin.ncols(), self.n_lin());
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: DMatrix<f64>,
    pub u: DVector<f64>,
    pub y: DVector<f64>,
    pub s: DMatrix<f64>,
    pub z: DVector<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct IpmSettings {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub infeas_tol: f64,
    pub max_iter: usize,
}

impl IpmSettings {
    pub fn with_tol(tol: f64) -> Self {
        IpmSettings {
            feas_tol: tol,
            gap_tol: tol,
            infeas_tol: 1e-8,
            max_iter: 200,
        }
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `trace(A B)` for symmetric `A`.
fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(&b.transpose())
}

/// Largest step `alpha` with `X + alpha dX` PSD (infinite if unbounded).
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let t = l.solve_lower_triangular(dx)?;
    let w = l.solve_lower_triangular(&t.transpose())?;
    let eig = SymmetricEigen::new(sym(&w));
    let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

fn max_step_lin(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

enum Factor {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Option<Factor> {
        if m.nrows() == 0 {
            return Cholesky::new(m).map(Factor::Chol);
        }
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(Factor::Chol(c));
        }
        let lu = LU::new(m);
        if lu.is_invertible() {
            Some(Factor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Chol(c) => Some(c.solve(rhs)),
            Factor::Lu(l) => l.solve(rhs),
        }
    }
}

struct Direction {
    dx: DMatrix<f64>,
    du: DVector<f64>,
    dy: DVector<f64>,
    ds: DMatrix<f64>,
    dz: DVector<f64>,
}

pub fn solve_conic(prob: &ConicProblem, settings: &IpmSettings) -> ConicSolution {
    prob.check();
    let n = prob.n();
    let m = prob.m();
    let nl = prob.n_lin();
    let total = (n + nl).max(1) as f64;

    let norm_c = prob.c.norm() + prob.c_lin.norm();
    let norm_b = prob.b.norm();
    let row_norms: Vec<f64> = (0..m)
        .map(|i| prob.a[i].norm() + prob.a_lin.row(i).norm())
        .collect();

    let mut xi = 10f64.max((n as f64).sqrt());
    let mut eta = 10f64.max((n as f64).sqrt()).max(norm_c);
    for (bi, rn) in prob.b.iter().zip(&row_norms) {
        xi = xi.max(total.sqrt() * (1.0 + bi.abs()) / (1.0 + rn));
        eta = eta.max(*rn);
    }

    let mut x = DMatrix::identity(n, n) * xi;
    let mut u = DVector::from_element(nl, xi);
    let mut s = DMatrix::identity(n, n) * eta;
    let mut z = DVector::from_element(nl, eta);
    let mut y = DVector::zeros(m);

    let mut iter = 0;
    loop {
        let ax = DVector::from_fn(m, |i, _| {
            trace_prod(&prob.a[i], &x) + prob.a_lin.row(i).transpose().dot(&u)
        });
        let rp = &prob.b - &ax;
        let mut ay = DMatrix::zeros(n, n);
        for i in 0..m {
            ay += &prob.a[i] * y[i];
        }
        let rd = &prob.c - &s - &ay;
        let rd_lin = &prob.c_lin - &z - prob.a_lin.transpose() * &y;

        let pobj = trace_prod(&prob.c, &x) + prob.c_lin.dot(&u);
        let dobj = prob.b.dot(&y);
        let xs = &x * &s;
        let uz = u.component_mul(&z);
        let mu = (xs.trace() + uz.sum()) / total;

        let residuals = Residuals {
            primal_feas: rp.norm() / (1.0 + norm_b),
            dual_feas: (rd.norm() + rd_lin.norm()) / (1.0 + norm_c),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
            complementarity: (xs.dot(&xs.transpose()).max(0.0) + uz.norm_squared()).sqrt(),
        };

        let finish = move |status: SolveStatus,
                           x: DMatrix<f64>,
                           u: DVector<f64>,
                           y: DVector<f64>,
                           s: DMatrix<f64>,
                           z: DVector<f64>| ConicSolution {
            status,
            x,
            u,
            y,
            s,
            z,
            primal_obj: pobj,
            dual_obj: dobj,
            residuals,
            iterations: iter,
        };

        let obj_scale = 1.0 + pobj.abs().max(dobj.abs());
        let converged = residuals.primal_feas <= settings.feas_tol
            && residuals.dual_feas <= settings.feas_tol
            && residuals.gap <= settings.gap_tol
            && residuals.complementarity <= 10.0 * settings.gap_tol * total * obj_scale;
        if converged {
            return finish(SolveStatus::Optimal, x, u, y, s, z);
        }

        // Farkas rays: y with b.y > 0 and -sum y_i A_i >= 0 proves (P)
        // infeasible; X with <C,X> < 0 and A(X) = 0 proves (D) infeasible.
        if dobj > 0.0 {
            let ray = ((&prob.c - &rd).norm() + (&prob.c_lin - &rd_lin).norm()) / dobj;
            if ray <= settings.infeas_tol {
                return finish(SolveStatus::PrimalInfeasible, x, u, y, s, z);
            }
        }
        if pobj < 0.0 {
            let ray = ax.norm() / (-pobj);
            if ray <= settings.infeas_tol {
                return finish(SolveStatus::DualInfeasible, x, u, y, s, z);
            }
        }
        if iter >= settings.max_iter {
            return finish(SolveStatus::NumericalLimit, x, u, y, s, z);
        }
        iter += 1;

        let s_inv = match Cholesky::new(s.clone()) {
            Some(c) => sym(&c.inverse()),
            None => return finish(SolveStatus::NumericalLimit, x, u, y, s, z),
        };
        let g: Vec<DMatrix<f64>> = prob.a.iter().map(|a| &x * a * &s_inv).collect();
        let d_lin = u.component_div(&z);
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = trace_prod(&prob.a[i], &g[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        if nl > 0 {
            let scaled = DMatrix::from_fn(m, nl, |i, k| prob.a_lin[(i, k)] * d_lin[k]);
            schur += &scaled * prob.a_lin.transpose();
        }
        let schur = sym(&schur);
        let factor = match Factor::new(schur) {
            Some(f) => f,
            None => return finish(SolveStatus::NumericalLimit, x, u, y, s, z),
        };

        let x_rd_sinv = &x * &rd * &s_inv;
        let direction = |rc_sinv: &DMatrix<f64>, rc_lin: &DVector<f64>| -> Option<Direction> {
            let h = rc_sinv - &x_rd_sinv;
            let h_lin = rc_lin.component_div(&z) - d_lin.component_mul(&rd_lin);
            let rhs = DVector::from_fn(m, |i, _| {
                rp[i] - trace_prod(&prob.a[i], &h) - prob.a_lin.row(i).transpose().dot(&h_lin)
            });
            let dy = factor.solve(&rhs)?;
            let mut ds = rd.clone();
            let mut dx = h;
            for i in 0..m {
                ds -= &prob.a[i] * dy[i];
                dx += &g[i] * dy[i];
            }
            let aty = prob.a_lin.transpose() * &dy;
            let dz = &rd_lin - &aty;
            let du = h_lin + d_lin.component_mul(&aty);
            Some(Direction {
                dx: sym(&dx),
                du,
                dy,
                ds: sym(&ds),
                dz,
            })
        };

        let steps = |d: &Direction| -> Option<(f64, f64)> {
            let ap = max_step_psd(&x, &d.dx)?.min(max_step_lin(&u, &d.du));
            let ad = max_step_psd(&s, &d.ds)?.min(max_step_lin(&z, &d.dz));
            Some((ap, ad))
        };

        // Predictor: Rc = -XS, so Rc S^-1 = -X.
        let pred = match direction(&(-&x), &(-&uz)) {
            Some(d) => d,
            None => return finish(SolveStatus::NumericalLimit, x, u, y, s, z),
        };
        let (ap_max, ad_max) = match steps(&pred) {
            Some(v) => v,
            None => return finish(SolveStatus::NumericalLimit, x, u, y, s, z),
        };
        let ap = ap_max.min(1.0);
        let ad = ad_max.min(1.0);
        let x_aff = &x + &pred.dx * ap;
        let s_aff = &s + &pred.ds * ad;
        let u_aff = &u + &pred.du * ap;
        let z_aff = &z + &pred.dz * ad;
        let mu_aff = (trace_prod(&x_aff, &s_aff) + u_aff.dot(&z_aff)) / total;
        let sigma = if mu > 0.0 {
            (mu_aff.max(0.0) / mu).powi(3).clamp(0.0, 1.0)
        } else {
            0.0
        };

        // Corrector: Rc = sigma mu I - XS - dXa dSa.
        let rc_sinv = &s_inv * (sigma * mu) - &x - &pred.dx * &pred.ds * &s_inv;
        let rc_lin = DVector::from_element(nl, sigma * mu) - &uz - pred.du.component_mul(&pred.dz);
        let corr = match direction(&rc_sinv, &rc_lin) {
            Some(d) => d,
            None => return finish(SolveStatus::NumericalLimit, x, u, y, s, z),
        };
        let (ap_max, ad_max) = match steps(&corr) {
            Some(v) => v,
            None => return finish(SolveStatus::NumericalLimit, x, u, y, s, z),
        };
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * ap_max).min(1.0);
        let ad = (gamma * ad_max).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            return finish(SolveStatus::NumericalLimit, x, u, y, s, z);
        }

        x = sym(&(&x + &corr.dx * ap));
        u += &corr.du * ap;
        y += &corr.dy * ad;
        s = sym(&(&s + &corr.ds * ad));
        z += &corr.dz * ad;
    }
}
