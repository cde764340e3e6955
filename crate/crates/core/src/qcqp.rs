//! Homogeneous QCQP instances
//!
//! ```text
//! min  x^T Q^0 x   s.t.  x^T Q^p x <= b_p,  p = 1..m
//! ```
//!
//! plus the general form with linear terms, which is reduced to the
//! homogeneous one by [`homogenize`].

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub matrix: SymMatrix,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpInstance {
    objective: SymMatrix,
    constraints: Vec<Constraint>,
}

impl QcqpInstance {
    pub fn new(objective: SymMatrix, constraints: Vec<Constraint>) -> Result<Self> {
        let n = objective.n();
        if n == 0 {
            return Err(Error::DimensionMismatch("n must be at least 1".into()));
        }
        for (p, c) in constraints.iter().enumerate() {
            if c.matrix.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {} has dimension {}, objective has {}",
                    p + 1,
                    c.matrix.n(),
                    n
                )));
            }
            if !c.rhs.is_finite() {
                return Err(Error::NonFinite(format!("rhs of constraint {}", p + 1)));
            }
        }
        Ok(QcqpInstance {
            objective,
            constraints,
        })
    }

    /// Convenience constructor from `(Q^p, b_p)` pairs.
    pub fn from_parts(objective: SymMatrix, constraints: Vec<(SymMatrix, f64)>) -> Result<Self> {
        Self::new(
            objective,
            constraints
                .into_iter()
                .map(|(matrix, rhs)| Constraint { matrix, rhs })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &SymMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    /// `Q^p` for `p = 0..=m`, with `Q^0` the objective.
    pub fn matrix(&self, p: usize) -> &SymMatrix {
        if p == 0 {
            &self.objective
        } else {
            &self.constraints[p - 1].matrix
        }
    }

    /// All data matrices `Q^0, ..., Q^m`.
    pub fn matrices(&self) -> impl Iterator<Item = &SymMatrix> {
        std::iter::once(&self.objective).chain(self.constraints.iter().map(|c| &c.matrix))
    }

    /// Dual slack `S(y) = Q^0 + sum_p y_p Q^p`.
    pub fn s_of_y(&self, y: &[f64]) -> SymMatrix {
        assert_eq!(y.len(), self.m(), "multiplier length must equal m");
        let mut s = self.objective.clone();
        for (c, &yp) in self.constraints.iter().zip(y) {
            s.axpy(yp, &c.matrix);
        }
        s
    }

    /// Entry `(k, l)` of `S(y)`.
    pub fn s_entry(&self, y: &[f64], k: usize, l: usize) -> f64 {
        self.objective.get(k, l)
            + self
                .constraints
                .iter()
                .zip(y)
                .map(|(c, &yp)| yp * c.matrix.get(k, l))
                .sum::<f64>()
    }

    pub fn with_objective(&self, objective: SymMatrix) -> Result<Self> {
        Self::new(objective, self.constraints.clone())
    }

    pub(crate) fn require_constraints(&self) -> Result<()> {
        if self.m() == 0 {
            Err(Error::NoConstraints)
        } else {
            Ok(())
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        evaluate_quadratic(&self.objective, x)
    }

    /// Largest violation `max_p (x^T Q^p x - b_p)`, clamped below at zero.
    pub fn max_violation(&self, x: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            worst = worst.max(evaluate_quadratic(&c.matrix, x)? - c.rhs);
        }
        Ok(worst)
    }
}

/// QCQP with linear terms `q^p` in the objective and constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralQcqpInstance {
    pub quadratic: QcqpInstance,
    pub linear_objective: Vec<f64>,
    pub linear_constraints: Vec<Vec<f64>>,
}

impl GeneralQcqpInstance {
    pub fn new(
        quadratic: QcqpInstance,
        linear_objective: Vec<f64>,
        linear_constraints: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = quadratic.n();
        if linear_objective.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "linear objective has length {}, expected {}",
                linear_objective.len(),
                n
            )));
        }
        if linear_constraints.len() != quadratic.m() {
            return Err(Error::DimensionMismatch(format!(
                "{} linear constraint vectors for {} constraints",
                linear_constraints.len(),
                quadratic.m()
            )));
        }
        if let Some(p) = linear_constraints.iter().position(|q| q.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "linear term of constraint {} has wrong length",
                p + 1
            )));
        }
        let all = linear_objective.iter().chain(linear_constraints.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear terms".into()));
        }
        Ok(GeneralQcqpInstance {
            quadratic,
            linear_objective,
            linear_constraints,
        })
    }

    /// `x^T Q^p x + q^p . x`, with `p = 0` the objective.
    pub fn evaluate(&self, p: usize, x: &[f64]) -> Result<f64> {
        let q = if p == 0 {
            &self.linear_objective
        } else {
            &self.linear_constraints[p - 1]
        };
        let lin: f64 = q.iter().zip(x).map(|(a, b)| a * b).sum();
        Ok(evaluate_quadratic(self.quadratic.matrix(p), x)? + lin)
    }
}

/// `x^T Q x`.
pub fn evaluate_quadratic(q: &SymMatrix, x: &[f64]) -> Result<f64> {
    q.quad_form(x)
}

fn bordered(q: &SymMatrix, lin: &[f64]) -> SymMatrix {
    let n = q.n();
    let mut out = SymMatrix::zeros(n + 1);
    for (i, l) in lin.iter().enumerate() {
        out.set(0, i + 1, 0.5 * l);
        for j in i..n {
            out.set(i + 1, j + 1, q.get(i, j));
        }
    }
    out
}

/// Lifts a general QCQP to a homogeneous one over `(x_0, x)`.
///
/// Variable 0 is `x_0`. Every matrix is bordered as `[0, q/2; q/2, Q]`, and
/// `x_0^2 = 1` is appended as the pair `x_0^2 <= 1`, `-x_0^2 <= -1`, so the
/// result has `m + 2` constraints.
pub fn homogenize(g: &GeneralQcqpInstance) -> QcqpInstance {
    let inst = &g.quadratic;
    let n = inst.n();
    let objective = bordered(inst.objective(), &g.linear_objective);
    let mut constraints: Vec<Constraint> = inst
        .constraints()
        .iter()
        .zip(&g.linear_constraints)
        .map(|(c, q)| Constraint {
            matrix: bordered(&c.matrix, q),
            rhs: c.rhs,
        })
        .collect();
    let mut e00 = SymMatrix::zeros(n + 1);
    e00.set(0, 0, 1.0);
    constraints.push(Constraint {
        matrix: e00.clone(),
        rhs: 1.0,
    });
    constraints.push(Constraint {
        matrix: e00.scaled(-1.0),
        rhs: -1.0,
    });
    QcqpInstance::new(objective, constraints).expect("bordered data keeps dimensions consistent")
}

/// Maps a solution `(x_0, x)` of the homogenized problem back to `x`.
pub fn dehomogenize(x_tilde: &[f64]) -> Result<Vec<f64>> {
    let x0 = *x_tilde
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty vector".into()))?;
    if x0.abs() < 1e-9 {
        return Err(Error::InvalidArgument(
            "homogenizing coordinate is zero; cannot recover x".into(),
        ));
    }
    Ok(x_tilde[1..].iter().map(|v| v / x0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> QcqpInstance {
        QcqpInstance::from_parts(
            SymMatrix::from_rows(&[vec![-3.0, -1.0], vec![-1.0, -2.0]]).unwrap(),
            vec![(
                SymMatrix::from_rows(&[vec![3.0, 4.0], vec![4.0, 6.0]]).unwrap(),
                1.0,
            )],
        )
        .unwrap()
    }

    #[test]
    fn zero_quadratic_is_zero() {
        let q = SymMatrix::zeros(3);
        assert_eq!(evaluate_quadratic(&q, &[1.0, -5.0, 2.5]).unwrap(), 0.0);
    }

    #[test]
    fn small_example_value_at_reported_optimum() {
        let v = evaluate_quadratic(small().objective(), &[1.731, -1.167]).unwrap();
        let x_star = SymMatrix::from_rows(&[vec![2.997, -2.021], vec![-2.021, 1.362]]).unwrap();
        let relaxed = small().objective().dot(&x_star);
        assert!((v - relaxed).abs() < 5e-3, "{v} vs {relaxed}");
    }

    #[test]
    fn homogenize_zero_linear_terms_pads_decoupled_variable() {
        let inst = small();
        let g = GeneralQcqpInstance::new(inst.clone(), vec![0.0; 2], vec![vec![0.0; 2]]).unwrap();
        let h = homogenize(&g);
        assert_eq!(h.n(), 3);
        assert_eq!(h.m(), 3);
        for p in 0..=1 {
            for i in 0..2 {
                assert_eq!(h.matrix(p).get(0, i + 1), 0.0);
                for j in 0..2 {
                    assert_eq!(h.matrix(p).get(i + 1, j + 1), inst.matrix(p).get(i, j));
                }
            }
            assert_eq!(h.matrix(p).get(0, 0), 0.0);
        }
        assert_eq!(h.matrix(2).get(0, 0), 1.0);
        assert_eq!(h.rhs()[1..], [1.0, -1.0]);
    }

    #[test]
    fn dehomogenize_divides_sign() {
        assert_eq!(dehomogenize(&[-1.0, 2.0, -3.0]).unwrap(), vec![-2.0, 3.0]);
        assert!(dehomogenize(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn s_of_y_matches_entrywise() {
        let inst = small();
        let s = inst.s_of_y(&[2.0]);
        assert_eq!(s.get(0, 1), -1.0 + 8.0);
        assert_eq!(inst.s_entry(&[2.0], 0, 1), 7.0);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let r = QcqpInstance::from_parts(SymMatrix::identity(2), vec![(SymMatrix::identity(3), 1.0)]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
