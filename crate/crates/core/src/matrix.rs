//! Dense symmetric matrices.
//!
//! Problem sizes here are small (tens of variables), so everything is stored
//! dense on top of `nalgebra::DMatrix`. The wrapper only guarantees exact
//! symmetry and finiteness of the entries.

use std::ops::Index;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    /// Builds from row-major data, rejecting asymmetric or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix rows are not square".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::try_from_dense(m)
    }

    pub fn try_from_dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix".into()));
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::Asymmetric {
                        context: "matrix".into(),
                        i: i + 1,
                        j: j + 1,
                        a: m[(i, j)],
                        b: m[(j, i)],
                    });
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Averages `m` with its transpose. Used for iterates that are symmetric
    /// only up to rounding.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        SymMatrix((m + m.transpose()) * 0.5)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] = v;
        self.0[(j, i)] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.0[(i, j)] += v;
        if i != j {
            self.0[(j, i)] += v;
        }
    }

    pub fn as_dense(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dense(self) -> DMatrix<f64> {
        self.0
    }

    /// Frobenius inner product `<self, other>`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn axpy(&mut self, a: f64, other: &SymMatrix) {
        self.0 += &other.0 * a;
    }

    /// `x^T M x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {}x{} matrix",
                x.len(),
                self.n(),
                self.n()
            )));
        }
        let v = DVector::from_column_slice(x);
        Ok(v.dot(&(&self.0 * &v)))
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let n = self.n();
        if n == 0 {
            return (Vec::new(), DMatrix::zeros(0, 0));
        }
        let eig = SymmetricEigen::new(self.0.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// `x x^T`.
    pub fn outer(x: &[f64]) -> SymMatrix {
        let v = DVector::from_column_slice(x);
        SymMatrix(&v * v.transpose())
    }

    /// Block matrix `[a, b; b^T, c]` where `b` is symmetric here.
    pub fn block2(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> SymMatrix {
        let n = a.n();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&a.0);
        m.view_mut((0, n), (n, n)).copy_from(&b.0);
        m.view_mut((n, 0), (n, n)).copy_from(&b.0.transpose());
        m.view_mut((n, n), (n, n)).copy_from(&c.0);
        SymMatrix(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n()).all(|i| (0..i).all(|j| self.0[(i, j)] == 0.0))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
