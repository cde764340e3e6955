//! Certifying exactness of SDP relaxations of QCQPs through the sign and
//! bipartite structure of their aggregated sparsity graph.

pub mod certify;
pub mod error;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod qcqp;
pub mod relaxation;
pub mod sdp;
pub mod transform;

pub use certify::{certify, CertificationReport, CertifyOptions, Rule, Verdict};
pub use error::{Error, Result};
pub use matrix::SymMatrix;
pub use qcqp::{Constraint, GeneralQcqpInstance, QcqpInstance};
