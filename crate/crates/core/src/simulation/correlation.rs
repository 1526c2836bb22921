use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eight population matrices of the type-I error study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatrixId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
}

impl MatrixId {
    pub const ALL: [MatrixId; 8] = [
        MatrixId::P1,
        MatrixId::P2,
        MatrixId::P3,
        MatrixId::P4,
        MatrixId::P5,
        MatrixId::P6,
        MatrixId::P7,
        MatrixId::P8,
    ];
}

impl fmt::Display for MatrixId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for MatrixId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatrixId::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown correlation matrix '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub id: MatrixId,
    /// 5 or 20.
    pub k: usize,
}

impl CorrelationSpec {
    pub fn new(id: MatrixId, k: usize) -> Self {
        Self { id, k }
    }
}

fn compound(k: usize, rho: f64, diag: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::from_element(k, k, rho);
    for (i, d) in diag.iter().enumerate() {
        m[(i, i)] += d;
    }
    m
}

fn one_factor(lambda: &[f64], diag: &[f64]) -> DMatrix<f64> {
    let l = DVector::from_column_slice(lambda);
    let mut m = &l * l.transpose();
    for (i, d) in diag.iter().enumerate() {
        m[(i, i)] = *d;
    }
    m
}

fn seq(start: f64, step: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| start + step * i as f64).collect()
}

/// Builds the population matrix. P5-P8 carry non-unit diagonals exactly
/// as specified by their diagonal vectors.
pub fn build_correlation(spec: CorrelationSpec) -> Result<DMatrix<f64>> {
    let k = spec.k;
    if k != 5 && k != 20 {
        return Err(Error::InvalidArgument(format!("correlation matrices are defined for k = 5 or 20, got {k}")));
    }
    let lambda = if k == 5 {
        vec![0.3, 0.4, 0.5, 0.6, 0.7]
    } else {
        seq(0.32, 0.02, 20)
    };
    let m = match spec.id {
        MatrixId::P1 => compound(k, 0.16, &vec![0.84; k]),
        MatrixId::P2 => compound(k, 0.36, &vec![0.64; k]),
        MatrixId::P3 => compound(k, 0.64, &vec![0.36; k]),
        MatrixId::P4 => one_factor(&lambda, &vec![1.0; k]),
        MatrixId::P5 => compound(k, 0.16, &if k == 5 { seq(0.84, -0.1, 5) } else { seq(0.82, -0.02, 20) }),
        MatrixId::P6 => compound(k, 0.36, &if k == 5 { seq(0.64, -0.1, 5) } else { seq(0.62, -0.02, 20) }),
        MatrixId::P7 => compound(k, 0.64, &if k == 5 { seq(0.36, -0.05, 5) } else { seq(0.35, -0.01, 20) }),
        MatrixId::P8 => one_factor(&lambda, &if k == 5 { seq(1.0, -0.1, 5) } else { seq(0.98, -0.02, 20) }),
    };
    Ok(m)
}
