//! Guttman-type lambda coefficients and their gradients.
//!
//! Conventions follow the two-group reliability literature this crate
//! implements rather than Guttman's original numbering:
//!
//! | coefficient | value |
//! |---|---|
//! | lambda1 | `1 - tr(S) / T` |
//! | lambda2 | `(T - tr(S) + sqrt(k/(k-1) C2)) / T` |
//! | lambda3 | `2 (1 - (1'S_A 1 + 1'S_B 1) / T)` (split-half) |
//! | lambda4 | `lambda1 + 2 sqrt(maxC2) / T` |
//! | lambda5 | `lambda1 + k/(k-1) 2 sqrt(maxC2) / T` |
//! | lambda6 | `1 - sum(e_t^2) / T` |
//!
//! with `T = 1'S1`, `C2` the sum of squared off-diagonal covariances and
//! `maxC2` the largest per-item sum of squared covariances.
//!
//! Gradients are taken with respect to `vecs(S)`: an off-diagonal coordinate
//! moves `s_ij` and `s_ji` together, so its partial derivative carries the
//! factor two from symmetry. This is the convention under which
//! `delta' vecs(dS)` is the first-order change of the coefficient.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::covariance::{cronbach_alpha, CovarianceSummary};
use crate::error::{Error, Result};
use crate::linalg::vecs_pairs;
use crate::variance::alpha_delta;

/// Squared-root terms below `SINGULAR_RTOL * T^2` make a gradient singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaKind {
    Lambda1,
    Lambda2,
    Lambda3,
    Lambda4,
    Lambda5,
    Lambda6,
}

impl LambdaKind {
    pub const ALL: [LambdaKind; 6] = [
        LambdaKind::Lambda1,
        LambdaKind::Lambda2,
        LambdaKind::Lambda3,
        LambdaKind::Lambda4,
        LambdaKind::Lambda5,
        LambdaKind::Lambda6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LambdaKind::Lambda1 => "lambda1",
            LambdaKind::Lambda2 => "lambda2",
            LambdaKind::Lambda3 => "lambda3",
            LambdaKind::Lambda4 => "lambda4",
            LambdaKind::Lambda5 => "lambda5",
            LambdaKind::Lambda6 => "lambda6",
        }
    }
}

/// Which lambda to evaluate, plus the extra inputs some of them need.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSpec {
    pub which: LambdaKind,
    /// Items in part A of the split (0-based); part B is the complement.
    pub split: Option<Vec<usize>>,
    /// Error variances `e_t^2` for lambda6.
    pub error_variances: Option<Vec<f64>>,
    /// When no error variances are supplied, use `e_t^2 = 1 / (S^-1)_tt`.
    pub derive_error_variances: bool,
}

impl LambdaSpec {
    pub fn new(which: LambdaKind) -> Self {
        Self {
            which,
            split: None,
            error_variances: None,
            derive_error_variances: false,
        }
    }

    pub fn with_split(mut self, part_a: Vec<usize>) -> Self {
        self.split = Some(part_a);
        self
    }

    pub fn with_error_variances(mut self, e2: Vec<f64>) -> Self {
        self.error_variances = Some(e2);
        self
    }

    pub fn with_derived_error_variances(mut self) -> Self {
        self.derive_error_variances = true;
        self
    }
}

/// A reliability functional of the covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Alpha,
    Lambda(LambdaSpec),
}

impl Coefficient {
    pub fn name(&self) -> &'static str {
        match self {
            Coefficient::Alpha => "alpha",
            Coefficient::Lambda(s) => s.which.name(),
        }
    }

    pub fn value(&self, cov: &CovarianceSummary) -> Result<f64> {
        match self {
            Coefficient::Alpha => cronbach_alpha(cov),
            Coefficient::Lambda(spec) => lambda_value(spec, cov),
        }
    }

    /// Gradient with respect to `vecs(S)`.
    pub fn gradient(&self, cov: &CovarianceSummary) -> Result<Vec<f64>> {
        match self {
            Coefficient::Alpha => Ok(alpha_delta(cov)?.entries),
            Coefficient::Lambda(spec) => lambda_gradient(spec, cov),
        }
    }

    /// Checks the inputs that do not depend on the data (split bounds etc.).
    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            Coefficient::Alpha => Ok(()),
            Coefficient::Lambda(spec) => validate_spec(spec, k),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LambdaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LambdaKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lambda coefficient '{s}'")))
    }
}

fn validate_spec(spec: &LambdaSpec, k: usize) -> Result<()> {
    if spec.which == LambdaKind::Lambda3 {
        let part_a = spec.split.as_ref().ok_or(Error::MissingSplit)?;
        split_membership(part_a, k)?;
    }
    if let Some(e2) = &spec.error_variances {
        if e2.len() != k {
            return Err(Error::InvalidErrorVariances(format!(
                "expected {k} values, got {}",
                e2.len()
            )));
        }
        if e2.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidErrorVariances(
                "error variances must be finite and nonnegative".into(),
            ));
        }
    }
    if spec.which == LambdaKind::Lambda6 && spec.error_variances.is_none() && !spec.derive_error_variances {
        return Err(Error::MissingErrorVariances);
    }
    Ok(())
}

/// `true` for items in part A.
fn split_membership(part_a: &[usize], k: usize) -> Result<Vec<bool>> {
    let mut in_a = vec![false; k];
    for &i in part_a {
        if i >= k {
            return Err(Error::InvalidSplit(format!("item {i} out of range for k = {k}")));
        }
        if in_a[i] {
            return Err(Error::InvalidSplit(format!("item {i} listed twice")));
        }
        in_a[i] = true;
    }
    let na = part_a.len();
    if na == 0 || na == k {
        return Err(Error::InvalidSplit("both parts must be nonempty".into()));
    }
    Ok(in_a)
}

/// Sum of squared off-diagonal covariances.
fn c2(s: &DMatrix<f64>) -> f64 {
    let k = s.nrows();
    let mut acc = 0.0;
    for j in 0..k {
        for i in (j + 1)..k {
            acc += 2.0 * s[(i, j)] * s[(i, j)];
        }
    }
    acc
}

/// Per-item sums of squared covariances `C_2t = sum_{j != t} s_tj^2`.
fn c2_rows(s: &DMatrix<f64>) -> Vec<f64> {
    let k = s.nrows();
    (0..k)
        .map(|t| (0..k).filter(|&j| j != t).map(|j| s[(t, j)].powi(2)).sum())
        .collect()
}

/// The item attaining `max_t C_2t`, the maximum, and whether another item
/// ties it (within 1e-12 relative), where the maximum is not differentiable.
pub fn max_c2_item(cov: &CovarianceSummary) -> (usize, f64, bool) {
    let rows = c2_rows(cov.matrix());
    let (mut best, mut val) = (0, f64::NEG_INFINITY);
    for (t, &v) in rows.iter().enumerate() {
        if v > val {
            best = t;
            val = v;
        }
    }
    let tied = rows
        .iter()
        .enumerate()
        .any(|(t, &v)| t != best && (val - v).abs() <= 1e-12 * val.abs());
    (best, val, tied)
}

fn within_split_total(s: &DMatrix<f64>, in_a: &[bool]) -> f64 {
    let k = s.nrows();
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            if in_a[i] == in_a[j] {
                acc += s[(i, j)];
            }
        }
    }
    acc
}

/// Error variances for lambda6: supplied, or `1 / (S^-1)_tt`.
/// Also returns `S^-1` when derived, for the gradient.
fn error_variances(spec: &LambdaSpec, cov: &CovarianceSummary) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    if let Some(e2) = &spec.error_variances {
        return Ok((e2.clone(), None));
    }
    if !spec.derive_error_variances {
        return Err(Error::MissingErrorVariances);
    }
    let inv = cov.matrix().clone().try_inverse().ok_or_else(|| {
        Error::DegenerateInput("covariance matrix is singular; smc error variances undefined".into())
    })?;
    let k = cov.items();
    let mut e2 = Vec::with_capacity(k);
    for t in 0..k {
        let p = inv[(t, t)];
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::DegenerateInput(
                "covariance matrix is not positive definite; smc error variances undefined".into(),
            ));
        }
        e2.push(1.0 / p);
    }
    Ok((e2, Some(inv)))
}

fn nonzero_total(cov: &CovarianceSummary) -> Result<f64> {
    if cov.has_zero_total() {
        Err(Error::ZeroTotalVariance)
    } else {
        Ok(cov.total())
    }
}

fn k_ratio(k: usize) -> f64 {
    k as f64 / (k as f64 - 1.0)
}

pub fn lambda_value(spec: &LambdaSpec, cov: &CovarianceSummary) -> Result<f64> {
    let k = cov.items();
    validate_spec(spec, k)?;
    let t = nonzero_total(cov)?;
    let tr = cov.trace();
    let s = cov.matrix();
    let lambda1 = 1.0 - tr / t;
    Ok(match spec.which {
        LambdaKind::Lambda1 => lambda1,
        LambdaKind::Lambda2 => (t - tr + (k_ratio(k) * c2(s)).sqrt()) / t,
        LambdaKind::Lambda3 => {
            let in_a = split_membership(spec.split.as_deref().unwrap_or(&[]), k)?;
            2.0 * (1.0 - within_split_total(s, &in_a) / t)
        }
        LambdaKind::Lambda4 => lambda1 + 2.0 * max_c2_item(cov).1.sqrt() / t,
        LambdaKind::Lambda5 => lambda1 + k_ratio(k) * 2.0 * max_c2_item(cov).1.sqrt() / t,
        LambdaKind::Lambda6 => {
            let (e2, _) = error_variances(spec, cov)?;
            1.0 - e2.iter().sum::<f64>() / t
        }
    })
}

/// Partial derivatives of the chosen lambda with respect to `vecs(S)`.
pub fn lambda_gradient(spec: &LambdaSpec, cov: &CovarianceSummary) -> Result<Vec<f64>> {
    let k = cov.items();
    validate_spec(spec, k)?;
    let t = nonzero_total(cov)?;
    let tr = cov.trace();
    let s = cov.matrix();
    let t2 = t * t;
    // d(lambda1) for a diagonal / off-diagonal coordinate
    let l1_diag = (tr - t) / t2;
    let l1_off = 2.0 * tr / t2;

    let grad = match spec.which {
        LambdaKind::Lambda1 => vecs_pairs(k)
            .map(|(i, j)| if i == j { l1_diag } else { l1_off })
            .collect(),
        LambdaKind::Lambda2 => {
            let c = c2(s);
            if c.abs() < SINGULAR_RTOL * t2 {
                return Err(Error::SingularGradient("C2"));
            }
            let r = c.sqrt();
            let w = k_ratio(k).sqrt();
            vecs_pairs(k)
                .map(|(i, j)| {
                    if i == j {
                        l1_diag - w * r / t2
                    } else {
                        l1_off + w * (2.0 * s[(i, j)] * t / r - 2.0 * r) / t2
                    }
                })
                .collect()
        }
        LambdaKind::Lambda3 => {
            let in_a = split_membership(spec.split.as_deref().unwrap_or(&[]), k)?;
            let u = within_split_total(s, &in_a);
            vecs_pairs(k)
                .map(|(i, j)| {
                    if i == j {
                        -2.0 * (t - u) / t2
                    } else if in_a[i] == in_a[j] {
                        -4.0 * (t - u) / t2
                    } else {
                        4.0 * u / t2
                    }
                })
                .collect()
        }
        LambdaKind::Lambda4 | LambdaKind::Lambda5 => {
            let (top, cbar, _) = max_c2_item(cov);
            if cbar.abs() < SINGULAR_RTOL * t2 {
                return Err(Error::SingularGradient("max C2t"));
            }
            let rb = cbar.sqrt();
            let factor = if spec.which == LambdaKind::Lambda5 { k_ratio(k) } else { 1.0 };
            vecs_pairs(k)
                .map(|(i, j)| {
                    if i == j {
                        l1_diag - factor * 2.0 * rb / t2
                    } else {
                        let dc = if i == top || j == top { 2.0 * s[(i, j)] } else { 0.0 };
                        l1_off + factor * (dc * t / rb - 4.0 * rb) / t2
                    }
                })
                .collect()
        }
        LambdaKind::Lambda6 => {
            let (e2, inv) = error_variances(spec, cov)?;
            let e: f64 = e2.iter().sum();
            match inv {
                None => vecs_pairs(k)
                    .map(|(i, j)| if i == j { e / t2 } else { 2.0 * e / t2 })
                    .collect(),
                Some(p) => {
                    // d e_t^2 / d s_ij = m_ij p_ti p_tj / p_tt^2
                    vecs_pairs(k)
                        .map(|(i, j)| {
                            let g: f64 = (0..k).map(|q| p[(q, i)] * p[(q, j)] / p[(q, q)].powi(2)).sum();
                            let m = if i == j { 1.0 } else { 2.0 };
                            m * (-g / t + e / t2)
                        })
                        .collect()
                }
            }
        }
    };
    Ok(grad)
}
