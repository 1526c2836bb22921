//! Tests for equality of reliability coefficients: two independent
//! samples, K samples and paired designs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::coefficients::Coefficient;
use crate::error::{Error, Result};
use crate::variance::VarianceMethod;

mod ksample;
mod paired;
mod two_sample;

pub use ksample::{ksample_test, pairwise_posthoc, Adjustment, KSampleMethod, KSampleResult, PairwiseResult};
pub use paired::paired_test;
pub use two_sample::{
    asymptotic_test, bootstrap_replicates, bootstrap_test, compare, permutation_ci, permutation_test, studentized_statistic,
};

/// Replicates whose statistic is undefined are redrawn at most this many
/// times before the test gives up.
pub const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    Greater,
    Less,
}

impl Alternative {
    pub fn name(self) -> &'static str {
        match self {
            Alternative::TwoSided => "two-sided",
            Alternative::Greater => "greater",
            Alternative::Less => "less",
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            _ => Err(Error::InvalidArgument(format!("unknown alternative '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    Asymptotic,
    Permutation,
    ExactPermutation,
    Bootstrap,
}

impl TestMethod {
    pub fn name(self) -> &'static str {
        match self {
            TestMethod::Asymptotic => "asymptotic",
            TestMethod::Permutation => "permutation",
            TestMethod::ExactPermutation => "exact-permutation",
            TestMethod::Bootstrap => "bootstrap",
        }
    }

    /// Whether the result depends on a random seed.
    pub fn is_random(self) -> bool {
        matches!(self, TestMethod::Permutation | TestMethod::Bootstrap)
    }

    pub fn is_resampling(self) -> bool {
        self != TestMethod::Asymptotic
    }
}

impl fmt::Display for TestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(TestMethod::Asymptotic),
            "permutation" => Ok(TestMethod::Permutation),
            "exact-permutation" | "exact" => Ok(TestMethod::ExactPermutation),
            "bootstrap" => Ok(TestMethod::Bootstrap),
            _ => Err(Error::InvalidArgument(format!("unknown test method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    /// Confidence level, e.g. 0.95.
    pub level: f64,
}

/// Settings shared by every test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOptions {
    pub coefficient: Coefficient,
    pub variance: VarianceMethod,
    pub alternative: Alternative,
    /// Significance level; intervals are reported at `1 - level`.
    pub level: f64,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            coefficient: Coefficient::Alpha,
            variance: VarianceMethod::Adf,
            alternative: Alternative::TwoSided,
            level: 0.05,
        }
    }
}

impl TestOptions {
    pub fn with_alternative(mut self, alternative: Alternative) -> Self {
        self.alternative = alternative;
        self
    }

    pub fn with_coefficient(mut self, coefficient: Coefficient) -> Self {
        self.coefficient = coefficient;
        self
    }

    pub fn with_variance(mut self, variance: VarianceMethod) -> Self {
        self.variance = variance;
        self
    }

    pub fn with_level(mut self, level: f64) -> Self {
        self.level = level;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {}", self.level)));
        }
        Ok(())
    }
}

/// Outcome of a two-sample or paired test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub method: TestMethod,
    pub coefficient: String,
    pub variance_method: VarianceMethod,
    pub alternative: Alternative,
    pub p_right: f64,
    pub p_left: f64,
    pub p_two: f64,
    /// The p-value for `alternative`.
    pub p_value: f64,
    pub ci: Option<ConfidenceInterval>,
    /// Coefficient estimates per group (or per occasion).
    pub alpha_estimates: Vec<f64>,
    pub difference: f64,
    /// Studentizing standard deviation (pooled sigma-hat, or b-hat for paired data).
    pub std_error: f64,
    pub replicates_used: usize,
    pub degenerate_redraws: usize,
    pub seed: Option<u64>,
}

impl TestResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value <= level
    }
}

/// Right, left and two-sided p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValues {
    pub right: f64,
    pub left: f64,
    pub two: f64,
}

impl PValues {
    pub fn select(&self, alternative: Alternative) -> f64 {
        match alternative {
            Alternative::TwoSided => self.two,
            Alternative::Greater => self.right,
            Alternative::Less => self.left,
        }
    }
}

/// Resampling p-values: `p1 = #{A >= T} / B` is the right tail,
/// `#{A <= T} / B` the left tail and `min(2 p1, 2 - 2 p1)` the two-sided value.
///
/// Replicates within `TIE_RTOL` (relative) of `T` count as ties: the same
/// split of tied rows can reach `T` by a different summation order.
pub fn resampling_p_values(observed: f64, replicates: &[f64]) -> PValues {
    let b = replicates.len() as f64;
    let tol = TIE_RTOL * observed.abs().max(1.0);
    let ge = replicates.iter().filter(|&&a| a >= observed - tol).count() as f64;
    let le = replicates.iter().filter(|&&a| a <= observed + tol).count() as f64;
    let p1 = ge / b;
    PValues {
        right: p1,
        left: le / b,
        two: (2.0 * p1).min(2.0 - 2.0 * p1),
    }
}

pub const TIE_RTOL: f64 = 1e-9;

pub(crate) fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid normal")
}

/// p-values of `t` against the standard normal.
pub fn normal_p_values(t: f64) -> PValues {
    let n = std_normal();
    PValues {
        right: n.sf(t),
        left: n.cdf(t),
        two: (2.0 * n.sf(t.abs())).min(1.0),
    }
}

/// Upper `a` quantile of the replicates: order statistic
/// `ceil((1 - a) B)` of the ascending sort.
pub fn upper_quantile(replicates: &[f64], a: f64) -> f64 {
    let mut v = replicates.to_vec();
    v.sort_by(|x, y| x.total_cmp(y));
    let b = v.len();
    let pos = ((1.0 - a) * b as f64).ceil() as usize;
    v[pos.clamp(1, b) - 1]
}

pub(crate) fn replicate_is_degenerate(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateInput(_) | Error::ZeroTotalVariance | Error::ZeroVariance | Error::SingularGradient(_)
    )
}

/// Draws replicate `l` until it yields a defined statistic.
/// Returns the statistic and the number of redraws.
pub(crate) fn draw_until_defined<F>(mut draw: F) -> Result<(f64, usize)>
where
    F: FnMut() -> Result<f64>,
{
    for redraws in 0..=MAX_REDRAWS {
        match draw() {
            Ok(t) if t.is_finite() => return Ok((t, redraws)),
            Ok(_) => {}
            Err(e) if replicate_is_degenerate(&e) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateInput(format!(
        "resampled statistic undefined in {} consecutive draws",
        MAX_REDRAWS + 1
    )))
}

pub(crate) fn collect_replicates(results: Vec<Result<(f64, usize)>>) -> Result<(Vec<f64>, usize)> {
    let mut stats = Vec::with_capacity(results.len());
    let mut redraws = 0;
    for r in results {
        let (t, d) = r?;
        stats.push(t);
        redraws += d;
    }
    Ok((stats, redraws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_replicate_arithmetic() {
        let p = resampling_p_values(0.5, &[-1.0, 0.0, 1.0, 2.0]);
        assert_eq!(p.right, 0.5);
        assert_eq!(p.left, 0.5);
        assert_eq!(p.two, 1.0);
    }

    #[test]
    fn round_off_counts_as_tie() {
        let t = 0.1 + 0.2;
        let p = resampling_p_values(t, &[0.3, 5.0]);
        assert_eq!(p.right, 1.0);
        assert_eq!(p.left, 0.5);
    }

    #[test]
    fn normal_p_values_at_zero() {
        let p = normal_p_values(0.0);
        assert_eq!(p.two, 1.0);
        assert!((p.right - 0.5).abs() < 1e-15);
        let p = normal_p_values(1.959963984540054);
        assert!((p.two - 0.05).abs() < 1e-10);
        assert!((p.right - 0.025).abs() < 1e-10);
    }

    #[test]
    fn upper_quantile_type_one() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.025), 98.0);
        assert_eq!(upper_quantile(&v, 0.05), 95.0);
        assert_eq!(upper_quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(upper_quantile(&[3.0, 1.0, 2.0], 0.0), 3.0);
    }

    #[test]
    fn redraw_loop_counts_and_gives_up() {
        let mut calls = 0;
        let (t, d) = draw_until_defined(|| {
            calls += 1;
            if calls < 3 {
                Err(Error::ZeroVariance)
            } else {
                Ok(1.5)
            }
        })
        .unwrap();
        assert_eq!((t, d), (1.5, 2));
        assert!(draw_until_defined(|| Err(Error::ZeroVariance)).is_err());
        assert!(matches!(
            draw_until_defined(|| Err(Error::InvalidArgument("x".into()))),
            Err(Error::InvalidArgument(_))
        ));
    }

    proptest! {
        #[test]
        fn step_five_identities(reps in proptest::collection::vec(-3i32..3, 1..60), t in -3i32..3) {
            let reps: Vec<f64> = reps.into_iter().map(f64::from).collect();
            let t = f64::from(t);
            let p = resampling_p_values(t, &reps);
            let ties = reps.iter().filter(|&&a| a == t).count() as f64 / reps.len() as f64;
            prop_assert!((p.right + p.left - 1.0 - ties).abs() < 1e-12);
            for v in [p.right, p.left, p.two] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
