//! Delta-method variance estimation.
//!
//! The ADF (asymptotically distribution-free) variance of a coefficient
//! estimate is `delta' V delta`, where `delta` is the gradient of the
//! coefficient with respect to `vecs(S)` and `V` the covariance of
//! `vecs(X X')`. It is estimated row by row from the projections
//! `delta'(S_i - S)` with `S_i = vecs((x_i - xbar)(x_i - xbar)')`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficient;
use crate::covariance::{cronbach_alpha, mean_and_covariance, CovarianceSummary};
use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::linalg::vecs_pairs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum VarianceMethod {
    #[default]
    #[serde(rename = "adf")]
    Adf,
    #[serde(rename = "normal-theory")]
    NormalTheory,
}

impl VarianceMethod {
    pub fn name(self) -> &'static str {
        match self {
            VarianceMethod::Adf => "adf",
            VarianceMethod::NormalTheory => "normal-theory",
        }
    }
}

impl fmt::Display for VarianceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VarianceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adf" => Ok(VarianceMethod::Adf),
            "normal-theory" | "normal" => Ok(VarianceMethod::NormalTheory),
            _ => Err(Error::InvalidArgument(format!("unknown variance method '{s}'"))),
        }
    }
}

/// Gradient of a coefficient in `vecs` order.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector {
    pub entries: Vec<f64>,
    pub source: &'static str,
}

impl DeltaVector {
    /// Symmetric `W` with `c' W c = delta' vecs(c c')`.
    pub fn weight_matrix(&self, k: usize) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(k, k);
        for ((i, j), &d) in vecs_pairs(k).zip(&self.entries) {
            if i == j {
                w[(i, i)] = d;
            } else {
                w[(i, j)] = d / 2.0;
                w[(j, i)] = d / 2.0;
            }
        }
        w
    }
}

/// Pooled two-group variance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    /// `(n2/N) comp1 + (n1/N) comp2`.
    pub value: f64,
    /// Per-group limit-variance estimates before pooling.
    pub per_group: (f64, f64),
    pub method: VarianceMethod,
}

/// Gradient of Cronbach's alpha in `vecs` order: off-diagonal entries
/// `2 k/(k-1) tr / T^2`, diagonal entries `-k/(k-1) (T - tr) / T^2`.
pub fn alpha_delta(cov: &CovarianceSummary) -> Result<DeltaVector> {
    let k = cov.items();
    if cov.has_zero_total() {
        return Err(Error::ZeroTotalVariance);
    }
    let kr = k as f64 / (k as f64 - 1.0);
    let t = cov.total();
    let tr = cov.trace();
    let off = 2.0 * kr * tr / (t * t);
    let diag = -kr * (t - tr) / (t * t);
    Ok(DeltaVector {
        entries: vecs_pairs(k).map(|(i, j)| if i == j { diag } else { off }).collect(),
        source: "alpha",
    })
}

/// Everything the test statistics need from one group.
#[derive(Debug, Clone)]
pub struct GroupStats {
    pub n: usize,
    pub k: usize,
    pub cov: CovarianceSummary,
    /// The coefficient evaluated at the sample covariance.
    pub estimate: f64,
    /// Estimated limit variance of `sqrt(n) (estimate - true value)`.
    pub variance: f64,
}

/// `delta'(S_i - S)` for each row, given the group mean and covariance.
pub(crate) fn row_projections<'a, I>(
    rows: I,
    mean: &[f64],
    cov: &CovarianceSummary,
    delta: &DeltaVector,
    alpha_shape: bool,
) -> Vec<f64>
where
    I: Iterator<Item = &'a [f64]>,
{
    let k = mean.len();
    let centre: f64 = delta.entries.iter().zip(cov.halfvec()).map(|(d, s)| d * s).sum();
    let mut c = vec![0.0; k];
    if alpha_shape {
        // alpha's delta has one diagonal and one off-diagonal value, so
        // c'Wc = d0 |c|^2 + d1 ((sum c)^2 - |c|^2) / 2
        let d0 = delta.entries[0];
        let d1 = if k > 1 { delta.entries[1] } else { 0.0 };
        rows.map(|r| {
            let mut sq = 0.0;
            let mut sum = 0.0;
            for (x, m) in r.iter().zip(mean) {
                let v = x - m;
                sq += v * v;
                sum += v;
            }
            d0 * sq + d1 * (sum * sum - sq) / 2.0 - centre
        })
        .collect()
    } else {
        let w = delta.weight_matrix(k);
        rows.map(|r| {
            for ((ci, x), m) in c.iter_mut().zip(r).zip(mean) {
                *ci = x - m;
            }
            let mut q = 0.0;
            for j in 0..k {
                let mut acc = 0.0;
                for i in 0..k {
                    acc += w[(i, j)] * c[i];
                }
                q += acc * c[j];
            }
            q - centre
        })
        .collect()
    }
}

fn sum_of_squares(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Computes a group's coefficient estimate and its variance component.
pub fn group_stats<'a, I>(
    rows: I,
    k: usize,
    coefficient: &Coefficient,
    method: VarianceMethod,
) -> Result<GroupStats>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let (mean, matrix) = mean_and_covariance(rows.clone(), k)?;
    let cov = CovarianceSummary::from_matrix(matrix)?;
    let n = rows.clone().count();
    let estimate = coefficient.value(&cov)?;
    let variance = match method {
        VarianceMethod::Adf => {
            let delta = DeltaVector {
                entries: coefficient.gradient(&cov)?,
                source: coefficient.name(),
            };
            let proj = row_projections(rows, &mean, &cov, &delta, *coefficient == Coefficient::Alpha);
            sum_of_squares(&proj) / (n - 1) as f64
        }
        VarianceMethod::NormalTheory => {
            if *coefficient != Coefficient::Alpha {
                return Err(Error::Unsupported(format!(
                    "normal-theory variance is only available for alpha, not {coefficient}"
                )));
            }
            normal_theory_variance(&cov)?
        }
    };
    Ok(GroupStats {
        n,
        k,
        cov,
        estimate,
        variance,
    })
}

pub fn group_stats_of(data: &ItemResponseMatrix, coefficient: &Coefficient, method: VarianceMethod) -> Result<GroupStats> {
    group_stats(data.iter_rows(), data.cols(), coefficient, method)
}

/// `(n2/N) v1 + (n1/N) v2`.
pub fn pool(g1: &GroupStats, g2: &GroupStats) -> f64 {
    let n = (g1.n + g2.n) as f64;
    (g2.n as f64 / n) * g1.variance + (g1.n as f64 / n) * g2.variance
}

/// Pooled ADF variance of `sqrt(n1 n2 / N) (alpha1 - alpha2)` for Cronbach's alpha.
pub fn pooled_adf_variance(data1: &ItemResponseMatrix, data2: &ItemResponseMatrix) -> Result<VarianceEstimate> {
    pooled_variance(data1, data2, &Coefficient::Alpha, VarianceMethod::Adf)
}

/// Pooled variance for any coefficient and variance method.
pub fn pooled_variance(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    coefficient: &Coefficient,
    method: VarianceMethod,
) -> Result<VarianceEstimate> {
    let g1 = group_stats_of(data1, coefficient, method)?;
    let g2 = group_stats_of(data2, coefficient, method)?;
    let value = pool(&g1, &g2);
    if value == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(VarianceEstimate {
        value,
        per_group: (g1.variance, g2.variance),
        method,
    })
}

/// Normal-theory limit variance of `sqrt(n) alpha_hat` evaluated at `S`:
/// `2k^2/(k-1)^2 [T (tr S^2 + tr(S)^2) - 2 tr(S) 1'S^2 1] / T^3`.
pub fn normal_theory_variance(cov: &CovarianceSummary) -> Result<f64> {
    if cov.has_zero_total() {
        return Err(Error::ZeroTotalVariance);
    }
    let k = cov.items() as f64;
    let s = cov.matrix();
    let t = cov.total();
    let tr = cov.trace();
    let s2 = s * s;
    let bracket = t * (s2.trace() + tr * tr) - 2.0 * tr * s2.sum();
    let v = 2.0 * k * k / ((k - 1.0) * (k - 1.0)) * bracket / (t * t * t);
    // the bracket is >= 0 for PSD input; clip round-off below zero
    Ok(v.max(0.0))
}

/// Paired-design variance: columns `0..k1` are occasion 1 and
/// `k1..k1+k2` occasion 2, measured on the same examinees.
///
/// Returns the estimated limit variance of `sqrt(N) (alpha1 - alpha2)`:
/// the empirical second moment of `delta1'(S_i1 - S1) - delta2'(S_i2 - S2)`,
/// which equals `d' V d` with cross-block entries of `d` set to zero.
pub fn paired_plugin_variance(data: &ItemResponseMatrix, k1: usize, k2: usize) -> Result<f64> {
    Ok(paired_stats(data, k1, k2, &Coefficient::Alpha)?.variance)
}

#[derive(Debug, Clone)]
pub struct PairedStats {
    pub n: usize,
    pub first: GroupStats,
    pub second: GroupStats,
    pub variance: f64,
}

pub(crate) fn paired_stats(
    data: &ItemResponseMatrix,
    k1: usize,
    k2: usize,
    coefficient: &Coefficient,
) -> Result<PairedStats> {
    if k1 < 2 || k2 < 2 || k1 + k2 != data.cols() {
        return Err(Error::InvalidArgument(format!(
            "paired data has {} columns, cannot split into k1 = {k1} and k2 = {k2} (each >= 2)",
            data.cols()
        )));
    }
    let n = data.rows();
    let rows1 = data.iter_rows().map(|r| &r[..k1]);
    let rows2 = data.iter_rows().map(|r| &r[k1..]);
    let (mean1, m1) = mean_and_covariance(rows1.clone(), k1)?;
    let (mean2, m2) = mean_and_covariance(rows2.clone(), k2)?;
    let cov1 = CovarianceSummary::from_matrix(m1)?;
    let cov2 = CovarianceSummary::from_matrix(m2)?;
    let d1 = DeltaVector {
        entries: coefficient.gradient(&cov1)?,
        source: coefficient.name(),
    };
    let d2 = DeltaVector {
        entries: coefficient.gradient(&cov2)?,
        source: coefficient.name(),
    };
    let alpha_shape = *coefficient == Coefficient::Alpha;
    let p1 = row_projections(rows1, &mean1, &cov1, &d1, alpha_shape);
    let p2 = row_projections(rows2, &mean2, &cov2, &d2, alpha_shape);
    let div = (n - 1) as f64;
    let variance = p1.iter().zip(&p2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / div;
    let first = GroupStats {
        n,
        k: k1,
        estimate: coefficient.value(&cov1)?,
        variance: sum_of_squares(&p1) / div,
        cov: cov1,
    };
    let second = GroupStats {
        n,
        k: k2,
        estimate: coefficient.value(&cov2)?,
        variance: sum_of_squares(&p2) / div,
        cov: cov2,
    };
    Ok(PairedStats {
        n,
        first,
        second,
        variance,
    })
}

/// Cronbach's alpha of a data matrix (convenience).
pub fn alpha_of(data: &ItemResponseMatrix) -> Result<f64> {
    cronbach_alpha(&crate::covariance::sample_covariance(data)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unvecs, vecs, vecs_len};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn summary(m: DMatrix<f64>) -> CovarianceSummary {
        CovarianceSummary::from_matrix(m).unwrap()
    }

    /// Direct scalar-by-scalar evaluation of the pooled estimator,
    /// building every vecs vector explicitly.
    fn pooled_oracle(g1: &[Vec<f64>], g2: &[Vec<f64>]) -> f64 {
        fn component(g: &[Vec<f64>]) -> f64 {
            let n = g.len();
            let k = g[0].len();
            let mean: Vec<f64> = (0..k).map(|j| g.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
            let mut s = DMatrix::zeros(k, k);
            for r in g {
                for i in 0..k {
                    for j in 0..k {
                        s[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1) as f64;
                    }
                }
            }
            let tr: f64 = (0..k).map(|i| s[(i, i)]).sum();
            let t: f64 = s.iter().sum();
            let kr = k as f64 / (k as f64 - 1.0);
            let mut delta = Vec::new();
            let mut svec = Vec::new();
            for j in 0..k {
                for i in j..k {
                    delta.push(if i == j { -kr * (t - tr) / (t * t) } else { 2.0 * kr * tr / (t * t) });
                    svec.push(s[(i, j)]);
                }
            }
            let mut acc = 0.0;
            for r in g {
                let mut proj = 0.0;
                let mut p = 0;
                for j in 0..k {
                    for i in j..k {
                        let sij = (r[i] - mean[i]) * (r[j] - mean[j]);
                        proj += delta[p] * (sij - svec[p]);
                        p += 1;
                    }
                }
                acc += proj * proj;
            }
            acc / (n - 1) as f64
        }
        let n1 = g1.len() as f64;
        let n2 = g2.len() as f64;
        let n = n1 + n2;
        n2 / n * component(g1) + n1 / n * component(g2)
    }

    #[test]
    fn alpha_delta_at_identity() {
        let d = alpha_delta(&summary(DMatrix::identity(5, 5))).unwrap();
        for ((i, j), v) in vecs_pairs(5).zip(&d.entries) {
            if i == j {
                assert_eq!(*v, 0.0);
            } else {
                assert_relative_eq!(*v, 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn alpha_delta_signs_near_all_ones() {
        let s = DMatrix::from_element(5, 5, 1.0) + DMatrix::identity(5, 5) * 0.1;
        let d = alpha_delta(&summary(s)).unwrap();
        assert!(d.entries[0] < 0.0);
        assert!(d.entries[1] > 0.0);
    }

    #[test]
    fn alpha_delta_matches_directional_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let k = 4;
            let a: DMatrix<f64> = DMatrix::from_fn(k, k + 1, |_, _| StandardNormal.sample(&mut rng));
            let s: DMatrix<f64> = &a * a.transpose() + DMatrix::identity(k, k) * 0.1;
            let dir: Vec<f64> = (0..vecs_len(k)).map(|_| StandardNormal.sample(&mut rng)).collect();
            let base = vecs(&s).unwrap();
            let h = 1e-5;
            let at = |t: f64| {
                let v: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + t * d).collect();
                cronbach_alpha(&summary(unvecs(&v, k).unwrap())).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let d = alpha_delta(&summary(s)).unwrap();
            let analytic: f64 = d.entries.iter().zip(&dir).map(|(a, b)| a * b).sum();
            assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1e-3));
        }
    }

    #[test]
    fn tiny_pooled_oracle() {
        let g1 = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let g2 = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![0.0, 0.0]];
        let expected = pooled_oracle(&g1, &g2);
        let est = pooled_adf_variance(
            &ItemResponseMatrix::from_rows(&g1).unwrap(),
            &ItemResponseMatrix::from_rows(&g2).unwrap(),
        );
        // group 2 is perfectly consistent: tr/T = 1/2 for every row pattern
        match est {
            Ok(v) => assert_relative_eq!(v.value, expected, max_relative = 1e-12),
            Err(Error::ZeroVariance) => assert_eq!(expected, 0.0),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn pooled_matches_oracle_on_random_data() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for (n1, n2, k) in [(7usize, 9usize, 3usize), (12, 5, 5), (30, 30, 4)] {
            let draw = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
                (0..n).map(|_| (0..k).map(|_| StandardNormal.sample(rng)).collect()).collect()
            };
            let g1 = draw(n1, &mut rng);
            let g2 = draw(n2, &mut rng);
            let expected = pooled_oracle(&g1, &g2);
            let v = pooled_adf_variance(
                &ItemResponseMatrix::from_rows(&g1).unwrap(),
                &ItemResponseMatrix::from_rows(&g2).unwrap(),
            )
            .unwrap();
            assert_relative_eq!(v.value, expected, max_relative = 1e-11);
            let n = (n1 + n2) as f64;
            assert_relative_eq!(
                v.value,
                n2 as f64 / n * v.per_group.0 + n1 as f64 / n * v.per_group.1,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn generic_projection_agrees_with_alpha_shortcut() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<Vec<f64>> = (0..15).map(|_| (0..4).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let data = ItemResponseMatrix::from_rows(&rows).unwrap();
        let (mean, mm) = mean_and_covariance(data.iter_rows(), 4).unwrap();
        let cov = summary(mm);
        let d = alpha_delta(&cov).unwrap();
        let fast = row_projections(data.iter_rows(), &mean, &cov, &d, true);
        let slow = row_projections(data.iter_rows(), &mean, &cov, &d, false);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_item_still_positive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let make = |rng: &mut rand_chacha::ChaCha8Rng| {
            let rows: Vec<Vec<f64>> = (0..20)
                .map(|_| vec![3.0, StandardNormal.sample(rng), StandardNormal.sample(rng)])
                .collect();
            ItemResponseMatrix::from_rows(&rows).unwrap()
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        assert!(pooled_adf_variance(&a, &b).unwrap().value > 0.0);
    }

    #[test]
    fn duplicated_rows_recompute() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        let g1: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let g2: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let dup = |g: &[Vec<f64>]| -> Vec<Vec<f64>> { g.iter().flat_map(|r| [r.clone(), r.clone()]).collect() };
        let d1 = dup(&g1);
        let d2 = dup(&g2);
        let v = pooled_adf_variance(
            &ItemResponseMatrix::from_rows(&d1).unwrap(),
            &ItemResponseMatrix::from_rows(&d2).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(v.value, pooled_oracle(&d1, &d2), max_relative = 1e-11);
    }

    #[test]
    fn variance_is_row_order_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        let g1: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let g2: Vec<Vec<f64>> = (0..10).map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let mut g1r = g1.clone();
        g1r.reverse();
        let a = pooled_adf_variance(&ItemResponseMatrix::from_rows(&g1).unwrap(), &ItemResponseMatrix::from_rows(&g2).unwrap()).unwrap();
        let b = pooled_adf_variance(&ItemResponseMatrix::from_rows(&g1r).unwrap(), &ItemResponseMatrix::from_rows(&g2).unwrap()).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
    }

    #[test]
    fn normal_theory_closed_forms() {
        assert_eq!(normal_theory_variance(&summary(DMatrix::from_element(4, 4, 1.0))).unwrap(), 0.0);
        assert_relative_eq!(normal_theory_variance(&summary(DMatrix::identity(2, 2))).unwrap(), 4.0, epsilon = 1e-14);
        let s = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.2, 0.3, 2.0, 0.4, 0.2, 0.4, 1.5]);
        let a = normal_theory_variance(&summary(s.clone())).unwrap();
        let b = normal_theory_variance(&summary(s * 7.5)).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn normal_theory_matches_monte_carlo() {
        // variance of sqrt(n) alpha_hat over replications, n = 5000, k = 5, P2
        let k = 5;
        let p = DMatrix::from_element(k, k, 0.36) + DMatrix::identity(k, k) * 0.64;
        let l = p.clone().cholesky().unwrap().unpack();
        let theory = normal_theory_variance(&summary(p)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(16);
        let n = 5000;
        let reps = 400;
        let mut alphas = Vec::with_capacity(reps);
        for _ in 0..reps {
            let mut vals = Vec::with_capacity(n * k);
            for _ in 0..n {
                let z = nalgebra::DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
                vals.extend_from_slice((&l * z).as_slice());
            }
            alphas.push(alpha_of(&ItemResponseMatrix::new(n, k, vals).unwrap()).unwrap());
        }
        let mean = alphas.iter().sum::<f64>() / reps as f64;
        let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (reps - 1) as f64 * n as f64;
        // sd of a variance estimate from 400 draws is ~7%; allow 20%
        assert!((var / theory - 1.0).abs() < 0.2, "mc {var} vs theory {theory}");
    }

    #[test]
    fn paired_copy_is_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| {
                let h: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
                [h.clone(), h].concat()
            })
            .collect();
        let data = ItemResponseMatrix::from_rows(&rows).unwrap();
        assert_eq!(paired_plugin_variance(&data, 3, 3).unwrap(), 0.0);
    }

    #[test]
    fn paired_independent_halves_is_sum_of_components() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(18);
        let n = 4000;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..7).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let data = ItemResponseMatrix::from_rows(&rows).unwrap();
        let ps = paired_stats(&data, 3, 4, &Coefficient::Alpha).unwrap();
        let unpaired = ps.first.variance + ps.second.variance;
        assert!(ps.variance >= 0.0);
        assert!((ps.variance / unpaired - 1.0).abs() < 0.1);
    }
}
