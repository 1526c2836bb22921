//! Sample covariance and Cronbach's alpha.

use nalgebra::DMatrix;

use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::linalg;

/// A symmetric covariance matrix together with the scalars every
/// reliability coefficient needs: `tr(S)`, `1'S1` and `vecs(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSummary {
    matrix: DMatrix<f64>,
    trace: f64,
    total: f64,
    halfvec: Vec<f64>,
}

impl CovarianceSummary {
    /// Wraps a symmetric matrix. Fails with `NonSymmetric` otherwise.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let halfvec = linalg::vecs(&matrix)?;
        let trace = matrix.trace();
        let total = matrix.sum();
        Ok(Self {
            matrix,
            trace,
            total,
            halfvec,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// `1'S1`, the variance of the sum score.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn halfvec(&self) -> &[f64] {
        &self.halfvec
    }

    pub fn items(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when `1'S1 = 0`, where every coefficient is undefined.
    pub fn has_zero_total(&self) -> bool {
        self.total == 0.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }
}

/// Column means and the `N - 1` divisor covariance of the given rows.
pub(crate) fn mean_and_covariance<'a, I>(rows: I, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let mut n = 0usize;
    let mut mean = vec![0.0; k];
    for r in rows.clone() {
        n += 1;
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 examinees per group, got {n}"
        )));
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut cov = DMatrix::zeros(k, k);
    let mut centered = vec![0.0; k];
    for r in rows {
        for ((c, x), m) in centered.iter_mut().zip(r).zip(&mean) {
            *c = x - m;
        }
        for j in 0..k {
            let cj = centered[j];
            for i in j..k {
                cov[(i, j)] += centered[i] * cj;
            }
        }
    }
    let div = (n - 1) as f64;
    for j in 0..k {
        for i in j..k {
            let v = cov[(i, j)] / div;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}

/// Sample covariance with divisor `N - 1`, column means subtracted.
pub fn sample_covariance(data: &ItemResponseMatrix) -> Result<CovarianceSummary> {
    let (_, cov) = mean_and_covariance(data.iter_rows(), data.cols())?;
    CovarianceSummary::from_matrix(cov)
}

/// `(k / (k - 1)) (1 - tr(S) / 1'S1)`. Negative values are returned as is.
pub fn cronbach_alpha(cov: &CovarianceSummary) -> Result<f64> {
    let k = cov.items();
    if k < 2 {
        return Err(Error::DegenerateInput(format!("alpha needs k >= 2, got {k}")));
    }
    if cov.has_zero_total() {
        return Err(Error::ZeroTotalVariance);
    }
    let kf = k as f64;
    Ok(kf / (kf - 1.0) * (1.0 - cov.trace() / cov.total()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn summary(m: DMatrix<f64>) -> CovarianceSummary {
        CovarianceSummary::from_matrix(m).unwrap()
    }

    #[test]
    fn identical_rows_give_zero_matrix() {
        let data = ItemResponseMatrix::from_rows(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]).unwrap();
        let cov = sample_covariance(&data).unwrap();
        assert_eq!(cov.matrix(), &DMatrix::zeros(3, 3));
        assert_eq!(cov.trace(), 0.0);
        assert!(cov.has_zero_total());
        assert!(matches!(cronbach_alpha(&cov), Err(Error::ZeroTotalVariance)));
    }

    #[test]
    fn two_row_hand_case() {
        let data = ItemResponseMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let cov = sample_covariance(&data).unwrap();
        assert_eq!(cov.matrix(), &DMatrix::from_element(2, 2, 0.5));
        assert_eq!(cov.total(), 2.0);
        assert_eq!(cov.halfvec(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn alpha_closed_forms() {
        let eye = summary(DMatrix::identity(5, 5));
        assert_eq!(cronbach_alpha(&eye).unwrap(), 0.0);
        let ones = summary(DMatrix::from_element(5, 5, 1.0));
        assert_relative_eq!(cronbach_alpha(&ones).unwrap(), 1.0, epsilon = 1e-15);
        let cs = DMatrix::from_element(5, 5, 0.36) + DMatrix::identity(5, 5) * 0.64;
        // k rho / (1 + (k - 1) rho) = 1.8 / 2.44
        assert_relative_eq!(cronbach_alpha(&summary(cs)).unwrap(), 1.8 / 2.44, epsilon = 1e-14);
        assert_relative_eq!(1.8 / 2.44, 0.737705, epsilon = 1e-6);
    }

    #[test]
    fn alpha_can_be_negative() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]);
        assert!(cronbach_alpha(&summary(m)).unwrap() < 0.0);
    }

    #[test]
    fn covariance_consistency_monte_carlo() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let sigma = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.2, 0.5, 2.0, 0.3, 0.2, 0.3, 1.5]);
        let l = sigma.clone().cholesky().unwrap().unpack();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [200usize, 5000] {
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let z = nalgebra::DVector::from_fn(3, |_, _| StandardNormal.sample(&mut rng));
                rows.push((&l * z).as_slice().to_vec());
            }
            let cov = sample_covariance(&ItemResponseMatrix::from_rows(&rows).unwrap()).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    // sd of s_ij is sqrt((s_ii s_jj + s_ij^2) / n)
                    let sd = ((sigma[(i, i)] * sigma[(j, j)] + sigma[(i, j)].powi(2)) / n as f64).sqrt();
                    assert!((cov.get(i, j) - sigma[(i, j)]).abs() < 4.0 * sd);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sample_covariance_is_symmetric_psd(v in proptest::collection::vec(-5.0f64..5.0, 24)) {
            let data = ItemResponseMatrix::new(6, 4, v).unwrap();
            let cov = sample_covariance(&data).unwrap();
            let m = cov.matrix();
            prop_assert_eq!(linalg::max_asymmetry(m), 0.0);
            let (lmin, lmax) = linalg::eigen_range(m);
            prop_assert!(lmin >= -1e-10 * lmax.abs().max(1e-300));
            prop_assert!((cov.trace() - m.diagonal().sum()).abs() < 1e-12);
            prop_assert_eq!(cov.halfvec().len(), 10);
        }

        #[test]
        fn alpha_is_scale_invariant(v in proptest::collection::vec(-5.0f64..5.0, 24), c in 0.01f64..100.0) {
            let data = ItemResponseMatrix::new(6, 4, v).unwrap();
            let cov = sample_covariance(&data).unwrap();
            prop_assume!(cov.total().abs() > 1e-8);
            let scaled = summary(cov.matrix() * c);
            let a = cronbach_alpha(&cov).unwrap();
            let b = cronbach_alpha(&scaled).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
