use statrs::distribution::ContinuousCDF;

use crate::covariance::sample_covariance;
use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::resampling::{run_indexed, NormalSampler, ResamplingPlan, RngStream};
use crate::variance::{paired_stats, VarianceMethod};

use super::two_sample::{assemble, interval, Assembly};
use super::{
    collect_replicates, draw_until_defined, normal_p_values, resampling_p_values, std_normal, upper_quantile,
    TestMethod, TestOptions, TestResult,
};

struct PairedObserved {
    t: f64,
    diff: f64,
    b: f64,
    estimates: (f64, f64),
}

fn observe(data: &ItemResponseMatrix, k1: usize, k2: usize, opts: &TestOptions, centre: f64) -> Result<PairedObserved> {
    let ps = paired_stats(data, k1, k2, &opts.coefficient)?;
    if !(ps.variance > 0.0) {
        return Err(Error::DegenerateInput(
            "paired variance estimate is zero (occasions are identical up to the projection)".into(),
        ));
    }
    let b = ps.variance.sqrt();
    let diff = ps.first.estimate - ps.second.estimate;
    Ok(PairedObserved {
        t: (ps.n as f64).sqrt() * (diff - centre) / b,
        diff,
        b,
        estimates: (ps.first.estimate, ps.second.estimate),
    })
}

/// Test of equal coefficients for two occasions measured on the same
/// examinees. Columns `0..k1` hold occasion 1 and `k1..k1+k2` occasion 2.
///
/// `method` is `Asymptotic` or `Bootstrap`; the bootstrap draws rows from
/// the joint normal with the full sample covariance of all columns.
pub fn paired_test(
    data: &ItemResponseMatrix,
    k1: usize,
    k2: usize,
    method: TestMethod,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<TestResult> {
    opts.validate()?;
    if opts.variance != VarianceMethod::Adf {
        return Err(Error::Unsupported("paired tests use the ADF variance only".into()));
    }
    let obs = observe(data, k1, k2, opts, 0.0)?;
    let n = data.rows();
    let scale = (n as f64).sqrt();
    let estimates = vec![obs.estimates.0, obs.estimates.1];
    match method {
        TestMethod::Asymptotic => {
            let z = std_normal().inverse_cdf(1.0 - opts.level / 2.0);
            Ok(assemble(
                Assembly {
                    method,
                    statistic: obs.t,
                    p: normal_p_values(obs.t),
                    ci: Some(interval(obs.diff, z, obs.b, scale, opts.level)),
                    estimates,
                    difference: obs.diff,
                    std_error: obs.b,
                    replicates_used: 0,
                    degenerate_redraws: 0,
                    seed: None,
                },
                opts,
            ))
        }
        TestMethod::Bootstrap => {
            plan.validate()?;
            let joint = sample_covariance(data)?;
            let sampler = NormalSampler::new(&joint)?;
            let k = k1 + k2;
            let centre = obs.diff;
            let results = run_indexed(plan.replicates, plan.workers, |l| {
                let mut rng = RngStream::new(plan.seed, l as u64).rng();
                draw_until_defined(|| {
                    let mut buf = Vec::with_capacity(n * k);
                    for _ in 0..n {
                        sampler.draw_into(&mut rng, &mut buf);
                    }
                    let sample = ItemResponseMatrix::new(n, k, buf)?;
                    Ok(observe(&sample, k1, k2, opts, centre)?.t)
                })
            });
            let (stats, redraws) = collect_replicates(results)?;
            let c = upper_quantile(&stats, opts.level / 2.0);
            Ok(assemble(
                Assembly {
                    method,
                    statistic: obs.t,
                    p: resampling_p_values(obs.t, &stats),
                    ci: Some(interval(obs.diff, c, obs.b, scale, opts.level)),
                    estimates,
                    difference: obs.diff,
                    std_error: obs.b,
                    replicates_used: stats.len(),
                    degenerate_redraws: redraws,
                    seed: Some(plan.seed),
                },
                opts,
            ))
        }
        other => Err(Error::Unsupported(format!(
            "paired designs support asymptotic and bootstrap tests, not {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::bootstrap_test;
    use nalgebra::DMatrix;

    fn cs(k: usize, rho: f64) -> DMatrix<f64> {
        DMatrix::from_element(k, k, rho) + DMatrix::identity(k, k) * (1.0 - rho)
    }

    fn sample(cov: &DMatrix<f64>, n: usize, seed: u64) -> ItemResponseMatrix {
        NormalSampler::from_matrix(cov)
            .unwrap()
            .sample(n, &mut RngStream::new(seed, 0).rng())
            .unwrap()
    }

    fn side_by_side(a: &ItemResponseMatrix, b: &ItemResponseMatrix) -> ItemResponseMatrix {
        let rows: Vec<Vec<f64>> = a.iter_rows().zip(b.iter_rows()).map(|(x, y)| [x, y].concat()).collect();
        ItemResponseMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn copied_occasion_is_degenerate() {
        let a = sample(&cs(3, 0.4), 30, 1);
        let data = side_by_side(&a, &a);
        let e = paired_test(&data, 3, 3, TestMethod::Asymptotic, &ResamplingPlan::bootstrap(10, 1), &TestOptions::default())
            .unwrap_err();
        assert!(matches!(e, Error::DegenerateInput(_)));
    }

    #[test]
    fn independent_halves_match_two_sample_bootstrap() {
        let a = sample(&cs(4, 0.3), 400, 1);
        let b = sample(&cs(4, 0.45), 400, 2);
        let data = side_by_side(&a, &b);
        let opts = TestOptions::default();
        let plan = ResamplingPlan::bootstrap(2000, 5);
        let paired = paired_test(&data, 4, 4, TestMethod::Bootstrap, &plan, &opts).unwrap();
        let two = bootstrap_test(&a, &b, &plan, &opts).unwrap();
        assert!((paired.p_two - two.p_two).abs() < 0.05, "{} {}", paired.p_two, two.p_two);
        // zero cross-covariance: b-hat^2 ~ v1 + v2 and sqrt(N) vs sqrt(N/2) scaling
        assert!((paired.statistic - two.statistic).abs() < 0.25 * two.statistic.abs().max(1.0));
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let a = sample(&cs(3, 0.3), 50, 3);
        let b = sample(&cs(3, 0.5), 50, 4);
        let data = side_by_side(&a, &b);
        let opts = TestOptions::default();
        let r1 = paired_test(&data, 3, 3, TestMethod::Bootstrap, &ResamplingPlan::bootstrap(100, 9).with_workers(Some(1)), &opts).unwrap();
        let r2 = paired_test(&data, 3, 3, TestMethod::Bootstrap, &ResamplingPlan::bootstrap(100, 9).with_workers(Some(4)), &opts).unwrap();
        assert_eq!(r1, r2);
        let ci = r1.ci.unwrap();
        assert!(ci.lower < ci.upper);
    }

    #[test]
    fn unsupported_methods() {
        let a = sample(&cs(3, 0.3), 20, 3);
        let data = side_by_side(&a, &sample(&cs(3, 0.3), 20, 4));
        let plan = ResamplingPlan::permutation(10, 1);
        assert!(matches!(
            paired_test(&data, 3, 3, TestMethod::Permutation, &plan, &TestOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
