use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::resampling::{
    enumerate_assignments, run_indexed, shuffled_indices, NormalSampler, ResamplingMethod, ResamplingPlan, RngStream,
};
use crate::variance::{group_stats, pool, GroupStats};

use super::{
    collect_replicates, draw_until_defined, normal_p_values, replicate_is_degenerate, resampling_p_values,
    std_normal, upper_quantile, ConfidenceInterval, PValues, TestMethod, TestOptions, TestResult,
};
use statrs::distribution::ContinuousCDF;

/// The studentized difference for one pair of samples.
#[derive(Debug, Clone)]
pub(crate) struct Observed {
    pub t: f64,
    pub diff: f64,
    pub sigma: f64,
    /// `sqrt(n1 n2 / N)`
    pub scale: f64,
    pub g1: GroupStats,
    pub g2: GroupStats,
}

/// `sqrt(n1 n2 / N) (est1 - est2 - centre) / sigma` on the given rows.
pub(crate) fn studentize<'a, I1, I2>(
    rows1: I1,
    k1: usize,
    rows2: I2,
    k2: usize,
    opts: &TestOptions,
    centre: f64,
) -> Result<Observed>
where
    I1: Iterator<Item = &'a [f64]> + Clone,
    I2: Iterator<Item = &'a [f64]> + Clone,
{
    let g1 = group_stats(rows1, k1, &opts.coefficient, opts.variance)?;
    let g2 = group_stats(rows2, k2, &opts.coefficient, opts.variance)?;
    let v = pool(&g1, &g2);
    if !(v > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let (n1, n2) = (g1.n as f64, g2.n as f64);
    let scale = (n1 * n2 / (n1 + n2)).sqrt();
    let sigma = v.sqrt();
    let diff = g1.estimate - g2.estimate;
    Ok(Observed {
        t: scale * (diff - centre) / sigma,
        diff,
        sigma,
        scale,
        g1,
        g2,
    })
}

fn observe(data1: &ItemResponseMatrix, data2: &ItemResponseMatrix, opts: &TestOptions) -> Result<Observed> {
    opts.validate()?;
    studentize(data1.iter_rows(), data1.cols(), data2.iter_rows(), data2.cols(), opts, 0.0)
}

/// `T_n = sqrt(n1 n2 / N) (est1 - est2) / sigma_hat`.
pub fn studentized_statistic(data1: &ItemResponseMatrix, data2: &ItemResponseMatrix, opts: &TestOptions) -> Result<f64> {
    Ok(observe(data1, data2, opts)?.t)
}

pub(crate) struct Assembly {
    pub method: TestMethod,
    pub statistic: f64,
    pub p: PValues,
    pub ci: Option<ConfidenceInterval>,
    pub estimates: Vec<f64>,
    pub difference: f64,
    pub std_error: f64,
    pub replicates_used: usize,
    pub degenerate_redraws: usize,
    pub seed: Option<u64>,
}

pub(crate) fn assemble(a: Assembly, opts: &TestOptions) -> TestResult {
    TestResult {
        statistic: a.statistic,
        method: a.method,
        coefficient: opts.coefficient.to_string(),
        variance_method: opts.variance,
        alternative: opts.alternative,
        p_right: a.p.right,
        p_left: a.p.left,
        p_two: a.p.two,
        p_value: a.p.select(opts.alternative),
        ci: a.ci,
        alpha_estimates: a.estimates,
        difference: a.difference,
        std_error: a.std_error,
        replicates_used: a.replicates_used,
        degenerate_redraws: a.degenerate_redraws,
        seed: a.seed,
    }
}

/// `diff -/+ c * sd / scale`.
pub(crate) fn interval(diff: f64, c: f64, sd: f64, scale: f64, level: f64) -> ConfidenceInterval {
    let half = c * sd / scale;
    ConfidenceInterval {
        lower: diff - half,
        upper: diff + half,
        level: 1.0 - level,
    }
}

/// Compares `T_n` with the standard normal.
pub fn asymptotic_test(data1: &ItemResponseMatrix, data2: &ItemResponseMatrix, opts: &TestOptions) -> Result<TestResult> {
    let obs = observe(data1, data2, opts)?;
    let z = std_normal().inverse_cdf(1.0 - opts.level / 2.0);
    Ok(assemble(
        Assembly {
            method: TestMethod::Asymptotic,
            statistic: obs.t,
            p: normal_p_values(obs.t),
            ci: Some(interval(obs.diff, z, obs.sigma, obs.scale, opts.level)),
            estimates: vec![obs.g1.estimate, obs.g2.estimate],
            difference: obs.diff,
            std_error: obs.sigma,
            replicates_used: 0,
            degenerate_redraws: 0,
            seed: None,
        },
        opts,
    ))
}

struct Replicates {
    obs: Observed,
    stats: Vec<f64>,
    degenerate: usize,
    method: TestMethod,
}

fn permutation_replicates(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<Replicates> {
    plan.validate()?;
    let (k1, k2) = (data1.cols(), data2.cols());
    if k1 != k2 {
        return Err(Error::UnequalItemCounts { k1, k2 });
    }
    let obs = observe(data1, data2, opts)?;
    let pooled = data1.stack(data2)?;
    let n = pooled.rows();
    let n1 = data1.rows();
    let k = k1;
    let pooled = &pooled;
    let stat_of = |first: &[usize], second: &[usize]| -> Result<f64> {
        let r1 = first.iter().map(|&i| pooled.row(i));
        let r2 = second.iter().map(|&i| pooled.row(i));
        Ok(studentize(r1, k, r2, k, opts, 0.0)?.t)
    };
    match plan.method {
        ResamplingMethod::ExactPermutation => {
            let subsets: Vec<Vec<usize>> = enumerate_assignments(n, n1, plan.exact_cap)?.collect();
            let results = run_indexed(subsets.len(), plan.workers, |l| {
                let first = &subsets[l];
                let mut in_first = vec![false; n];
                for &i in first {
                    in_first[i] = true;
                }
                let second: Vec<usize> = (0..n).filter(|&i| !in_first[i]).collect();
                match stat_of(first, &second) {
                    Ok(t) if t.is_finite() => Ok((t, 0)),
                    Ok(_) => Ok((f64::INFINITY, 1)),
                    // an undefined statistic counts as a tie at +inf
                    Err(e) if replicate_is_degenerate(&e) => Ok((f64::INFINITY, 1)),
                    Err(e) => Err(e),
                }
            });
            let (stats, degenerate) = collect_replicates(results)?;
            Ok(Replicates {
                obs,
                stats,
                degenerate,
                method: TestMethod::ExactPermutation,
            })
        }
        _ => {
            let results = run_indexed(plan.replicates, plan.workers, |l| {
                let mut rng = RngStream::new(plan.seed, l as u64).rng();
                draw_until_defined(|| {
                    let idx = shuffled_indices(n, &mut rng);
                    stat_of(&idx[..n1], &idx[n1..])
                })
            });
            let (stats, degenerate) = collect_replicates(results)?;
            Ok(Replicates {
                obs,
                stats,
                degenerate,
                method: TestMethod::Permutation,
            })
        }
    }
}

fn finish(reps: Replicates, seed: Option<u64>, opts: &TestOptions) -> TestResult {
    let obs = &reps.obs;
    let c = upper_quantile(&reps.stats, opts.level / 2.0);
    assemble(
        Assembly {
            method: reps.method,
            statistic: obs.t,
            p: resampling_p_values(obs.t, &reps.stats),
            ci: Some(interval(obs.diff, c, obs.sigma, obs.scale, opts.level)),
            estimates: vec![obs.g1.estimate, obs.g2.estimate],
            difference: obs.diff,
            std_error: obs.sigma,
            replicates_used: reps.stats.len(),
            degenerate_redraws: reps.degenerate,
            seed,
        },
        opts,
    )
}

/// Studentized permutation test. `plan.method` selects Monte Carlo
/// (`Permutation`) or full enumeration (`ExactPermutation`).
///
/// Both groups must have the same number of items.
pub fn permutation_test(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<TestResult> {
    let reps = permutation_replicates(data1, data2, plan, opts)?;
    let seed = (reps.method == TestMethod::Permutation).then_some(plan.seed);
    Ok(finish(reps, seed, opts))
}

/// Permutation confidence interval for `est1 - est2` at level `1 - opts.level`.
pub fn permutation_ci(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<ConfidenceInterval> {
    let reps = permutation_replicates(data1, data2, plan, opts)?;
    let obs = &reps.obs;
    let c = upper_quantile(&reps.stats, opts.level / 2.0);
    Ok(interval(obs.diff, c, obs.sigma, obs.scale, opts.level))
}

fn bootstrap_draws(
    obs: &Observed,
    n1: usize,
    n2: usize,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<(Vec<f64>, usize)> {
    let s1 = NormalSampler::new(&obs.g1.cov)?;
    let s2 = NormalSampler::new(&obs.g2.cov)?;
    let (k1, k2) = (s1.dim(), s2.dim());
    let centre = obs.diff;
    let results = run_indexed(plan.replicates, plan.workers, |l| {
        let mut rng = RngStream::new(plan.seed, l as u64).rng();
        let mut b1 = Vec::with_capacity(n1 * k1);
        let mut b2 = Vec::with_capacity(n2 * k2);
        draw_until_defined(|| {
            b1.clear();
            b2.clear();
            for _ in 0..n1 {
                s1.draw_into(&mut rng, &mut b1);
            }
            for _ in 0..n2 {
                s2.draw_into(&mut rng, &mut b2);
            }
            Ok(studentize(b1.chunks_exact(k1), k1, b2.chunks_exact(k2), k2, opts, centre)?.t)
        })
    });
    collect_replicates(results)
}

/// The bootstrap replicates `T_n*`, centred at the observed difference,
/// in replicate order.
pub fn bootstrap_replicates(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<Vec<f64>> {
    plan.validate()?;
    let obs = observe(data1, data2, opts)?;
    Ok(bootstrap_draws(&obs, data1.rows(), data2.rows(), plan, opts)?.0)
}

/// Parametric bootstrap test: replicate groups are drawn from
/// `N(0, S_g)` and the replicate statistic is centred at the observed
/// difference. Item counts may differ.
pub fn bootstrap_test(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<TestResult> {
    plan.validate()?;
    let obs = observe(data1, data2, opts)?;
    let (stats, degenerate) = bootstrap_draws(&obs, data1.rows(), data2.rows(), plan, opts)?;
    Ok(finish(
        Replicates {
            obs,
            stats,
            degenerate,
            method: TestMethod::Bootstrap,
        },
        Some(plan.seed),
        opts,
    ))
}

/// Runs the two-sample test named by `method`. For resampling methods the
/// plan's replicates, seed and workers are used.
pub fn compare(
    data1: &ItemResponseMatrix,
    data2: &ItemResponseMatrix,
    method: TestMethod,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<TestResult> {
    let mut plan = plan.clone();
    match method {
        TestMethod::Asymptotic => asymptotic_test(data1, data2, opts),
        TestMethod::Permutation => {
            plan.method = ResamplingMethod::Permutation;
            permutation_test(data1, data2, &plan, opts)
        }
        TestMethod::ExactPermutation => {
            plan.method = ResamplingMethod::ExactPermutation;
            permutation_test(data1, data2, &plan, opts)
        }
        TestMethod::Bootstrap => {
            plan.method = ResamplingMethod::ParametricBootstrap;
            bootstrap_test(data1, data2, &plan, opts)
        }
    }
}
