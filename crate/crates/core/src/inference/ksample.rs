use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::linalg::pseudoinverse;
use crate::resampling::{run_indexed, shuffled_indices, NormalSampler, ResamplingPlan, RngStream};
use crate::variance::{group_stats, GroupStats};

use super::two_sample::compare;
use super::{collect_replicates, draw_until_defined, TestMethod, TestOptions, TestResult};

/// Reference distribution for `Q_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSampleMethod {
    /// Chi-square with `K - 1` degrees of freedom.
    Asymptotic,
    /// Permutation of pooled rows when all groups have the same items,
    /// per-group parametric bootstrap otherwise.
    Resampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjustment {
    #[default]
    None,
    Bonferroni,
}

impl fmt::Display for Adjustment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Adjustment::None => "none",
            Adjustment::Bonferroni => "bonferroni",
        })
    }
}

impl FromStr for Adjustment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Adjustment::None),
            "bonferroni" => Ok(Adjustment::Bonferroni),
            _ => Err(Error::InvalidArgument(format!("unknown adjustment '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub first: usize,
    pub second: usize,
    pub adjustment: Adjustment,
    pub p_adjusted: f64,
    pub result: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSampleResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// "asymptotic", "permutation" or "bootstrap".
    pub method: String,
    pub coefficient: String,
    pub alpha_estimates: Vec<f64>,
    /// Per-group ADF variance components.
    pub variances: Vec<f64>,
    pub n: Vec<usize>,
    pub replicates_used: usize,
    pub degenerate_redraws: usize,
    pub seed: Option<u64>,
    pub pairwise: Option<Vec<PairwiseResult>>,
}

/// `Q_N = N a' H (H D H)^+ H a` with `a = estimates - centre`,
/// `D = diag(N / n_j * v_j)` and `H` the centering matrix.
pub fn q_statistic(estimates: &[f64], variances: &[f64], ns: &[usize], centre: &[f64]) -> Result<f64> {
    let kk = estimates.len();
    if variances.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::ZeroVariance);
    }
    let total: usize = ns.iter().sum();
    let nf = total as f64;
    let h = DMatrix::identity(kk, kk) - DMatrix::from_element(kk, kk, 1.0 / kk as f64);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        kk,
        variances.iter().zip(ns).map(|(v, &n)| nf / n as f64 * v),
    ));
    let m = &h * d * &h;
    let m = (&m + m.transpose()) * 0.5;
    let p = pseudoinverse(&m)?;
    let a = DVector::from_iterator(kk, estimates.iter().zip(centre).map(|(e, c)| e - c));
    let ha = &h * a;
    let q = nf * ha.dot(&(&p * &ha));
    Ok(q.max(0.0))
}

fn q_of(stats: &[GroupStats], centre: &[f64]) -> Result<f64> {
    let est: Vec<f64> = stats.iter().map(|g| g.estimate).collect();
    let var: Vec<f64> = stats.iter().map(|g| g.variance).collect();
    let ns: Vec<usize> = stats.iter().map(|g| g.n).collect();
    q_statistic(&est, &var, &ns, centre)
}

/// K-sample test of equal coefficients.
pub fn ksample_test(
    groups: &[ItemResponseMatrix],
    method: KSampleMethod,
    plan: &ResamplingPlan,
    opts: &TestOptions,
) -> Result<KSampleResult> {
    opts.validate()?;
    let kk = groups.len();
    if kk < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 groups, got {kk}")));
    }
    let stats = groups
        .iter()
        .map(|g| group_stats(g.iter_rows(), g.cols(), &opts.coefficient, opts.variance))
        .collect::<Result<Vec<_>>>()?;
    let zeros = vec![0.0; kk];
    let q = q_of(&stats, &zeros)?;
    let estimates: Vec<f64> = stats.iter().map(|g| g.estimate).collect();
    let variances: Vec<f64> = stats.iter().map(|g| g.variance).collect();
    let ns: Vec<usize> = stats.iter().map(|g| g.n).collect();
    let df = kk - 1;

    let (p_value, name, used, redraws, seed) = match method {
        KSampleMethod::Asymptotic => {
            let chi = ChiSquared::new(df as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            (chi.sf(q), "asymptotic", 0, 0, None)
        }
        KSampleMethod::Resampling => {
            plan.validate()?;
            let k0 = groups[0].cols();
            let equal_items = groups.iter().all(|g| g.cols() == k0);
            let results = if equal_items {
                let mut pooled = groups[0].clone();
                for g in &groups[1..] {
                    pooled = pooled.stack(g)?;
                }
                let total = pooled.rows();
                let pooled = &pooled;
                let ns = &ns;
                let zeros = &zeros;
                run_indexed(plan.replicates, plan.workers, |l| {
                    let mut rng = RngStream::new(plan.seed, l as u64).rng();
                    draw_until_defined(|| {
                        let idx = shuffled_indices(total, &mut rng);
                        let mut start = 0;
                        let mut rs = Vec::with_capacity(ns.len());
                        for &n in ns {
                            let block = &idx[start..start + n];
                            start += n;
                            rs.push(group_stats(
                                block.iter().map(|&i| pooled.row(i)),
                                k0,
                                &opts.coefficient,
                                opts.variance,
                            )?);
                        }
                        q_of(&rs, zeros)
                    })
                })
            } else {
                let samplers = stats
                    .iter()
                    .map(|g| NormalSampler::new(&g.cov))
                    .collect::<Result<Vec<_>>>()?;
                let samplers = &samplers;
                let ns = &ns;
                let centre = &estimates;
                run_indexed(plan.replicates, plan.workers, |l| {
                    let mut rng = RngStream::new(plan.seed, l as u64).rng();
                    draw_until_defined(|| {
                        let mut rs = Vec::with_capacity(ns.len());
                        for (s, &n) in samplers.iter().zip(ns) {
                            let mut buf = Vec::with_capacity(n * s.dim());
                            for _ in 0..n {
                                s.draw_into(&mut rng, &mut buf);
                            }
                            rs.push(group_stats(buf.chunks_exact(s.dim()), s.dim(), &opts.coefficient, opts.variance)?);
                        }
                        q_of(&rs, centre)
                    })
                })
            };
            let (reps, redraws) = collect_replicates(results)?;
            let p = reps.iter().filter(|&&a| a >= q).count() as f64 / reps.len() as f64;
            let name = if equal_items { "permutation" } else { "bootstrap" };
            (p, name, reps.len(), redraws, Some(plan.seed))
        }
    };
    Ok(KSampleResult {
        statistic: q,
        df,
        p_value,
        method: name.to_string(),
        coefficient: opts.coefficient.to_string(),
        alpha_estimates: estimates,
        variances,
        n: ns,
        replicates_used: used,
        degenerate_redraws: redraws,
        seed,
        pairwise: None,
    })
}

/// All `K(K-1)/2` pairwise two-sample tests. Pair `p` (in lexicographic
/// order) uses the seed derived from `plan.seed` and `p`.
pub fn pairwise_posthoc(
    groups: &[ItemResponseMatrix],
    method: TestMethod,
    plan: &ResamplingPlan,
    opts: &TestOptions,
    adjust: Adjustment,
) -> Result<Vec<PairwiseResult>> {
    let kk = groups.len();
    if kk < 3 {
        return Err(Error::InvalidArgument(format!("post-hoc comparisons need K >= 3 groups, got {kk}")));
    }
    let m = (kk * (kk - 1) / 2) as f64;
    let mut out = Vec::new();
    let mut p = 0u64;
    for i in 0..kk {
        for j in (i + 1)..kk {
            let result = compare(&groups[i], &groups[j], method, &plan.derive(p), opts)?;
            p += 1;
            let p_adjusted = match adjust {
                Adjustment::None => result.p_value,
                Adjustment::Bonferroni => (result.p_value * m).min(1.0),
            };
            out.push(PairwiseResult {
                first: i,
                second: j,
                adjustment: adjust,
                p_adjusted,
                result,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{normal_p_values, studentized_statistic};
    use crate::resampling::NormalSampler;

    fn cs(k: usize, rho: f64) -> DMatrix<f64> {
        DMatrix::from_element(k, k, rho) + DMatrix::identity(k, k) * (1.0 - rho)
    }

    fn normal_data(cov: &DMatrix<f64>, n: usize, seed: u64) -> ItemResponseMatrix {
        NormalSampler::from_matrix(cov)
            .unwrap()
            .sample(n, &mut RngStream::new(seed, 0).rng())
            .unwrap()
    }

    #[test]
    fn two_groups_reduce_to_squared_statistic() {
        let opts = TestOptions::default();
        for s in 0..10 {
            let d1 = normal_data(&cs(4, 0.3), 30 + s as usize, 2 * s);
            let d2 = normal_data(&cs(4, 0.5), 45, 2 * s + 1);
            let t = studentized_statistic(&d1, &d2, &opts).unwrap();
            let r = ksample_test(&[d1, d2], KSampleMethod::Asymptotic, &ResamplingPlan::permutation(1, 0), &opts).unwrap();
            assert!((r.statistic - t * t).abs() <= 1e-10 * (t * t).max(1e-300));
            assert!((r.p_value - normal_p_values(t).two).abs() < 1e-10);
        }
    }

    #[test]
    fn equal_groups_give_zero() {
        let d = normal_data(&cs(3, 0.4), 30, 1);
        let r = ksample_test(
            &[d.clone(), d.clone(), d],
            KSampleMethod::Asymptotic,
            &ResamplingPlan::permutation(1, 0),
            &TestOptions::default(),
        )
        .unwrap();
        assert!(r.statistic.abs() < 1e-20);
        assert_eq!(r.df, 2);
    }

    #[test]
    fn resampling_variants_run() {
        let opts = TestOptions::default();
        let g: Vec<ItemResponseMatrix> = (0..3).map(|i| normal_data(&cs(3, 0.4), 30, i)).collect();
        let r = ksample_test(&g, KSampleMethod::Resampling, &ResamplingPlan::permutation(100, 3), &opts).unwrap();
        assert_eq!(r.method, "permutation");
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        let mixed = vec![normal_data(&cs(3, 0.4), 30, 1), normal_data(&cs(4, 0.4), 30, 2), normal_data(&cs(5, 0.4), 30, 3)];
        let r = ksample_test(&mixed, KSampleMethod::Resampling, &ResamplingPlan::bootstrap(100, 3), &opts).unwrap();
        assert_eq!(r.method, "bootstrap");
        assert_eq!(r.replicates_used, 100);
    }

    #[test]
    fn q_is_nonnegative() {
        let q = q_statistic(&[0.7, 0.5, 0.9, 0.6], &[0.1, 0.3, 0.2, 0.05], &[10, 20, 30, 40], &[0.0; 4]).unwrap();
        assert!(q >= 0.0);
        assert!(matches!(
            q_statistic(&[0.7, 0.5], &[0.0, 0.1], &[10, 10], &[0.0; 2]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn posthoc_counts_and_adjusts() {
        let opts = TestOptions::default();
        let g: Vec<ItemResponseMatrix> = (0..3).map(|i| normal_data(&cs(3, 0.3 + 0.1 * i as f64), 40, i)).collect();
        let plan = ResamplingPlan::permutation(50, 1);
        let raw = pairwise_posthoc(&g, TestMethod::Asymptotic, &plan, &opts, Adjustment::None).unwrap();
        let adj = pairwise_posthoc(&g, TestMethod::Asymptotic, &plan, &opts, Adjustment::Bonferroni).unwrap();
        assert_eq!(raw.len(), 3);
        for (r, a) in raw.iter().zip(&adj) {
            assert_eq!(a.p_adjusted, (3.0 * r.p_adjusted).min(1.0));
            assert!(a.p_adjusted >= r.p_adjusted);
        }
        assert!(pairwise_posthoc(&g[..2], TestMethod::Asymptotic, &plan, &opts, Adjustment::None).is_err());
    }
}
