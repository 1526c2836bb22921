//! Three schools, one questionnaire: the Q_N test with chi-square and
//! permutation references, followed by Bonferroni-adjusted pairwise tests.

use relicmp::inference::{ksample_test, pairwise_posthoc, Adjustment, KSampleMethod, TestMethod, TestOptions};
use relicmp::resampling::{ResamplingPlan, RngStream};
use relicmp::simulation::{ConditionSampler, MatrixId, Scenario, SimulationCondition};

fn main() -> relicmp::error::Result<()> {
    let mut rng = RngStream::new(31, 0).rng();
    let mut groups = Vec::new();
    for (m, n) in [(MatrixId::P1, 60), (MatrixId::P1, 45), (MatrixId::P2, 70)] {
        let s = ConditionSampler::new(&SimulationCondition::new(2, 2, 5, m, Scenario::OrdinalTau1))?;
        groups.push(s.sample(n, &mut rng)?);
    }
    let opts = TestOptions::default();
    let plan = ResamplingPlan::permutation(5000, 8);

    let chi = ksample_test(&groups, KSampleMethod::Asymptotic, &plan, &opts)?;
    let perm = ksample_test(&groups, KSampleMethod::Resampling, &plan, &opts)?;
    println!("alpha = {:.3?}", chi.alpha_estimates);
    println!("Q_N = {:.3} (df {}), chi-square p = {:.4}, {} p = {:.4}", chi.statistic, chi.df, chi.p_value, perm.method, perm.p_value);

    for p in pairwise_posthoc(&groups, TestMethod::Permutation, &plan, &opts, Adjustment::Bonferroni)? {
        println!(
            "groups {} vs {}: T = {:>6.3}, raw p = {:.4}, adjusted p = {:.4}",
            p.first + 1,
            p.second + 1,
            p.result.statistic,
            p.result.p_value,
            p.p_adjusted
        );
    }
    Ok(())
}
