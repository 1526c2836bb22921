//! Two independent groups answering the same five ordinal items.
//!
//! Runs the asymptotic, permutation and bootstrap tests on one dataset.

use relicmp::inference::{compare, TestMethod, TestOptions};
use relicmp::resampling::{ResamplingPlan, RngStream};
use relicmp::simulation::{ConditionSampler, MatrixId, Scenario, SimulationCondition};

fn main() -> relicmp::error::Result<()> {
    let mut rng = RngStream::new(2024, 0).rng();
    let weak = ConditionSampler::new(&SimulationCondition::new(40, 40, 5, MatrixId::P1, Scenario::OrdinalTau1))?;
    let strong = ConditionSampler::new(&SimulationCondition::new(40, 40, 5, MatrixId::P2, Scenario::OrdinalTau1))?;
    let g1 = weak.sample(40, &mut rng)?;
    let g2 = strong.sample(55, &mut rng)?;

    let opts = TestOptions::default();
    let plan = ResamplingPlan::permutation(5000, 11);
    for method in [TestMethod::Asymptotic, TestMethod::Permutation, TestMethod::Bootstrap] {
        let r = compare(&g1, &g2, method, &plan, &opts)?;
        let ci = r.ci.expect("interval");
        println!(
            "{:<12} T = {:>7.3}  p = {:.4}  alpha = ({:.3}, {:.3})  95% CI [{:.4}, {:.4}]",
            method.name(),
            r.statistic,
            r.p_two,
            r.alpha_estimates[0],
            r.alpha_estimates[1],
            ci.lower,
            ci.upper
        );
    }
    Ok(())
}
