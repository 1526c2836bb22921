//! A long form (10 items) against a short form (5 items). Permutation
//! needs equal item counts, so the parametric bootstrap is used.

use relicmp::inference::{bootstrap_test, permutation_test, Alternative, TestOptions};
use relicmp::resampling::{ResamplingPlan, RngStream};
use relicmp::simulation::{ConditionSampler, MatrixId, Scenario, SimulationCondition};

fn main() -> relicmp::error::Result<()> {
    let mut rng = RngStream::new(7, 0).rng();
    let long = ConditionSampler::new(&SimulationCondition::new(2, 2, 20, MatrixId::P2, Scenario::OrdinalTau2))?
        .sample(120, &mut rng)?
        .select_cols(0..10)?;
    let short = ConditionSampler::new(&SimulationCondition::new(2, 2, 5, MatrixId::P2, Scenario::OrdinalTau2))?
        .sample(100, &mut rng)?;

    let opts = TestOptions::default().with_alternative(Alternative::Greater);
    let plan = ResamplingPlan::bootstrap(10_000, 3);
    let r = bootstrap_test(&long, &short, &plan, &opts)?;
    let ci = r.ci.expect("interval");
    println!("alpha long = {:.4}, short = {:.4}", r.alpha_estimates[0], r.alpha_estimates[1]);
    println!("T = {:.3}, one-sided p = {:.4}, two-sided p = {:.4}", r.statistic, r.p_right, r.p_two);
    println!("95% CI [{:.4}, {:.4}]", ci.lower, ci.upper);

    match permutation_test(&long, &short, &ResamplingPlan::permutation(100, 3), &opts) {
        Err(e) => println!("permutation refused: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
