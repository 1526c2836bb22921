//! ADF against normal-theory variance components of alpha. Heavy tails
//! inflate the ADF value; the normal-theory formula cannot see them.

use relicmp::coefficients::Coefficient;
use relicmp::resampling::RngStream;
use relicmp::simulation::{ConditionSampler, MatrixId, Scenario, SimulationCondition};
use relicmp::variance::{group_stats_of, VarianceMethod};

fn main() -> relicmp::error::Result<()> {
    let mut rng = RngStream::new(3, 0).rng();
    for scenario in [Scenario::T4, Scenario::Lognormal, Scenario::OrdinalTau1] {
        let s = ConditionSampler::new(&SimulationCondition::new(2, 2, 5, MatrixId::P2, scenario))?;
        let data = s.sample(2000, &mut rng)?;
        let adf = group_stats_of(&data, &Coefficient::Alpha, VarianceMethod::Adf)?;
        let nt = group_stats_of(&data, &Coefficient::Alpha, VarianceMethod::NormalTheory)?;
        println!(
            "{:<13} alpha = {:.4}  adf var = {:.4}  normal-theory var = {:.4}",
            scenario.name(),
            adf.estimate,
            adf.variance,
            nt.variance
        );
    }
    Ok(())
}
