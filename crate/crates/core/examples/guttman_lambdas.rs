//! Alpha and Guttman's six lambdas for one sample, with their ADF
//! standard errors, and a lambda2 comparison between two groups.

use relicmp::coefficients::{Coefficient, LambdaKind, LambdaSpec};
use relicmp::inference::{asymptotic_test, TestOptions};
use relicmp::resampling::RngStream;
use relicmp::simulation::{ConditionSampler, MatrixId, Scenario, SimulationCondition};
use relicmp::variance::{group_stats_of, VarianceMethod};

fn main() -> relicmp::error::Result<()> {
    let mut rng = RngStream::new(17, 0).rng();
    let sampler = ConditionSampler::new(&SimulationCondition::new(2, 2, 5, MatrixId::P4, Scenario::T4))?;
    let data = sampler.sample(300, &mut rng)?;

    let mut coefs = vec![Coefficient::Alpha];
    for which in LambdaKind::ALL {
        let spec = match which {
            LambdaKind::Lambda3 => LambdaSpec::new(which).with_split(vec![0, 2, 4]),
            LambdaKind::Lambda6 => LambdaSpec::new(which).with_derived_error_variances(),
            _ => LambdaSpec::new(which),
        };
        coefs.push(Coefficient::Lambda(spec));
    }
    println!("{:<8} {:>8} {:>8}", "coef", "value", "se");
    for c in &coefs {
        let g = group_stats_of(&data, c, VarianceMethod::Adf)?;
        println!("{:<8} {:>8.4} {:>8.4}", c.name(), g.estimate, (g.variance / g.n as f64).sqrt());
    }

    let other = sampler.sample(250, &mut rng)?;
    let opts = TestOptions::default().with_coefficient(Coefficient::Lambda(LambdaSpec::new(LambdaKind::Lambda2)));
    let r = asymptotic_test(&data, &other, &opts)?;
    println!("lambda2 difference {:.4}, T = {:.3}, p = {:.4}", r.difference, r.statistic, r.p_two);
    Ok(())
}
