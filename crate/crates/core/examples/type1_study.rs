//! A reduced type-I error study: small ordinal samples, three tests.
//! Prints the rejection-rate table as CSV.

use relicmp::inference::TestMethod;
use relicmp::simulation::{run_type1_study, write_csv, MatrixId, Scenario, SimulationCondition};

fn main() -> relicmp::error::Result<()> {
    let conds: Vec<SimulationCondition> = [(10, 10), (25, 25), (25, 50)]
        .into_iter()
        .map(|(n1, n2)| {
            SimulationCondition::new(n1, n2, 5, MatrixId::P1, Scenario::OrdinalTau1)
                .with_trials(400)
                .with_replicates(200)
        })
        .collect();
    let methods = [TestMethod::Asymptotic, TestMethod::Permutation, TestMethod::Bootstrap];
    let rows = run_type1_study(&conds, &methods, 2024, None)?;
    write_csv(&rows, std::io::stdout().lock())
}
