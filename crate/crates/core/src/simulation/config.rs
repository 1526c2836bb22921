use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::TestMethod;

use super::{MatrixId, Scenario, SimulationCondition, PAPER_SIZES};

/// Built-in simulation grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// k = 5, P1 and P4, tau1, all eight sample sizes, 2000 trials x 500 replicates.
    PaperDesk,
    /// All 256 ordinal conditions at 10^4 trials x 10^3 replicates.
    PaperFull,
    /// Continuous t4 and log-normal scenarios, asymptotic vs permutation.
    Supplement,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-desk" => Ok(Grid::PaperDesk),
            "paper-full" => Ok(Grid::PaperFull),
            "supplement" => Ok(Grid::Supplement),
            _ => Err(Error::InvalidArgument(format!(
                "unknown grid '{s}' (expected paper-desk, paper-full or supplement)"
            ))),
        }
    }
}

fn default_trials() -> usize {
    2000
}

fn default_replicates() -> usize {
    500
}

fn default_level() -> f64 {
    0.05
}

fn default_methods() -> Vec<TestMethod> {
    vec![TestMethod::Asymptotic, TestMethod::Permutation, TestMethod::Bootstrap]
}

fn default_items() -> Vec<usize> {
    vec![5]
}

fn default_matrices() -> Vec<MatrixId> {
    vec![MatrixId::P1]
}

fn default_scenarios() -> Vec<Scenario> {
    vec![Scenario::OrdinalTau1]
}

/// A full-factorial grid, loadable from TOML:
///
/// ```toml
/// seed = 7
/// trials = 2000
/// replicates = 500
/// methods = ["asymptotic", "permutation"]
/// sizes = [[10, 10], [25, 50]]
/// items = [5]
/// matrices = ["P1", "P4"]
/// scenarios = ["ordinal-tau1"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<TestMethod>,
    pub sizes: Vec<(usize, usize)>,
    #[serde(default = "default_items")]
    pub items: Vec<usize>,
    #[serde(default = "default_matrices")]
    pub matrices: Vec<MatrixId>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<Scenario>,
}

impl SimulationConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::InvalidArgument(format!("simulation config: {}", e.message())))
    }

    pub fn grid(grid: Grid) -> Self {
        match grid {
            Grid::PaperDesk => Self {
                seed: None,
                trials: 2000,
                replicates: 500,
                level: 0.05,
                methods: default_methods(),
                sizes: PAPER_SIZES.to_vec(),
                items: vec![5],
                matrices: vec![MatrixId::P1, MatrixId::P4],
                scenarios: vec![Scenario::OrdinalTau1],
            },
            Grid::PaperFull => Self {
                seed: None,
                trials: 10_000,
                replicates: 1000,
                level: 0.05,
                methods: default_methods(),
                sizes: PAPER_SIZES.to_vec(),
                items: vec![5, 20],
                matrices: MatrixId::ALL.to_vec(),
                scenarios: vec![Scenario::OrdinalTau1, Scenario::OrdinalTau2],
            },
            Grid::Supplement => Self {
                seed: None,
                trials: 10_000,
                replicates: 500,
                level: 0.05,
                methods: vec![TestMethod::Asymptotic, TestMethod::Permutation],
                sizes: vec![
                    (25, 25),
                    (50, 50),
                    (100, 100),
                    (200, 200),
                    (400, 400),
                    (25, 100),
                    (50, 200),
                    (100, 400),
                ],
                items: vec![5],
                matrices: vec![MatrixId::P1, MatrixId::P4],
                scenarios: vec![Scenario::T4, Scenario::Lognormal],
            },
        }
    }

    /// Expands the grid. The log-normal scenario does not use a matrix, so
    /// it contributes one condition per size and item count.
    pub fn conditions(&self) -> Result<Vec<SimulationCondition>> {
        if self.sizes.is_empty() || self.items.is_empty() || self.matrices.is_empty() || self.scenarios.is_empty() {
            return Err(Error::InvalidArgument("simulation grid has an empty dimension".into()));
        }
        let mut out = Vec::new();
        for &scenario in &self.scenarios {
            for &k in &self.items {
                let matrices: &[MatrixId] = if scenario == Scenario::Lognormal {
                    &self.matrices[..1]
                } else {
                    &self.matrices
                };
                for &m in matrices {
                    for &(n1, n2) in &self.sizes {
                        let c = SimulationCondition {
                            n1,
                            n2,
                            k,
                            correlation: m,
                            scenario,
                            trials: self.trials,
                            replicates: self.replicates,
                            level: self.level,
                        };
                        c.validate()?;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_has_256_conditions() {
        let c = SimulationConfig::grid(Grid::PaperFull).conditions().unwrap();
        assert_eq!(c.len(), 256);
        assert!(c.iter().all(|x| x.trials == 10_000 && x.replicates == 1000));
        let desk = SimulationConfig::grid(Grid::PaperDesk).conditions().unwrap();
        assert_eq!(desk.len(), 16);
        let sup = SimulationConfig::grid(Grid::Supplement).conditions().unwrap();
        assert_eq!(sup.len(), 8 * 2 + 8);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SimulationConfig::from_toml_str(
            r#"
            seed = 3
            trials = 10
            methods = ["asymptotic", "exact-permutation"]
            sizes = [[5, 5], [10, 12]]
            matrices = ["P2"]
            scenarios = ["ordinal-tau2", "t4"]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.replicates, 500);
        assert_eq!(cfg.conditions().unwrap().len(), 4);
        let back = SimulationConfig::from_toml_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(SimulationConfig::from_toml_str("sizes = [[1, 1]]\nbogus = 1").is_err());
        assert!(SimulationConfig::from_toml_str("sizes = [[1, 1]]").unwrap().conditions().is_err());
    }
}
