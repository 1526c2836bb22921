//! Monte Carlo type-I error studies under the null of equal coefficients.
//!
//! Both groups of a trial are drawn from the same law, so every rejection
//! is a false positive. Ordinal scenarios discretize multivariate normal
//! draws; the continuous scenarios use multivariate t with 4 degrees of
//! freedom and standardized log-normal errors.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::inference::{compare, TestMethod, TestOptions};
use crate::resampling::{derive_seed, run_indexed, NormalSampler, ResamplingPlan, RngStream};

mod config;
mod correlation;
mod report;

pub use config::{Grid, SimulationConfig};
pub use correlation::{build_correlation, CorrelationSpec, MatrixId};
pub use report::{plot_svg, write_csv};

pub const TAU1: [f64; 4] = [-1.8, -0.6, 0.6, 1.8];
pub const TAU2: [f64; 4] = [-0.4, 0.5, 1.2, 2.0];

/// The eight `(n1, n2)` pairs of the ordinal study.
pub const PAPER_SIZES: [(usize, usize); 8] = [
    (10, 10),
    (10, 20),
    (25, 25),
    (25, 50),
    (50, 50),
    (50, 75),
    (75, 75),
    (75, 100),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    OrdinalTau1,
    OrdinalTau2,
    /// The latent normal itself, undiscretized.
    Normal,
    T4,
    Lognormal,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::OrdinalTau1 => "ordinal-tau1",
            Scenario::OrdinalTau2 => "ordinal-tau2",
            Scenario::Normal => "normal",
            Scenario::T4 => "t4",
            Scenario::Lognormal => "lognormal",
        }
    }

    pub fn thresholds(self) -> Option<&'static [f64; 4]> {
        match self {
            Scenario::OrdinalTau1 => Some(&TAU1),
            Scenario::OrdinalTau2 => Some(&TAU2),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordinal-tau1" | "tau1" => Ok(Scenario::OrdinalTau1),
            "ordinal-tau2" | "tau2" => Ok(Scenario::OrdinalTau2),
            "normal" => Ok(Scenario::Normal),
            "t4" => Ok(Scenario::T4),
            "lognormal" => Ok(Scenario::Lognormal),
            _ => Err(Error::InvalidArgument(format!("unknown scenario '{s}'"))),
        }
    }
}

/// One cell of a simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCondition {
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    /// Ignored by the log-normal scenario, whose items are independent.
    pub correlation: MatrixId,
    pub scenario: Scenario,
    pub trials: usize,
    pub replicates: usize,
    pub level: f64,
}

impl SimulationCondition {
    pub fn new(n1: usize, n2: usize, k: usize, correlation: MatrixId, scenario: Scenario) -> Self {
        Self {
            n1,
            n2,
            k,
            correlation,
            scenario,
            trials: 2000,
            replicates: 500,
            level: 0.05,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn id(&self) -> String {
        match self.scenario {
            Scenario::Lognormal => format!("n{}-{}_k{}_{}", self.n1, self.n2, self.k, self.scenario),
            _ => format!("n{}-{}_k{}_{}_{}", self.n1, self.n2, self.k, self.correlation, self.scenario),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.n1 < 2 || self.n2 < 2 || self.k < 2 {
            return Err(Error::InvalidArgument(format!("condition {} is too small", self.id())));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {}", self.level)));
        }
        Ok(())
    }
}

/// Number of thresholds strictly below each value.
pub fn discretize(values: &[f64], thresholds: &[f64]) -> Result<Vec<u8>> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::UnsortedThresholds);
    }
    Ok(values
        .iter()
        .map(|&x| thresholds.partition_point(|&t| t < x) as u8)
        .collect())
}

/// Draws from the condition's law for one group.
#[derive(Debug, Clone)]
pub struct ConditionSampler {
    scenario: Scenario,
    k: usize,
    normal: Option<NormalSampler>,
}

impl ConditionSampler {
    pub fn new(cond: &SimulationCondition) -> Result<Self> {
        let normal = match cond.scenario {
            Scenario::Lognormal => None,
            _ => {
                let p: DMatrix<f64> = build_correlation(CorrelationSpec::new(cond.correlation, cond.k))?;
                Some(NormalSampler::from_matrix(&p)?)
            }
        };
        Ok(Self {
            scenario: cond.scenario,
            k: cond.k,
            normal,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<ItemResponseMatrix> {
        let k = self.k;
        let mut vals = Vec::with_capacity(n * k);
        match (self.scenario, &self.normal) {
            (Scenario::Lognormal, _) => {
                let e = std::f64::consts::E;
                let mean = e.sqrt();
                let sd = ((e - 1.0) * e).sqrt();
                for _ in 0..n * k {
                    let z: f64 = StandardNormal.sample(rng);
                    vals.push((z.exp() - mean) / sd);
                }
            }
            (Scenario::Normal, Some(normal)) => {
                for _ in 0..n {
                    normal.draw_into(rng, &mut vals);
                }
            }
            (Scenario::T4, Some(normal)) => {
                let chi = ChiSquared::new(4.0).expect("valid chi-square");
                for _ in 0..n {
                    let start = vals.len();
                    normal.draw_into(rng, &mut vals);
                    let w: f64 = chi.sample(rng);
                    let s = (4.0 / w).sqrt();
                    for v in &mut vals[start..] {
                        *v *= s;
                    }
                }
            }
            (scenario, Some(normal)) => {
                let tau = scenario.thresholds().expect("ordinal scenario");
                for _ in 0..n {
                    normal.draw_into(rng, &mut vals);
                }
                for v in vals.iter_mut() {
                    *v = tau.partition_point(|&t| t < *v) as f64;
                }
            }
            (_, None) => unreachable!("normal sampler exists for non-lognormal scenarios"),
        }
        ItemResponseMatrix::new(n, k, vals)
    }
}

/// Both groups of one trial, drawn from the same law.
pub fn generate_condition_data(
    cond: &SimulationCondition,
    stream: RngStream,
) -> Result<(ItemResponseMatrix, ItemResponseMatrix)> {
    let sampler = ConditionSampler::new(cond)?;
    let mut rng = stream.rng();
    let g1 = sampler.sample(cond.n1, &mut rng)?;
    let g2 = sampler.sample(cond.n2, &mut rng)?;
    Ok((g1, g2))
}

/// One row of the rejection-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub condition_id: String,
    pub method: TestMethod,
    /// Trials with a defined test decision.
    pub trials: usize,
    pub rejections: usize,
    pub rate: f64,
    /// `1.96 sqrt(r (1 - r) / trials)`.
    pub mc_half_width: f64,
    pub n1: usize,
    pub n2: usize,
    pub k: usize,
    pub matrix: MatrixId,
    pub scenario: Scenario,
    /// Trials whose observed statistic was undefined.
    pub failures: usize,
}

/// Seeds used by trial `t` of condition `c`: the data stream and one
/// resampling seed per method.
fn trial_seeds(master: u64, c: usize, t: usize, m: usize) -> (RngStream, u64) {
    let cond_seed = derive_seed(master, c as u64);
    let data = RngStream::new(cond_seed, t as u64);
    let plan_seed = derive_seed(derive_seed(cond_seed, 1 + m as u64), t as u64);
    (data, plan_seed)
}

/// Runs every method on every trial of every condition. All methods see
/// the same data within a trial. Rejection means `p_two <= level`.
///
/// Trials run in parallel on `workers` threads; the table is identical
/// for any worker count.
pub fn run_type1_study(
    conds: &[SimulationCondition],
    methods: &[TestMethod],
    master_seed: u64,
    workers: Option<usize>,
) -> Result<Vec<StudyRow>> {
    if conds.is_empty() || methods.is_empty() {
        return Err(Error::InvalidArgument("need at least one condition and one method".into()));
    }
    let opts = TestOptions::default();
    let mut rows = Vec::new();
    for (c, cond) in conds.iter().enumerate() {
        cond.validate()?;
        let sampler = ConditionSampler::new(cond)?;
        let opts = opts.clone().with_level(cond.level);
        let outcomes = run_indexed(cond.trials, workers, |t| -> Result<Vec<Option<bool>>> {
            let (stream, _) = trial_seeds(master_seed, c, t, 0);
            let mut rng = stream.rng();
            let g1 = sampler.sample(cond.n1, &mut rng)?;
            let g2 = sampler.sample(cond.n2, &mut rng)?;
            methods
                .iter()
                .enumerate()
                .map(|(m, &method)| {
                    let (_, seed) = trial_seeds(master_seed, c, t, m);
                    let plan = ResamplingPlan::permutation(cond.replicates.max(1), seed).with_workers(Some(1));
                    match compare(&g1, &g2, method, &plan, &opts) {
                        Ok(r) => Ok(Some(r.p_two <= cond.level)),
                        Err(e) if e.is_degenerate() => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        for (m, &method) in methods.iter().enumerate() {
            let mut valid = 0;
            let mut rejections = 0;
            for o in &outcomes {
                if let Some(rej) = o[m] {
                    valid += 1;
                    rejections += rej as usize;
                }
            }
            let rate = if valid > 0 { rejections as f64 / valid as f64 } else { f64::NAN };
            let mc_half_width = if valid > 0 {
                1.96 * (rate * (1.0 - rate) / valid as f64).sqrt()
            } else {
                f64::NAN
            };
            rows.push(StudyRow {
                condition_id: cond.id(),
                method,
                trials: valid,
                rejections,
                rate,
                mc_half_width,
                n1: cond.n1,
                n2: cond.n2,
                k: cond.k,
                matrix: cond.correlation,
                scenario: cond.scenario,
                failures: cond.trials - valid,
            });
        }
    }
    Ok(rows)
}
