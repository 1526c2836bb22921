//! Seeded resampling: permutations, exact enumeration of group assignments
//! and multivariate normal draws for the parametric bootstrap.
//!
//! Replicate `l` of a plan with seed `s` always draws from the ChaCha8
//! stream `(s, l)`, so results do not depend on how replicates are
//! scheduled across threads.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceSummary;
use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::linalg::cholesky_psd;

/// Default cap on the number of assignments exact enumeration may visit.
pub const DEFAULT_EXACT_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResamplingMethod {
    Permutation,
    ExactPermutation,
    ParametricBootstrap,
}

impl ResamplingMethod {
    pub fn name(self) -> &'static str {
        match self {
            ResamplingMethod::Permutation => "permutation",
            ResamplingMethod::ExactPermutation => "exact-permutation",
            ResamplingMethod::ParametricBootstrap => "parametric-bootstrap",
        }
    }
}

impl fmt::Display for ResamplingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResamplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "permutation" => Ok(ResamplingMethod::Permutation),
            "exact-permutation" | "exact" => Ok(ResamplingMethod::ExactPermutation),
            "parametric-bootstrap" | "bootstrap" => Ok(ResamplingMethod::ParametricBootstrap),
            _ => Err(Error::InvalidArgument(format!("unknown resampling method '{s}'"))),
        }
    }
}

/// How many replicates to draw, from which seed, on how many threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplingPlan {
    pub method: ResamplingMethod,
    pub replicates: usize,
    pub seed: u64,
    /// `None` uses the global rayon pool; `Some(1)` runs sequentially.
    pub workers: Option<usize>,
    pub exact_cap: u128,
}

impl ResamplingPlan {
    pub fn new(method: ResamplingMethod, replicates: usize, seed: u64) -> Self {
        Self {
            method,
            replicates,
            seed,
            workers: None,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }

    pub fn permutation(replicates: usize, seed: u64) -> Self {
        Self::new(ResamplingMethod::Permutation, replicates, seed)
    }

    pub fn exact() -> Self {
        Self::new(ResamplingMethod::ExactPermutation, 0, 0)
    }

    pub fn bootstrap(replicates: usize, seed: u64) -> Self {
        Self::new(ResamplingMethod::ParametricBootstrap, replicates, seed)
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_exact_cap(mut self, cap: u128) -> Self {
        self.exact_cap = cap;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.method != ResamplingMethod::ExactPermutation && self.replicates == 0 {
            return Err(Error::InvalidArgument("replicate count must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidArgument("worker count must be at least 1".into()));
        }
        Ok(())
    }

    /// Same plan with a seed derived for sub-task `index`.
    pub fn derive(&self, index: u64) -> Self {
        let mut p = self.clone();
        p.seed = derive_seed(self.seed, index);
        p
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for child `index` of `seed`; distinct children get unrelated seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ mix64(index.wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(1)))
}

/// Identifies the random stream of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    /// A fresh generator for this stream; a pure function of `(seed, index)`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

/// Evaluates `f(0..count)` on `workers` threads and returns results in
/// index order.
pub fn run_indexed<T, F>(count: usize, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match workers {
        Some(1) => (0..count).map(f).collect(),
        None => (0..count).into_par_iter().map(f).collect(),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
            Err(_) => (0..count).map(f).collect(),
        },
    }
}

/// Uniform random permutation of `0..n` (Fisher-Yates).
pub fn shuffled_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// Randomly reassigns whole rows of `pooled` to two groups of sizes
/// `n1` and `N - n1`.
pub fn permute_pooled(
    pooled: &ItemResponseMatrix,
    n1: usize,
    stream: RngStream,
) -> Result<(ItemResponseMatrix, ItemResponseMatrix)> {
    let n = pooled.rows();
    if n1 < 2 || n1 + 2 > n {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} rows into groups of {n1} and {}",
            n.saturating_sub(n1)
        )));
    }
    let idx = shuffled_indices(n, &mut stream.rng());
    Ok((pooled.select_rows(&idx[..n1])?, pooled.select_rows(&idx[n1..])?))
}

/// `C(n, r)` without overflow for the sizes used here.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `n1`-subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Assignments {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Assignments {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let r = out.len();
        let mut next = out.clone();
        // rightmost position that can still advance
        let mut pos = None;
        for i in (0..r).rev() {
            if next[i] < self.n - r + i {
                pos = Some(i);
                break;
            }
        }
        self.current = pos.map(|i| {
            next[i] += 1;
            for j in (i + 1)..r {
                next[j] = next[j - 1] + 1;
            }
            next
        });
        Some(out)
    }
}

/// Enumerates every assignment of `n1` of the `n` pooled rows to group 1.
pub fn enumerate_assignments(n: usize, n1: usize, cap: u128) -> Result<Assignments> {
    if n1 > n {
        return Err(Error::InvalidArgument(format!("n1 = {n1} exceeds N = {n}")));
    }
    let count = binomial(n, n1);
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    Ok(Assignments {
        n,
        current: Some((0..n1).collect()),
    })
}

/// Draws mean-zero multivariate normal rows with a fixed covariance.
#[derive(Debug, Clone)]
pub struct NormalSampler {
    factor: DMatrix<f64>,
}

impl NormalSampler {
    pub fn new(cov: &CovarianceSummary) -> Result<Self> {
        Self::from_matrix(cov.matrix())
    }

    pub fn from_matrix(cov: &DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            factor: cholesky_psd(cov)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// Appends one draw to `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        let k = self.dim();
        let z = DVector::from_fn(k, |_, _| StandardNormal.sample(rng));
        let x = &self.factor * z;
        out.extend_from_slice(x.as_slice());
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<ItemResponseMatrix> {
        let mut vals = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            self.draw_into(rng, &mut vals);
        }
        ItemResponseMatrix::new(n, self.dim(), vals)
    }
}

/// Independent normal samples of sizes `n1` and `n2` with covariances
/// `cov1` and `cov2` (item counts may differ).
pub fn bootstrap_sample(
    cov1: &CovarianceSummary,
    n1: usize,
    cov2: &CovarianceSummary,
    n2: usize,
    stream: RngStream,
) -> Result<(ItemResponseMatrix, ItemResponseMatrix)> {
    let s1 = NormalSampler::new(cov1)?;
    let s2 = NormalSampler::new(cov2)?;
    let mut rng = stream.rng();
    let g1 = s1.sample(n1, &mut rng)?;
    let g2 = s2.sample(n2, &mut rng)?;
    Ok((g1, g2))
}

/// `n` rows from the joint normal of both occasions of a paired design.
pub fn paired_bootstrap_sample(joint: &CovarianceSummary, n: usize, stream: RngStream) -> Result<ItemResponseMatrix> {
    NormalSampler::new(joint)?.sample(n, &mut stream.rng())
}
