//! Full enumeration of all group assignments for a small sample, next to
//! the Monte Carlo approximation of the same p-value.

use nalgebra::DMatrix;
use rand::Rng;
use relicmp::data::ItemResponseMatrix;
use relicmp::error::Result;
use relicmp::inference::{permutation_test, TestOptions};
use relicmp::resampling::{binomial, ResamplingPlan, RngStream};
use relicmp::simulation::{discretize, TAU1};

// three 5-point items, inter-item correlation 0.4
fn ordinal_group<R: Rng>(n: usize, rng: &mut R) -> Result<ItemResponseMatrix> {
    let cov = DMatrix::from_element(3, 3, 0.4) + DMatrix::identity(3, 3) * 0.6;
    let latent = relicmp::resampling::NormalSampler::from_matrix(&cov)?.sample(n, rng)?;
    let codes = discretize(latent.as_slice(), &TAU1)?;
    ItemResponseMatrix::new(n, 3, codes.into_iter().map(f64::from).collect())
}

fn main() -> Result<()> {
    let mut rng = RngStream::new(5, 0).rng();
    let g1 = ordinal_group(6, &mut rng)?;
    let g2 = ordinal_group(6, &mut rng)?;
    let opts = TestOptions::default();

    let exact = permutation_test(&g1, &g2, &ResamplingPlan::exact(), &opts)?;
    println!("assignments: {}", binomial(12, 6));
    println!("exact        p_two = {:.4} ({} undefined)", exact.p_two, exact.degenerate_redraws);
    for b in [1_000, 10_000] {
        let mc = permutation_test(&g1, &g2, &ResamplingPlan::permutation(b, 99), &opts)?;
        println!("B = {b:<7}  p_two = {:.4}", mc.p_two);
    }
    Ok(())
}
