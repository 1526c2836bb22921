//! The same examinees answer a short form twice. Columns 0..4 are the
//! first occasion, 4..8 the second.

use nalgebra::DMatrix;
use relicmp::inference::{paired_test, TestMethod, TestOptions};
use relicmp::resampling::{NormalSampler, ResamplingPlan, RngStream};

fn main() -> relicmp::error::Result<()> {
    // occasions correlate 0.3 item-by-item; the second is more homogeneous
    let mut joint = DMatrix::zeros(8, 8);
    for i in 0..8 {
        for j in 0..8 {
            joint[(i, j)] = match (i < 4, j < 4) {
                _ if i == j => 1.0,
                (true, true) => 0.35,
                (false, false) => 0.5,
                _ if i % 4 == j % 4 => 0.3,
                _ => 0.15,
            };
        }
    }
    let data = NormalSampler::from_matrix(&joint)?.sample(150, &mut RngStream::new(4, 0).rng())?;

    let opts = TestOptions::default();
    let plan = ResamplingPlan::bootstrap(10_000, 12);
    for method in [TestMethod::Asymptotic, TestMethod::Bootstrap] {
        let r = paired_test(&data, 4, 4, method, &plan, &opts)?;
        let ci = r.ci.expect("interval");
        println!(
            "{:<10} T = {:.3}  p = {:.4}  alpha = ({:.3}, {:.3})  CI [{:.4}, {:.4}]",
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
