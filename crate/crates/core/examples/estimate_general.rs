//! Sampling estimator for arbitrary intervals, next to its exact-quantity twin.
//!
//! Full sample counts are far too large to run, so this uses a cap of 400.
//! Relevant segments are about one in a thousand active ones here, so the
//! capped run usually finds none and reports itself as degraded.

use intsel::estimator::{estimate_general, estimate_general_oracle, EstimatorConfig};
use intsel::harness::gen_uniform;
use intsel::oracle::alpha;

fn main() -> intsel::Result<()> {
    let n = 1 << 16;
    let eps = 0.3;
    let inst = gen_uniform(n, 40_000, 24, 1)?;
    let scale = EstimatorConfig::scale_for_cap(n, eps, 400);
    let cfg = EstimatorConfig::new(n, eps, 42).with_scale(scale);
    let counts = cfg.sample_counts();
    println!("threshold {}, samples {counts:?}", cfg.threshold());

    let (est, state) = estimate_general(&inst, cfg)?;
    let exact = estimate_general_oracle(&inst, eps)?;
    println!("alpha           {}", alpha(&inst));
    println!("oracle value    {:.1} (fallback {})", exact.value, exact.fallback);
    println!(
        "sampled value   {:.1} (fallback {}, degraded {})",
        est.value, est.fallback, est.degraded
    );
    println!("active segments {}, relevant hits {}", est.n_act, est.relevant_hits);
    println!("peak memory     {}", state.peak_memory());
    Ok(())
}
