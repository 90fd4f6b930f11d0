//! Same-length estimator: per-shift window counts and type-2 samples.

use intsel::harness::gen_uniform_samelen;
use intsel::oracle::alpha;
use intsel::samelen_estimator::{estimate_samelen, shift_value_exact, SamelenConfig};

fn main() -> intsel::Result<()> {
    let (n, lambda) = (4096, 8);
    let inst = gen_uniform_samelen(n, 500, lambda, 3)?;
    let cfg = SamelenConfig::new(n, lambda, 0.2, 11);
    println!("{} samplers per shift", cfg.k());
    let (est, _) = estimate_samelen(&inst, cfg)?;
    for (a, v) in est.per_shift.iter().enumerate() {
        let exact = shift_value_exact(lambda, a as u8, &inst.intervals);
        println!("shift {a}: estimate {v:.1}, exact {exact}, type-2 hits {}", est.type2_hits[a]);
    }
    println!("value {:.1} (best shift {}), alpha {}", est.value, est.best_shift, alpha(&inst));
    Ok(())
}
