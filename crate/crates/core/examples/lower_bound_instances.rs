//! Index-problem reductions: membership of the index flips the optimum.

use std::collections::BTreeSet;

use intsel::harness::{gen_index_general, gen_index_samelen};
use intsel::oracle::alpha;

fn main() -> intsel::Result<()> {
    let set: BTreeSet<i64> = [2, 3, 7].into_iter().collect();
    for i in [3, 4] {
        let s = gen_index_samelen(8, &set, i)?;
        let g = gen_index_general(8, &set, i, 5)?;
        println!(
            "index {i} (member {}): same-length alpha {} over {} intervals, general alpha {} over {}",
            set.contains(&i),
            alpha(&s),
            s.len(),
            alpha(&g),
            g.len()
        );
    }
    Ok(())
}
