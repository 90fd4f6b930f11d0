//! Exact quantities: optimum, segment-tree occupancy and relevance.

use intsel::harness::gen_uniform;
use intsel::oracle::{alpha, relevance_threshold, relevant_nodes, relevant_sum, GammaTable, SegTree};

fn main() -> intsel::Result<()> {
    let eps = 0.2;
    let inst = gen_uniform(1 << 14, 20_000, 8, 4)?;
    let table = GammaTable::new(&inst);
    let tree = table.tree();
    let threshold = relevance_threshold(tree.levels(), eps);
    println!("alpha {}, threshold {threshold}", alpha(&inst));
    println!("gamma(root) {}", table.gamma(SegTree::ROOT));
    let relevant = relevant_nodes(&table, eps);
    for v in relevant.iter().take(5) {
        println!("relevant {} gamma {}", tree.segment(*v), table.gamma(*v));
    }
    println!("{} relevant segments, optimum sum {}", relevant.len(), relevant_sum(&inst, eps));
    Ok(())
}
