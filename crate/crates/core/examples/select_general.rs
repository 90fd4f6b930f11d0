//! Streams mixed open/closed intervals through the 2-approximate selector.

use intsel::oracle::alpha_of;
use intsel::selector::PartitionState;
use intsel::parse_stream;
use intsel::selector::Step;

fn main() -> intsel::Result<()> {
    let inst = parse_stream("n 30\n1 5\n4 8 oo\n8 12\n2 3\n13 20 co\n20 25\n21 22\n")?;
    let mut st = PartitionState::new();
    for &iv in &inst.intervals {
        let step = st.process(iv);
        println!("{iv:<9} -> {step:?}, {} windows", st.window_count());
        if let Step::Split = step {
            for w in st.windows() {
                println!("    {} chosen {}", w.window, w.chosen);
            }
        }
    }
    let sol = st.solution();
    println!("solution {:?}", sol.iter().map(|iv| iv.to_string()).collect::<Vec<_>>());
    println!("size {} vs optimum {}", sol.len(), alpha_of(&inst.intervals));
    Ok(())
}
