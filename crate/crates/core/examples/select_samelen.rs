//! Same-length selection over three shifted grids.

use intsel::harness::gen_uniform_samelen;
use intsel::oracle::alpha_of;
use intsel::samelen::{grid_members, select_samelen};

fn main() -> intsel::Result<()> {
    let lambda = 4;
    let inst = gen_uniform_samelen(400, 120, lambda, 7)?;
    let st = select_samelen(lambda, &inst.intervals)?;
    for sh in st.shifts() {
        let exact = alpha_of(&grid_members(lambda, sh.shift(), &inst.intervals));
        println!(
            "shift {}: {} windows, solution {} (grid optimum {exact})",
            sh.shift(),
            sh.active_windows(),
            sh.solution_size()
        );
    }
    let alpha = alpha_of(&inst.intervals);
    println!("best shift {} keeps {} of {alpha}", st.best_shift(), st.solution_size());
    println!("peak stored windows {}", st.peak_windows());
    Ok(())
}
