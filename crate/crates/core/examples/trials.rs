//! Repeated seeded trials with a success summary, as JSON lines.

use intsel::harness::{gen_index_samelen, random_index_input, render_jsonl, run_trials, Algo, RunParams, TrialPlan};

fn main() -> intsel::Result<()> {
    let (set, i) = random_index_input(16, 2);
    let inst = gen_index_samelen(16, &set, i)?;
    let plan = TrialPlan {
        params: RunParams { lambda: 18, ..RunParams::new(Algo::SelectSamelen) },
        trials: 3,
        base_seed: 0,
        workers: 1,
        group: None,
        timing: false,
        instance_id: "index".into(),
    };
    let (reports, summary) = run_trials(&inst, &plan)?;
    print!("{}", render_jsonl(&reports, &summary));
    Ok(())
}
