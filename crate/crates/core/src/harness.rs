//! Instance generators, per-run reports and the parallel trial runner.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{estimate_general, estimate_general_oracle, EstimatorConfig};
use crate::hashing::{rng_from_seed, CounterKind};
use crate::model::{Instance, Interval};
use crate::oracle::{alpha, SegTree};
use crate::samelen::select_samelen;
use crate::samelen_estimator::{estimate_samelen, estimate_samelen_oracle, SamelenConfig};
use crate::selector::select;

/// `count` closed intervals: length uniform in `[0, max_len]`, then left end
/// uniform in `[1, n - len]`.
pub fn gen_uniform(n: i64, count: usize, max_len: i64, seed: u64) -> Result<Instance> {
    if max_len < 1 || max_len >= n {
        return Err(Error::param("max_len", format!("need 1 <= max_len < n, got {max_len} with n = {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let ivs = (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            let l = rng.gen_range(1..=n - len);
            Interval::closed(l, l + len)
        })
        .collect();
    Instance::new(n, ivs)
}

/// `count` closed intervals of length exactly `lambda`.
pub fn gen_uniform_samelen(n: i64, count: usize, lambda: i64, seed: u64) -> Result<Instance> {
    if lambda < 1 || lambda >= n {
        return Err(Error::param("lambda", format!("need 1 <= lambda < n, got {lambda} with n = {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let ivs = (0..count)
        .map(|_| {
            let l = rng.gen_range(1..=n - lambda);
            Interval::closed(l, l + lambda)
        })
        .collect();
    Instance::new(n, ivs)
}

fn check_index(n_bits: i64, set: &BTreeSet<i64>, i: i64) -> Result<()> {
    if n_bits < 1 {
        return Err(Error::param("n_bits", "must be positive"));
    }
    if !(1..=n_bits).contains(&i) {
        return Err(Error::param("index", format!("{i} not in [1,{n_bits}]")));
    }
    if let Some(j) = set.iter().find(|j| !(1..=n_bits).contains(*j)) {
        return Err(Error::param("set", format!("element {j} not in [1,{n_bits}]")));
    }
    Ok(())
}

/// Same-length hard instance: `[L+j, 2L+j]` for `j` in `set`, then
/// `(i, L+i)` and `(2L+i, 3L+i)`, with `L = n_bits + 2`. The optimum is 3 if
/// `i` is in `set`, else 2. All intervals have length `L`.
pub fn gen_index_samelen(n_bits: i64, set: &BTreeSet<i64>, i: i64) -> Result<Instance> {
    check_index(n_bits, set, i)?;
    let l = n_bits + 2;
    let mut ivs: Vec<Interval> = set.iter().map(|&j| Interval::closed(l + j, 2 * l + j)).collect();
    ivs.push(Interval::open(i, l + i));
    ivs.push(Interval::open(2 * l + i, 3 * l + i));
    Instance::new(3 * l + n_bits, ivs)
}

/// General hard instance: for `j` in `set` the `k` open intervals
/// `(j + mL, j + (m+1)L)`, then the `k + 1` points `[i + mL, i + mL]`, with
/// `L = n_bits + 2`. The optimum is `2k + 1` if `i` is in `set`, else `k + 1`.
pub fn gen_index_general(n_bits: i64, set: &BTreeSet<i64>, i: i64, k: i64) -> Result<Instance> {
    check_index(n_bits, set, i)?;
    if k < 1 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let l = n_bits + 2;
    let mut ivs = Vec::new();
    for &j in set {
        for m in 0..k {
            ivs.push(Interval::open(j + m * l, j + (m + 1) * l));
        }
    }
    for m in 0..=k {
        ivs.push(Interval::closed(i + m * l, i + m * l));
    }
    Instance::new(k * l + n_bits, ivs)
}

/// Random input for the hard constructions: each bit set with probability
/// 1/2, index uniform.
pub fn random_index_input(n_bits: i64, seed: u64) -> (BTreeSet<i64>, i64) {
    let mut rng = rng_from_seed(seed);
    let set = (1..=n_bits).filter(|_| rng.gen_bool(0.5)).collect();
    let i = rng.gen_range(1..=n_bits);
    (set, i)
}

/// One interval `[lo, hi - 1]` (a point for leaves) per segment-tree node,
/// shuffled. Every tree segment is occupied, so the root occupancy is the
/// largest possible for `n` a power of two.
pub fn gen_tree_cover(n: i64, seed: u64) -> Result<Instance> {
    let tree = SegTree::new(n);
    let mut ivs: Vec<Interval> = tree
        .nodes()
        .map(|v| tree.segment(v))
        .filter(|s| s.hi - 1 <= n)
        .map(|s| Interval::closed(s.lo, s.hi - 1))
        .collect();
    ivs.shuffle(&mut rng_from_seed(seed));
    Instance::new(n, ivs)
}

/// What a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    SelectGeneral,
    SelectSamelen,
    EstimateGeneral,
    EstimateSamelen,
    OracleGeneral,
    OracleSamelen,
    /// Zero-length stream: exact count of distinct points.
    DistinctPoints,
}

impl Algo {
    pub const ALL: [Algo; 7] = [
        Algo::SelectGeneral,
        Algo::SelectSamelen,
        Algo::EstimateGeneral,
        Algo::EstimateSamelen,
        Algo::OracleGeneral,
        Algo::OracleSamelen,
        Algo::DistinctPoints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::SelectGeneral => "select-general",
            Algo::SelectSamelen => "select-samelen",
            Algo::EstimateGeneral => "estimate-general",
            Algo::EstimateSamelen => "estimate-samelen",
            Algo::OracleGeneral => "oracle-general",
            Algo::OracleSamelen => "oracle-samelen",
            Algo::DistinctPoints => "distinct-points",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Algo::EstimateGeneral | Algo::EstimateSamelen)
    }

    /// Interval `[lo, hi]` the output must fall in, for optimum `alpha`.
    pub fn bracket(self, alpha: usize, eps: f64) -> (f64, f64) {
        let a = alpha as f64;
        match self {
            // size > alpha / 2 for integers; an empty stream trivially succeeds
            Algo::SelectGeneral => (((a + 1.0) / 2.0).min(a), a),
            Algo::SelectSamelen => ((2.0 * a / 3.0).ceil(), a),
            Algo::EstimateGeneral => (0.5 * (1.0 - eps) * a, (1.0 + eps) * a),
            Algo::OracleGeneral => {
                let e1 = eps / 6.0;
                ((0.5 - e1) / ((1.0 + e1) * (1.0 + e1)) * a, a)
            }
            Algo::EstimateSamelen | Algo::OracleSamelen => (2.0 / 3.0 * (1.0 - eps) * a, a),
            Algo::DistinctPoints => (a, a),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::param("algo", format!("unknown algorithm `{s}`")))
    }
}

/// Parameters shared by all runs of one trial batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunParams {
    pub algo: Algo,
    pub eps: f64,
    pub lambda: i64,
    pub scale: f64,
    pub counter: CounterKind,
}

impl RunParams {
    pub fn new(algo: Algo) -> Self {
        Self {
            algo,
            eps: 0.3,
            lambda: 0,
            scale: 1.0,
            counter: CounterKind::Exact,
        }
    }
}

/// Outcome of one run. `success` is derived from the other fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub instance: String,
    pub algo: Algo,
    pub eps: f64,
    pub lambda: i64,
    pub seed: u64,
    pub scale: f64,
    pub counter: CounterKind,
    pub output: f64,
    pub alpha: usize,
    pub success: bool,
    pub peak_memory: usize,
    /// Present only when timing was requested, so reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    /// Fewer relevant samples than requested (general estimator only).
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub degraded: bool,
}

impl TrialReport {
    fn new(instance: &str, p: &RunParams, seed: u64, output: f64, alpha: usize, peak_memory: usize) -> Self {
        let mut r = Self {
            instance: instance.to_string(),
            algo: p.algo,
            eps: p.eps,
            lambda: p.lambda,
            seed,
            scale: p.scale,
            counter: p.counter,
            output,
            alpha,
            success: false,
            peak_memory,
            wall_ms: None,
            degraded: false,
        };
        r.success = r.recompute_success();
        r
    }

    /// Bracket membership from the stored fields.
    pub fn recompute_success(&self) -> bool {
        in_bracket(self.algo, self.output, self.alpha, self.eps)
    }
}

/// Whether `output` meets the guarantee of `algo` for optimum `alpha`.
pub fn in_bracket(algo: Algo, output: f64, alpha: usize, eps: f64) -> bool {
    let (lo, hi) = algo.bracket(alpha, eps);
    let tol = 1e-9 * hi.max(1.0);
    output >= lo - tol && output <= hi + tol
}

/// Runs `params.algo` once on `inst` with `seed`. `alpha` is the known optimum.
pub fn run_once(inst: &Instance, params: &RunParams, seed: u64, alpha: usize, instance_id: &str) -> Result<TrialReport> {
    let start = Instant::now();
    let (output, mem, degraded) = match params.algo {
        Algo::SelectGeneral => {
            let st = select(&inst.intervals);
            (st.window_count() as f64, st.stats().peak_windows, false)
        }
        Algo::SelectSamelen => {
            let st = select_samelen(params.lambda, &inst.intervals)?;
            (st.solution_size() as f64, st.peak_windows(), false)
        }
        Algo::EstimateGeneral => {
            let cfg = EstimatorConfig::new(inst.n, params.eps, seed)
                .with_counter(params.counter)
                .with_scale(params.scale);
            let (e, est) = estimate_general(inst, cfg)?;
            (e.value, est.peak_memory(), e.degraded)
        }
        Algo::EstimateSamelen => {
            let cfg = SamelenConfig::new(inst.n, params.lambda, params.eps, seed).with_counter(params.counter);
            let (e, est) = estimate_samelen(inst, cfg)?;
            (e.value, est.memory_units(), false)
        }
        Algo::OracleGeneral => (estimate_general_oracle(inst, params.eps)?.value, 0, false),
        Algo::OracleSamelen => (estimate_samelen_oracle(inst, params.lambda, params.eps)?, 0, false),
        Algo::DistinctPoints => {
            if let Some(iv) = inst.intervals.iter().find(|iv| iv.left() != iv.right()) {
                return Err(Error::Input(format!("interval {iv} is not a point")));
            }
            let pts: BTreeSet<i64> = inst.intervals.iter().map(|iv| iv.left()).collect();
            (pts.len() as f64, pts.len(), false)
        }
    };
    let mut r = TrialReport::new(instance_id, params, seed, output, alpha, mem);
    r.degraded = degraded;
    r.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    Ok(r)
}

/// Aggregate over a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub summary: bool,
    pub instance: String,
    pub algo: Algo,
    pub trials: usize,
    pub alpha: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub median_output: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub peak_memory: usize,
    pub degraded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
    /// Success fraction of medians over consecutive groups of trials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_success_fraction: Option<f64>,
}

/// Median of a non-empty slice (mean of the two middle values when even).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Medians of consecutive groups of `group` values; a short tail is dropped.
pub fn median_of_groups(values: &[f64], group: usize) -> Vec<f64> {
    values.chunks_exact(group.max(1)).map(median).collect()
}

/// Batch configuration for [`run_trials`].
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub params: RunParams,
    pub trials: usize,
    pub base_seed: u64,
    pub workers: usize,
    pub group: Option<usize>,
    pub timing: bool,
    pub instance_id: String,
}

/// `run_trials`: trial `t` uses seed `base_seed + t`; reports come back in
/// seed order regardless of worker count.
pub fn run_trials(inst: &Instance, plan: &TrialPlan) -> Result<(Vec<TrialReport>, TrialSummary)> {
    use rayon::prelude::*;
    if plan.trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let a = alpha(inst);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let reports: Vec<TrialReport> = pool.install(|| {
        (0..plan.trials)
            .into_par_iter()
            .map(|t| {
                let seed = plan.base_seed.wrapping_add(t as u64);
                run_once(inst, &plan.params, seed, a, &plan.instance_id).map(|mut r| {
                    if !plan.timing {
                        r.wall_ms = None;
                    }
                    r
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = summarize(&reports, plan, a);
    Ok((reports, summary))
}

fn summarize(reports: &[TrialReport], plan: &TrialPlan, alpha: usize) -> TrialSummary {
    let outputs: Vec<f64> = reports.iter().map(|r| r.output).collect();
    let ratios: Vec<f64> = if alpha == 0 {
        vec![1.0; reports.len()]
    } else {
        outputs.iter().map(|o| o / alpha as f64).collect()
    };
    let successes = reports.iter().filter(|r| r.success).count();
    let group_success_fraction = plan.group.map(|g| {
        let meds = median_of_groups(&outputs, g);
        let ok = meds
            .iter()
            .filter(|&&m| in_bracket(plan.params.algo, m, alpha, plan.params.eps))
            .count();
        if meds.is_empty() {
            0.0
        } else {
            ok as f64 / meds.len() as f64
        }
    });
    TrialSummary {
        summary: true,
        instance: plan.instance_id.clone(),
        algo: plan.params.algo,
        trials: reports.len(),
        alpha,
        successes,
        success_fraction: successes as f64 / reports.len() as f64,
        median_output: median(&outputs),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
        peak_memory: reports.iter().map(|r| r.peak_memory).max().unwrap_or(0),
        degraded: reports.iter().filter(|r| r.degraded).count(),
        group_size: plan.group,
        group_success_fraction,
    }
}

/// Reports as JSON lines, summary last.
pub fn render_jsonl(reports: &[TrialReport], summary: &TrialSummary) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("report serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(summary).expect("summary serializes"));
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{alpha_of, brute_alpha};

    #[test]
    fn uniform_is_deterministic() {
        assert!(gen_uniform(100, 0, 5, 1).unwrap().is_empty());
        assert_eq!(gen_uniform(100, 50, 10, 7).unwrap(), gen_uniform(100, 50, 10, 7).unwrap());
        assert_ne!(gen_uniform(100, 50, 10, 7).unwrap(), gen_uniform(100, 50, 10, 8).unwrap());
        assert!(gen_uniform(10, 5, 10, 1).is_err());
        let inst = gen_uniform_samelen(200, 40, 6, 3).unwrap();
        assert!(inst.intervals.iter().all(|iv| iv.len() == 6));
    }

    #[test]
    fn index_samelen_examples() {
        let s: BTreeSet<i64> = [1, 3, 4, 6].into();
        let inst = gen_index_samelen(7, &s, 2).unwrap();
        assert_eq!(alpha(&inst), 2);
        assert_eq!(brute_alpha(&inst).unwrap(), 2);
        let inst = gen_index_samelen(7, &s, 1).unwrap();
        assert_eq!(alpha(&inst), 3);
        assert!(inst.intervals.contains(&Interval::open(1, 10)));
        assert!(inst.intervals.contains(&Interval::closed(10, 19)));
        assert!(inst.intervals.contains(&Interval::open(19, 28)));
        assert!(inst.intervals.iter().all(|iv| iv.len() == 9));
        assert_eq!(alpha(&gen_index_samelen(7, &BTreeSet::new(), 5).unwrap()), 2);
    }

    #[test]
    fn index_general_examples() {
        let s: BTreeSet<i64> = [1, 3, 4, 6].into();
        assert_eq!(alpha(&gen_index_general(7, &s, 3, 3).unwrap()), 7);
        assert_eq!(alpha(&gen_index_general(7, &s, 2, 3).unwrap()), 4);
        let small = gen_index_general(3, &[2].into(), 2, 1).unwrap();
        assert_eq!(alpha(&small), 3);
        assert_eq!(brute_alpha(&small).unwrap(), 3);
        assert!(gen_index_general(7, &s, 8, 3).is_err());
    }

    #[test]
    fn tree_cover_saturates_root() {
        let inst = gen_tree_cover(64, 1).unwrap();
        let table = crate::oracle::GammaTable::new(&inst);
        assert_eq!(table.gamma(SegTree::ROOT), 127);
        assert_eq!(alpha_of(&inst.intervals), 64);
    }

    #[test]
    fn brackets() {
        assert!(in_bracket(Algo::SelectGeneral, 3.0, 5, 0.0));
        assert!(!in_bracket(Algo::SelectGeneral, 2.0, 4, 0.0));
        assert!(in_bracket(Algo::SelectGeneral, 0.0, 0, 0.0));
        assert!(in_bracket(Algo::SelectSamelen, 2.0, 3, 0.0));
        assert!(!in_bracket(Algo::SelectSamelen, 1.0, 3, 0.0));
        assert_eq!("oracle-general".parse::<Algo>().unwrap(), Algo::OracleGeneral);
    }

    #[test]
    fn median_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median_of_groups(&[1.0, 5.0, 3.0, 9.0, 7.0, 8.0, 0.0], 3), vec![3.0, 8.0]);
    }

    #[test]
    fn deterministic_trials_are_uniform() {
        let inst = gen_uniform(300, 200, 20, 4).unwrap();
        let plan = TrialPlan {
            params: RunParams::new(Algo::SelectGeneral),
            trials: 5,
            base_seed: 10,
            workers: 2,
            group: Some(2),
            timing: false,
            instance_id: "u".into(),
        };
        let (reports, summary) = run_trials(&inst, &plan).unwrap();
        assert_eq!(summary.success_fraction, 1.0);
        assert!(reports.iter().all(|r| r.seed >= 10 && r.wall_ms.is_none()));
        let again = run_trials(&inst, &TrialPlan { workers: 1, ..plan.clone() }).unwrap();
        assert_eq!(render_jsonl(&reports, &summary), render_jsonl(&again.0, &again.1));
        let plan = TrialPlan {
            params: RunParams { eps: 0.3, ..RunParams::new(Algo::OracleGeneral) },
            ..plan
        };
        assert_eq!(run_trials(&inst, &plan).unwrap().1.success_fraction, 1.0);
    }
}
