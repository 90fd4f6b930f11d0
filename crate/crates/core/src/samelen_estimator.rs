//! Randomized estimate of the maximum independent-set size for intervals of a
//! common length λ.
//!
//! Per grid shift `a`, the optimum of the intervals fitting that grid is
//! `g1 + g2`, where `g1` counts occupied windows and `g2` counts windows
//! holding two disjoint intervals. `g1` comes from a distinct counter over
//! window indices, `g2 / g1` from `k` min-wise samples of occupied windows.
//! The answer is `max_a g1_a (1 + M_a / k) / (1 + eps_a)`.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hashing::{
    ceil_tol, derive_seed, make_counter, rng_from_seed, CounterKind, DistinctCounter,
    FamilyParams, MinWisePermutation, PermKey, PermutationBank,
};
use crate::model::{Instance, Interval};
use crate::oracle::{alpha_of, check_eps};
use crate::samelen::grid_members;

const TAG_COUNTER: u64 = 11;
const TAG_SAMPLER: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SamelenConfig {
    pub n: i64,
    pub lambda: i64,
    pub eps: f64,
    pub seed: u64,
    pub counter: CounterKind,
}

impl SamelenConfig {
    pub fn new(n: i64, lambda: i64, eps: f64, seed: u64) -> Self {
        Self {
            n,
            lambda,
            eps,
            seed,
            counter: CounterKind::Exact,
        }
    }

    pub fn with_counter(mut self, counter: CounterKind) -> Self {
        self.counter = counter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        if self.lambda < 1 {
            return Err(Error::param("lambda", format!("must be at least 1, got {}", self.lambda)));
        }
        if self.n < 1 {
            return Err(Error::param("n", "must be positive"));
        }
        Ok(())
    }

    /// `eps / 2`, removed by the final division.
    pub fn eps_a(&self) -> f64 {
        self.eps / 2.0
    }

    /// `eps_a / 3`, accuracy of each per-shift estimate.
    pub fn eps2(&self) -> f64 {
        self.eps_a() / 3.0
    }

    /// Samplers per shift, `ceil(18 / eps2^2)`.
    pub fn k(&self) -> usize {
        let e = self.eps2();
        ceil_tol(18.0 / (e * e)) as usize
    }

    /// Size of the window-id universe: `ceil(2n / 3λ) + 2`.
    pub fn universe(&self) -> u64 {
        (2 * self.n as u64).div_ceil(3 * self.lambda as u64) + 2
    }
}

/// Window index of grid `shift` whose half-open window contains `iv`.
fn containing_window(lambda: i64, shift: u8, iv: &Interval) -> Option<i64> {
    let origin = 2 * i64::from(shift) * lambda;
    let j = (iv.lcode() - origin).div_euclid(6 * lambda);
    let lo = (i64::from(shift) + 3 * j) * lambda;
    // window [lo, lo + 3λ) in codes is [2lo, 2(lo + 3λ) - 1]
    (iv.rcode() < 2 * (lo + 3 * lambda)).then_some(j)
}

/// One sampler: the order-minimum occupied window and its two witnesses.
#[derive(Debug, Clone)]
pub struct WindowSampler {
    winner: Option<(PermKey, i64)>,
    leftmost: Option<Interval>,
    rightmost: Option<Interval>,
}

impl WindowSampler {
    /// Window index of the current winner.
    pub fn winner(&self) -> Option<i64> {
        self.winner.map(|(_, j)| j)
    }

    pub fn witnesses(&self) -> Option<(Interval, Interval)> {
        Some((self.leftmost?, self.rightmost?))
    }

    /// The winner holds two disjoint intervals.
    pub fn is_type2(&self) -> bool {
        matches!(self.witnesses(), Some((lm, rm)) if lm.rcode() < rm.lcode())
    }

    fn witness(&mut self, iv: Interval) {
        let (Some(lm), Some(rm)) = (self.leftmost, self.rightmost) else {
            self.leftmost = Some(iv);
            self.rightmost = Some(iv);
            return;
        };
        let (x, y) = (iv.lcode(), iv.rcode());
        if x > rm.lcode() || (x == rm.lcode() && iv.subset_of(&rm) && iv != rm) {
            self.rightmost = Some(iv);
        }
        if y < lm.rcode() || (y == lm.rcode() && iv.subset_of(&lm) && iv != lm) {
            self.leftmost = Some(iv);
        }
    }
}

/// Estimator state of one grid shift.
pub struct ShiftEstimator {
    shift: u8,
    counter: Box<dyn DistinctCounter>,
    samplers: Vec<WindowSampler>,
    bank: PermutationBank,
    /// Window ids already offered to the samplers. A repeated id can never
    /// beat the current minimum, so its keys are not recomputed.
    offered: HashSet<u64>,
    /// Samplers that took each window as winner; entries go stale when the
    /// sampler moves on and are pruned on the next visit.
    holders: HashMap<i64, Vec<u32>>,
}

impl ShiftEstimator {
    pub fn shift(&self) -> u8 {
        self.shift
    }

    pub fn samplers(&self) -> &[WindowSampler] {
        &self.samplers
    }

    /// Permutation used by sampler `i`.
    pub fn perm(&self, i: usize) -> MinWisePermutation {
        self.bank.member(i)
    }

    /// Estimated number of occupied windows.
    pub fn occupied_estimate(&self) -> f64 {
        self.counter.estimate()
    }

    /// Samplers locked on a window with two disjoint intervals.
    pub fn type2_hits(&self) -> usize {
        self.samplers.iter().filter(|s| s.is_type2()).count()
    }

    pub fn estimate(&self) -> f64 {
        let k = self.samplers.len() as f64;
        self.occupied_estimate() * (1.0 + self.type2_hits() as f64 / k)
    }

    fn process(&mut self, j: i64, iv: Interval) {
        let id = (j + 2) as u64;
        self.counter.insert(id);
        if self.offered.insert(id) {
            let pw = self.bank.family().powers(id);
            let mut took = Vec::new();
            for (i, (s, key)) in self.samplers.iter_mut().zip(self.bank.keys(&pw)).enumerate() {
                if !matches!(s.winner, Some((w, _)) if w <= key) {
                    s.winner = Some((key, j));
                    s.leftmost = None;
                    s.rightmost = None;
                    took.push(i as u32);
                }
            }
            if !took.is_empty() {
                self.holders.insert(j, took);
            }
        }
        if let Some(list) = self.holders.get_mut(&j) {
            let samplers = &mut self.samplers;
            list.retain(|&i| samplers[i as usize].winner() == Some(j));
            for &i in list.iter() {
                samplers[i as usize].witness(iv);
            }
            if list.is_empty() {
                self.holders.remove(&j);
            }
        }
    }

    fn memory_units(&self) -> usize {
        self.counter.memory_units() + 3 * self.samplers.len()
    }
}

/// Result of [`SamelenEstimator::estimate`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SamelenEstimate {
    pub value: f64,
    pub best_shift: u8,
    pub per_shift: [f64; 3],
    pub type2_hits: [usize; 3],
    pub k: usize,
}

pub struct SamelenEstimator {
    config: SamelenConfig,
    shifts: Vec<ShiftEstimator>,
}

impl SamelenEstimator {
    pub fn new(config: SamelenConfig) -> Result<Self> {
        config.validate()?;
        let k = config.k();
        let universe = config.universe();
        let family = Arc::new(FamilyParams::new(universe, config.eps2())?);
        let mut shifts = Vec::with_capacity(3);
        for a in 0..3u8 {
            let mut rng = rng_from_seed(derive_seed(config.seed, TAG_SAMPLER, u64::from(a)));
            let bank = PermutationBank::draw(&family, k, &mut rng);
            let samplers = (0..k)
                .map(|_| WindowSampler {
                    winner: None,
                    leftmost: None,
                    rightmost: None,
                })
                .collect();
            let counter = make_counter(
                config.counter,
                universe,
                config.eps2(),
                derive_seed(config.seed, TAG_COUNTER, u64::from(a)),
            )?;
            shifts.push(ShiftEstimator {
                shift: a,
                counter,
                samplers,
                bank,
                offered: HashSet::new(),
                holders: HashMap::new(),
            });
        }
        Ok(Self { config, shifts })
    }

    pub fn config(&self) -> &SamelenConfig {
        &self.config
    }

    pub fn shifts(&self) -> &[ShiftEstimator] {
        &self.shifts
    }

    /// `uest_process`.
    pub fn process(&mut self, iv: Interval) -> Result<()> {
        let lambda = self.config.lambda;
        if iv.len() != lambda {
            return Err(Error::Input(format!(
                "interval {iv} has length {}, expected {lambda}",
                iv.len()
            )));
        }
        if iv.left() < 1 || iv.right() > self.config.n {
            return Err(Error::Input(format!("interval {iv} outside [1,{}]", self.config.n)));
        }
        for s in &mut self.shifts {
            if let Some(j) = containing_window(lambda, s.shift, &iv) {
                s.process(j, iv);
            }
        }
        Ok(())
    }

    pub fn memory_units(&self) -> usize {
        self.shifts.iter().map(|s| s.memory_units()).sum()
    }

    /// `uest_estimate`.
    pub fn estimate(&self) -> SamelenEstimate {
        let per_shift = [0, 1, 2].map(|a| self.shifts[a].estimate());
        let mut best = 0;
        for a in 1..3 {
            if per_shift[a] > per_shift[best] {
                best = a;
            }
        }
        SamelenEstimate {
            value: per_shift[best] / (1.0 + self.config.eps_a()),
            best_shift: best as u8,
            per_shift,
            type2_hits: [0, 1, 2].map(|a| self.shifts[a].type2_hits()),
            k: self.config.k(),
        }
    }
}

/// Runs the estimator over a whole instance.
pub fn estimate_samelen(inst: &Instance, config: SamelenConfig) -> Result<(SamelenEstimate, SamelenEstimator)> {
    let mut est = SamelenEstimator::new(config)?;
    for &iv in &inst.intervals {
        est.process(iv)?;
    }
    Ok((est.estimate(), est))
}

/// Exact per-shift value `g1 + g2`, which equals the optimum of the intervals
/// fitting that grid.
pub fn shift_value_exact(lambda: i64, shift: u8, intervals: &[Interval]) -> usize {
    let mut by_window: std::collections::BTreeMap<i64, Vec<Interval>> = Default::default();
    for iv in grid_members(lambda, shift, intervals) {
        let j = containing_window(lambda, shift, &iv).expect("member fits its grid");
        by_window.entry(j).or_default().push(iv);
    }
    by_window.values().map(|ivs| alpha_of(ivs)).sum()
}

/// Deterministic counterpart with exact counts in place of the estimates.
pub fn estimate_samelen_oracle(inst: &Instance, lambda: i64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if lambda < 1 {
        return Err(Error::param("lambda", format!("must be at least 1, got {lambda}")));
    }
    let best = (0..3u8)
        .map(|a| shift_value_exact(lambda, a, &inst.intervals))
        .max()
        .unwrap_or(0);
    Ok(best as f64 / (1.0 + eps / 2.0))
}
