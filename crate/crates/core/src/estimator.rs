//! Randomized estimate of the maximum independent-set size for arbitrary
//! intervals with endpoints in `[1, n]`.
//!
//! Each interval activates the root and both children of every segment-tree
//! node that contains it. The estimate combines
//!
//! - the number of distinct active segments (a distinct counter),
//! - the fraction of active segments that are *relevant*, from min-wise
//!   samples carrying capped occupancy counters for the sample and its parent,
//! - the mean selector size over relevant segments, from a second batch of
//!   samples that also run a nested selector on their segment,
//!
//! as `N_rel * rho / (1 + eps1)^2`. While the root's occupancy stays below
//! the relevance threshold the answer is the plain selector size at the root.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hashing::{
    ceil_tol, derive_seed, make_counter, rng_from_seed, CounterKind, DistinctCounter,
    FamilyParams, MinWisePermutation, PermKey, PermutationBank, Powers,
};
use crate::model::{Instance, Interval};
use crate::oracle::{self, relevance_threshold, GammaTable, Node, SegTree, Segment};
use crate::selector::PartitionState;

/// Refuse configurations whose sample arrays would not fit in memory.
pub const MAX_SAMPLES: u64 = 20_000_000;

const TAG_COUNTER: u64 = 1;
const TAG_REL: u64 = 2;
const TAG_RHO: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EstimatorConfig {
    pub n: i64,
    pub eps: f64,
    pub seed: u64,
    pub counter: CounterKind,
    /// Multiplier applied to the sample counts (1.0 reproduces the formulas).
    pub scale: f64,
}

/// Sample sizes derived from a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SampleCounts {
    pub k_rel: u64,
    pub k_rho: u64,
    pub k0: u64,
}

impl EstimatorConfig {
    pub fn new(n: i64, eps: f64, seed: u64) -> Self {
        Self {
            n,
            eps,
            seed,
            counter: CounterKind::Exact,
            scale: 1.0,
        }
    }

    pub fn with_counter(mut self, counter: CounterKind) -> Self {
        self.counter = counter;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        oracle::check_eps(self.eps)?;
        if self.n < 1 {
            return Err(Error::param("n", "must be positive"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::param("scale", format!("must be positive, got {}", self.scale)));
        }
        Ok(())
    }

    /// Accuracy after the final rescaling, `eps / 6`.
    pub fn eps1(&self) -> f64 {
        self.eps / 6.0
    }

    /// Accuracy of the relevant-count estimate, `eps1 / 7`.
    pub fn eps_rel(&self) -> f64 {
        self.eps1() / 7.0
    }

    /// Accuracy of the mean-contribution estimate, `eps1 / 5`.
    pub fn eps_rho(&self) -> f64 {
        self.eps1() / 5.0
    }

    pub fn tree(&self) -> SegTree {
        SegTree::new(self.n)
    }

    pub fn threshold(&self) -> u64 {
        relevance_threshold(self.tree().levels(), self.eps1())
    }

    pub fn sample_counts(&self) -> SampleCounts {
        let lg = f64::from(self.tree().levels());
        let lg2 = lg * lg;
        let (er, eh) = (self.eps_rel(), self.eps_rho());
        let k_rel = ceil_tol(self.scale * 72.0 * lg2 / (er.powi(3) * (1.0 - er)));
        let k_rho = ceil_tol(self.scale * 72.0 * lg2 / eh.powi(3));
        let k0 = ceil_tol(self.scale * 12.0 * lg2 * k_rho / (eh * (1.0 - eh)));
        let clamp = |x: f64| if x >= u64::MAX as f64 { u64::MAX } else { (x as u64).max(1) };
        SampleCounts {
            k_rel: clamp(k_rel),
            k_rho: clamp(k_rho),
            k0: clamp(k0),
        }
    }

    /// Largest `scale` for which both `k_rel` and `k0` stay at or below `cap`.
    pub fn scale_for_cap(n: i64, eps: f64, cap: u64) -> f64 {
        let base = EstimatorConfig::new(n, eps, 0);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let c = base.with_scale(mid).sample_counts();
            if c.k_rel <= cap && c.k0 <= cap {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Injective id of a tree segment `[x, y)`: `n_pow2 * (x - 1) + (y - 1)`.
pub fn seg_id(s: Segment, n_pow2: u64) -> u64 {
    n_pow2 * (s.lo as u64 - 1) + (s.hi as u64 - 1)
}

/// Segments activated by `iv`, largest first: the root, then both children of
/// every node containing `iv`.
pub fn active_sequence(tree: &SegTree, iv: &Interval) -> Vec<Node> {
    let mut out = Vec::new();
    let path = tree.containing_path(iv);
    active_sequence_from_path(tree, &path, &mut out);
    out
}

fn active_sequence_from_path(tree: &SegTree, path: &[Node], out: &mut Vec<Node>) {
    out.clear();
    out.push(SegTree::ROOT);
    for &v in path {
        if let Some((a, b)) = tree.children(v) {
            out.push(a);
            out.push(b);
        }
    }
}

/// Occupancy count of one segment, capped: once `cap` is reached only the
/// fact is kept.
#[derive(Debug, Clone)]
pub struct GammaTracker {
    target: Node,
    cap: u64,
    seen: BTreeSet<Node>,
    saturated: bool,
}

impl GammaTracker {
    pub fn new(target: Node, cap: u64) -> Self {
        Self {
            target,
            cap,
            seen: BTreeSet::new(),
            saturated: cap == 0,
        }
    }

    pub fn target(&self) -> Node {
        self.target
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// Current count, or `None` once saturated.
    pub fn count(&self) -> Option<u64> {
        (!self.saturated).then_some(self.seen.len() as u64)
    }

    /// Feeds the containing path of a new interval.
    pub fn observe(&mut self, path: &[Node]) {
        if self.saturated {
            return;
        }
        let d = SegTree::depth(self.target) as usize;
        if path.get(d) != Some(&self.target) {
            return;
        }
        for &v in &path[d..] {
            self.seen.insert(v);
            if self.seen.len() as u64 >= self.cap {
                self.saturated = true;
                self.seen = BTreeSet::new();
                return;
            }
        }
    }

    pub fn memory_units(&self) -> usize {
        self.seen.len() + 1
    }
}

/// One min-wise sample of the active segments.
#[derive(Debug, Clone)]
pub struct SegmentSample {
    current: Option<(PermKey, Node)>,
    own: Option<GammaTracker>,
    parent: Option<GammaTracker>,
    /// Nested selector on the intervals inside the current segment.
    selector: Option<PartitionState>,
    wants_selector: bool,
}

impl SegmentSample {
    fn new(wants_selector: bool) -> Self {
        Self {
            current: None,
            own: None,
            parent: None,
            selector: None,
            wants_selector,
        }
    }

    pub fn current(&self) -> Option<Node> {
        self.current.map(|(_, v)| v)
    }

    pub fn own_tracker(&self) -> Option<&GammaTracker> {
        self.own.as_ref()
    }

    pub fn parent_tracker(&self) -> Option<&GammaTracker> {
        self.parent.as_ref()
    }

    /// Selector size on the current segment, if still tracked.
    pub fn beta_hat(&self) -> Option<usize> {
        self.selector.as_ref().map(|s| s.window_count())
    }

    /// Non-root, parent occupancy at the threshold, own occupancy in
    /// `[1, threshold)`.
    pub fn is_relevant(&self) -> bool {
        let (Some(own), Some(parent)) = (&self.own, &self.parent) else {
            return false;
        };
        parent.is_saturated() && matches!(own.count(), Some(c) if c >= 1)
    }

    fn offer(&mut self, key: PermKey, v: Node, cap: u64) {
        if matches!(self.current, Some((k, _)) if k <= key) {
            return;
        }
        self.current = Some((key, v));
        self.own = Some(GammaTracker::new(v, cap));
        self.parent = SegTree::parent(v).map(|p| GammaTracker::new(p, cap));
        self.selector = self.wants_selector.then(PartitionState::new);
    }

    fn observe(&mut self, iv: &Interval, path: &[Node]) {
        if let Some(p) = &mut self.parent {
            p.observe(path);
        }
        if let Some(own) = &mut self.own {
            own.observe(path);
            if own.is_saturated() {
                self.selector = None;
            } else if let Some(sel) = &mut self.selector {
                let d = SegTree::depth(own.target()) as usize;
                if path.get(d) == Some(&own.target()) {
                    sel.process(*iv);
                }
            }
        }
    }

    fn memory_units(&self) -> usize {
        1 + self.own.as_ref().map_or(0, |t| t.memory_units())
            + self.parent.as_ref().map_or(0, |t| t.memory_units())
            + self.selector.as_ref().map_or(0, |s| s.memory_units())
    }
}

/// Result of [`GeneralEstimator::estimate`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GeneralEstimate {
    pub value: f64,
    /// Root occupancy stayed below the threshold; `value` is the root selector size.
    pub fallback: bool,
    /// Fewer than `k_rho` relevant samples among the `k0` draws.
    pub degraded: bool,
    pub n_act: f64,
    pub relevant_hits: u64,
    pub n_rel: f64,
    pub rho: f64,
    pub rho_samples: u64,
}

/// Streaming state of the general estimator.
pub struct GeneralEstimator {
    config: EstimatorConfig,
    tree: SegTree,
    threshold: u64,
    counts: SampleCounts,
    counter: Box<dyn DistinctCounter>,
    rel_bank: PermutationBank,
    rho_bank: PermutationBank,
    rel: Vec<SegmentSample>,
    rho: Vec<SegmentSample>,
    root_gamma: GammaTracker,
    root_selector: Option<PartitionState>,
    /// Segment ids already offered to the samplers. A repeated id can never
    /// beat the current minimum, so its keys are not recomputed.
    offered: HashSet<u64>,
    path: Vec<Node>,
    active: Vec<Node>,
    peak_memory: usize,
    processed: u64,
}

impl GeneralEstimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let tree = config.tree();
        let counts = config.sample_counts();
        if counts.k_rel.saturating_add(counts.k0) > MAX_SAMPLES {
            return Err(Error::param(
                "scale",
                format!(
                    "sample counts k_rel = {}, k0 = {} exceed {MAX_SAMPLES}; lower the scale",
                    counts.k_rel, counts.k0
                ),
            ));
        }
        let universe = tree.n_pow2() * tree.n_pow2();
        let rel_family = Arc::new(FamilyParams::new(universe, config.eps_rel())?);
        let rho_family = Arc::new(FamilyParams::new(universe, config.eps_rho())?);
        let mut rel_rng = rng_from_seed(derive_seed(config.seed, TAG_REL, 0));
        let mut rho_rng = rng_from_seed(derive_seed(config.seed, TAG_RHO, 0));
        let rel_bank = PermutationBank::draw(&rel_family, counts.k_rel as usize, &mut rel_rng);
        let rho_bank = PermutationBank::draw(&rho_family, counts.k0 as usize, &mut rho_rng);
        let rel = (0..counts.k_rel).map(|_| SegmentSample::new(false)).collect();
        let rho = (0..counts.k0).map(|_| SegmentSample::new(true)).collect();
        let counter = make_counter(
            config.counter,
            universe,
            config.eps_rel(),
            derive_seed(config.seed, TAG_COUNTER, 0),
        )?;
        let threshold = config.threshold();
        Ok(Self {
            config,
            tree,
            threshold,
            counts,
            counter,
            rel_bank,
            rho_bank,
            rel,
            rho,
            root_gamma: GammaTracker::new(SegTree::ROOT, threshold),
            root_selector: Some(PartitionState::new()),
            offered: HashSet::new(),
            path: Vec::new(),
            active: Vec::new(),
            peak_memory: 0,
            processed: 0,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn tree(&self) -> &SegTree {
        &self.tree
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn sample_counts(&self) -> SampleCounts {
        self.counts
    }

    /// Permutation of relevance sample `i`.
    pub fn rel_perm(&self, i: usize) -> MinWisePermutation {
        self.rel_bank.member(i)
    }

    /// Permutation of contribution sample `i`.
    pub fn rho_perm(&self, i: usize) -> MinWisePermutation {
        self.rho_bank.member(i)
    }

    pub fn rel_samples(&self) -> &[SegmentSample] {
        &self.rel
    }

    pub fn rho_samples(&self) -> &[SegmentSample] {
        &self.rho
    }

    pub fn root_tracker(&self) -> &GammaTracker {
        &self.root_gamma
    }

    pub fn active_estimate(&self) -> f64 {
        self.counter.estimate()
    }

    /// `est_process`.
    pub fn process(&mut self, iv: Interval) -> Result<()> {
        if iv.left() < 1 || iv.right() > self.config.n {
            return Err(Error::Input(format!(
                "interval {iv} outside [1,{}]",
                self.config.n
            )));
        }
        self.processed += 1;
        let tree = self.tree;
        tree.containing_path_into(&iv, &mut self.path);
        active_sequence_from_path(&tree, &self.path, &mut self.active);

        for &v in &self.active {
            let id = seg_id(tree.segment(v), tree.n_pow2());
            self.counter.insert(id);
            if !self.offered.insert(id) {
                continue;
            }
            offer_all(&mut self.rel, &self.rel_bank, id, v, self.threshold);
            offer_all(&mut self.rho, &self.rho_bank, id, v, self.threshold);
        }

        let path = &self.path;
        let mut sample_mem = 0;
        for s in self.rel.iter_mut().chain(self.rho.iter_mut()) {
            s.observe(&iv, path);
            sample_mem += s.memory_units();
        }
        self.root_gamma.observe(path);
        if self.root_gamma.is_saturated() {
            self.root_selector = None;
        } else if let Some(sel) = &mut self.root_selector {
            sel.process(iv);
        }
        let mem = sample_mem + self.fixed_memory_units();
        self.peak_memory = self.peak_memory.max(mem);
        Ok(())
    }

    pub fn memory_units(&self) -> usize {
        self.rel.iter().chain(&self.rho).map(|s| s.memory_units()).sum::<usize>() + self.fixed_memory_units()
    }

    fn fixed_memory_units(&self) -> usize {
        self.counter.memory_units()
            + self.root_gamma.memory_units()
            + self.root_selector.as_ref().map_or(0, |s| s.memory_units())
    }

    pub fn peak_memory(&self) -> usize {
        self.peak_memory
    }

    /// `est_estimate`.
    pub fn estimate(&self) -> GeneralEstimate {
        let n_act = self.counter.estimate();
        if !self.root_gamma.is_saturated() {
            let size = self.root_selector.as_ref().map_or(0, |s| s.window_count());
            return GeneralEstimate {
                value: size as f64,
                fallback: true,
                degraded: false,
                n_act,
                relevant_hits: 0,
                n_rel: 1.0,
                rho: size as f64,
                rho_samples: 0,
            };
        }
        let hits = self.rel.iter().filter(|s| s.is_relevant()).count() as u64;
        let n_rel = n_act * hits as f64 / self.counts.k_rel as f64;
        let used: Vec<usize> = self
            .rho
            .iter()
            .filter(|s| s.is_relevant())
            .filter_map(|s| s.beta_hat())
            .take(self.counts.k_rho as usize)
            .collect();
        let rho = if used.is_empty() {
            0.0
        } else {
            used.iter().sum::<usize>() as f64 / used.len() as f64
        };
        let e1 = self.config.eps1();
        GeneralEstimate {
            value: n_rel * rho / ((1.0 + e1) * (1.0 + e1)),
            fallback: false,
            degraded: (used.len() as u64) < self.counts.k_rho,
            n_act,
            relevant_hits: hits,
            n_rel,
            rho,
            rho_samples: used.len() as u64,
        }
    }
}

fn offer_all(samples: &mut [SegmentSample], bank: &PermutationBank, id: u64, v: Node, cap: u64) {
    let pw: Powers = bank.family().powers(id);
    for (s, key) in samples.iter_mut().zip(bank.keys(&pw)) {
        s.offer(key, v, cap);
    }
}

/// Runs the estimator over a whole instance.
pub fn estimate_general(inst: &Instance, config: EstimatorConfig) -> Result<(GeneralEstimate, GeneralEstimator)> {
    let mut est = GeneralEstimator::new(config)?;
    for &iv in &inst.intervals {
        est.process(iv)?;
    }
    Ok((est.estimate(), est))
}

/// Deterministic counterpart: every estimated quantity is replaced by its
/// exact value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub fallback: bool,
    pub relevant_sum: usize,
}

/// `est_estimate_oracle_mode`.
pub fn estimate_general_oracle(inst: &Instance, eps: f64) -> Result<OracleEstimate> {
    oracle::check_eps(eps)?;
    let eps1 = eps / 6.0;
    let table = GammaTable::new(inst);
    let threshold = relevance_threshold(table.tree().levels(), eps1);
    if table.gamma(SegTree::ROOT) < threshold {
        let size = oracle::beta_hat(inst, table.tree().root());
        return Ok(OracleEstimate {
            value: size as f64,
            fallback: true,
            relevant_sum: size,
        });
    }
    let sum: usize = oracle::relevant_nodes(&table, eps1)
        .into_iter()
        .map(|v| oracle::beta_hat(inst, table.tree().segment(v)))
        .sum();
    Ok(OracleEstimate {
        value: sum as f64 / ((1.0 + eps1) * (1.0 + eps1)),
        fallback: false,
        relevant_sum: sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(l: i64, r: i64) -> Interval {
        Interval::closed(l, r)
    }

    #[test]
    fn seg_id_examples() {
        assert_eq!(seg_id(Segment { lo: 1, hi: 2 }, 16), 1);
        assert_eq!(seg_id(Segment { lo: 1, hi: 17 }, 16), 16);
        let t = SegTree::new(16);
        let ids: BTreeSet<u64> = t.nodes().map(|v| seg_id(t.segment(v), 16)).collect();
        assert_eq!(ids.len(), 31);
        assert!(ids.iter().all(|&id| (1..=256).contains(&id)));
    }

    #[test]
    fn active_sequence_examples() {
        let t = SegTree::new(4);
        let segs: Vec<Segment> = active_sequence(&t, &c(1, 2)).into_iter().map(|v| t.segment(v)).collect();
        let expect = [(1, 5), (1, 3), (3, 5), (1, 2), (2, 3)]
            .map(|(lo, hi)| Segment { lo, hi });
        assert_eq!(segs, expect);
        let segs: Vec<Segment> = active_sequence(&t, &c(2, 3)).into_iter().map(|v| t.segment(v)).collect();
        assert_eq!(segs, [(1, 5), (1, 3), (3, 5)].map(|(lo, hi)| Segment { lo, hi }));
    }

    #[test]
    fn sample_counts_follow_formulas() {
        let cfg = EstimatorConfig::new(1024, 0.3, 0);
        let c = cfg.sample_counts();
        // eps_rho = 0.01 and levels = 11 make k_rho exact
        assert_eq!(c.k_rho, 8_712_000_000);
        let er = 0.3 / 6.0 / 7.0;
        let k_rel = 72.0 * 121.0 / (er * er * er * (1.0 - er));
        assert!((c.k_rel as f64 - k_rel).abs() <= 1.0 + 1e-9 * k_rel);
        let s = EstimatorConfig::scale_for_cap(1024, 0.45, 2000);
        let capped = EstimatorConfig::new(1024, 0.45, 0).with_scale(s).sample_counts();
        assert!(capped.k_rel <= 2000 && capped.k0 <= 2000);
        assert!(EstimatorConfig::new(1024, 0.45, 0).with_scale(s * 1.01).sample_counts().k_rel > 2000);
    }

    #[test]
    fn refuses_unscaled_sample_arrays() {
        assert!(GeneralEstimator::new(EstimatorConfig::new(1024, 0.2, 1)).is_err());
        assert!(GeneralEstimator::new(EstimatorConfig::new(16, 0.5, 1).with_scale(1e-9)).is_err());
    }

    #[test]
    fn tracker_caps_and_latches() {
        let t = SegTree::new(8);
        let mut g = GammaTracker::new(SegTree::ROOT, 3);
        g.observe(&t.containing_path(&c(1, 1)));
        assert!(g.is_saturated());
        let mut g = GammaTracker::new(SegTree::ROOT, 100);
        g.observe(&t.containing_path(&c(1, 1)));
        assert_eq!(g.count(), Some(4));
        g.observe(&t.containing_path(&c(4, 5)));
        assert_eq!(g.count(), Some(4));
        let mut g = GammaTracker::new(SegTree::ROOT, 4);
        g.observe(&t.containing_path(&c(1, 1)));
        assert!(g.is_saturated());
        assert_eq!(g.count(), None);
    }

    #[test]
    fn empty_stream_estimates_zero() {
        let est = GeneralEstimator::new(EstimatorConfig::new(16, 0.3, 1).with_scale(1e-6)).unwrap();
        let e = est.estimate();
        assert_eq!(e.value, 0.0);
        assert!(e.fallback);
    }

    #[test]
    fn small_universe_always_falls_back() {
        let ivs: Vec<Interval> = (1..=12).map(|i| c(i, i + 3)).collect();
        let inst = Instance::new(16, ivs.clone()).unwrap();
        let cfg = EstimatorConfig::new(16, 0.3, 9).with_scale(1e-6);
        assert!(cfg.threshold() > SegTree::new(16).node_count());
        let (e, _) = estimate_general(&inst, cfg).unwrap();
        assert!(e.fallback);
        assert_eq!(e.value, crate::selector::select(&ivs).window_count() as f64);
        let o = estimate_general_oracle(&inst, 0.3).unwrap();
        assert!(o.fallback);
        assert_eq!(o.value, e.value);
    }

    #[test]
    fn duplicates_do_not_move_exact_active_count() {
        let inst = Instance::new(64, vec![c(3, 9), c(20, 21)]).unwrap();
        let cfg = EstimatorConfig::new(64, 0.3, 2).with_scale(1e-7);
        let mut est = GeneralEstimator::new(cfg).unwrap();
        for &iv in &inst.intervals {
            est.process(iv).unwrap();
        }
        let before = est.active_estimate();
        est.process(c(3, 9)).unwrap();
        assert_eq!(est.active_estimate(), before);
        assert_eq!(before as usize, oracle::active_segments(&inst).len());
    }

    #[test]
    fn rejects_out_of_range() {
        let mut est = GeneralEstimator::new(EstimatorConfig::new(16, 0.3, 1).with_scale(1e-6)).unwrap();
        assert!(est.process(c(3, 17)).is_err());
    }

    #[test]
    fn oracle_single_interval() {
        let inst = Instance::new(64, vec![c(10, 20)]).unwrap();
        let o = estimate_general_oracle(&inst, 0.3).unwrap();
        assert_eq!(o.value, 1.0);
    }
}
