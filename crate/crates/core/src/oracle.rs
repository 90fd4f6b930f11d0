//! Offline ground truth: exact independent-set sizes, the balanced segment
//! tree, the segment occupancy counts `gamma`, and the relevant-segment sum
//! that the general estimator approximates.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::hashing::ceil_tol;
use crate::model::{Instance, Interval};
use crate::selector;

/// Exact maximum number of pairwise disjoint intervals (earliest finish first).
pub fn alpha_of(intervals: &[Interval]) -> usize {
    let mut by_right: Vec<&Interval> = intervals.iter().collect();
    by_right.sort_by_key(|iv| iv.rcode());
    let mut count = 0;
    let mut last = i64::MIN;
    for iv in by_right {
        if iv.lcode() > last {
            count += 1;
            last = iv.rcode();
        }
    }
    count
}

pub fn alpha(inst: &Instance) -> usize {
    alpha_of(&inst.intervals)
}

pub const BRUTE_LIMIT: usize = 24;

/// Exact maximum by enumerating independent subsets. At most 24 intervals.
pub fn brute_alpha_of(intervals: &[Interval]) -> Result<usize> {
    let k = intervals.len();
    if k > BRUTE_LIMIT {
        return Err(Error::TooLarge {
            len: k,
            limit: BRUTE_LIMIT,
        });
    }
    let conflicts: Vec<u32> = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i && intervals[i].intersects(&intervals[j]))
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();

    fn go(i: usize, chosen: u32, size: usize, conflicts: &[u32], best: &mut usize) {
        if i == conflicts.len() {
            *best = (*best).max(size);
            return;
        }
        if conflicts[i] & chosen == 0 {
            go(i + 1, chosen | (1 << i), size + 1, conflicts, best);
        }
        go(i + 1, chosen, size, conflicts, best);
    }

    let mut best = 0;
    go(0, 0, 0, &conflicts, &mut best);
    Ok(best)
}

pub fn brute_alpha(inst: &Instance) -> Result<usize> {
    brute_alpha_of(&inst.intervals)
}

/// Half-open segment `[lo, hi)` of the segment tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub lo: i64,
    pub hi: i64,
}

impl Segment {
    pub fn len(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    #[inline]
    pub fn contains(&self, iv: &Interval) -> bool {
        2 * self.lo <= iv.lcode() && iv.rcode() < 2 * self.hi
    }

    pub fn contains_segment(&self, other: &Segment) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{})", self.lo, self.hi)
    }
}

/// Node of the implicit tree in heap numbering: the root is 1 and node `v`
/// has children `2v` and `2v + 1`.
pub type Node = u64;

/// Balanced segment tree over the elementary segments `[i, i+1)`,
/// `i = 1..=n_pow2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegTree {
    n_pow2: u64,
    log2: u32,
}

impl SegTree {
    pub fn new(n: i64) -> Self {
        assert!(n >= 1, "universe must be positive");
        let n_pow2 = (n as u64).next_power_of_two();
        Self {
            n_pow2,
            log2: n_pow2.trailing_zeros(),
        }
    }

    pub fn n_pow2(&self) -> u64 {
        self.n_pow2
    }

    pub fn log2(&self) -> u32 {
        self.log2
    }

    /// Number of tree levels, `log2(n_pow2) + 1`. This is the length of a
    /// root-to-leaf path and the factor used wherever the analysis needs the
    /// tree height (leaves can hold zero-length and open unit intervals).
    pub fn levels(&self) -> u32 {
        self.log2 + 1
    }

    pub fn node_count(&self) -> u64 {
        2 * self.n_pow2 - 1
    }

    pub const ROOT: Node = 1;

    pub fn root(&self) -> Segment {
        Segment {
            lo: 1,
            hi: self.n_pow2 as i64 + 1,
        }
    }

    #[inline]
    pub fn depth(v: Node) -> u32 {
        63 - v.leading_zeros()
    }

    pub fn is_leaf(&self, v: Node) -> bool {
        Self::depth(v) == self.log2
    }

    pub fn segment(&self, v: Node) -> Segment {
        let d = Self::depth(v);
        let width = (self.n_pow2 >> d) as i64;
        let offset = (v - (1 << d)) as i64;
        let lo = 1 + offset * width;
        Segment { lo, hi: lo + width }
    }

    /// Node of a tree segment, or `None` if `s` is not one.
    pub fn node(&self, s: Segment) -> Option<Node> {
        let w = s.len();
        if w <= 0 || (w as u64) > self.n_pow2 || !(w as u64).is_power_of_two() {
            return None;
        }
        if s.lo < 1 || (s.lo - 1) % w != 0 || s.hi > self.n_pow2 as i64 + 1 {
            return None;
        }
        let d = (self.n_pow2 / w as u64).trailing_zeros();
        Some((1u64 << d) + ((s.lo - 1) / w) as u64)
    }

    pub fn parent(v: Node) -> Option<Node> {
        (v > 1).then_some(v / 2)
    }

    pub fn children(&self, v: Node) -> Option<(Node, Node)> {
        (!self.is_leaf(v)).then_some((2 * v, 2 * v + 1))
    }

    /// Nodes whose segment contains `iv`, from the root down to the smallest.
    /// `iv` must lie inside the root segment.
    pub fn containing_path(&self, iv: &Interval) -> Vec<Node> {
        let mut path = Vec::with_capacity(self.levels() as usize);
        self.containing_path_into(iv, &mut path);
        path
    }

    pub fn containing_path_into(&self, iv: &Interval, path: &mut Vec<Node>) {
        path.clear();
        let mut v = Self::ROOT;
        if !self.segment(v).contains(iv) {
            return;
        }
        loop {
            path.push(v);
            match self.children(v) {
                Some((a, b)) => {
                    if self.segment(a).contains(iv) {
                        v = a;
                    } else if self.segment(b).contains(iv) {
                        v = b;
                    } else {
                        return;
                    }
                }
                None => return,
            }
        }
    }

    /// True iff `anc` is `v` or one of its ancestors.
    #[inline]
    pub fn is_ancestor_or_self(anc: Node, v: Node) -> bool {
        let (da, dv) = (Self::depth(anc), Self::depth(v));
        da <= dv && (v >> (dv - da)) == anc
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> {
        1..=self.node_count()
    }
}

/// Threshold `ceil(2 * levels^2 / eps)` separating "large" from "small"
/// occupancy counts.
pub fn relevance_threshold(levels: u32, eps: f64) -> u64 {
    ceil_tol(2.0 * f64::from(levels) * f64::from(levels) / eps) as u64
}

/// `gamma` of every node, computed once per instance.
#[derive(Debug, Clone)]
pub struct GammaTable {
    tree: SegTree,
    occupied: Vec<bool>,
    gamma: Vec<u64>,
}

impl GammaTable {
    pub fn new(inst: &Instance) -> Self {
        let tree = SegTree::new(inst.n);
        let count = tree.node_count() as usize;
        let mut occupied = vec![false; count + 1];
        let mut path = Vec::new();
        for iv in &inst.intervals {
            tree.containing_path_into(iv, &mut path);
            for &v in &path {
                occupied[v as usize] = true;
            }
        }
        let mut gamma = vec![0u64; count + 1];
        for v in (1..=count).rev() {
            let mut g = u64::from(occupied[v]);
            if 2 * v <= count {
                g += gamma[2 * v] + gamma[2 * v + 1];
            }
            gamma[v] = g;
        }
        Self {
            tree,
            occupied,
            gamma,
        }
    }

    pub fn tree(&self) -> &SegTree {
        &self.tree
    }

    pub fn gamma(&self, v: Node) -> u64 {
        self.gamma[v as usize]
    }

    /// Whether some interval is contained in the node's segment.
    pub fn occupied(&self, v: Node) -> bool {
        self.occupied[v as usize]
    }
}

/// Intervals of `inst` contained in `s`, in stream order.
pub fn restrict(inst: &Instance, s: Segment) -> Vec<Interval> {
    inst.intervals.iter().copied().filter(|iv| s.contains(iv)).collect()
}

pub fn beta(inst: &Instance, s: Segment) -> usize {
    alpha_of(&restrict(inst, s))
}

/// Size of the one-pass selector's solution on the intervals inside `s`.
pub fn beta_hat(inst: &Instance, s: Segment) -> usize {
    selector::select(&restrict(inst, s)).window_count()
}

/// Number of tree segments inside `s` that contain some interval.
pub fn gamma(inst: &Instance, s: Segment) -> u64 {
    let table = GammaTable::new(inst);
    let v = table.tree().node(s).expect("segment of the tree");
    table.gamma(v)
}

/// Active segments: the root and every segment whose parent contains an
/// interval.
pub fn active_segments(inst: &Instance) -> BTreeSet<Node> {
    let table = GammaTable::new(inst);
    let tree = *table.tree();
    let mut out = BTreeSet::new();
    out.insert(SegTree::ROOT);
    for v in tree.nodes() {
        if table.occupied(v) {
            if let Some((a, b)) = tree.children(v) {
                out.insert(a);
                out.insert(b);
            }
        }
    }
    out
}

/// The relevant segments for accuracy `eps`, falling back to `{root}`.
pub fn relevant_segments(inst: &Instance, eps: f64) -> BTreeSet<Segment> {
    let table = GammaTable::new(inst);
    relevant_nodes(&table, eps)
        .into_iter()
        .map(|v| table.tree().segment(v))
        .collect()
}

/// Relevant nodes for `eps`, computed from a prebuilt table.
pub fn relevant_nodes(table: &GammaTable, eps: f64) -> BTreeSet<Node> {
    let tree = table.tree();
    let threshold = relevance_threshold(tree.levels(), eps);
    let rel: BTreeSet<Node> = tree
        .nodes()
        .filter(|&v| v != SegTree::ROOT)
        .filter(|&v| {
            let g = table.gamma(v);
            table.gamma(v / 2) >= threshold && (1..threshold).contains(&g)
        })
        .collect();
    if rel.is_empty() {
        BTreeSet::from([SegTree::ROOT])
    } else {
        rel
    }
}

/// Sum of the selector's solution sizes over the relevant segments.
pub fn relevant_sum(inst: &Instance, eps: f64) -> usize {
    relevant_segments(inst, eps)
        .into_iter()
        .map(|s| beta_hat(inst, s))
        .sum()
}

/// Validates `0 < eps < 1/2`.
pub fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::param("eps", format!("must lie in (0, 1/2), got {eps}")))
    }
}

/// Nodes `S` with `gamma(S) = 0` whose parent meets the threshold.
pub fn zero_boundary_nodes(table: &GammaTable, eps: f64) -> HashSet<Node> {
    let tree = table.tree();
    let threshold = relevance_threshold(tree.levels(), eps);
    tree.nodes()
        .filter(|&v| v != SegTree::ROOT && table.gamma(v) == 0 && table.gamma(v / 2) >= threshold)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(l: i64, r: i64) -> Interval {
        Interval::closed(l, r)
    }

    fn inst(n: i64, ivs: Vec<Interval>) -> Instance {
        Instance::new(n, ivs).unwrap()
    }

    /// Subset enumeration written without pruning, as a second opinion.
    fn subsets_alpha(ivs: &[Interval]) -> usize {
        (0u32..1 << ivs.len())
            .filter(|&m| {
                (0..ivs.len()).all(|i| {
                    m >> i & 1 == 0
                        || (i + 1..ivs.len()).all(|j| m >> j & 1 == 0 || !ivs[i].intersects(&ivs[j]))
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of(&[]), 0);
        assert_eq!(alpha_of(&[c(1, 3)]), 1);
        let four = [c(1, 3), c(2, 5), c(4, 7), c(6, 9)];
        assert_eq!(subsets_alpha(&four), 2);
        assert_eq!(alpha_of(&four), 2);
    }

    #[test]
    fn brute_alpha_examples() {
        assert_eq!(brute_alpha_of(&[c(1, 1), c(1, 1)]).unwrap(), 1);
        assert_eq!(brute_alpha_of(&[c(1, 2), c(4, 5), c(7, 8)]).unwrap(), 3);
        let too_many: Vec<_> = (1..=25).map(|i| c(i, i)).collect();
        assert!(matches!(brute_alpha_of(&too_many), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn tree_shape() {
        let t = SegTree::new(16);
        assert_eq!(t.node_count(), 31);
        assert_eq!(t.root(), Segment { lo: 1, hi: 17 });
        for v in t.nodes() {
            let s = t.segment(v);
            assert_eq!(t.node(s), Some(v));
            assert!((s.len() as u64).is_power_of_two());
            if let Some((a, b)) = t.children(v) {
                let (sa, sb) = (t.segment(a), t.segment(b));
                assert_eq!(sa.lo, s.lo);
                assert_eq!(sa.hi, sb.lo);
                assert_eq!(sb.hi, s.hi);
            }
        }
        assert_eq!(SegTree::new(5).n_pow2(), 8);
        assert_eq!(SegTree::new(1).levels(), 1);
        assert_eq!(t.node(Segment { lo: 2, hi: 4 }), None);
    }

    #[test]
    fn beta_examples() {
        let i = inst(4, vec![c(1, 2), c(2, 3)]);
        assert_eq!(beta(&i, Segment { lo: 1, hi: 3 }), 1);
        assert_eq!(beta(&i, Segment { lo: 3, hi: 5 }), 0);
        assert_eq!(beta(&i, SegTree::new(4).root()), alpha(&i));
    }

    #[test]
    fn gamma_examples() {
        let i = inst(4, vec![c(1, 2)]);
        assert_eq!(gamma(&i, Segment { lo: 1, hi: 5 }), 2);
        assert_eq!(gamma(&i, Segment { lo: 1, hi: 3 }), 1);
        assert_eq!(gamma(&i, Segment { lo: 1, hi: 2 }), 0);
        let empty = inst(4, vec![]);
        for v in SegTree::new(4).nodes() {
            assert_eq!(gamma(&empty, SegTree::new(4).segment(v)), 0);
        }
    }

    #[test]
    fn relevant_fallbacks() {
        let empty = inst(16, vec![]);
        let root = SegTree::new(16).root();
        assert_eq!(relevant_segments(&empty, 0.25), BTreeSet::from([root]));
        let tiny = inst(16, vec![c(1, 3), c(5, 8)]);
        assert_eq!(relevant_segments(&tiny, 0.25), BTreeSet::from([root]));
        assert_eq!(relevant_sum(&tiny, 0.25), 2);
        assert_eq!(relevant_sum(&inst(16, vec![c(4, 9)]), 0.25), 1);
    }

    #[test]
    fn threshold_ceiling_ignores_float_noise() {
        // 2 * 5^2 / 0.1 is 500.00000000000006 in binary floating point
        assert_eq!(relevance_threshold(5, 0.1), 500);
        assert_eq!(relevance_threshold(5, 0.3), 167);
    }
}
