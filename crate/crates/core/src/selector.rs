//! One-pass 2-approximate interval selection.
//!
//! The state is a partition of the line into windows. Every window has seen
//! at least one contained interval, all intervals contained in a window
//! pairwise intersect, and the window keeps its `leftmost` and `rightmost`
//! witnesses plus one chosen interval. Picking one interval per window gives
//! more than half of the optimum.

use std::collections::BTreeMap;

use crate::model::{Code, Interval, Window, NEG_INF, POS_INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowState {
    pub window: Window,
    /// Smallest right end among contained intervals (ties: largest left end).
    pub leftmost: Interval,
    /// Largest left end among contained intervals (ties: smallest right end).
    pub rightmost: Interval,
    pub chosen: Interval,
}

impl WindowState {
    fn single(window: Window, iv: Interval) -> Self {
        Self {
            window,
            leftmost: iv,
            rightmost: iv,
            chosen: iv,
        }
    }

    /// Code range `[l, r]` shared by every interval contained in the window.
    pub fn common_part(&self) -> (Code, Code) {
        (
            self.leftmost.lcode().max(self.rightmost.lcode()),
            self.leftmost.rcode().min(self.rightmost.rcode()),
        )
    }
}

/// Counters describing the work and space used so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelectorStats {
    pub processed: u64,
    /// Ordered-container searches performed to locate windows.
    pub lookups: u64,
    pub splits: u64,
    pub peak_windows: usize,
}

/// Partition of the line keyed by the low code of each window.
#[derive(Debug, Clone, Default)]
pub struct PartitionState {
    windows: BTreeMap<Code, WindowState>,
    stats: SelectorStats,
}

/// Outcome of feeding one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Initialized,
    NotContained,
    Absorbed,
    Split,
}

impl PartitionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    pub fn stats(&self) -> SelectorStats {
        self.stats
    }

    pub fn windows(&self) -> impl Iterator<Item = &WindowState> {
        self.windows.values()
    }

    /// Stored intervals: three per window.
    pub fn memory_units(&self) -> usize {
        3 * self.windows.len()
    }

    pub fn process(&mut self, iv: Interval) -> Step {
        self.stats.processed += 1;
        let step = self.step(iv);
        self.stats.peak_windows = self.stats.peak_windows.max(self.windows.len());
        step
    }

    fn step(&mut self, iv: Interval) -> Step {
        if self.windows.is_empty() {
            self.windows
                .insert(NEG_INF, WindowState::single(Window::real_line(), iv));
            return Step::Initialized;
        }
        let (x, y) = (iv.lcode(), iv.rcode());

        self.stats.lookups += 1;
        let entry = self
            .windows
            .range_mut(..=x)
            .next_back()
            .expect("windows cover the line");
        let ws = &mut *entry.1;
        if y > ws.window.hi_code() {
            return Step::NotContained;
        }

        let (l, r) = ws.common_part();
        if l.max(x) <= r.min(y) {
            let (lm, rm) = (ws.leftmost, ws.rightmost);
            if l < x || (l == x && iv.subset_of(&rm) && iv != rm) {
                ws.rightmost = iv;
            }
            if y < r || (y == r && iv.subset_of(&lm) && iv != lm) {
                ws.leftmost = iv;
            }
            return Step::Absorbed;
        }

        let w = ws.window;
        let (w1, w2) = if x > r {
            // common part lies left of the new interval: split after r
            let w1 = Window::from_codes(w.lo_code(), r).expect("r inside window");
            let w2 = Window::from_codes(r + 1, w.hi_code()).expect("x > r inside window");
            let keep = ws.leftmost;
            (
                WindowState::single(w1, keep),
                WindowState::single(w2, iv),
            )
        } else {
            // y < l: split before l
            let w1 = Window::from_codes(w.lo_code(), l - 1).expect("y < l inside window");
            let w2 = Window::from_codes(l, w.hi_code()).expect("l inside window");
            let keep = ws.rightmost;
            (
                WindowState::single(w1, iv),
                WindowState::single(w2, keep),
            )
        };
        // w1 keeps the key of the removed window
        *ws = w1;
        self.windows.insert(w2.window.lo_code(), w2);
        self.stats.splits += 1;
        Step::Split
    }

    /// Chosen interval of each window, left to right.
    pub fn solution(&self) -> Vec<Interval> {
        self.windows.values().map(|w| w.chosen).collect()
    }
}

/// `sel_new`.
pub fn sel_new() -> PartitionState {
    PartitionState::new()
}

/// Runs the selector over a whole stream.
pub fn select(intervals: &[Interval]) -> PartitionState {
    let mut st = PartitionState::new();
    for &iv in intervals {
        st.process(iv);
    }
    st
}

/// Checks the partition against a replay of the stream prefix it consumed.
/// Returns a description of the first violated invariant.
pub fn validate_partition(st: &PartitionState, prefix: &[Interval]) -> Result<(), String> {
    if prefix.is_empty() {
        return if st.window_count() == 0 {
            Ok(())
        } else {
            Err("windows exist before any interval".into())
        };
    }
    let ws: Vec<&WindowState> = st.windows().collect();
    if ws.first().map(|w| w.window.lo_code()) != Some(NEG_INF) {
        return Err("partition does not start at -inf".into());
    }
    if ws.last().map(|w| w.window.hi_code()) != Some(POS_INF) {
        return Err("partition does not end at +inf".into());
    }
    for pair in ws.windows(2) {
        if pair[0].window.hi_code().checked_add(1) != Some(pair[1].window.lo_code()) {
            return Err(format!("gap or overlap between {} and {}", pair[0].window, pair[1].window));
        }
    }
    for w in &ws {
        let inside: Vec<&Interval> = prefix.iter().filter(|iv| iv.contained_in(&w.window)).collect();
        if inside.is_empty() {
            return Err(format!("window {} contains no interval", w.window));
        }
        for iv in [&w.leftmost, &w.rightmost, &w.chosen] {
            if !iv.contained_in(&w.window) || !prefix.contains(iv) {
                return Err(format!("{iv} is not a stream interval inside {}", w.window));
            }
        }
        let max_l = inside.iter().map(|iv| iv.lcode()).max().unwrap();
        let min_r = inside.iter().map(|iv| iv.rcode()).min().unwrap();
        if max_l > min_r {
            return Err(format!("intervals in {} do not pairwise intersect", w.window));
        }
        if w.leftmost.rcode() != min_r || w.rightmost.lcode() != max_l {
            return Err(format!("stale witnesses in {}", w.window));
        }
        let lm_l = inside
            .iter()
            .filter(|iv| iv.rcode() == min_r)
            .map(|iv| iv.lcode())
            .max()
            .unwrap();
        let rm_r = inside
            .iter()
            .filter(|iv| iv.lcode() == max_l)
            .map(|iv| iv.rcode())
            .min()
            .unwrap();
        if w.leftmost.lcode() != lm_l || w.rightmost.rcode() != rm_r {
            return Err(format!("witness tie rule violated in {}", w.window));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bound;

    fn c(l: i64, r: i64) -> Interval {
        Interval::closed(l, r)
    }

    #[test]
    fn empty_and_first_interval() {
        let mut st = sel_new();
        assert!(st.solution().is_empty());
        assert_eq!(st.window_count(), 0);
        assert_eq!(st.process(c(1, 3)), Step::Initialized);
        assert_eq!(st.window_count(), 1);
        assert_eq!(st.solution(), vec![c(1, 3)]);
        assert_eq!(st.windows().next().unwrap().window, Window::real_line());
    }

    #[test]
    fn split_to_the_right() {
        let st = select(&[c(1, 10), c(2, 3), c(5, 6)]);
        let ws: Vec<_> = st.windows().map(|w| w.window).collect();
        assert_eq!(
            ws,
            vec![
                Window::new(Bound::Unbounded, Bound::Closed(3)).unwrap(),
                Window::new(Bound::Open(3), Bound::Unbounded).unwrap(),
            ]
        );
        assert_eq!(st.solution(), vec![c(2, 3), c(5, 6)]);
        validate_partition(&st, &[c(1, 10), c(2, 3), c(5, 6)]).unwrap();
    }

    #[test]
    fn witness_update_keeps_chosen() {
        let st = select(&[c(1, 10), c(2, 3)]);
        assert_eq!(st.window_count(), 1);
        let w = st.windows().next().unwrap();
        assert_eq!(w.leftmost, c(2, 3));
        assert_eq!(w.rightmost, c(2, 3));
        assert_eq!(w.chosen, c(1, 10));
    }

    #[test]
    fn split_to_the_left() {
        let stream = [c(5, 9), c(1, 2)];
        let st = select(&stream);
        let ws: Vec<_> = st.windows().map(|w| w.window).collect();
        assert_eq!(
            ws,
            vec![
                Window::new(Bound::Unbounded, Bound::Open(5)).unwrap(),
                Window::new(Bound::Closed(5), Bound::Unbounded).unwrap(),
            ]
        );
        assert_eq!(st.solution(), vec![c(1, 2), c(5, 9)]);
        validate_partition(&st, &stream).unwrap();
    }

    #[test]
    fn interval_across_boundary_is_ignored() {
        let mut st = select(&[c(1, 10), c(2, 3), c(5, 6)]);
        let before: Vec<_> = st.windows().copied().collect();
        assert_eq!(st.process(c(3, 4)), Step::NotContained);
        let after: Vec<_> = st.windows().copied().collect();
        assert_eq!(before, after);
    }

    #[test]
    fn duplicate_witness_causes_no_update() {
        let mut st = select(&[c(2, 6), c(3, 5)]);
        let before = *st.windows().next().unwrap();
        assert_eq!(st.process(c(3, 5)), Step::Absorbed);
        assert_eq!(*st.windows().next().unwrap(), before);
    }

    #[test]
    fn tie_rules() {
        // same right end: leftmost prefers the larger left end
        let st = select(&[c(1, 5), c(3, 5)]);
        let w = st.windows().next().unwrap();
        assert_eq!(w.leftmost, c(3, 5));
        assert_eq!(w.rightmost, c(3, 5));
        // same left end: rightmost prefers the smaller right end
        let st = select(&[c(3, 9), c(3, 5)]);
        let w = st.windows().next().unwrap();
        assert_eq!(w.rightmost, c(3, 5));
        assert_eq!(w.leftmost, c(3, 5));
    }

    #[test]
    fn mixed_openness_splits_exactly() {
        // (1,10) and [10,19] are disjoint: the split point is an open end
        let stream = [Interval::open(1, 10), c(10, 19)];
        let st = select(&stream);
        assert_eq!(st.window_count(), 2);
        validate_partition(&st, &stream).unwrap();
        assert_eq!(st.solution(), vec![Interval::open(1, 10), c(10, 19)]);
    }

    #[test]
    fn one_lookup_per_item_after_first() {
        let stream: Vec<_> = (1..50).map(|i| c(i, i + 3)).collect();
        let st = select(&stream);
        assert_eq!(st.stats().lookups, stream.len() as u64 - 1);
    }
}
