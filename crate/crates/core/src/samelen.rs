//! One-pass 3/2-approximate selection for intervals of a common length λ.
//!
//! Three grids of half-open windows `[(a + 3j)λ, (a + 3j + 3)λ)`, `a = 0, 1, 2`,
//! cover the line. A window of length 3λ holds at most two disjoint length-λ
//! intervals, so per window the pair of witnesses is enough to keep an
//! optimal solution for the intervals that fit in that grid. The best of the
//! three grids is within 2/3 of the optimum.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Code, Interval, Window};

/// Per-window record of one grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridWindow {
    pub leftmost: Interval,
    pub rightmost: Interval,
    /// Set once the window holds two disjoint intervals; the pair is then kept.
    pub paired: bool,
}

impl GridWindow {
    pub fn solution_size(&self) -> usize {
        if self.paired {
            2
        } else {
            1
        }
    }
}

/// State of one shifted grid.
#[derive(Debug, Clone)]
pub struct ShiftState {
    shift: u8,
    lambda: i64,
    windows: BTreeMap<i64, GridWindow>,
    /// Solution interval kept while the window is unpaired. Kept apart from
    /// the witnesses, which keep moving.
    single: BTreeMap<i64, Interval>,
    size: usize,
}

impl ShiftState {
    fn new(shift: u8, lambda: i64) -> Self {
        Self {
            shift,
            lambda,
            windows: BTreeMap::new(),
            single: BTreeMap::new(),
            size: 0,
        }
    }

    pub fn shift(&self) -> u8 {
        self.shift
    }

    /// Index of the grid window holding position code `c`.
    pub fn window_index(&self, c: Code) -> i64 {
        let origin = 2 * i64::from(self.shift) * self.lambda;
        (c - origin).div_euclid(6 * self.lambda)
    }

    pub fn window(&self, j: i64) -> Window {
        let lo = (i64::from(self.shift) + 3 * j) * self.lambda;
        Window::half_open(lo, lo + 3 * self.lambda).expect("lambda >= 1")
    }

    /// Index of the window containing `iv`, if any.
    pub fn containing_window(&self, iv: &Interval) -> Option<i64> {
        let j = self.window_index(iv.lcode());
        iv.contained_in(&self.window(j)).then_some(j)
    }

    fn process(&mut self, iv: Interval) {
        let Some(j) = self.containing_window(&iv) else {
            return;
        };
        match self.windows.get_mut(&j) {
            None => {
                self.windows.insert(
                    j,
                    GridWindow {
                        leftmost: iv,
                        rightmost: iv,
                        paired: false,
                    },
                );
                self.single.insert(j, iv);
                self.size += 1;
            }
            Some(w) => {
                let (lm, rm) = (w.leftmost, w.rightmost);
                if !lm.intersects(&rm) {
                    return;
                }
                let l = lm.lcode().max(rm.lcode());
                let r = lm.rcode().min(rm.rcode());
                if l < iv.lcode() {
                    w.rightmost = iv;
                }
                if iv.rcode() < r {
                    w.leftmost = iv;
                }
                if !w.leftmost.intersects(&w.rightmost) {
                    w.paired = true;
                    self.single.remove(&j);
                    self.size += 1;
                }
            }
        }
    }

    /// Size of the kept solution for this grid.
    pub fn solution_size(&self) -> usize {
        self.size
    }

    pub fn solution(&self) -> Vec<Interval> {
        self.windows
            .iter()
            .flat_map(|(j, w)| {
                if w.paired {
                    vec![w.leftmost, w.rightmost]
                } else {
                    vec![self.single[j]]
                }
            })
            .collect()
    }

    pub fn active_windows(&self) -> usize {
        self.windows.len()
    }

    pub fn windows(&self) -> impl Iterator<Item = (i64, &GridWindow)> {
        self.windows.iter().map(|(j, w)| (*j, w))
    }
}

/// The three grids together.
#[derive(Debug, Clone)]
pub struct SamelenSelector {
    lambda: i64,
    shifts: [ShiftState; 3],
    peak_windows: usize,
}

impl SamelenSelector {
    /// `usel_new`.
    pub fn new(lambda: i64) -> Result<Self> {
        if lambda < 1 {
            return Err(Error::param("lambda", format!("must be at least 1, got {lambda}")));
        }
        Ok(Self {
            lambda,
            shifts: [0, 1, 2].map(|a| ShiftState::new(a, lambda)),
            peak_windows: 0,
        })
    }

    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    /// `usel_process`. Rejects intervals whose length differs from λ.
    pub fn process(&mut self, iv: Interval) -> Result<()> {
        if iv.len() != self.lambda {
            return Err(Error::Input(format!(
                "interval {iv} has length {}, expected {}",
                iv.len(),
                self.lambda
            )));
        }
        for s in &mut self.shifts {
            s.process(iv);
        }
        self.peak_windows = self.peak_windows.max(self.window_count());
        Ok(())
    }

    pub fn shifts(&self) -> &[ShiftState; 3] {
        &self.shifts
    }

    pub fn window_count(&self) -> usize {
        self.shifts.iter().map(|s| s.active_windows()).sum()
    }

    pub fn peak_windows(&self) -> usize {
        self.peak_windows
    }

    /// Index of the grid with the largest solution (ties: smallest shift).
    pub fn best_shift(&self) -> usize {
        let mut best = 0;
        for a in 1..3 {
            if self.shifts[a].solution_size() > self.shifts[best].solution_size() {
                best = a;
            }
        }
        best
    }

    /// `usel_solution`.
    pub fn solution(&self) -> Vec<Interval> {
        self.shifts[self.best_shift()].solution()
    }

    pub fn solution_size(&self) -> usize {
        self.shifts[self.best_shift()].solution_size()
    }
}

/// Runs the selector over a whole stream.
pub fn select_samelen(lambda: i64, intervals: &[Interval]) -> Result<SamelenSelector> {
    let mut st = SamelenSelector::new(lambda)?;
    for &iv in intervals {
        st.process(iv)?;
    }
    Ok(st)
}

/// Intervals of `intervals` that fit inside some window of grid `shift`.
pub fn grid_members(lambda: i64, shift: u8, intervals: &[Interval]) -> Vec<Interval> {
    let grid = ShiftState::new(shift, lambda);
    intervals
        .iter()
        .copied()
        .filter(|iv| grid.containing_window(iv).is_some())
        .collect()
}
