//! Integer intervals, windows and instance streams.
//!
//! Every endpoint is mapped to a *position code*: the integer point `x` has
//! code `2x`, and the open gap `(x, x+1)` has code `2x+1`. A closed or open
//! interval with integer endpoints becomes a closed range of codes, so every
//! point-set predicate reduces to integer comparisons.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Position code of a point or unit gap on the line.
pub type Code = i64;

/// Code used for an unbounded lower end.
pub const NEG_INF: Code = i64::MIN;
/// Code used for an unbounded upper end.
pub const POS_INF: Code = i64::MAX;

/// Input interval with integer endpoints and optional open ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    left: i64,
    right: i64,
    left_open: bool,
    right_open: bool,
}

impl Interval {
    pub fn new(left: i64, right: i64, left_open: bool, right_open: bool) -> Result<Self> {
        if left > right {
            return Err(Error::Input(format!("left endpoint {left} exceeds right {right}")));
        }
        if left == right && (left_open || right_open) {
            return Err(Error::Input(format!(
                "zero-length interval at {left} must be closed"
            )));
        }
        Ok(Self {
            left,
            right,
            left_open,
            right_open,
        })
    }

    /// `[left, right]`. Panics if `left > right`.
    pub fn closed(left: i64, right: i64) -> Self {
        Self::new(left, right, false, false).expect("invalid closed interval")
    }

    /// `(left, right)`. Panics unless `left < right`.
    pub fn open(left: i64, right: i64) -> Self {
        Self::new(left, right, true, true).expect("invalid open interval")
    }

    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn right(&self) -> i64 {
        self.right
    }

    pub fn left_open(&self) -> bool {
        self.left_open
    }

    pub fn right_open(&self) -> bool {
        self.right_open
    }

    pub fn len(&self) -> i64 {
        self.right - self.left
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn lcode(&self) -> Code {
        2 * self.left + i64::from(self.left_open)
    }

    #[inline]
    pub fn rcode(&self) -> Code {
        2 * self.right - i64::from(self.right_open)
    }

    #[inline]
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lcode().max(other.lcode()) <= self.rcode().min(other.rcode())
    }

    /// True iff `self` is a subset of `other` as point sets.
    #[inline]
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lcode() <= self.lcode() && self.rcode() <= other.rcode()
    }

    #[inline]
    pub fn contained_in(&self, w: &Window) -> bool {
        w.lo <= self.lcode() && self.rcode() <= w.hi
    }

    fn flags(&self) -> &'static str {
        match (self.left_open, self.right_open) {
            (false, false) => "cc",
            (false, true) => "co",
            (true, false) => "oc",
            (true, true) => "oo",
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.left_open { '(' } else { '[' };
        let r = if self.right_open { ')' } else { ']' };
        write!(f, "{l}{},{}{r}", self.left, self.right)
    }
}

/// Free-standing predicate form of [`Interval::intersects`].
pub fn intersects(a: &Interval, b: &Interval) -> bool {
    a.intersects(b)
}

/// Free-standing predicate form of [`Interval::contained_in`].
pub fn contained_in(a: &Interval, w: &Window) -> bool {
    a.contained_in(w)
}

/// A window of the line, stored as an inclusive range of position codes.
/// The extremes [`NEG_INF`] and [`POS_INF`] stand for unbounded ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    lo: Code,
    hi: Code,
}

/// One end of a window in coordinate form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Unbounded,
    Closed(i64),
    Open(i64),
}

impl Window {
    pub fn real_line() -> Self {
        Self {
            lo: NEG_INF,
            hi: POS_INF,
        }
    }

    /// Builds a window from code bounds; `None` if the code range is empty.
    pub fn from_codes(lo: Code, hi: Code) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    /// Builds a window from coordinate bounds. Returns `None` when empty.
    pub fn new(low: Bound, high: Bound) -> Option<Self> {
        let lo = match low {
            Bound::Unbounded => NEG_INF,
            Bound::Closed(x) => 2 * x,
            Bound::Open(x) => 2 * x + 1,
        };
        let hi = match high {
            Bound::Unbounded => POS_INF,
            Bound::Closed(x) => 2 * x,
            Bound::Open(x) => 2 * x - 1,
        };
        Self::from_codes(lo, hi)
    }

    /// Half-open window `[lo, hi)`.
    pub fn half_open(lo: i64, hi: i64) -> Option<Self> {
        Self::new(Bound::Closed(lo), Bound::Open(hi))
    }

    pub fn lo_code(&self) -> Code {
        self.lo
    }

    pub fn hi_code(&self) -> Code {
        self.hi
    }

    pub fn low(&self) -> Bound {
        match self.lo {
            NEG_INF => Bound::Unbounded,
            c if c % 2 == 0 => Bound::Closed(c / 2),
            c => Bound::Open((c - 1) / 2),
        }
    }

    pub fn high(&self) -> Bound {
        match self.hi {
            POS_INF => Bound::Unbounded,
            c if c % 2 == 0 => Bound::Closed(c / 2),
            c => Bound::Open((c + 1) / 2),
        }
    }

    #[inline]
    pub fn contains_code(&self, c: Code) -> bool {
        self.lo <= c && c <= self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.low() {
            Bound::Unbounded => write!(f, "(-inf,")?,
            Bound::Closed(x) => write!(f, "[{x},")?,
            Bound::Open(x) => write!(f, "({x},")?,
        }
        match self.high() {
            Bound::Unbounded => write!(f, "+inf)"),
            Bound::Closed(x) => write!(f, "{x}]"),
            Bound::Open(x) => write!(f, "{x})"),
        }
    }
}

/// A stream of intervals with endpoints in `[1, n]`, in arrival order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub n: i64,
    pub intervals: Vec<Interval>,
}

impl Instance {
    pub fn new(n: i64, intervals: Vec<Interval>) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("n", format!("must be positive, got {n}")));
        }
        for (i, iv) in intervals.iter().enumerate() {
            if iv.left < 1 || iv.right > n {
                return Err(Error::Domain {
                    line: i + 1,
                    msg: format!("interval {iv} outside [1,{n}]"),
                });
            }
        }
        Ok(Self { n, intervals })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Result of parsing a stream file, remembering whether `n` was declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedStream {
    pub instance: Instance,
    pub declared_n: bool,
}

/// Parses the text stream format. See [`parse_stream_detailed`].
pub fn parse_stream(text: &str) -> Result<Instance> {
    parse_stream_detailed(text).map(|p| p.instance)
}

/// Parses `n <int>` (optional, before any interval), then one
/// `<left> <right> [cc|co|oc|oo]` per line. `#` lines and blank lines are skipped.
pub fn parse_stream_detailed(text: &str) -> Result<ParsedStream> {
    let mut declared: Option<i64> = None;
    let mut rows: Vec<(usize, Interval)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks[0] == "n" {
            if declared.is_some() || !rows.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "header `n` must appear once, before any interval".into(),
                });
            }
            if toks.len() != 2 {
                return Err(Error::Parse {
                    line,
                    msg: "expected `n <int>`".into(),
                });
            }
            let n = parse_int(toks[1], line)?;
            if n < 1 {
                return Err(Error::Domain {
                    line,
                    msg: format!("n must be positive, got {n}"),
                });
            }
            declared = Some(n);
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `<left> <right> [flags]`, got `{trimmed}`"),
            });
        }
        let left = parse_int(toks[0], line)?;
        let right = parse_int(toks[1], line)?;
        let (lo, ro) = match toks.get(2).copied() {
            None | Some("cc") => (false, false),
            Some("co") => (false, true),
            Some("oc") => (true, false),
            Some("oo") => (true, true),
            Some(other) => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown endpoint flags `{other}`"),
                })
            }
        };
        let iv = Interval::new(left, right, lo, ro).map_err(|e| Error::Parse {
            line,
            msg: match e {
                Error::Input(m) => m,
                other => other.to_string(),
            },
        })?;
        if left < 1 {
            return Err(Error::Domain {
                line,
                msg: format!("endpoint {left} below 1"),
            });
        }
        if let Some(n) = declared {
            if right > n {
                return Err(Error::Domain {
                    line,
                    msg: format!("endpoint {right} exceeds n = {n}"),
                });
            }
        }
        rows.push((line, iv));
    }

    let n = match declared {
        Some(n) => n,
        None => rows.iter().map(|(_, iv)| iv.right).max().unwrap_or(1),
    };
    Ok(ParsedStream {
        instance: Instance {
            n,
            intervals: rows.into_iter().map(|(_, iv)| iv).collect(),
        },
        declared_n: declared.is_some(),
    })
}

fn parse_int(tok: &str, line: usize) -> Result<i64> {
    i64::from_str(tok).map_err(|_| Error::Parse {
        line,
        msg: format!("not an integer: `{tok}`"),
    })
}

/// Canonical text form: header line, then one interval per line, with the
/// flag token omitted for closed intervals.
pub fn format_stream(inst: &Instance) -> String {
    let mut out = format!("n {}\n", inst.n);
    for iv in &inst.intervals {
        out.push_str(&format_interval_line(iv));
        out.push('\n');
    }
    out
}

/// One stream-format line (without newline) for `iv`.
pub fn format_interval_line(iv: &Interval) -> String {
    match iv.flags() {
        "cc" => format!("{} {}", iv.left, iv.right),
        fl => format!("{} {} {fl}", iv.left, iv.right),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Points of the half-integer grid {lo, lo+0.5, ..., hi}, doubled.
    fn grid_points(iv: &Interval, lo: i64, hi: i64) -> Vec<i64> {
        (2 * lo..=2 * hi)
            .filter(|&p2| {
                let after_left = if iv.left_open() {
                    p2 > 2 * iv.left()
                } else {
                    p2 >= 2 * iv.left()
                };
                let before_right = if iv.right_open() {
                    p2 < 2 * iv.right()
                } else {
                    p2 <= 2 * iv.right()
                };
                after_left && before_right
            })
            .collect()
    }

    #[test]
    fn parse_examples() {
        let inst = parse_stream("n 10\n1 3\n2 5\n").unwrap();
        assert_eq!(inst.n, 10);
        assert_eq!(inst.intervals, vec![Interval::closed(1, 3), Interval::closed(2, 5)]);

        let inst = parse_stream("1 1\n").unwrap();
        assert_eq!(inst.n, 1);
        assert_eq!(inst.intervals, vec![Interval::closed(1, 1)]);

        let inst = parse_stream("2 11 oo\n").unwrap();
        assert_eq!(inst.intervals, vec![Interval::open(2, 11)]);
        assert_eq!(inst.n, 11);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_stream("n 10\n1 3\nfoo 4\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse_stream("n 5\n# c\n1 6\n") {
            Err(Error::Domain { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_stream("0 3\n"), Err(Error::Domain { line: 1, .. })));
        assert!(matches!(parse_stream("3 3 oo\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_stream("4 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_stream("1 3 xx\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_stream("1 3\nn 4\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn header_detection() {
        assert!(parse_stream_detailed("n 4\n1 2\n").unwrap().declared_n);
        assert!(!parse_stream_detailed("1 2\n").unwrap().declared_n);
    }

    #[test]
    fn canonical_text_round_trips_byte_exact() {
        let text = "n 30\n1 3\n2 11 oo\n4 4\n5 9 co\n6 7 oc\n";
        assert_eq!(format_stream(&parse_stream(text).unwrap()), text);
    }

    #[test]
    fn intersects_examples() {
        assert!(Interval::closed(1, 3).intersects(&Interval::closed(3, 5)));
        assert!(Interval::open(2, 11).intersects(&Interval::closed(10, 19)));
        assert!(!Interval::open(1, 10).intersects(&Interval::closed(10, 19)));
    }

    #[test]
    fn contained_in_examples() {
        let w = Window::half_open(1, 3).unwrap();
        assert!(Interval::closed(1, 2).contained_in(&w));
        let w = Window::half_open(0, 6).unwrap();
        assert!(!Interval::closed(4, 6).contained_in(&w));
        let w = Window::half_open(3, 9).unwrap();
        assert!(Interval::open(3, 5).contained_in(&w));
    }

    #[test]
    fn window_bounds_round_trip() {
        for w in [
            Window::real_line(),
            Window::new(Bound::Unbounded, Bound::Closed(3)).unwrap(),
            Window::new(Bound::Open(3), Bound::Unbounded).unwrap(),
            Window::new(Bound::Open(2), Bound::Open(3)).unwrap(),
            Window::new(Bound::Closed(2), Bound::Closed(2)).unwrap(),
        ] {
            assert_eq!(Window::new(w.low(), w.high()), Some(w));
        }
        assert!(Window::new(Bound::Closed(3), Bound::Open(3)).is_none());
        assert_eq!(Window::new(Bound::Unbounded, Bound::Closed(3)).unwrap().to_string(), "(-inf,3]");
    }

    fn all_intervals(n: i64) -> Vec<Interval> {
        let mut v = Vec::new();
        for l in 1..=n {
            for r in l..=n {
                for (lo, ro) in [(false, false), (false, true), (true, false), (true, true)] {
                    if let Ok(iv) = Interval::new(l, r, lo, ro) {
                        v.push(iv);
                    }
                }
            }
        }
        v
    }

    #[test]
    fn codes_agree_with_half_integer_grid() {
        let n = 9;
        let ivs = all_intervals(n);
        for a in &ivs {
            let pa = grid_points(a, 0, n + 1);
            assert!(!pa.is_empty());
            for b in &ivs {
                let pb = grid_points(b, 0, n + 1);
                let brute = pa.iter().any(|p| pb.contains(p));
                assert_eq!(a.intersects(b), brute, "{a} vs {b}");
                let sub = pa.iter().all(|p| pb.contains(p));
                assert_eq!(a.subset_of(b), sub, "{a} in {b}");
                // windows share the code semantics of intervals
                let w = Window::from_codes(b.lcode(), b.rcode()).unwrap();
                assert_eq!(a.contained_in(&w), sub);
            }
        }
    }
}
