//! Divisible resource on `[0, 1]`: finite interval unions and
//! piecewise-constant densities, all with rational coordinates.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Whether the divisible resource is desirable (`Cake`, densities `>= 0`)
/// or undesirable (`BadCake`, densities `<= 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivisibleKind {
    Cake,
    BadCake,
}

impl DivisibleKind {
    pub fn admits(self, level: &Rational) -> bool {
        match self {
            DivisibleKind::Cake => !level.is_negative(),
            DivisibleKind::BadCake => !level.is_positive(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl std::str::FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::Parse(format!("interval must look like \"p/q..r/s\": {s:?}")))?;
        Ok(Interval::new(rational::parse(lo)?, rational::parse(hi)?))
    }
}

/// A finite union of closed intervals inside `[0, 1]`.
///
/// Intervals are kept sorted with `lo < hi`; zero-length intervals are
/// dropped and touching intervals are merged, so equal sets compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CakePiece {
    intervals: Vec<Interval>,
}

impl CakePiece {
    pub fn empty() -> Self {
        CakePiece::default()
    }

    pub fn interval(lo: Rational, hi: Rational) -> Result<Self> {
        Self::from_intervals(vec![Interval::new(lo, hi)])
    }

    pub fn from_intervals(mut intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if iv.lo > iv.hi {
                return Err(Error::InvalidCake(format!("interval {iv} has lo > hi")));
            }
            if iv.lo.is_negative() || iv.hi > Rational::one() {
                return Err(Error::InvalidCake(format!("interval {iv} leaves [0,1]")));
            }
        }
        intervals.retain(|iv| iv.lo < iv.hi);
        intervals.sort_by(|a, b| a.lo.cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.lo < last.hi => {
                    return Err(Error::InvalidCake(format!("intervals {last} and {iv} overlap")));
                }
                Some(last) if iv.lo == last.hi => last.hi = iv.hi,
                _ => merged.push(iv),
            }
        }
        Ok(CakePiece { intervals: merged })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn length(&self) -> Rational {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// True when the two pieces share a set of positive length.
    pub fn overlaps(&self, other: &CakePiece) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            if std::cmp::max(&a.lo, &b.lo) < std::cmp::min(&a.hi, &b.hi) {
                return true;
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }

    /// Union of two disjoint pieces.
    pub fn union(&self, other: &CakePiece) -> Result<CakePiece> {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        CakePiece::from_intervals(all)
    }

    pub fn parse_list<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<CakePiece> {
        let intervals = items
            .into_iter()
            .map(str::parse)
            .collect::<Result<Vec<Interval>>>()?;
        CakePiece::from_intervals(intervals)
    }
}

impl fmt::Display for CakePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|iv| iv.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A step function on `[0, 1]`: `levels[k]` is the density on
/// `(breakpoints[k], breakpoints[k + 1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseConstantDensity {
    breakpoints: Vec<Rational>,
    levels: Vec<Rational>,
}

impl PiecewiseConstantDensity {
    pub fn new(breakpoints: Vec<Rational>, levels: Vec<Rational>) -> Result<Self> {
        if levels.is_empty() || breakpoints.len() != levels.len() + 1 {
            return Err(Error::InvalidInstance(format!(
                "density needs K >= 1 levels and K + 1 breakpoints, got {} and {}",
                levels.len(),
                breakpoints.len()
            )));
        }
        if !breakpoints[0].is_zero() || !breakpoints[breakpoints.len() - 1].is_one() {
            return Err(Error::InvalidInstance("density breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInstance("density breakpoints must be strictly increasing".into()));
        }
        Ok(PiecewiseConstantDensity { breakpoints, levels })
    }

    pub fn uniform(level: Rational) -> Self {
        PiecewiseConstantDensity {
            breakpoints: vec![Rational::zero(), Rational::one()],
            levels: vec![level],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[Rational] {
        &self.levels
    }

    /// `(lo, hi, level)` for every constant segment.
    pub fn segments(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(w, l)| (&w[0], &w[1], l))
    }

    pub fn fits(&self, kind: DivisibleKind) -> bool {
        self.levels.iter().all(|l| kind.admits(l))
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(Zero::is_zero)
    }

    /// Integral of the density over `[lo, hi]`.
    pub fn value_interval(&self, lo: &Rational, hi: &Rational) -> Rational {
        let mut total = Rational::zero();
        for (a, b, level) in self.segments() {
            if b <= lo {
                continue;
            }
            if a >= hi {
                break;
            }
            let overlap = hi.min(b) - lo.max(a);
            if overlap.is_positive() && !level.is_zero() {
                total += level * overlap;
            }
        }
        total
    }

    pub fn value(&self, piece: &CakePiece) -> Rational {
        piece
            .intervals()
            .iter()
            .map(|iv| self.value_interval(&iv.lo, &iv.hi))
            .sum()
    }
}
