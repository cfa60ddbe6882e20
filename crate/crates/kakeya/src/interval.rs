//! Closed rational intervals used as rigorous enclosures.

use crate::rational::Rat;

/// A closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatInterval {
    lo: Rat,
    hi: Rat,
}

impl RatInterval {
    /// Panics if `lo > hi`; enclosures are constructed from sound bounds
    /// so an inverted interval is a logic bug, not an input error.
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "inverted interval: {lo} > {hi}");
        RatInterval { lo, hi }
    }

    pub fn point(v: Rat) -> Self {
        RatInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) * Rat::ratio(1, 2)
    }

    pub fn contains(&self, v: &Rat) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_interval(&self, other: &RatInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Translate by an exact offset.
    pub fn translate(&self, by: &Rat) -> RatInterval {
        RatInterval {
            lo: &self.lo + by,
            hi: &self.hi + by,
        }
    }

    /// Minkowski sum of two enclosures.
    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Enclosure of `v - self` for an exact `v`.
    pub fn sub_from(&self, v: &Rat) -> RatInterval {
        RatInterval {
            lo: v - &self.hi,
            hi: v - &self.lo,
        }
    }

    /// Scale by a nonnegative exact factor.
    pub fn scale(&self, by: &Rat) -> RatInterval {
        assert!(!by.is_negative());
        RatInterval {
            lo: &self.lo * by,
            hi: &self.hi * by,
        }
    }

    pub fn overlaps(&self, other: &RatInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Strict disjointness: a shared endpoint counts as overlap.
    pub fn disjoint(&self, other: &RatInterval) -> bool {
        !self.overlaps(other)
    }
}

/// Merge closed intervals, coalescing overlapping or touching ones.
/// Touching endpoints merge: closed segments sharing a point form one
/// segment.
pub fn merge_intervals(mut intervals: Vec<RatInterval>) -> Vec<RatInterval> {
    intervals.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
    let mut merged: Vec<RatInterval> = Vec::new();
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv.lo <= last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => merged.push(iv),
        }
    }
    merged
}
