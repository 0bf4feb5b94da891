use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::{Error, Result};

/// Multiplexing gain `r`: the rate grows as `r log(SNR)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MultiplexingGain(f64);

impl MultiplexingGain {
    pub fn new(r: f64) -> Result<Self> {
        if r.is_finite() && (0.0..=1.0).contains(&r) {
            Ok(Self(r))
        } else {
            Err(Error::GainOutOfRange(r))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `count + 1` evenly spaced gains covering `[0, 1]`.
    pub fn grid(count: usize) -> impl Iterator<Item = MultiplexingGain> {
        let count = count.max(1);
        (0..=count).map(move |i| MultiplexingGain(i as f64 / count as f64))
    }
}

impl fmt::Display for MultiplexingGain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A non-negative exponent that may be `+∞` (the event has probability
/// decaying faster than any power of the SNR).
///
/// `PosInfinity` orders above every finite value.
#[derive(Debug, Clone, Copy)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl PartialEq for ExtendedReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.total_cmp(b),
            (Finite(_), PosInfinity) => Ordering::Less,
            (PosInfinity, Finite(_)) => Ordering::Greater,
            (PosInfinity, PosInfinity) => Ordering::Equal,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => write!(f, "inf"),
        }
    }
}
