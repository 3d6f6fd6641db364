//! p-grids written as `geometric:a..b:n` or `linear:a..b:n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// Points in a default grid.
pub const DEFAULT_POINTS: usize = 16;
/// Distance kept from the ends of the admissible domain.
pub const DEFAULT_MARGIN: f64 = 1e-3;
/// Upper end of a default grid when the domain is unbounded.
pub const DEFAULT_CAP: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub spacing: Spacing,
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(spacing: Spacing, start: f64, end: f64, n: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start > 0.0 && end > start) {
            return Err(Error::InvalidGrid(format!("need 0 < a < b, got {start}..{end}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Ok(GridSpec { spacing, start, end, n })
    }

    /// Geometric grid over the admissible domain of `dist`: `[1, S)` or, with
    /// `full_domain`, `(0, S)`, kept [`DEFAULT_MARGIN`] away from each end and
    /// capped at [`DEFAULT_CAP`].
    pub fn default_for(dist: &Distribution, full_domain: bool) -> Result<Self> {
        let start = if full_domain {
            DEFAULT_MARGIN
        } else {
            1.0 + DEFAULT_MARGIN
        };
        let sup = dist.moment_domain().upper;
        let end = (sup - DEFAULT_MARGIN).min(DEFAULT_CAP);
        GridSpec::new(Spacing::Geometric, start, end, DEFAULT_POINTS)
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.n - 1) as f64;
        let mut v: Vec<f64> = (0..self.n)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Geometric => self.start * (self.end / self.start).powf(t),
                    Spacing::Linear => self.start + (self.end - self.start) * t,
                }
            })
            .collect();
        // Hit the ends exactly.
        v[0] = self.start;
        v[self.n - 1] = self.end;
        v
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.spacing {
            Spacing::Geometric => "geometric",
            Spacing::Linear => "linear",
        };
        write!(f, "{kind}:{}..{}:{}", self.start, self.end, self.n)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("expected geometric:a..b:n or linear:a..b:n, got `{s}`"));
        let mut parts = s.trim().split(':');
        let (Some(kind), Some(range), Some(n), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        let spacing = match kind {
            "geometric" => Spacing::Geometric,
            "linear" => Spacing::Linear,
            _ => return Err(bad()),
        };
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let a: f64 = a.parse().map_err(|_| bad())?;
        let b: f64 = b.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        GridSpec::new(spacing, a, b, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    #[test]
    fn parse_and_display() {
        let g: GridSpec = "geometric:0.25..6:16".parse().unwrap();
        assert_eq!(g, GridSpec::new(Spacing::Geometric, 0.25, 6.0, 16).unwrap());
        assert_eq!(g.to_string(), "geometric:0.25..6:16");
        let v = g.values();
        assert_eq!(v.len(), 16);
        assert_eq!((v[0], v[15]), (0.25, 6.0));
        assert!((v[1] / v[0] - (24f64).powf(1.0 / 15.0)).abs() < 1e-14);
        let l: GridSpec = "linear:1..1.5:6".parse().unwrap();
        assert!((l.values()[1] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "geometric:0..6:16",
            "cubic:1..2:4",
            "linear:2..1:4",
            "linear:1..2",
            "linear:1..2:1",
            "linear:a..2:4",
        ] {
            assert!(matches!(s.parse::<GridSpec>(), Err(Error::InvalidGrid(_))), "{s}");
        }
    }

    #[test]
    fn defaults_follow_domain() {
        let p = Distribution::new(DistributionSpec::pareto(0.5)).unwrap();
        let g = GridSpec::default_for(&p, false).unwrap();
        assert_eq!((g.start, g.end, g.n), (1.001, 1.499, 16));
        let e = Distribution::new(DistributionSpec::exponential(1.0)).unwrap();
        let g = GridSpec::default_for(&e, true).unwrap();
        assert_eq!((g.start, g.end), (1e-3, 8.0));
    }
}
