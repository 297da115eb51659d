use serde::Serialize;

use crate::error::{Error, Result};

/// An open interval `(a, b)`. Endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    /// The whole real line.
    pub const UNBOUNDED: Interval = Interval {
        a: f64::NEG_INFINITY,
        b: f64::INFINITY,
    };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::InvalidArgument(format!(
                "interval endpoints must satisfy a < b, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    /// Strict containment; infinite `t` is never contained.
    pub fn contains(&self, t: f64) -> bool {
        t.is_finite() && self.a < t && t < self.b
    }

    /// Uniform grid of `m` points inset by half a step from each endpoint,
    /// so every point lies strictly inside the open interval.
    pub fn half_step_grid(&self, m: usize) -> Result<Vec<f64>> {
        if !self.is_bounded() {
            return Err(Error::InvalidArgument(
                "grid requires a bounded interval".into(),
            ));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("grid size must be positive".into()));
        }
        let h = self.width() / m as f64;
        Ok((0..m).map(|i| self.a + (i as f64 + 0.5) * h).collect())
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containment_is_strict() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        assert!(iv.contains(0.5));
        assert!(!iv.contains(0.0));
        assert!(!iv.contains(1.0));
        assert!(Interval::UNBOUNDED.contains(1e300));
        assert!(!Interval::UNBOUNDED.contains(f64::INFINITY));
    }

    #[test]
    fn rejects_degenerate() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn grid_is_inset_by_half_step() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let g = iv.half_step_grid(4).unwrap();
        assert_eq!(g, vec![0.125, 0.375, 0.625, 0.875]);
    }
}
