use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::Real;

/// Width of the fourth-order stencil; smaller grids are rejected.
pub const MIN_POINTS: usize = 7;

/// Uniform grid on the half line `[0, x_max]`, `x_i = i * dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dx: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(dx: f64, n_points: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(invalid("dx", format!("must be positive, got {dx}")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::GridTooSmall {
                n_points,
                min: MIN_POINTS,
            });
        }
        Ok(Self { dx, n_points })
    }

    /// Smallest grid with spacing `dx` reaching at least `x_max`.
    pub fn covering(dx: f64, x_max: f64) -> Result<Self> {
        if !(x_max > 0.0) {
            return Err(invalid("x_max", format!("must be positive, got {x_max}")));
        }
        let n = (x_max / dx - 1e-9).ceil() as usize + 1;
        Self::new(dx, n)
    }

    pub fn x_max(&self) -> f64 {
        self.dx * (self.n_points - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.dx * i as f64
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.x(i))
    }

    /// Index of the grid point nearest to `x` (clamped to the grid).
    pub fn index_of(&self, x: f64) -> usize {
        let i = (x / self.dx).round();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.n_points - 1)
        }
    }

    pub fn sample<T: Real>(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..self.n_points)
            .map(|i| f(T::from_f64(self.dx).scale(i as f64)))
            .collect()
    }

    /// Same extent with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            dx: self.dx / 2.0,
            n_points: 2 * self.n_points - 1,
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_points {
            return Err(invalid(
                "profile",
                format!("has {len} samples but grid has {}", self.n_points),
            ));
        }
        if len < MIN_POINTS {
            return Err(Error::GridTooSmall {
                n_points: len,
                min: MIN_POINTS,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extent_is_exact() {
        let g = GridSpec::covering(0.02, 80.0).unwrap();
        assert_eq!(g.n_points, 4001);
        assert!((g.x_max() - 80.0).abs() < 1e-12);
        assert_eq!(g.refined().n_points, 8001);
        assert_eq!(g.index_of(1.0), 50);
        assert_eq!(g.index_of(-3.0), 0);
        assert_eq!(g.index_of(1e9), 4000);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(GridSpec::new(0.1, 6), Err(Error::GridTooSmall { .. })));
        assert!(GridSpec::new(0.0, 100).is_err());
        assert!(GridSpec::new(-1.0, 100).is_err());
    }
}
