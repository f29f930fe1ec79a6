//! Fourth-order centered finite differences on an even half-line grid.
//!
//! Ghost values left of `x = 0` come from even reflection `u[-k] = u[k]`,
//! which enforces `u_x(0) = 0`. The two outermost points are pinned: their
//! derivative is set to zero (causal outer boundary).

use crate::error::Result;
use crate::numerics::{GridSpec, Real};

/// `u_xx` into `out`. Caller guarantees `u.len() == out.len() >= 7`.
#[inline]
pub(crate) fn second_derivative_into<T: Real>(u: &[T], inv_12dx2: f64, out: &mut [T]) {
    let n = u.len();
    debug_assert!(n >= 7 && out.len() == n);
    out[0] = (u[1].scale(32.0) - u[0].scale(30.0) - u[2].scale(2.0)).scale(inv_12dx2);
    out[1] = (u[0].scale(16.0) - u[1].scale(31.0) + u[2].scale(16.0) - u[3]).scale(inv_12dx2);
    for i in 2..n - 2 {
        let s = (u[i - 1] + u[i + 1]).scale(16.0) - (u[i - 2] + u[i + 2]) - u[i].scale(30.0);
        out[i] = s.scale(inv_12dx2);
    }
    out[n - 2] = T::zero();
    out[n - 1] = T::zero();
}

/// `u_x` into `out`, odd under the reflection so `u_x(0) = 0` exactly.
pub(crate) fn first_derivative_into<T: Real>(u: &[T], inv_12dx: f64, out: &mut [T]) {
    let n = u.len();
    out[0] = T::zero();
    out[1] = (u[1] - u[0].scale(8.0) + u[2].scale(8.0) - u[3]).scale(inv_12dx);
    for i in 2..n - 2 {
        let s = (u[i + 1] - u[i - 1]).scale(8.0) - (u[i + 2] - u[i - 2]);
        out[i] = s.scale(inv_12dx);
    }
    out[n - 2] = T::zero();
    out[n - 1] = T::zero();
}

/// Fourth-order second derivative with even reflection at the origin and
/// pinned outer boundary.
pub fn second_derivative<T: Real>(u: &[T], grid: &GridSpec) -> Result<Vec<T>> {
    grid.check_len(u.len())?;
    let mut out = vec![T::zero(); u.len()];
    second_derivative_into(u, 1.0 / (12.0 * grid.dx * grid.dx), &mut out);
    Ok(out)
}

/// Fourth-order first derivative with the same boundary treatment.
pub fn first_derivative<T: Real>(u: &[T], grid: &GridSpec) -> Result<Vec<T>> {
    grid.check_len(u.len())?;
    let mut out = vec![T::zero(); u.len()];
    first_derivative_into(u, 1.0 / (12.0 * grid.dx), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DoubleDouble;

    #[test]
    fn constant_has_zero_second_derivative() {
        let g = GridSpec::new(0.1, 50).unwrap();
        let d = second_derivative(&vec![3.7; 50], &g).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn quadratic_is_exact() {
        let g = GridSpec::new(0.05, 101).unwrap();
        let u: Vec<f64> = g.xs().map(|x| x * x).collect();
        let d = second_derivative(&u, &g).unwrap();
        for v in &d[..99] {
            assert!((v - 2.0).abs() < 1e-9, "{v}");
        }
        // x^4 is even and degree <= 5: still exact including the reflected rows
        let u4: Vec<f64> = g.xs().map(|x| x.powi(4)).collect();
        let d4 = second_derivative(&u4, &g).unwrap();
        for (i, v) in d4[..99].iter().enumerate() {
            let x = g.x(i);
            assert!((v - 12.0 * x * x).abs() < 1e-8, "i={i}: {v}");
        }
    }

    #[test]
    fn too_small_grid_rejected() {
        let g = GridSpec::new(0.1, 7).unwrap();
        assert!(second_derivative(&[0.0; 5], &g).is_err());
    }

    fn cos_error(dx: f64) -> f64 {
        let g = GridSpec::covering(dx, 6.0).unwrap();
        let u: Vec<f64> = g.xs().map(f64::cos).collect();
        let d = second_derivative(&u, &g).unwrap();
        (0..g.n_points - 2)
            .map(|i| (d[i] + g.x(i).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn richardson_ratio_is_sixteen() {
        let ratio = cos_error(0.1) / cos_error(0.05);
        assert!((ratio - 16.0).abs() < 1.6, "ratio {ratio}");
        let order = ratio.log2();
        assert!((3.8..=4.2).contains(&order));
    }

    #[test]
    fn first_derivative_of_even_profile() {
        let g = GridSpec::covering(0.01, 5.0).unwrap();
        let u: Vec<f64> = g.xs().map(|x| (-x * x).exp()).collect();
        let d = first_derivative(&u, &g).unwrap();
        assert_eq!(d[0], 0.0);
        for i in 1..g.n_points - 2 {
            let x = g.x(i);
            assert!((d[i] + 2.0 * x * (-x * x).exp()).abs() < 5e-8, "{}", d[i] + 2.0 * x * (-x * x).exp());
        }
    }

    #[test]
    fn dd_tier_matches_native() {
        let g = GridSpec::covering(0.05, 4.0).unwrap();
        let u: Vec<f64> = g.xs().map(|x| 1.0 / x.cosh()).collect();
        let ud: Vec<DoubleDouble> = u.iter().map(|&v| DoubleDouble::from_f64(v)).collect();
        let a = second_derivative(&u, &g).unwrap();
        let b = second_derivative(&ud, &g).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q.to_f64()).abs() < 1e-11);
        }
    }
}
