use crate::error::{invalid, Result};
use crate::model;
use crate::numerics::{GridSpec, Real};

/// Largest internal RK4 step for profile integration.
const MAX_STEP: f64 = 0.001;
const OVERFLOW: f64 = 1e250;

/// Solution of `v'' = (V(x) + λ²) v` sampled on a grid.
#[derive(Debug, Clone)]
pub struct OdeProfile<T> {
    pub values: Vec<T>,
    pub derivatives: Vec<T>,
    /// First grid index where the solution overflowed; samples from there
    /// on are absent.
    pub truncated_at: Option<usize>,
}

/// Integrates `L v = -λ² v` outward from `x = 0` with `v(0) = init_value`,
/// `v'(0) = 0`.
pub fn ode_profile_integrate<T: Real>(
    alpha: f64,
    lambda: f64,
    grid: &GridSpec,
    init_value: f64,
) -> Result<OdeProfile<T>> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let lam2 = T::from_f64(lambda * lambda);
    integrate_even(grid, T::from_f64(init_value), |x| model::potential(alpha, x) + lam2)
}

/// RK4 for `v'' = q(x) v` on the grid with even initial data at the origin.
pub fn integrate_even<T: Real>(grid: &GridSpec, init: T, q: impl Fn(T) -> T) -> Result<OdeProfile<T>> {
    let m = (grid.dx / MAX_STEP).ceil().max(1.0) as usize;
    let h = grid.dx / m as f64;
    let mut values = Vec::with_capacity(grid.n_points);
    let mut derivatives = Vec::with_capacity(grid.n_points);
    let (mut v, mut w) = (init, T::zero());
    values.push(v);
    derivatives.push(w);
    let hdd = T::from_f64(h);
    for i in 1..grid.n_points {
        let x0 = T::from_f64(grid.dx).scale((i - 1) as f64);
        for j in 0..m {
            let x = x0 + hdd.scale(j as f64);
            let xm = x + hdd.scale(0.5);
            let q0 = q(x);
            let qm = q(xm);
            let q1 = q(x + hdd);
            let (k1v, k1w) = (w, q0 * v);
            let (v2, w2) = (v + k1v.scale(h / 2.0), w + k1w.scale(h / 2.0));
            let (k2v, k2w) = (w2, qm * v2);
            let (v3, w3) = (v + k2v.scale(h / 2.0), w + k2w.scale(h / 2.0));
            let (k3v, k3w) = (w3, qm * v3);
            let (v4, w4) = (v + k3v.scale(h), w + k3w.scale(h));
            let (k4v, k4w) = (w4, q1 * v4);
            v += (k1v + (k2v + k3v).scale(2.0) + k4v).scale(h / 6.0);
            w += (k1w + (k2w + k3w).scale(2.0) + k4w).scale(h / 6.0);
        }
        if !v.is_finite() || v.abs().to_f64() > OVERFLOW {
            return Ok(OdeProfile {
                values,
                derivatives,
                truncated_at: Some(i),
            });
        }
        values.push(v);
        derivatives.push(w);
    }
    Ok(OdeProfile {
        values,
        derivatives,
        truncated_at: None,
    })
}
