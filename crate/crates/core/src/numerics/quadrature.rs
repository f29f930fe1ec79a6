use crate::error::Result;
use crate::numerics::{GridSpec, Real};

/// Composite Simpson rule over `[0, x_max]`.
///
/// With an even number of points the last three panels use Simpson's 3/8
/// rule, so the rule stays fourth order for every grid size.
pub fn quadrature<T: Real>(f: &[T], grid: &GridSpec) -> Result<T> {
    grid.check_len(f.len())?;
    Ok(integrate(f, grid.dx))
}

pub(crate) fn integrate<T: Real>(f: &[T], dx: f64) -> T {
    let n = f.len();
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    let mut odd = T::zero();
    let mut even = T::zero();
    for i in (1..simpson_end).step_by(2) {
        odd += f[i];
    }
    for i in (2..simpson_end).step_by(2) {
        even += f[i];
    }
    let mut total = (f[0] + f[simpson_end] + odd.scale(4.0) + even.scale(2.0)).scale(dx / 3.0);
    if n % 2 == 0 {
        let k = simpson_end;
        let tail = f[k] + (f[k + 1] + f[k + 2]).scale(3.0) + f[k + 3];
        total += tail.scale(3.0 * dx / 8.0);
    }
    total
}

/// `∫ f g dx` over the grid.
pub fn inner_product(f: &[f64], g: &[f64], grid: &GridSpec) -> Result<f64> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let prod: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    Ok(integrate(&prod, grid.dx))
}
