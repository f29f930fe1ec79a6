//! Spectrum of the linearized operator `L = -d²/dx² + V(x)` around the
//! static solution, restricted to even functions (Neumann at the origin).
//!
//! `V` is a Pöschl-Teller well, so the discrete eigenvalues, the
//! eigenfunctions and the zero-energy generalized eigenfunction are all
//! known in closed form. A discretized operator provides an independent
//! cross-check.
//!
//! Normalization: every profile here satisfies `v(0) = 1`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::model::potential;
use crate::numerics::{ode_profile_integrate, GridSpec, Real, SymBand};

const RESONANCE_TOL: f64 = 1e-12;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    Ok(())
}

/// `(α+1)/(2α)`; the discrete spectrum has every index strictly below it.
fn mode_bound(alpha: f64) -> f64 {
    (alpha + 1.0) / (2.0 * alpha)
}

fn near_integer(r: f64) -> Option<f64> {
    let k = r.round();
    ((r - k).abs() <= RESONANCE_TOL * r.abs().max(1.0)).then_some(k)
}

/// True when `(α+1)/(2α)` is a positive integer (α = 1, 1/3, 1/5, ...):
/// the zero-energy generalized eigenfunction is then bounded.
pub fn is_resonant(alpha: f64) -> bool {
    matches!(near_integer(mode_bound(alpha)), Some(k) if k >= 1.0)
}

/// Largest index `N` with `N < (α+1)/(2α)`.
pub fn highest_mode(alpha: f64) -> usize {
    let r = mode_bound(alpha);
    match near_integer(r) {
        Some(k) if k >= 1.0 => k as usize - 1,
        _ => r.floor() as usize,
    }
}

/// `λ_n = α + 1 - 2nα` for `n = 0..=N`.
pub fn discrete_eigenvalues(alpha: f64) -> Vec<f64> {
    (0..=highest_mode(alpha))
        .map(|n| alpha + 1.0 - 2.0 * n as f64 * alpha)
        .collect()
}

/// Growth rate of the unstable mode, `s₀ = √(α(α+2))`.
pub fn growth_rate(alpha: f64) -> f64 {
    (alpha * (alpha + 2.0)).sqrt()
}

/// `ω_n = √(1 - λ_n²)` for the oscillatory modes `n = 1..=N`.
pub fn oscillation_frequencies(alpha: f64) -> Vec<f64> {
    discrete_eigenvalues(alpha)
        .into_iter()
        .skip(1)
        .map(|l| (1.0 - l * l).sqrt())
        .collect()
}

/// Antibound states (negative zeros of the Jost coefficient), the `count`
/// closest to zero in descending order. Empty for `α = 1/k`.
pub fn antibound_states(alpha: f64, count: usize) -> Vec<f64> {
    if count == 0 || near_integer(1.0 / alpha).is_some_and(|k| k >= 1.0) {
        return Vec::new();
    }
    let r = mode_bound(alpha);
    let n0 = r.floor() as usize + 1;
    let minus = (n0..).map(|n| alpha + 1.0 - 2.0 * n as f64 * alpha);
    let plus = (0..).map(|m| -(2.0 * alpha + 1.0 + 2.0 * m as f64 * alpha));
    let mut out: Vec<f64> = minus.take(count).chain(plus.take(count)).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out.truncate(count);
    out
}

/// Coefficient of the linear growth `v(0, x) ~ slope · x`; zero when
/// resonant.
pub fn zero_mode_slope(alpha: f64) -> f64 {
    if is_resonant(alpha) {
        return 0.0;
    }
    let a = 1.0 + 0.5 / alpha;
    let b = -0.5 - 0.5 / alpha;
    2.0 * alpha * std::f64::consts::PI.sqrt() / (gamma(a) * gamma(b))
}

/// Discrete eigenfunction `v_n`, evaluated from the terminating
/// hypergeometric series (a polynomial of degree `n` in `cosh⁻²(αx)`).
pub fn eigenfunction<T: Real>(alpha: f64, n: usize, grid: &GridSpec) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    let max = highest_mode(alpha);
    if n > max {
        return Err(Error::ModeOutOfRange { n, max });
    }
    // 2F1(a, -n; c; z) coefficients
    let a = 1.5 - n as f64 + 1.0 / alpha;
    let c = 2.0 - 2.0 * n as f64 + 1.0 / alpha;
    let mut coef = vec![T::one()];
    for k in 0..n {
        let kf = k as f64;
        let prev = coef[k];
        let ratio = T::from_f64((a + kf) * (kf - n as f64)) / T::from_f64((c + kf) * (kf + 1.0));
        coef.push(prev * ratio);
    }
    let norm: T = coef.iter().fold(T::zero(), |s, &c| s + c);
    let power = T::from_f64(-(1.0 + 1.0 / alpha) + 2.0 * n as f64);
    Ok(grid.sample(|x: T| {
        let ch = x.scale(alpha).cosh();
        let z = T::one() / (ch * ch);
        let mut poly = T::zero();
        for &ck in coef.iter().rev() {
            poly = poly * z + ck;
        }
        ch.powf(power) * poly / norm
    }))
}

/// Closed forms `v_0`, `v_1` for cross-checking the series.
pub fn eigenfunction_closed_form(alpha: f64, n: usize, x: f64) -> Option<f64> {
    let ch = (alpha * x).cosh();
    let base = ch.powf(-(1.0 + 1.0 / alpha));
    match n {
        0 => Some(base),
        1 if highest_mode(alpha) >= 1 => Some(base * (1.0 - 2.0 / alpha * (alpha * x).sinh().powi(2))),
        _ => None,
    }
}

/// Generalized eigenfunction `v(0, ·)` at the bottom of the continuum,
/// integrated from the ODE with `v(0) = 1`, `v'(0) = 0`.
pub fn zero_mode<T: Real>(alpha: f64, grid: &GridSpec) -> Result<Vec<T>> {
    Ok(ode_profile_integrate::<T>(alpha, 0.0, grid, 1.0)?.values)
}

/// Elementary closed forms of `v(λ, x)` for quadratic and cubic
/// nonlinearities, normalized to `v(λ, 0) = 1`. `λ = 1` is excluded.
pub fn generalized_eigenfunction_closed_form(alpha: f64, lambda: f64, x: f64) -> Option<f64> {
    let l2 = lambda * lambda;
    if (l2 - 1.0).abs() < 1e-12 {
        return None;
    }
    // sinh(λx)/λ -> x as λ -> 0
    let sinc = if lambda.abs() < 1e-8 { x } else { (lambda * x).sinh() / lambda };
    let val = if alpha == 0.5 {
        let c2 = (x / 2.0).cosh().powi(2);
        (lambda * x).cosh() * (l2 + 2.75 - 3.75 / c2) - sinc * (x / 2.0).tanh() * (3.0 * l2 + 0.75 - 1.875 / c2)
    } else if alpha == 1.0 {
        let c2 = x.cosh().powi(2);
        (lambda * x).cosh() * (l2 + 2.0 - 3.0 / c2) - 3.0 * l2 * x.tanh() * sinc
    } else {
        return None;
    };
    Some(val / (l2 - 1.0))
}

/// Pentadiagonal fourth-order discretization of `L` with even reflection at
/// the origin and Dirichlet at the two outer points, symmetrized by scaling
/// the first unknown by √2. Dimension is `n_points - 2`.
pub fn discrete_operator(alpha: f64, grid: &GridSpec) -> SymBand {
    let m = grid.n_points - 2;
    let c = 1.0 / (12.0 * grid.dx * grid.dx);
    let mut a = SymBand::new(m, 2);
    for i in 0..m {
        let v = potential(alpha, grid.x(i));
        a.set(i, i, 30.0 * c + v);
        if i + 1 < m {
            a.set(i, i + 1, -16.0 * c);
        }
        if i + 2 < m {
            a.set(i, i + 2, c);
        }
    }
    // reflected rows: u[-1] = u[1], u[-2] = u[2]
    a.set(1, 1, 31.0 * c + potential(alpha, grid.x(1)));
    let r2 = std::f64::consts::SQRT_2;
    a.set(0, 1, -16.0 * r2 * c);
    a.set(0, 2, r2 * c);
    a
}

/// Eigenvector of the discrete operator nearest `-λ_n²`, returned on the
/// grid (pinned outer points zero) with `v(0) = 1`.
pub fn discrete_mode(alpha: f64, n: usize, grid: &GridSpec) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let lambdas = discrete_eigenvalues(alpha);
    let max = lambdas.len() - 1;
    let lam = *lambdas.get(n).ok_or(Error::ModeOutOfRange { n, max })?;
    let op = discrete_operator(alpha, grid);
    let exact = op.lowest_eigenvalues(n + 1)[n];
    let gap = 1e-6 * (1.0 + lam * lam);
    let mut w = op.eigenvector_near(exact - gap, 6);
    w[0] *= std::f64::consts::SQRT_2;
    let s = w[0];
    let mut v: Vec<f64> = w.iter().map(|x| x / s).collect();
    v.extend([0.0, 0.0]);
    Ok(v)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub alpha: f64,
    pub dx: f64,
    pub x_max: f64,
    /// Lowest `N + 2` eigenvalues of the discrete operator.
    pub computed: Vec<f64>,
    /// `-λ_n²` for the discrete modes.
    pub expected: Vec<f64>,
    /// Eigenvalues of the discrete operator below zero.
    pub negative_count: usize,
    pub max_rel_deviation: f64,
}

/// Compares the discrete operator's spectrum with `-λ_n²`.
pub fn verify_spectrum_numerically(alpha: f64, grid: &GridSpec) -> Result<SpectrumCheck> {
    check_alpha(alpha)?;
    let expected: Vec<f64> = discrete_eigenvalues(alpha).iter().map(|l| -l * l).collect();
    let op = discrete_operator(alpha, grid);
    let computed = op.lowest_eigenvalues(expected.len() + 1);
    let negative_count = op.count_below(0.0);
    let max_rel_deviation = expected
        .iter()
        .zip(&computed)
        .map(|(e, c)| ((c - e) / e).abs())
        .fold(0.0, f64::max);
    Ok(SpectrumCheck {
        alpha,
        dx: grid.dx,
        x_max: grid.x_max(),
        computed,
        expected,
        negative_count,
        max_rel_deviation,
    })
}

/// Spectral summary for one power α.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralData {
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    pub n_modes: usize,
    pub s0: f64,
    pub omegas: Vec<f64>,
    pub resonant: bool,
    pub zero_mode_slope: f64,
    pub antibound: Vec<f64>,
    pub grid: GridSpec,
    #[serde(skip)]
    pub eigenprofiles: Vec<Vec<f64>>,
    #[serde(skip)]
    pub zero_mode: Vec<f64>,
}

impl SpectralData {
    pub fn compute(alpha: f64, grid: &GridSpec) -> Result<Self> {
        check_alpha(alpha)?;
        let lambdas = discrete_eigenvalues(alpha);
        let eigenprofiles = (0..lambdas.len())
            .map(|n| eigenfunction::<f64>(alpha, n, grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alpha,
            n_modes: lambdas.len(),
            lambdas,
            s0: growth_rate(alpha),
            omegas: oscillation_frequencies(alpha),
            resonant: is_resonant(alpha),
            zero_mode_slope: zero_mode_slope(alpha),
            antibound: antibound_states(alpha, 6),
            grid: *grid,
            eigenprofiles,
            zero_mode: zero_mode::<f64>(alpha, grid)?,
        })
    }
}
