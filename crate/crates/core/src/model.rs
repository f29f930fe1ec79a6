//! The focusing nonlinear Klein-Gordon equation
//! `u_tt - u_xx + u - |u|^{2α} u = 0` on the half line with even data:
//! its static solution, linearization, conserved energy and the
//! Payne-Sattinger functional.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::stencil::second_derivative_into;
use crate::numerics::{GridSpec, OdeSystem, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// `S(0) = (α+1)^{1/(2α)}`.
    pub fn static_amplitude(&self) -> f64 {
        (self.alpha + 1.0).powf(0.5 / self.alpha)
    }

    pub(crate) fn nonlinearity(&self) -> Nonlinearity {
        let p = 2.0 * self.alpha;
        if p == p.round() && p <= 16.0 {
            Nonlinearity::Integer(p as i32)
        } else {
            Nonlinearity::General(p)
        }
    }
}

/// `|u|^p` with an integer fast path.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Nonlinearity {
    Integer(i32),
    General(f64),
}

impl Nonlinearity {
    #[inline(always)]
    pub(crate) fn abs_pow<T: Real>(self, u: T) -> T {
        match self {
            Nonlinearity::Integer(p) => {
                if p % 2 == 0 {
                    u.powi(p)
                } else {
                    u.abs().powi(p)
                }
            }
            Nonlinearity::General(p) => {
                let a = u.abs();
                if a == T::zero() {
                    T::zero()
                } else {
                    (a.ln().scale(p)).exp()
                }
            }
        }
    }
}

/// Field `(u, u_t)` on the grid at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState<T> {
    pub u: Vec<T>,
    pub ut: Vec<T>,
    pub t: f64,
}

impl<T: Real> FieldState<T> {
    pub fn new(u: Vec<T>, ut: Vec<T>) -> Self {
        Self { u, ut, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.ut).all(|v| v.is_finite())
    }

    pub fn sup_abs(&self) -> f64 {
        sup_abs(&self.u)
    }

    /// Flat `[u, u_t]` layout used by the time steppers.
    pub fn to_flat(&self) -> Vec<T> {
        let mut y = Vec::with_capacity(2 * self.u.len());
        y.extend_from_slice(&self.u);
        y.extend_from_slice(&self.ut);
        y
    }

    pub fn from_flat(y: &[T], t: f64) -> Self {
        let n = y.len() / 2;
        Self {
            u: y[..n].to_vec(),
            ut: y[n..].to_vec(),
            t,
        }
    }

    pub fn to_f64(&self) -> FieldState<f64> {
        FieldState {
            u: self.u.iter().map(|v| v.to_f64()).collect(),
            ut: self.ut.iter().map(|v| v.to_f64()).collect(),
            t: self.t,
        }
    }

    pub fn check(&self, grid: &GridSpec) -> Result<()> {
        grid.check_len(self.u.len())?;
        grid.check_len(self.ut.len())
    }
}

pub(crate) fn sup_abs<T: Real>(u: &[T]) -> f64 {
    u.iter().map(|v| v.to_f64().abs()).fold(0.0, |a, b| if b > a || b.is_nan() { b } else { a })
}

/// `S(x) = (α+1)^{1/(2α)} / cosh(αx)^{1/α}`.
pub fn static_solution<T: Real>(params: &ModelParams, x: T) -> T {
    let a = params.alpha;
    let amp = T::from_f64(a + 1.0).powf(T::one() / T::from_f64(2.0 * a));
    let c = x.scale(a).cosh();
    if (1.0 / a).fract() == 0.0 && 1.0 / a <= 16.0 {
        amp / c.powi((1.0 / a) as i32)
    } else {
        amp / c.powf(T::one() / T::from_f64(a))
    }
}

/// `V(x) = -(2α+1)(α+1) / cosh²(αx)`.
pub fn potential<T: Real>(alpha: f64, x: T) -> T {
    let c = x.scale(alpha).cosh();
    -(T::from_f64((2.0 * alpha + 1.0) * (alpha + 1.0)) / (c * c))
}

pub fn static_profile<T: Real>(params: &ModelParams, grid: &GridSpec) -> Vec<T> {
    let mut s = grid.sample(|x: T| static_solution(params, x));
    pin_outer(&mut s);
    s
}

pub fn potential_profile<T: Real>(params: &ModelParams, grid: &GridSpec) -> Vec<T> {
    grid.sample(|x: T| potential(params.alpha, x))
}

fn pin_outer<T: Real>(u: &mut [T]) {
    let n = u.len();
    u[n - 2] = T::zero();
    u[n - 1] = T::zero();
}

fn check_finite<T: Real>(state: &FieldState<T>) -> Result<()> {
    if !state.is_finite() {
        return Err(crate::error::Error::NonFinite { t: state.t });
    }
    Ok(())
}

/// Conserved energy `½∫(u_t² + u_x² + u² - |u|^{2α+2}/(α+1)) dx`.
///
/// The gradient term is evaluated as `-u·u_xx` with the evolution stencil and
/// trapezoid weights, which is the form the semi-discrete flow conserves.
pub fn energy<T: Real>(state: &FieldState<T>, params: &ModelParams, grid: &GridSpec) -> Result<T> {
    state.check(grid)?;
    check_finite(state)?;
    let nl = params.nonlinearity();
    let mut uxx = vec![T::zero(); state.u.len()];
    second_derivative_into(&state.u, 1.0 / (12.0 * grid.dx * grid.dx), &mut uxx);
    let c = 1.0 / (params.alpha + 1.0);
    let dens: Vec<T> = (0..state.u.len())
        .map(|i| {
            let u = state.u[i];
            let u2 = u * u;
            state.ut[i] * state.ut[i] - u * uxx[i] + u2 - (nl.abs_pow(u) * u2).scale(c)
        })
        .collect();
    Ok(trapezoid(&dens, grid.dx).scale(0.5))
}

/// Half-line trapezoid rule with weight ½ at the reflection point; the
/// reflected stencil is symmetric in this inner product.
fn trapezoid<T: Real>(f: &[T], dx: f64) -> T {
    let mut total = f[0].scale(0.5);
    for &v in &f[1..] {
        total += v;
    }
    total.scale(dx)
}

/// Static energy `E₀(u) = E(u, 0)`.
pub fn static_energy<T: Real>(u: &[T], params: &ModelParams, grid: &GridSpec) -> Result<T> {
    let st = FieldState::new(u.to_vec(), vec![T::zero(); u.len()]);
    energy(&st, params, grid)
}

/// `K(u) = ∫(u_x² + u² - |u|^{2α+2}) dx`, discretized like [`energy`].
pub fn k_functional<T: Real>(u: &[T], params: &ModelParams, grid: &GridSpec) -> Result<T> {
    grid.check_len(u.len())?;
    if !u.iter().all(|v| v.is_finite()) {
        return Err(crate::error::Error::NonFinite { t: f64::NAN });
    }
    let nl = params.nonlinearity();
    let mut uxx = vec![T::zero(); u.len()];
    second_derivative_into(u, 1.0 / (12.0 * grid.dx * grid.dx), &mut uxx);
    let dens: Vec<T> = u
        .iter()
        .zip(&uxx)
        .map(|(&v, &d)| {
            let v2 = v * v;
            v2 - v * d - nl.abs_pow(v) * v2
        })
        .collect();
    Ok(trapezoid(&dens, grid.dx))
}

/// One-parameter families of even initial data interpolating between
/// dispersal and blowup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataFamily {
    /// `u = S(0) exp(-x²/σ²)`, `u_t = 0`; the parameter is σ.
    #[default]
    Gaussian,
    /// `u = a S(x / width)`, `u_t = 0`; the parameter is the amplitude `a`.
    ScaledStatic { width: f64 },
}

impl DataFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DataFamily::Gaussian => "gaussian",
            DataFamily::ScaledStatic { .. } => "scaled_static",
        }
    }

    pub fn data<T: Real>(&self, params: &ModelParams, p: T, grid: &GridSpec) -> Result<FieldState<T>> {
        match *self {
            DataFamily::Gaussian => initial_data(params, p, grid),
            DataFamily::ScaledStatic { width } => {
                if !(width > 0.0) {
                    return Err(invalid("width", format!("must be positive, got {width}")));
                }
                let inv = 1.0 / width;
                let mut u = grid.sample(|x: T| p * static_solution(params, x.scale(inv)));
                pin_outer(&mut u);
                Ok(FieldState::new(u, vec![T::zero(); grid.n_points]))
            }
        }
    }
}

/// Gaussian family `u(0,x) = (α+1)^{1/(2α)} exp(-x²/σ²)`, `u_t(0,x) = 0`.
pub fn initial_data<T: Real>(params: &ModelParams, sigma: T, grid: &GridSpec) -> Result<FieldState<T>> {
    if !(sigma.to_f64() > 0.0) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let amp = T::from_f64(params.alpha + 1.0).powf(T::one() / T::from_f64(2.0 * params.alpha));
    let inv_s2 = T::one() / (sigma * sigma);
    let mut u = grid.sample(|x: T| amp * (-(x * x * inv_s2)).exp());
    pin_outer(&mut u);
    Ok(FieldState::new(u, vec![T::zero(); grid.n_points]))
}

/// Time derivative of `(u, u_t)` under the full equation.
pub fn nlkg_rhs<T: Real>(state: &FieldState<T>, params: &ModelParams, grid: &GridSpec) -> Result<FieldState<T>> {
    state.check(grid)?;
    let sys = NlkgSystem::new(*params, *grid);
    let y = state.to_flat();
    let mut dy = vec![T::zero(); y.len()];
    sys.eval(state.t, &y, &mut dy);
    Ok(FieldState::from_flat(&dy, state.t))
}

/// Time derivative under the linearization `f_tt = f_xx - f - V f`.
pub fn linearized_rhs<T: Real>(state: &FieldState<T>, params: &ModelParams, grid: &GridSpec) -> Result<FieldState<T>> {
    state.check(grid)?;
    let sys = LinearizedSystem::new(*params, *grid);
    let y = state.to_flat();
    let mut dy = vec![T::zero(); y.len()];
    sys.eval(state.t, &y, &mut dy);
    Ok(FieldState::from_flat(&dy, state.t))
}

/// Method-of-lines semi-discretization of the full equation.
#[derive(Debug, Clone)]
pub struct NlkgSystem {
    n: usize,
    inv_12dx2: f64,
    nl: Nonlinearity,
}

impl NlkgSystem {
    pub fn new(params: ModelParams, grid: GridSpec) -> Self {
        Self {
            n: grid.n_points,
            inv_12dx2: 1.0 / (12.0 * grid.dx * grid.dx),
            nl: params.nonlinearity(),
        }
    }
}

impl<T: Real> OdeSystem<T> for NlkgSystem {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn eval(&self, _t: f64, y: &[T], dy: &mut [T]) {
        let n = self.n;
        let (u, ut) = y.split_at(n);
        let (du, dut) = dy.split_at_mut(n);
        du[..n - 2].copy_from_slice(&ut[..n - 2]);
        du[n - 2] = T::zero();
        du[n - 1] = T::zero();
        second_derivative_into(u, self.inv_12dx2, dut);
        let nl = self.nl;
        for i in 0..n - 2 {
            let v = u[i];
            dut[i] += (nl.abs_pow(v) - T::one()) * v;
        }
    }
}

/// Semi-discretization of the linearized equation around `S`.
#[derive(Debug, Clone)]
pub struct LinearizedSystem<T> {
    n: usize,
    inv_12dx2: f64,
    /// `-1 - V(x)` on the grid.
    mass: Vec<T>,
}

impl<T: Real> LinearizedSystem<T> {
    pub fn new(params: ModelParams, grid: GridSpec) -> Self {
        let mass = grid.sample(|x: T| -T::one() - potential(params.alpha, x));
        Self {
            n: grid.n_points,
            inv_12dx2: 1.0 / (12.0 * grid.dx * grid.dx),
            mass,
        }
    }
}

impl<T: Real> OdeSystem<T> for LinearizedSystem<T> {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn eval(&self, _t: f64, y: &[T], dy: &mut [T]) {
        let n = self.n;
        let (u, ut) = y.split_at(n);
        let (du, dut) = dy.split_at_mut(n);
        du[..n - 2].copy_from_slice(&ut[..n - 2]);
        du[n - 2] = T::zero();
        du[n - 1] = T::zero();
        second_derivative_into(u, self.inv_12dx2, dut);
        for i in 0..n - 2 {
            dut[i] += self.mass[i] * u[i];
        }
    }
}
