use crate::numerics::Real;

/// First-order system `y' = F(t, y)`.
pub trait OdeSystem<T: Real> {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[T], dy: &mut [T]);
}

impl<T: Real, F: Fn(f64, &[T], &mut [T])> OdeSystem<T> for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, t: f64, y: &[T], dy: &mut [T]) {
        (self.1)(t, y, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Finite,
    NonFinite,
}

/// Classical four-stage Runge-Kutta integrator with reusable stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Rk4<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![T::zero(); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `y` from `t` to `t + dt` in place.
    pub fn step<S: OdeSystem<T> + ?Sized>(&mut self, sys: &S, t: f64, y: &mut [T], dt: f64) -> StepStatus {
        let h2 = 0.5 * dt;
        sys.eval(t, y, &mut self.k1);
        for ((tmp, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = yi + k.scale(h2);
        }
        sys.eval(t + h2, &self.tmp, &mut self.k2);
        for ((tmp, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = yi + k.scale(h2);
        }
        sys.eval(t + h2, &self.tmp, &mut self.k3);
        for ((tmp, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = yi + k.scale(dt);
        }
        sys.eval(t + dt, &self.tmp, &mut self.k4);
        let h6 = dt / 6.0;
        let mut finite = true;
        for i in 0..y.len() {
            let incr = self.k1[i] + (self.k2[i] + self.k3[i]).scale(2.0) + self.k4[i];
            y[i] += incr.scale(h6);
            finite &= y[i].is_finite();
        }
        if finite {
            StepStatus::Finite
        } else {
            StepStatus::NonFinite
        }
    }
}

/// One RK4 step returning the new state.
pub fn rk4_step<T: Real, S: OdeSystem<T> + ?Sized>(sys: &S, t: f64, y: &[T], dt: f64) -> (Vec<T>, StepStatus) {
    let mut out = y.to_vec();
    let status = Rk4::new(y.len()).step(sys, t, &mut out, dt);
    (out, status)
}
