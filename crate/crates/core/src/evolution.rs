//! Time evolution of the full equation and of its linearization around
//! `S`, with probe recording, snapshots, energy monitoring and outcome
//! classification.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{self, sup_abs, FieldState, LinearizedSystem, ModelParams, NlkgSystem};
use crate::numerics::{GridSpec, OdeSystem, Real, Rk4, StepStatus};
use crate::spectral;

/// Largest admissible `dt / dx`.
pub const CFL_LIMIT: f64 = 1.0;
/// Default `dt / dx`.
pub const DEFAULT_CFL: f64 = 0.5;
/// Margin beyond `support + t_end` required of the domain.
pub const CAUSAL_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    /// Final time (absolute, so a run from a state at `t > 0` ends here).
    pub t_end: f64,
    pub dt: f64,
    pub probe_points: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    /// Blowup when `sup|u|` exceeds this multiple of `S(0)`.
    pub blowup_threshold: f64,
    /// Dispersal when `sup|u|` stays below this multiple of `S(0)`...
    pub dispersal_threshold: f64,
    /// ...for this long.
    pub dispersal_hold: f64,
    /// Energy is recorded every this many steps.
    pub energy_every: usize,
    /// Probes are recorded every this many steps.
    pub probe_every: usize,
    /// Reject domains the outgoing radiation could reach the edge of.
    pub enforce_causal: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 50.0,
            dt: 0.01,
            probe_points: vec![0.0],
            snapshot_times: Vec::new(),
            blowup_threshold: 10.0,
            dispersal_threshold: 0.25,
            dispersal_hold: 20.0,
            energy_every: 50,
            probe_every: 1,
            enforce_causal: true,
        }
    }
}

impl EvolveConfig {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(invalid("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.dt > CFL_LIMIT * grid.dx * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt: self.dt,
                dx: grid.dx,
                cfl: CFL_LIMIT,
            });
        }
        if !(self.dispersal_threshold > 0.0 && self.dispersal_threshold < 1.0 && self.blowup_threshold > 1.0) {
            return Err(invalid(
                "thresholds",
                format!(
                    "need 0 < dispersal ({}) < 1 < blowup ({})",
                    self.dispersal_threshold, self.blowup_threshold
                ),
            ));
        }
        if self.energy_every == 0 || self.probe_every == 0 {
            return Err(invalid("energy_every/probe_every", "must be at least 1"));
        }
        Ok(())
    }

}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum Outcome {
    Blowup { t_detect: f64 },
    Dispersal { t_detect: f64 },
    Undecided { t_end: f64 },
}

impl Outcome {
    pub fn time(&self) -> f64 {
        match *self {
            Outcome::Blowup { t_detect } | Outcome::Dispersal { t_detect } => t_detect,
            Outcome::Undecided { t_end } => t_end,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Blowup { .. } => "blowup",
            Outcome::Dispersal { .. } => "dispersal",
            Outcome::Undecided { .. } => "undecided",
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, Outcome::Blowup { .. })
    }
}

/// Incremental outcome detection over `(t, sup|u|)` observations.
#[derive(Debug, Clone)]
pub struct OutcomeClassifier {
    blowup_level: f64,
    dispersal_level: f64,
    hold: f64,
    below_since: Option<f64>,
    last_finite_t: f64,
}

impl OutcomeClassifier {
    pub fn new(cfg: &EvolveConfig, params: &ModelParams) -> Self {
        let s0 = params.static_amplitude();
        Self {
            blowup_level: cfg.blowup_threshold * s0,
            dispersal_level: cfg.dispersal_threshold * s0,
            hold: cfg.dispersal_hold,
            below_since: None,
            last_finite_t: 0.0,
        }
    }

    /// Returns an outcome as soon as one is decided.
    pub fn observe(&mut self, t: f64, sup: f64) -> Option<Outcome> {
        if !sup.is_finite() {
            return Some(Outcome::Blowup {
                t_detect: self.last_finite_t,
            });
        }
        self.last_finite_t = t;
        if sup > self.blowup_level {
            return Some(Outcome::Blowup { t_detect: t });
        }
        if sup < self.dispersal_level {
            let since = *self.below_since.get_or_insert(t);
            if t - since >= self.hold - 1e-12 {
                return Some(Outcome::Dispersal { t_detect: t });
            }
        } else {
            self.below_since = None;
        }
        None
    }
}

/// Classifies a recorded `(t, sup|u|)` history.
pub fn classify_outcome(history: &[(f64, f64)], cfg: &EvolveConfig, params: &ModelParams) -> Outcome {
    let mut c = OutcomeClassifier::new(cfg, params);
    for &(t, sup) in history {
        if let Some(o) = c.observe(t, sup) {
            return o;
        }
    }
    Outcome::Undecided {
        t_end: history.last().map_or(0.0, |h| h.0),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub x: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub probes: Vec<ProbeSeries>,
    pub snapshots: Vec<Snapshot>,
    pub energy_history: Vec<(f64, f64)>,
    pub outcome: Outcome,
    /// Set when a linear evolution overflowed and was cut short.
    pub truncated: bool,
    pub steps: usize,
    pub grid: GridSpec,
    #[serde(skip)]
    pub final_state: Option<FieldState<f64>>,
}

impl Trajectory {
    /// Probe at `x = 0` (or the first probe).
    pub fn center(&self) -> &ProbeSeries {
        self.probes
            .iter()
            .find(|p| p.x == 0.0)
            .unwrap_or(&self.probes[0])
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let Some(&(_, e0)) = self.energy_history.first() else {
            return 0.0;
        };
        self.energy_history
            .iter()
            .map(|&(_, e)| ((e - e0) / e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Radius beyond which the data vanish to the working precision.
pub fn support_radius<T: Real>(state: &FieldState<T>, grid: &GridSpec) -> f64 {
    let scale = sup_abs(&state.u).max(sup_abs(&state.ut)).max(f64::MIN_POSITIVE);
    let tiny = T::EPS * scale;
    let last = (0..grid.n_points)
        .rev()
        .find(|&i| state.u[i].to_f64().abs() > tiny || state.ut[i].to_f64().abs() > tiny);
    last.map_or(0.0, |i| grid.x(i))
}

/// Smallest domain with spacing `dx` on which the data built by `make` can
/// evolve to `t_end` without feeling the outer boundary: the support is
/// measured on successively larger templates, then `pad` is added.
pub fn fitted_grid<T: Real>(
    dx: f64,
    t_end: f64,
    pad: f64,
    make: impl Fn(&GridSpec) -> Result<FieldState<T>>,
) -> Result<GridSpec> {
    let mut template = GridSpec::covering(dx, 64.0)?;
    let mut r = support_radius(&make(&template)?, &template);
    for _ in 0..8 {
        if r < template.x_max() - 2.0 * dx {
            break;
        }
        template = GridSpec::covering(dx, 2.0 * template.x_max())?;
        r = support_radius(&make(&template)?, &template);
    }
    GridSpec::covering(dx, r + t_end + pad)
}

/// Domain extent needed to evolve `state` to `t_end` without boundary
/// influence.
pub fn required_extent<T: Real>(state: &FieldState<T>, grid: &GridSpec, t_end: f64) -> f64 {
    support_radius(state, grid) + t_end + CAUSAL_MARGIN
}

fn check_causal<T: Real>(state: &FieldState<T>, grid: &GridSpec, t_end: f64) -> Result<()> {
    let need = required_extent(state, grid, t_end);
    if grid.x_max() + 1e-9 < need {
        return Err(invalid(
            "grid",
            format!("x_max = {} too small for t_end = {t_end}; need at least {need:.3}", grid.x_max()),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Mode {
    Nonlinear,
    Linear,
}

struct Recorder<'a> {
    cfg: &'a EvolveConfig,
    probe_idx: Vec<usize>,
    probes: Vec<ProbeSeries>,
    snapshots: Vec<Snapshot>,
    snap_times: Vec<f64>,
    next_snap: usize,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a EvolveConfig, grid: &GridSpec) -> Self {
        let probe_idx: Vec<usize> = cfg.probe_points.iter().map(|&x| grid.index_of(x)).collect();
        let probes = probe_idx
            .iter()
            .map(|&i| ProbeSeries {
                x: grid.x(i),
                ..Default::default()
            })
            .collect();
        let mut snap_times = cfg.snapshot_times.clone();
        snap_times.sort_by(f64::total_cmp);
        Self {
            cfg,
            probe_idx,
            probes,
            snapshots: Vec::new(),
            snap_times,
            next_snap: 0,
        }
    }

    fn record<T: Real>(&mut self, step: usize, t: f64, y: &[T], n: usize) {
        if step % self.cfg.probe_every == 0 {
            for (p, &i) in self.probes.iter_mut().zip(&self.probe_idx) {
                p.t.push(t);
                p.u.push(y[i].to_f64());
                p.ut.push(y[n + i].to_f64());
            }
        }
        let half = 0.5 * self.cfg.dt;
        while self.next_snap < self.snap_times.len() && self.snap_times[self.next_snap] < t - half {
            self.next_snap += 1;
        }
        if self.next_snap < self.snap_times.len() && (self.snap_times[self.next_snap] - t).abs() <= half {
            self.snapshots.push(Snapshot {
                t,
                u: y[..n].iter().map(|v| v.to_f64()).collect(),
                ut: y[n..].iter().map(|v| v.to_f64()).collect(),
            });
            self.next_snap += 1;
        }
    }
}

fn run<T: Real, S: OdeSystem<T>>(
    params: &ModelParams,
    init: &FieldState<T>,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    sys: &S,
    mode: Mode,
    filters: &[Vec<f64>],
) -> Result<Trajectory> {
    cfg.validate(grid)?;
    init.check(grid)?;
    if !init.is_finite() {
        return Err(Error::NonFinite { t: init.t });
    }
    let span = cfg.t_end - init.t;
    if !(span > 0.0) {
        return Err(invalid("t_end", format!("{} is not after the initial time {}", cfg.t_end, init.t)));
    }
    if cfg.enforce_causal {
        check_causal(init, grid, span)?;
    }
    let n = grid.n_points;
    let mut y = init.to_flat();
    let mut rk = Rk4::new(y.len());
    let mut rec = Recorder::new(cfg, grid);
    let mut classifier = OutcomeClassifier::new(cfg, params);
    let mut energy_history = Vec::new();
    let center = match mode {
        Mode::Nonlinear if !filters.is_empty() => Some(model::static_profile::<T>(params, grid)),
        _ => None,
    };
    let filters = prepare_filters::<T>(filters, n, center.as_deref())?;
    let steps = ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let t0 = init.t;
    let mut outcome = None;
    let mut truncated = false;
    let mut done = 0;
    let mut last_good = y.clone();
    let energy_at = |y: &[T], t: f64| -> Option<(f64, f64)> {
        let st = FieldState::from_flat(y, t);
        model::energy(&st, params, grid).ok().map(|e| (t, e.to_f64()))
    };

    rec.record(0, t0, &y, n);
    if matches!(mode, Mode::Nonlinear) {
        energy_history.extend(energy_at(&y, t0));
    }
    for k in 1..=steps {
        let t_prev = t0 + (k - 1) as f64 * cfg.dt;
        let t = t0 + k as f64 * cfg.dt;
        let status = rk.step(sys, t_prev, &mut y, cfg.dt);
        for f in &filters {
            f.apply(&mut y, n);
        }
        done = k;
        match mode {
            Mode::Nonlinear => {
                let sup = if status == StepStatus::Finite { sup_abs(&y[..n]) } else { f64::NAN };
                if let Some(o) = classifier.observe(t, sup) {
                    if status == StepStatus::Finite {
                        rec.record(k, t, &y, n);
                    } else {
                        y.clone_from(&last_good);
                    }
                    outcome = Some(o);
                    break;
                }
                if k % cfg.energy_every == 0 {
                    energy_history.extend(energy_at(&y, t));
                }
            }
            Mode::Linear => {
                if status == StepStatus::NonFinite || sup_abs(&y[..n]) > 1e200 {
                    truncated = true;
                    y.clone_from(&last_good);
                    outcome = Some(Outcome::Undecided { t_end: t_prev });
                    break;
                }
            }
        }
        rec.record(k, t, &y, n);
        if status == StepStatus::Finite {
            last_good.clone_from(&y);
        }
    }
    let t_final = t0 + done as f64 * cfg.dt;
    let outcome = outcome.unwrap_or(Outcome::Undecided { t_end: t_final });
    debug!("evolution finished: {outcome:?} after {done} steps");
    let final_t = match outcome {
        Outcome::Blowup { t_detect } => t_detect,
        _ => t_final,
    };
    let final_state = FieldState::from_flat(&y, final_t).to_f64();
    Ok(Trajectory {
        probes: rec.probes,
        snapshots: rec.snapshots,
        energy_history,
        outcome,
        truncated,
        steps: done,
        grid: *grid,
        final_state: Some(final_state),
    })
}

struct Filter<T> {
    v: Vec<T>,
    /// Subtracted from `u` before projecting.
    center: Option<Vec<T>>,
    /// `1 / ⟨v, v⟩_w`
    inv_norm: f64,
}

impl<T: Real> Filter<T> {
    /// Removes the `v` component from `u` and `u_t` in the trapezoid-weighted
    /// inner product in which the discrete operator is symmetric.
    fn apply(&self, y: &mut [T], n: usize) {
        for part in [0, n] {
            let center = if part == 0 { self.center.as_deref() } else { None };
            let slice = &mut y[part..part + n];
            let at = |i: usize| match center {
                Some(c) => slice[i] - c[i],
                None => slice[i],
            };
            let mut dot = (at(0) * self.v[0]).scale(0.5);
            for i in 1..n {
                dot += at(i) * self.v[i];
            }
            let c = dot.scale(self.inv_norm);
            for i in 0..n {
                slice[i] -= c * self.v[i];
            }
        }
    }
}

fn prepare_filters<T: Real>(filters: &[Vec<f64>], n: usize, center: Option<&[T]>) -> Result<Vec<Filter<T>>> {
    filters
        .iter()
        .map(|v| {
            if v.len() != n {
                return Err(invalid("filter", format!("profile has {} samples, grid has {n}", v.len())));
            }
            let norm = 0.5 * v[0] * v[0] + v[1..].iter().map(|x| x * x).sum::<f64>();
            Ok(Filter {
                v: v.iter().map(|&x| T::from_f64(x)).collect(),
                center: center.map(<[T]>::to_vec),
                inv_norm: 1.0 / norm,
            })
        })
        .collect()
}

/// Evolves the full equation from `init`.
pub fn evolve<T: Real>(
    params: &ModelParams,
    init: &FieldState<T>,
    grid: &GridSpec,
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    let sys = NlkgSystem::new(*params, *grid);
    run(params, init, grid, cfg, &sys, Mode::Nonlinear, &[])
}

/// As [`evolve`], but after every step the components of `(u - S, u_t)`
/// along the given discrete modes are removed. With the unstable mode this
/// holds a near-critical solution on the center-stable side of `S`
/// indefinitely.
pub fn evolve_constrained<T: Real>(
    params: &ModelParams,
    init: &FieldState<T>,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    modes: &[Vec<f64>],
) -> Result<Trajectory> {
    let sys = NlkgSystem::new(*params, *grid);
    run(params, init, grid, cfg, &sys, Mode::Nonlinear, modes)
}

/// Evolves a perturbation `f` of `S` under the linearized equation.
/// The outcome is always `Undecided`; overflow truncates the run.
pub fn evolve_linearized<T: Real>(
    params: &ModelParams,
    init: &FieldState<T>,
    grid: &GridSpec,
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    evolve_linearized_filtered(params, init, grid, cfg, &[])
}

/// As [`evolve_linearized`], projecting out the given discrete modes (for
/// example the unstable eigenvector) after every step.
pub fn evolve_linearized_filtered<T: Real>(
    params: &ModelParams,
    init: &FieldState<T>,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    filters: &[Vec<f64>],
) -> Result<Trajectory> {
    let sys = LinearizedSystem::<T>::new(*params, *grid);
    run(params, init, grid, cfg, &sys, Mode::Linear, filters)
}

/// Initial perturbation of `S` for linearized runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// `(v0, s0 v0)`, the growing solution.
    #[default]
    Unstable,
    /// `(v_n, 0)`.
    Mode { n: usize },
    /// `a (1 - (x/R)²)⁴` on `x < R`, with its component along the discrete
    /// unstable mode removed.
    Bump { radius: f64, amplitude: f64 },
}

impl Perturbation {
    pub fn state<T: Real>(&self, params: &ModelParams, grid: &GridSpec) -> Result<FieldState<T>> {
        let n = grid.n_points;
        let (mut u, mut ut) = match *self {
            Perturbation::Unstable => {
                let v = spectral::eigenfunction::<T>(params.alpha, 0, grid)?;
                let s0 = spectral::growth_rate(params.alpha);
                let vt = v.iter().map(|&x| x.scale(s0)).collect();
                (v, vt)
            }
            Perturbation::Mode { n: k } => (spectral::eigenfunction::<T>(params.alpha, k, grid)?, vec![T::zero(); n]),
            Perturbation::Bump { radius, amplitude } => {
                if !(radius > 0.0) {
                    return Err(invalid("radius", format!("must be positive, got {radius}")));
                }
                let mut b: Vec<f64> = grid
                    .xs()
                    .map(|x| {
                        let r = x / radius;
                        if r < 1.0 {
                            amplitude * (1.0 - r * r).powi(4)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let v0 = spectral::discrete_mode(params.alpha, 0, grid)?;
                let w = |f: &[f64], g: &[f64]| 0.5 * f[0] * g[0] + f[1..].iter().zip(&g[1..]).map(|(a, c)| a * c).sum::<f64>();
                let c = w(&b, &v0) / w(&v0, &v0);
                for (bi, vi) in b.iter_mut().zip(&v0) {
                    *bi -= c * vi;
                }
                (b.into_iter().map(T::from_f64).collect(), vec![T::zero(); n])
            }
        };
        for k in n.saturating_sub(2)..n {
            u[k] = T::zero();
            ut[k] = T::zero();
        }
        Ok(FieldState::new(u, ut))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "prediction", rename_all = "snake_case")]
pub enum PayneSattinger {
    Dispersal { energy: f64, static_energy: f64, k: f64 },
    Blowup { energy: f64, static_energy: f64, k: f64 },
    NotApplicable { energy: f64, static_energy: f64 },
}

/// Below the energy of `S`, the sign of `K` decides the fate of the data.
pub fn payne_sattinger_check<T: Real>(
    init: &FieldState<T>,
    params: &ModelParams,
    grid: &GridSpec,
) -> Result<PayneSattinger> {
    let energy = model::energy(init, params, grid)?.to_f64();
    let s = model::static_profile::<T>(params, grid);
    let static_energy = model::static_energy(&s, params, grid)?.to_f64();
    if energy >= static_energy {
        return Ok(PayneSattinger::NotApplicable { energy, static_energy });
    }
    let k = model::k_functional(&init.u, params, grid)?.to_f64();
    Ok(if k >= 0.0 {
        PayneSattinger::Dispersal { energy, static_energy, k }
    } else {
        PayneSattinger::Blowup { energy, static_energy, k }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initial_data, static_profile};

    fn p(a: f64) -> ModelParams {
        ModelParams::new(a).unwrap()
    }

    #[test]
    fn classifier_rules() {
        let cfg = EvolveConfig::default();
        let params = p(1.0);
        let zeros: Vec<(f64, f64)> = (0..=2100).map(|k| (k as f64 * 0.01, 0.0)).collect();
        match classify_outcome(&zeros, &cfg, &params) {
            Outcome::Dispersal { t_detect } => assert!((t_detect - 20.0).abs() < 0.011),
            o => panic!("{o:?}"),
        }
        let big = [(0.0, 100.0 * params.static_amplitude())];
        assert_eq!(classify_outcome(&big, &cfg, &params), Outcome::Blowup { t_detect: 0.0 });
        let nan = [(0.0, 1.0), (0.5, f64::NAN)];
        assert_eq!(classify_outcome(&nan, &cfg, &params), Outcome::Blowup { t_detect: 0.0 });
        let trapped = [(0.0, 1.4), (10.0, 1.5)];
        assert_eq!(classify_outcome(&trapped, &cfg, &params), Outcome::Undecided { t_end: 10.0 });
    }

    #[test]
    fn rejects_cfl_violation() {
        let g = GridSpec::covering(0.02, 20.0).unwrap();
        let init = initial_data::<f64>(&p(1.0), 0.5, &g).unwrap();
        let cfg = EvolveConfig {
            dt: 0.05,
            t_end: 1.0,
            ..Default::default()
        };
        assert!(matches!(evolve(&p(1.0), &init, &g, &cfg), Err(Error::Cfl { .. })));
    }

    #[test]
    fn rejects_undersized_domain() {
        let g = GridSpec::covering(0.02, 20.0).unwrap();
        let init = initial_data::<f64>(&p(1.0), 0.5, &g).unwrap();
        let cfg = EvolveConfig::default().with_t_end(30.0);
        assert!(evolve(&p(1.0), &init, &g, &cfg).is_err());
    }

    #[test]
    fn static_solution_stays_put() {
        let params = p(1.0);
        let g = GridSpec::covering(0.02, 45.0).unwrap();
        let s = static_profile::<f64>(&params, &g);
        let init = FieldState::new(s.clone(), vec![0.0; g.n_points]);
        let cfg = EvolveConfig {
            t_end: 3.0,
            dt: 0.01,
            enforce_causal: false,
            ..Default::default()
        };
        let tr = evolve(&params, &init, &g, &cfg).unwrap();
        assert!(matches!(tr.outcome, Outcome::Undecided { .. }));
        let fin = tr.final_state.unwrap();
        let dev = fin.u.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // truncation error seeds the unstable mode, which grows like e^{s0 t}
        assert!(dev < 1e-5, "{dev}");
    }

    #[test]
    fn causality_and_parity() {
        let params = p(1.0);
        let g = GridSpec::covering(0.02, 30.0).unwrap();
        // compact bump of radius 2
        let u: Vec<f64> = g
            .xs()
            .map(|x| if x < 2.0 { (1.0 - (x / 2.0).powi(2)).powi(4) * 0.5 } else { 0.0 })
            .collect();
        let init = FieldState::new(u, vec![0.0; g.n_points]);
        let cfg = EvolveConfig {
            t_end: 10.0,
            snapshot_times: vec![10.0],
            ..Default::default()
        };
        let tr = evolve(&params, &init, &g, &cfg).unwrap();
        let snap = &tr.snapshots[0];
        // the 5-point stencil reaches 8 cells per RK4 step, so numerical
        // support grows faster than the light cone but stays finite
        let edge = 2.0 + 8.0 * g.dx * tr.steps as f64 / 1.0;
        for i in g.index_of(edge.min(g.x_max()))..g.n_points {
            assert_eq!(snap.u[i], 0.0, "x = {}", g.x(i));
        }
        let far = g.index_of(2.0 + 10.0 + 3.0);
        assert!(snap.u[far..].iter().all(|v| v.abs() < 1e-10));
        assert!(snap.u.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn snapshots_and_probes_recorded() {
        let params = p(1.0);
        let g = GridSpec::covering(0.05, 20.0).unwrap();
        let init = initial_data::<f64>(&params, 0.5, &g).unwrap();
        let cfg = EvolveConfig {
            t_end: 2.0,
            dt: 0.025,
            probe_points: vec![0.0, 1.0],
            snapshot_times: vec![1.0, 0.5, 7.0],
            energy_every: 10,
            ..Default::default()
        };
        let tr = evolve(&params, &init, &g, &cfg).unwrap();
        assert_eq!(tr.probes.len(), 2);
        assert_eq!(tr.probes[0].t.len(), 81);
        assert!(tr.probes[0].t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.snapshots.len(), 2);
        assert!((tr.snapshots[0].t - 0.5).abs() < 1e-9 && (tr.snapshots[1].t - 1.0).abs() < 1e-9);
        assert_eq!(tr.energy_history.len(), 9);
    }
}
