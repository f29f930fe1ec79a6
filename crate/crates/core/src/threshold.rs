//! Bisection for the critical parameter separating dispersal from blowup,
//! and the trapping-time law near it.

use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{evolve, evolve_constrained, fitted_grid, EvolveConfig, Outcome, Trajectory, CAUSAL_MARGIN};
use crate::model::{DataFamily, FieldState, ModelParams};
use crate::numerics::{GridSpec, Precision, Real};
use crate::spectral::{discrete_mode, growth_rate};

/// Extra evolution time beyond the trapping estimate for each iterate.
pub const T_MARGIN: f64 = 30.0;
/// Half-width of the band around `S(0)` whose last exit marks ejection.
pub const EJECTION_BAND: f64 = 0.2;

/// Expected lifetime near `S` for data a distance `delta_sigma` from
/// threshold: `-ln(δσ)/s0`, shifted by an optional calibrated offset.
pub fn trapping_time_estimate(delta_sigma: f64, alpha: f64, offset: Option<f64>) -> f64 {
    let base = -delta_sigma.ln() / growth_rate(alpha);
    base + offset.unwrap_or(0.0)
}

/// A validated pair of parameters with opposite outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    /// Disperses.
    pub lo: T,
    /// Blows up.
    pub hi: T,
}

impl<T: Real> Bracket<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        (self.lo + self.hi).scale(0.5)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Iterate {
    pub sigma: String,
    pub outcome: Outcome,
    pub t_detect: f64,
    pub t_end: f64,
    /// `t_end` was extended once because the first run was undecided.
    pub extended: bool,
    /// Still undecided after extension and counted as dispersal.
    pub forced_dispersal: bool,
    pub wall_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionRecord {
    pub alpha: f64,
    pub family: DataFamily,
    pub precision_tier: Precision,
    pub dx: f64,
    pub iterations: Vec<Iterate>,
    /// `(σ_lo, σ_hi)` after the last iteration.
    pub bracket: (String, String),
    /// Bracket midpoint.
    pub sigma_star: String,
    pub half_width: String,
    /// `-log10(σ_hi - σ_lo)`
    pub digits: f64,
    pub target_digits: u32,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    PrecisionExhausted,
    IterationLimit,
}

impl BisectionRecord {
    pub fn sigma_star<T: Real>(&self) -> T {
        T::parse_decimal(&self.sigma_star).expect("record holds a valid decimal")
    }

    pub fn bracket<T: Real>(&self) -> Bracket<T> {
        Bracket {
            lo: T::parse_decimal(&self.bracket.0).expect("valid decimal"),
            hi: T::parse_decimal(&self.bracket.1).expect("valid decimal"),
        }
    }

    pub fn sigma_star_f64(&self) -> f64 {
        self.sigma_star.parse().unwrap_or(f64::NAN)
    }

    /// Checks the bracket invariant over the recorded iterations: every
    /// dispersal lies below every blowup.
    pub fn is_consistent(&self) -> bool {
        let v = |s: &str| s.parse::<f64>().unwrap_or(f64::NAN);
        let max_lo = self
            .iterations
            .iter()
            .filter(|i| !i.outcome.is_blowup())
            .map(|i| v(&i.sigma))
            .fold(f64::NEG_INFINITY, f64::max);
        let min_hi = self
            .iterations
            .iter()
            .filter(|i| i.outcome.is_blowup())
            .map(|i| v(&i.sigma))
            .fold(f64::INFINITY, f64::min);
        max_lo <= min_hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BisectOptions {
    pub target_digits: u32,
    /// Added to the trapping estimate to get each iterate's `t_end`.
    pub t_margin: f64,
    /// Undecided runs are repeated once with `t_end` scaled by this.
    pub extend_factor: f64,
    pub max_iterations: usize,
    /// Widening attempts when both seeds give the same outcome.
    pub max_widenings: usize,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            target_digits: 12,
            t_margin: T_MARGIN,
            extend_factor: 1.5,
            max_iterations: 200,
            max_widenings: 10,
        }
    }
}

/// Runs a single member of `family` on a domain just large enough for
/// `t_end`.
pub fn run_member<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    sigma: T,
    grid: &GridSpec,
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    let g = member_grid(params, family, sigma, grid, cfg.t_end)?;
    let init = family.data(params, sigma, &g)?;
    evolve(params, &init, &g, cfg)
}

pub(crate) fn member_grid<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    sigma: T,
    grid: &GridSpec,
    t_end: f64,
) -> Result<GridSpec> {
    fitted_grid(grid.dx, t_end, CAUSAL_MARGIN + 4.0 * grid.dx, |g| family.data(params, sigma, g))
}

struct Runner<'a> {
    params: &'a ModelParams,
    family: DataFamily,
    grid: &'a GridSpec,
    cfg: &'a EvolveConfig,
    opts: &'a BisectOptions,
}

impl Runner<'_> {
    fn classify<T: Real>(&self, sigma: T, t_end: f64) -> Result<Iterate> {
        let start = Instant::now();
        let mut cfg = self.cfg.clone().with_t_end(t_end);
        cfg.snapshot_times.clear();
        cfg.probe_every = usize::MAX / 2;
        let mut tr = run_member(self.params, self.family, sigma, self.grid, &cfg)?;
        let mut extended = false;
        let mut forced = false;
        if let Outcome::Undecided { .. } = tr.outcome {
            extended = true;
            cfg.t_end = t_end * self.opts.extend_factor;
            tr = run_member(self.params, self.family, sigma, self.grid, &cfg)?;
            if let Outcome::Undecided { .. } = tr.outcome {
                warn!("sigma = {} undecided at t = {}; counted as dispersal", sigma.to_decimal(), cfg.t_end);
                forced = true;
            }
        }
        Ok(Iterate {
            sigma: sigma.to_decimal(),
            outcome: tr.outcome,
            t_detect: tr.outcome.time(),
            t_end: cfg.t_end,
            extended,
            forced_dispersal: forced,
            wall_secs: start.elapsed().as_secs_f64(),
        })
    }
}

/// Evolves both seeds and widens outward (lo halves, hi doubles) until the
/// outcomes differ.
pub fn bracket_initial<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    seed_lo: T,
    seed_hi: T,
    opts: &BisectOptions,
) -> Result<(Bracket<T>, Vec<Iterate>)> {
    if !(seed_lo < seed_hi) || !(seed_lo.to_f64() > 0.0) {
        return Err(invalid(
            "seeds",
            format!("need 0 < lo < hi, got ({}, {})", seed_lo.to_decimal(), seed_hi.to_decimal()),
        ));
    }
    let runner = Runner {
        params,
        family,
        grid,
        cfg,
        opts,
    };
    let t_end = cfg.t_end;
    let (mut lo, mut hi) = (seed_lo, seed_hi);
    let mut history = vec![runner.classify(lo, t_end)?, runner.classify(hi, t_end)?];
    let mut out_lo = history[0].outcome.is_blowup();
    let mut out_hi = history[1].outcome.is_blowup();
    for _ in 0..opts.max_widenings {
        if !out_lo && out_hi {
            break;
        }
        if out_lo && !out_hi {
            break;
        }
        if out_hi {
            lo = lo.scale(0.5);
            let it = runner.classify(lo, t_end)?;
            out_lo = it.outcome.is_blowup();
            history.push(it);
        } else {
            hi = hi.scale(2.0);
            let it = runner.classify(hi, t_end)?;
            out_hi = it.outcome.is_blowup();
            history.push(it);
        }
    }
    if out_lo || !out_hi {
        let name = |b: bool| if b { "blowup" } else { "dispersal" };
        let outcome = if out_lo == out_hi {
            name(out_lo).to_string()
        } else {
            "blowup below dispersal".to_string()
        };
        return Err(Error::NoThreshold {
            lo: lo.to_decimal(),
            hi: hi.to_decimal(),
            outcome,
        });
    }
    info!("bracket [{}, {}]", lo.to_decimal(), hi.to_decimal());
    Ok((Bracket { lo, hi }, history))
}

/// Bisects a validated bracket until `target_digits` or the working
/// precision is exhausted.
pub fn bisect<T: Real>(
    bracket: Bracket<T>,
    params: &ModelParams,
    family: DataFamily,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    opts: &BisectOptions,
) -> Result<BisectionRecord> {
    if !(bracket.lo < bracket.hi) {
        return Err(invalid("bracket", "lo must be below hi"));
    }
    if opts.target_digits > T::TIER.max_digits() {
        return Err(invalid(
            "target_digits",
            format!(
                "{} exceeds the {} digits of the {:?} tier",
                opts.target_digits,
                T::TIER.max_digits(),
                T::TIER
            ),
        ));
    }
    let runner = Runner {
        params,
        family,
        grid,
        cfg,
        opts,
    };
    let mut b = bracket;
    let mut iterations = Vec::new();
    let target = 10f64.powi(-(opts.target_digits as i32));
    let stop_reason = loop {
        let width = b.width().to_f64();
        if width <= target {
            break StopReason::TargetReached;
        }
        if iterations.len() >= opts.max_iterations {
            break StopReason::IterationLimit;
        }
        let ulp = b.hi.abs().to_f64() * 2.0 * T::EPS;
        if width < 4.0 * ulp {
            break StopReason::PrecisionExhausted;
        }
        let mid = b.mid();
        let t_end = (trapping_time_estimate(width.min(1.0), params.alpha, None) + opts.t_margin).max(opts.t_margin);
        let it = runner.classify(mid, t_end)?;
        if it.outcome.is_blowup() {
            b.hi = mid;
        } else {
            b.lo = mid;
        }
        log::debug!("iter {}: sigma = {} -> {}", iterations.len(), it.sigma, it.outcome.name());
        iterations.push(it);
    };
    let width = b.width();
    let digits = -width.to_f64().log10();
    info!("bisection stopped ({stop_reason:?}) at {digits:.2} digits");
    Ok(BisectionRecord {
        alpha: params.alpha,
        family,
        precision_tier: T::TIER,
        dx: grid.dx,
        iterations,
        bracket: (b.lo.to_decimal(), b.hi.to_decimal()),
        sigma_star: b.mid().to_decimal(),
        half_width: width.scale(0.5).to_decimal(),
        digits,
        target_digits: opts.target_digits,
        stop_reason,
    })
}

/// Bracket from seeds, then bisection; the seed runs are prepended to the
/// record.
pub fn find_threshold<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    seeds: (T, T),
    opts: &BisectOptions,
) -> Result<BisectionRecord> {
    let (bracket, history) = bracket_initial(params, family, grid, cfg, seeds.0, seeds.1, opts)?;
    let mut rec = bisect(bracket, params, family, grid, cfg, opts)?;
    let mut all = history;
    all.append(&mut rec.iterations);
    rec.iterations = all;
    Ok(rec)
}

/// Last time the probe leaves the band `|u - S(0)| ≤ band·S(0)`, by linear
/// interpolation; `None` if it never enters or never leaves.
pub fn ejection_time(t: &[f64], u: &[f64], s_center: f64, band: f64) -> Option<f64> {
    let half = band * s_center.abs();
    let inside = |v: f64| (v - s_center).abs() <= half;
    let last_in = (0..u.len()).rev().find(|&i| inside(u[i]))?;
    if last_in + 1 >= u.len() {
        return None;
    }
    let (a, b) = (u[last_in] - s_center, u[last_in + 1] - s_center);
    let edge = if b > 0.0 { half } else { -half };
    let frac = ((edge - a) / (b - a)).clamp(0.0, 1.0);
    Some(t[last_in] + frac * (t[last_in + 1] - t[last_in]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EjectionScaling {
    /// `(δσ, ejection time)`
    pub points: Vec<(f64, f64)>,
    /// Slope of ejection time against `-ln δσ`.
    pub slope: f64,
    pub intercept: f64,
    /// `1/s0`
    pub expected_slope: f64,
    pub relative_error: f64,
}

/// Ejection times of `σ* + δσ` for each offset, regressed against
/// `-ln δσ`.
pub fn ejection_scaling<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    sigma_star: T,
    deltas: &[f64],
) -> Result<EjectionScaling> {
    let s0 = params.static_amplitude();
    let points: Vec<(f64, f64)> = deltas
        .par_iter()
        .map(|&d| {
            let t_end = trapping_time_estimate(d, params.alpha, None) + T_MARGIN;
            let c = cfg.clone().with_t_end(t_end);
            let tr = run_member(params, family, sigma_star + T::from_f64(d), grid, &c)?;
            let p = tr.center();
            let te = ejection_time(&p.t, &p.u, s0, EJECTION_BAND)
                .ok_or_else(|| invalid("ejection", format!("no ejection found for delta = {d:e}")))?;
            Ok((d, te))
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = points.iter().map(|p| -p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    let expected_slope = 1.0 / growth_rate(params.alpha);
    Ok(EjectionScaling {
        points,
        slope,
        intercept,
        expected_slope,
        relative_error: (slope - expected_slope).abs() / expected_slope,
    })
}

/// Sub- and super-critical runs `σ* ∓ δ`.
pub fn evolve_pair<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    sigma_star: T,
    delta: T,
) -> Result<(Trajectory, Trajectory)> {
    let (a, b) = rayon::join(
        || run_member(params, family, sigma_star - delta, grid, cfg),
        || run_member(params, family, sigma_star + delta, grid, cfg),
    );
    Ok((a?, b?))
}

/// Near-critical run at `sigma` that, from `t_switch` on, is held on the
/// center-stable side of `S` by removing the unstable-mode component after
/// every step. The trapped phase then lasts until `cfg.t_end` instead of
/// ending after `-ln(δσ)/s0`.
pub fn trapped_continuation<T: Real>(
    params: &ModelParams,
    family: DataFamily,
    grid: &GridSpec,
    cfg: &EvolveConfig,
    sigma: T,
    t_switch: f64,
) -> Result<Trajectory> {
    if !(t_switch > 0.0 && t_switch < cfg.t_end) {
        return Err(invalid("t_switch", format!("must lie in (0, {}), got {t_switch}", cfg.t_end)));
    }
    let g = member_grid(params, family, sigma, grid, cfg.t_end)?;
    let init = family.data(params, sigma, &g)?;
    let first = evolve(params, &init, &g, &cfg.clone().with_t_end(t_switch))?;
    if !matches!(first.outcome, Outcome::Undecided { .. }) {
        return Err(invalid(
            "t_switch",
            format!("run left the trapped phase ({}) before t = {t_switch}", first.outcome.name()),
        ));
    }
    let mid = first.final_state.clone().expect("evolve sets the final state");
    let mid = FieldState::<T> {
        u: mid.u.iter().map(|&v| T::from_f64(v)).collect(),
        ut: mid.ut.iter().map(|&v| T::from_f64(v)).collect(),
        t: mid.t,
    };
    let v0 = discrete_mode(params.alpha, 0, &g)?;
    let mut c2 = cfg.clone();
    c2.enforce_causal = false;
    let second = evolve_constrained(params, &mid, &g, &c2, &[v0])?;
    Ok(splice(first, second))
}

fn splice(mut a: Trajectory, b: Trajectory) -> Trajectory {
    for (pa, pb) in a.probes.iter_mut().zip(b.probes) {
        pa.t.extend(pb.t.into_iter().skip(1));
        pa.u.extend(pb.u.into_iter().skip(1));
        pa.ut.extend(pb.ut.into_iter().skip(1));
    }
    let last = a.snapshots.last().map(|s| s.t);
    a.snapshots
        .extend(b.snapshots.into_iter().filter(|s| last.map_or(true, |l| s.t > l)));
    a.energy_history.extend(b.energy_history.into_iter().skip(1));
    a.outcome = b.outcome;
    a.steps += b.steps;
    a.truncated |= b.truncated;
    a.final_state = b.final_state;
    a
}

pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
