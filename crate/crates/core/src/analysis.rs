//! Fits of trapped-phase time series against the linearized picture:
//! unstable growth, oscillatory modes, the dispersive tail and the
//! second-order residual.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{static_profile, ModelParams};
use crate::numerics::{inner_product, quadrature, GridSpec};
use crate::spectral::{eigenfunction, highest_mode, oscillation_frequencies};
use crate::threshold::linear_fit;

/// Minimum sign changes for envelope and frequency estimates.
pub const MIN_SIGN_CHANGES: usize = 10;
/// Start of the trapped-phase window.
pub const SETTLE_TIME: f64 = 10.0;
/// Gap left before ejection onset.
pub const EJECTION_GAP: f64 = 5.0;
/// Spatial extent used by [`profile_match`].
pub const PROFILE_FIT_X: f64 = 10.0;

/// Perturbation `y = u(t, x_probe) - S(x_probe)` restricted to a window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub window: (f64, f64),
}

impl TailSeries {
    /// `y = u - center` over the explicit window.
    pub fn new(t: &[f64], u: &[f64], center: f64, window: (f64, f64)) -> Result<Self> {
        if t.len() != u.len() || t.len() < 3 {
            return Err(invalid("series", "need at least 3 samples of matching length"));
        }
        let (lo, hi) = window;
        let (t0, t1) = (t[0], *t.last().unwrap());
        if !(lo < hi) || lo < t0 - 1e-9 || hi > t1 + 1e-9 {
            return Err(invalid(
                "window",
                format!("({lo}, {hi}) not inside the recorded range ({t0}, {t1})"),
            ));
        }
        let (ts, ys) = t
            .iter()
            .zip(u)
            .filter(|(&tt, _)| tt >= lo && tt <= hi)
            .map(|(&tt, &v)| (tt, v - center))
            .unzip();
        Ok(Self { t: ts, y: ys, window })
    }

    /// Default window: from [`SETTLE_TIME`] to [`EJECTION_GAP`] before the
    /// ejection onset (or the end of the record).
    pub fn trapped(t: &[f64], u: &[f64], center: f64) -> Result<Self> {
        let y: Vec<f64> = u.iter().map(|v| v - center).collect();
        let end = *t.last().ok_or_else(|| invalid("series", "empty"))?;
        let stop = ejection_onset(t, &y, SETTLE_TIME).map_or(end, |o| o - EJECTION_GAP);
        Self::new(t, u, center, (SETTLE_TIME.min(end), stop.max(SETTLE_TIME.min(end) + 1e-9).min(end)))
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn with_values(&self, y: Vec<f64>) -> Self {
        Self {
            t: self.t.clone(),
            y,
            window: self.window,
        }
    }
}

/// First time after `t_start` at which `|y|` exceeds three times the
/// running minimum of its envelope.
pub fn ejection_onset(t: &[f64], y: &[f64], t_start: f64) -> Option<f64> {
    let start = t.iter().position(|&tt| tt >= t_start)?;
    let crossings = sign_change_indices(&y[start..]);
    let mut running_min = f64::INFINITY;
    let mut prev = 0;
    for &c in crossings.iter().chain(std::iter::once(&(y.len() - start))) {
        let seg = &y[start + prev..start + c];
        prev = c;
        if seg.is_empty() {
            continue;
        }
        let (k, peak) = seg
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.abs()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if peak > 3.0 * running_min {
            // first sample in this half-cycle above the level
            let level = 3.0 * running_min;
            let j = seg.iter().position(|v| v.abs() > level).unwrap_or(k);
            return Some(t[start + c - seg.len() + j]);
        }
        running_min = running_min.min(peak);
    }
    None
}

fn sign_change_indices(y: &[f64]) -> Vec<usize> {
    (1..y.len())
        .filter(|&i| (y[i - 1] < 0.0) != (y[i] < 0.0))
        .collect()
}

/// Zero crossings by linear interpolation.
pub fn zero_crossings(t: &[f64], y: &[f64]) -> Vec<f64> {
    sign_change_indices(y)
        .into_iter()
        .filter(|&i| y[i] != y[i - 1])
        .map(|i| t[i - 1] + (t[i] - t[i - 1]) * y[i - 1] / (y[i - 1] - y[i]))
        .collect()
}

/// Angular frequency `π / mean crossing interval`.
pub fn crossing_frequency(t: &[f64], y: &[f64]) -> Result<f64> {
    let z = zero_crossings(t, y);
    if z.len() < MIN_SIGN_CHANGES {
        return Err(Error::TooFewOscillations {
            found: z.len(),
            needed: MIN_SIGN_CHANGES,
        });
    }
    let mean = (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64;
    Ok(PI / mean)
}

/// One extremum of `|y|` per half-cycle, refined by a parabola through the
/// three samples around it. Returns `(t_k, |y_k|)`.
pub fn extract_envelope(series: &TailSeries) -> Result<Vec<(f64, f64)>> {
    let (t, y) = (&series.t, &series.y);
    let crossings = sign_change_indices(y);
    if crossings.len() < MIN_SIGN_CHANGES {
        return Err(Error::TooFewOscillations {
            found: crossings.len(),
            needed: MIN_SIGN_CHANGES,
        });
    }
    let mut out = Vec::with_capacity(crossings.len());
    // only complete half-cycles between two crossings
    for w in crossings.windows(2) {
        let (a, b) = (w[0], w[1]);
        let k = (a..b)
            .max_by(|&i, &j| y[i].abs().total_cmp(&y[j].abs()))
            .expect("non-empty half-cycle");
        if k == 0 || k + 1 >= y.len() {
            continue;
        }
        let (ym, y0, yp) = (y[k - 1], y[k], y[k + 1]);
        let h = t[k + 1] - t[k];
        let curv = ym - 2.0 * y0 + yp;
        let (tk, vk) = if curv != 0.0 {
            let shift = 0.5 * (ym - yp) / curv;
            let shift = shift.clamp(-1.0, 1.0);
            (t[k] + shift * h, y0 - 0.25 * (ym - yp) * shift)
        } else {
            (t[k], y0)
        };
        out.push((tk, vk.abs()));
    }
    Ok(out)
}

/// Dispersive tail fit `y ≈ C t^{-γ} sin(ω t + δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub gamma: f64,
    pub freq: f64,
    pub phase: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TailResult {
    Fitted(TailFit),
    /// The envelope is not decaying monotonically: oscillatory modes
    /// dominate and no exponent is reported.
    ModeDominated { freq: f64 },
}

/// Fraction of envelope steps allowed to rise before the series counts as
/// mode-dominated.
const NON_MONOTONE_FRACTION: f64 = 0.1;

pub fn fit_tail(series: &TailSeries) -> Result<TailResult> {
    let env = extract_envelope(series)?;
    let freq = crossing_frequency(&series.t, &series.y)?;
    let rises = env.windows(2).filter(|w| w[1].1 > w[0].1 * 1.005).count();
    let (lt, ly): (Vec<f64>, Vec<f64>) = env.iter().map(|&(t, a)| (t.ln(), a.ln())).unzip();
    let (slope, _) = linear_fit(&lt, &ly);
    if rises as f64 > NON_MONOTONE_FRACTION * (env.len() - 1) as f64 || slope > -0.02 {
        return Ok(TailResult::ModeDominated { freq });
    }
    let gamma = -slope;
    let weight: Vec<f64> = series.t.iter().map(|t| t.powf(-gamma)).collect();
    let cols = [
        series.t.iter().zip(&weight).map(|(t, w)| w * (freq * t).sin()).collect::<Vec<_>>(),
        series.t.iter().zip(&weight).map(|(t, w)| w * (freq * t).cos()).collect(),
    ];
    let c = least_squares(&cols, &series.y)?;
    Ok(TailResult::Fitted(TailFit {
        gamma,
        freq,
        phase: c[1].atan2(c[0]),
        amplitude: c[0].hypot(c[1]),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnstableFit {
    pub a0: f64,
    pub s0: f64,
    pub r2: f64,
}

/// Log-linear fit `|y| = A0 e^{s0 t}` over the whole series.
pub fn fit_unstable(series: &TailSeries) -> Result<UnstableFit> {
    let (t, ly): (Vec<f64>, Vec<f64>) = series
        .t
        .iter()
        .zip(&series.y)
        .filter(|(_, y)| **y != 0.0)
        .map(|(&t, &y)| (t, y.abs().ln()))
        .unzip();
    if t.len() < 3 {
        return Err(invalid("series", "too few nonzero samples for an exponential fit"));
    }
    let (s0, b) = linear_fit(&t, &ly);
    let mean = ly.iter().sum::<f64>() / ly.len() as f64;
    let ss_tot: f64 = ly.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = t.iter().zip(&ly).map(|(t, v)| (v - (s0 * t + b)).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    if !(r2 >= 0.99) {
        return Err(Error::NotExponential { r2 });
    }
    Ok(UnstableFit { a0: b.exp(), s0, r2 })
}

/// Last stretch over which `|y|` climbs from `lo` to `hi` (each crossed
/// once), as a window for [`fit_unstable`].
pub fn growth_window(t: &[f64], y: &[f64], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let end = y.iter().position(|v| v.abs() >= hi)?;
    let start = (0..end).rev().find(|&i| y[i].abs() <= lo)?;
    Some((t[start + 1], t[end - 1]))
}

/// Component of `u - S` along the continuum eigenfunction `v_n`.
pub fn project_mode(u: &[f64], params: &ModelParams, n: usize, grid: &GridSpec) -> Result<f64> {
    let v = eigenfunction::<f64>(params.alpha, n, grid)?;
    let s = static_profile::<f64>(params, grid);
    let d: Vec<f64> = u.iter().zip(&s).map(|(a, b)| a - b).collect();
    Ok(inner_product(&d, &v, grid)? / inner_product(&v, &v, grid)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMatch {
    pub scale: f64,
    /// `‖(u - S) - scale·ref‖ / ‖u - S‖` over `[0, x_fit]`.
    pub misfit: f64,
}

/// Least-squares scale of `reference` against `u - S` on `[0, x_fit]`.
pub fn profile_match(
    u: &[f64],
    reference: &[f64],
    params: &ModelParams,
    grid: &GridSpec,
    x_fit: f64,
) -> Result<ProfileMatch> {
    grid.check_len(u.len())?;
    grid.check_len(reference.len())?;
    let m = (grid.index_of(x_fit) + 1).min(grid.n_points);
    let sub = GridSpec::new(grid.dx, m)?;
    let s = static_profile::<f64>(params, grid);
    let d: Vec<f64> = u[..m].iter().zip(&s[..m]).map(|(a, b)| a - b).collect();
    let r = &reference[..m];
    let rr = inner_product(r, r, &sub)?;
    let dd = inner_product(&d, &d, &sub)?;
    if rr == 0.0 {
        return Err(invalid("reference", "vanishes on the fit interval"));
    }
    let scale = inner_product(&d, r, &sub)? / rr;
    let res: Vec<f64> = d.iter().zip(r).map(|(a, b)| (a - scale * b).powi(2)).collect();
    let misfit = if dd > 0.0 {
        (quadrature(&res, &sub)? / dd).max(0.0).sqrt()
    } else {
        0.0
    };
    Ok(ProfileMatch { scale, misfit })
}

/// Sinusoid with offset, `y ≈ c + A sin(ω t + δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub omega: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
}

impl ModeFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (self.omega * t + self.phase).sin()
    }
}

fn sinusoid_rss(t: &[f64], y: &[f64], omega: f64) -> Result<(f64, [f64; 3])> {
    let cols = [
        vec![1.0; t.len()],
        t.iter().map(|t| (omega * t).sin()).collect(),
        t.iter().map(|t| (omega * t).cos()).collect(),
    ];
    let c = least_squares(&cols, y)?;
    let rss = (0..t.len())
        .map(|i| (y[i] - c[0] - c[1] * cols[1][i] - c[2] * cols[2][i]).powi(2))
        .sum();
    Ok((rss, [c[0], c[1], c[2]]))
}

/// Fits `c + A sin(ω t + δ)` with ω searched in `[lo, hi]`.
pub fn fit_oscillation(series: &TailSeries, lo: f64, hi: f64) -> Result<ModeFit> {
    let (t, y) = (&series.t[..], &series.y[..]);
    let scan = 200;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=scan {
        let w = lo + (hi - lo) * k as f64 / scan as f64;
        let (rss, _) = sinusoid_rss(t, y, w)?;
        if rss < best.0 {
            best = (rss, w);
        }
    }
    // golden-section refinement around the best scan point
    let step = (hi - lo) / scan as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sinusoid_rss(t, y, c)?.0;
    let mut fd = sinusoid_rss(t, y, d)?.0;
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sinusoid_rss(t, y, c)?.0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sinusoid_rss(t, y, d)?.0;
        }
    }
    let omega = 0.5 * (a + b);
    let (_, co) = sinusoid_rss(t, y, omega)?;
    Ok(ModeFit {
        omega,
        amplitude: co[1].hypot(co[2]),
        phase: co[2].atan2(co[1]),
        offset: co[0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ResidualFrequency {
    Measured {
        /// Zero-crossing estimate.
        freq: f64,
        /// Peak of the tapered discrete Fourier transform.
        dft_freq: f64,
        rms: f64,
    },
    NoSignal {
        rms: f64,
    },
}

/// Relative rms below which a residual counts as empty.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Dominant frequency of `y - model(t)`.
pub fn residual_frequency(series: &TailSeries, model: impl Fn(f64) -> f64) -> Result<ResidualFrequency> {
    let r: Vec<f64> = series.t.iter().zip(&series.y).map(|(&t, &y)| y - model(t)).collect();
    let rms_of = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
    let rms = rms_of(&r);
    let scale = rms_of(&series.y);
    if rms <= NOISE_FLOOR * scale || rms < 1e-300 {
        return Ok(ResidualFrequency::NoSignal { rms });
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let centered: Vec<f64> = r.iter().map(|v| v - mean).collect();
    let freq = crossing_frequency(&series.t, &centered)?;
    let dft_freq = dft_peak(&series.t, &centered, 0.05, 6.0);
    Ok(ResidualFrequency::Measured { freq, dft_freq, rms })
}

/// Angular frequency of the largest Hann-tapered periodogram value in
/// `[lo, hi]`, refined by a parabola.
pub fn dft_peak(t: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let n = t.len();
    let span = t[n - 1] - t[0];
    // decimate to roughly 10 samples per unit time, far above Nyquist for hi
    let stride = ((0.1 / (span / n as f64)).floor() as usize).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let tap: Vec<(f64, f64)> = idx
        .iter()
        .map(|&i| {
            let w = 0.5 - 0.5 * (2.0 * PI * (t[i] - t[0]) / span).cos();
            (t[i], w * y[i])
        })
        .collect();
    let power = |w: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for &(ti, v) in &tap {
            let (s, c) = (w * ti).sin_cos();
            re += v * c;
            im -= v * s;
        }
        re * re + im * im
    };
    let dw = (PI / span / 4.0).min(0.01);
    let m = ((hi - lo) / dw).ceil() as usize;
    let vals: Vec<f64> = (0..=m).map(|k| power(lo + k as f64 * dw)).collect();
    let k = (0..=m).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    if k == 0 || k == m {
        return lo + k as f64 * dw;
    }
    let (a, b, c) = (vals[k - 1], vals[k], vals[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    lo + (k as f64 + shift) * dw
}

/// Everything measured on one trapped-phase record.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FitReport {
    pub alpha: f64,
    pub window: (f64, f64),
    pub gamma: Option<f64>,
    pub tail_freq: Option<f64>,
    /// Zero-crossing frequency of the mean-removed series.
    pub dominant_freq: Option<f64>,
    pub tail_phase: Option<f64>,
    pub tail_amplitude: Option<f64>,
    pub mode_dominated: bool,
    pub a0: Option<f64>,
    pub s0_measured: Option<f64>,
    /// Oscillatory mode fits at `x = 0`, in the `v_n(0) = 1` normalization.
    pub mode_amps: Vec<ModeFit>,
    pub residual_freq: Option<f64>,
    pub residual_dft_freq: Option<f64>,
    pub rms_residual: Option<f64>,
    pub warnings: Vec<String>,
}

impl FitReport {
    /// Fitted linear model at `x = 0`: the dispersive tail plus the
    /// oscillatory modes.
    pub fn model(&self, t: f64) -> f64 {
        let modes: f64 = self.mode_amps.iter().map(|m| m.eval(t)).sum();
        let tail = match (self.gamma, self.tail_amplitude, self.tail_phase) {
            (Some(g), Some(c), Some(p)) => c * t.powf(-g) * (self.tail_freq.unwrap_or(1.0) * t + p).sin(),
            _ => 0.0,
        };
        modes + tail
    }
}

/// Runs the fits appropriate to `alpha`: the tail exponent when there are
/// no oscillatory modes, otherwise the mode fit followed by the residual
/// frequency.
pub fn analyze(params: &ModelParams, series: &TailSeries) -> Result<FitReport> {
    let mut report = FitReport {
        alpha: params.alpha,
        window: series.window,
        ..Default::default()
    };
    let omegas = oscillation_frequencies(params.alpha);
    if highest_mode(params.alpha) == 0 {
        match fit_tail(series) {
            Ok(TailResult::Fitted(f)) => {
                report.gamma = Some(f.gamma);
                report.tail_freq = Some(f.freq);
                report.dominant_freq = Some(f.freq);
                report.tail_phase = Some(f.phase);
                report.tail_amplitude = Some(f.amplitude);
                let model = |t: f64| f.amplitude * t.powf(-f.gamma) * (f.freq * t + f.phase).sin();
                report.rms_residual = Some(rms(series, model));
            }
            Ok(TailResult::ModeDominated { freq }) => {
                report.mode_dominated = true;
                report.dominant_freq = Some(freq);
                report.warnings.push("envelope not monotone; no tail exponent reported".into());
            }
            Err(e) => report.warnings.push(e.to_string()),
        }
        return Ok(report);
    }
    // slowest oscillatory mode dominates x = 0
    let w1 = omegas[0];
    let fit = fit_oscillation(series, 0.8 * w1, 1.2 * w1)?;
    report.mode_amps.push(fit);
    let centered = series.with_values(series.y.iter().map(|y| y - fit.offset).collect());
    match crossing_frequency(&centered.t, &centered.y) {
        Ok(f) => report.dominant_freq = Some(f),
        Err(e) => report.warnings.push(e.to_string()),
    }
    match residual_frequency(series, |t| fit.eval(t)) {
        Ok(ResidualFrequency::Measured { freq, dft_freq, rms }) => {
            report.residual_freq = Some(freq);
            report.residual_dft_freq = Some(dft_freq);
            report.rms_residual = Some(rms);
        }
        Ok(ResidualFrequency::NoSignal { rms }) => {
            report.rms_residual = Some(rms);
            report.warnings.push("residual below noise floor".into());
        }
        Err(e) => report.warnings.push(e.to_string()),
    }
    let rest = series.with_values(series.t.iter().zip(&series.y).map(|(&t, &y)| y - fit.eval(t)).collect());
    match fit_tail(&rest) {
        Ok(TailResult::Fitted(f)) => {
            report.gamma = Some(f.gamma);
            report.tail_freq = Some(f.freq);
            report.tail_phase = Some(f.phase);
            report.tail_amplitude = Some(f.amplitude);
        }
        Ok(TailResult::ModeDominated { .. }) | Err(_) => {
            report.mode_dominated = true;
            report
                .warnings
                .push("residual envelope not monotone after removing the oscillatory mode; no tail exponent".into());
        }
    }
    Ok(report)
}

fn rms(series: &TailSeries, model: impl Fn(f64) -> f64) -> f64 {
    let s: f64 = series.t.iter().zip(&series.y).map(|(&t, &y)| (y - model(t)).powi(2)).sum();
    (s / series.len() as f64).sqrt()
}

/// Least squares via normal equations with partial pivoting; fine for the
/// two to four well-conditioned columns used here.
pub(crate) fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let k = cols.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = cols[i].iter().zip(&cols[j]).map(|(p, q)| p * q).sum();
        }
        a[i][k] = cols[i].iter().zip(y).map(|(p, q)| p * q).sum();
    }
    for c in 0..k {
        let p = (c..k)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("non-empty");
        if a[p][c].abs() < 1e-300 {
            return Err(invalid("least_squares", "singular normal equations"));
        }
        a.swap(c, p);
        for r in c + 1..k {
            let f = a[r][c] / a[c][c];
            for q in c..=k {
                a[r][q] -= f * a[c][q];
            }
        }
    }
    let mut x = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|q| a[c][q] * x[q]).sum();
        x[c] = (a[c][k] - s) / a[c][c];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::zero_mode;
    use proptest::prelude::*;

    fn synth(f: impl Fn(f64) -> f64, t0: f64, t1: f64, dt: f64) -> TailSeries {
        let n = ((t1 - t0) / dt).round() as usize;
        let t: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * dt).collect();
        let y: Vec<f64> = t.iter().map(|&t| f(t)).collect();
        TailSeries::new(&t, &y, 0.0, (t0, t1)).unwrap()
    }

    #[test]
    fn envelope_of_algebraic_decay() {
        let s = synth(|t| t.powf(-1.5) * t.sin(), 20.0, 120.0, 0.01);
        let env = extract_envelope(&s).unwrap();
        let c = env[0].1 * env[0].0.powf(1.5);
        for &(t, a) in &env {
            assert!((a * t.powf(1.5) / c - 1.0).abs() < 0.02, "t = {t}");
        }
    }

    #[test]
    fn envelope_flat_and_exponential() {
        let s = synth(|t| 3.0 * t.sin(), 0.0, 80.0, 0.01);
        let env = extract_envelope(&s).unwrap();
        assert!(env.iter().all(|&(_, a)| (a - 3.0).abs() < 1e-4));
        let s = synth(|t| (-t).exp() * (5.0 * t).sin(), 1.0, 8.0, 0.001);
        let env = extract_envelope(&s).unwrap();
        let (lt, la): (Vec<f64>, Vec<f64>) = env.iter().map(|&(t, a)| (t, a.ln())).unzip();
        let (slope, _) = linear_fit(&lt, &la);
        assert!((slope + 1.0).abs() < 0.01, "{slope}");
    }

    #[test]
    fn too_few_oscillations() {
        let s = synth(|t| t.sin(), 0.0, 10.0, 0.01);
        assert!(matches!(extract_envelope(&s), Err(Error::TooFewOscillations { .. })));
    }

    #[test]
    fn tail_fit_exact_synthetic() {
        let s = synth(|t| 5.0 * t.powf(-0.5) * (t + 0.3).sin(), 20.0, 150.0, 0.01);
        let TailResult::Fitted(f) = fit_tail(&s).unwrap() else { panic!() };
        assert!((f.gamma - 0.5).abs() < 0.01, "{f:?}");
        assert!((f.amplitude / 5.0 - 1.0).abs() < 0.01, "{f:?}");
        assert!((f.phase - 0.3).abs() < 0.01, "{f:?}");
        assert!((f.freq - 1.0).abs() < 0.01, "{f:?}");
    }

    #[test]
    fn persistent_oscillation_is_mode_dominated() {
        let s = synth(|t| 0.4 * (0.866 * t).sin() + 0.01 * t.powf(-0.5) * t.sin(), 10.0, 150.0, 0.01);
        assert!(matches!(fit_tail(&s).unwrap(), TailResult::ModeDominated { .. }));
    }

    #[test]
    fn unstable_fit_exact_and_rejects_non_exponential() {
        let s = synth(|t| 1e-8 * (1.7 * t).exp(), 0.0, 10.0, 0.01);
        let f = fit_unstable(&s).unwrap();
        assert!((f.s0 - 1.7).abs() < 1e-9 && (f.a0 / 1e-8 - 1.0).abs() < 1e-8);
        let s = synth(|t| t.sin() + 2.0, 0.0, 10.0, 0.01);
        assert!(matches!(fit_unstable(&s), Err(Error::NotExponential { .. })));
    }

    #[test]
    fn growth_window_brackets_the_climb() {
        let t: Vec<f64> = (0..1000).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|t| 1e-6 * (2.0 * t).exp()).collect();
        let (a, b) = growth_window(&t, &y, 1e-4, 1e-1).unwrap();
        assert!((a - (1e2f64).ln() / 2.0).abs() < 0.02 && (b - (1e5f64).ln() / 2.0).abs() < 0.02);
    }

    #[test]
    fn projection_and_linearity() {
        let params = ModelParams::new(0.5).unwrap();
        let g = GridSpec::covering(0.01, 40.0).unwrap();
        let s = static_profile::<f64>(&params, &g);
        let v0 = eigenfunction::<f64>(0.5, 0, &g).unwrap();
        let v1 = eigenfunction::<f64>(0.5, 1, &g).unwrap();
        let u: Vec<f64> = (0..g.n_points).map(|i| s[i] + 0.01 * v1[i]).collect();
        assert!((project_mode(&u, &params, 1, &g).unwrap() - 0.01).abs() < 1e-6);
        assert!(project_mode(&s, &params, 1, &g).unwrap().abs() < 1e-12);
        let u: Vec<f64> = (0..g.n_points).map(|i| s[i] + 0.03 * v0[i] - 0.02 * v1[i]).collect();
        assert!((project_mode(&u, &params, 0, &g).unwrap() - 0.03).abs() < 1e-6);
        assert!((project_mode(&u, &params, 1, &g).unwrap() + 0.02).abs() < 1e-6);
    }

    #[test]
    fn profile_match_scale_and_distinction() {
        let params = ModelParams::new(1.0).unwrap();
        let g = GridSpec::covering(0.01, 40.0).unwrap();
        let s = static_profile::<f64>(&params, &g);
        let z = zero_mode::<f64>(1.0, &g).unwrap();
        let u: Vec<f64> = (0..g.n_points).map(|i| s[i] + 0.02 * z[i]).collect();
        let m = profile_match(&u, &z, &params, &g, PROFILE_FIT_X).unwrap();
        assert!((m.scale - 0.02).abs() < 1e-12 && m.misfit < 1e-10, "{m:?}");
        let v0 = eigenfunction::<f64>(1.0, 0, &g).unwrap();
        let u: Vec<f64> = (0..g.n_points).map(|i| s[i] + 0.02 * v0[i]).collect();
        let m = profile_match(&u, &z, &params, &g, PROFILE_FIT_X).unwrap();
        assert!(m.misfit > 0.1, "{m:?}");
    }

    #[test]
    fn residual_frequency_synthetic() {
        let s = synth(|t| (1.7 * t).sin(), 0.0, 100.0, 0.01);
        let ResidualFrequency::Measured { freq, dft_freq, .. } = residual_frequency(&s, |_| 0.0).unwrap() else {
            panic!()
        };
        assert!((freq / 1.7 - 1.0).abs() < 0.01 && (dft_freq / 1.7 - 1.0).abs() < 0.01, "{freq} {dft_freq}");
        let model = |t: f64| (1.7 * t).sin();
        assert!(matches!(residual_frequency(&s, model).unwrap(), ResidualFrequency::NoSignal { .. }));
    }

    #[test]
    fn oscillation_fit_recovers_mode() {
        let w = 3f64.sqrt() / 2.0;
        let s = synth(|t| -0.4 + 0.38 * (w * t + 1.1).sin() + 0.05 * (2.0 * w * t).cos(), 10.0, 120.0, 0.01);
        let f = fit_oscillation(&s, 0.8 * w, 1.2 * w).unwrap();
        assert!((f.omega / w - 1.0).abs() < 1e-3, "{f:?}");
        assert!((f.amplitude - 0.38).abs() < 1e-2, "{f:?}");
        let ResidualFrequency::Measured { freq, .. } = residual_frequency(&s, |t| f.eval(t)).unwrap() else {
            panic!()
        };
        assert!((freq / (2.0 * w) - 1.0).abs() < 0.02, "{freq}");
    }

    #[test]
    fn trapped_window_stops_before_ejection() {
        let t: Vec<f64> = (0..8000).map(|k| k as f64 * 0.01).collect();
        let u: Vec<f64> = t
            .iter()
            .map(|&t| 1.0 + 0.05 * (t + 1.0).powf(-0.5) * t.sin() + 1e-30 * (1.7 * t).exp())
            .collect();
        let s = TailSeries::trapped(&t, &u, 1.0).unwrap();
        // |y| reaches three envelopes near t = 38.4
        let onset = (0.15 * 38.4f64.powf(-0.5) / 1e-30).ln() / 1.7;
        assert_eq!(s.window.0, SETTLE_TIME);
        let stop = onset - EJECTION_GAP;
        assert!(s.window.1 > stop - 2.0 && s.window.1 < stop + 0.5, "{:?} {onset}", s.window);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn closed_loop_tail(gamma in 0.3f64..2.0, c in 0.1f64..10.0, delta in 0.0f64..3.0) {
            let s = synth(|t| c * t.powf(-gamma) * (t + delta).sin(), 30.0, 200.0, 0.02);
            let TailResult::Fitted(f) = fit_tail(&s).unwrap() else { panic!("mode dominated") };
            prop_assert!((f.gamma - gamma).abs() < 0.01, "{:?}", f);
            prop_assert!((f.freq - 1.0).abs() < 0.01, "{:?}", f);
            prop_assert!((f.amplitude / c - 1.0).abs() < 0.03, "{:?}", f);
        }

        #[test]
        fn closed_loop_unstable(a0 in 1e-12f64..1e-6, s0 in 0.5f64..2.5) {
            let s = synth(|t| a0 * (s0 * t).exp(), 0.0, 6.0, 0.01);
            let f = fit_unstable(&s).unwrap();
            prop_assert!((f.s0 / s0 - 1.0).abs() < 1e-6);
            prop_assert!((f.a0 / a0 - 1.0).abs() < 1e-6);
        }

        #[test]
        fn closed_loop_oscillation(w in 0.5f64..0.95, a in 0.05f64..1.0, ph in 0.0f64..3.0) {
            let s = synth(|t| a * (w * t + ph).sin(), 10.0, 150.0, 0.02);
            let f = fit_oscillation(&s, 0.8 * w, 1.2 * w).unwrap();
            prop_assert!((f.omega / w - 1.0).abs() < 1e-3);
            prop_assert!((f.amplitude / a - 1.0).abs() < 1e-3);
            let zc = crossing_frequency(&s.t, &s.y).unwrap();
            prop_assert!((zc / w - 1.0).abs() < 0.01);
        }
    }
}
