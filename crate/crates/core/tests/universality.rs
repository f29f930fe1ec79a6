//! Trapped-phase fits are properties of the static solution, not of the
//! data family or the fit window.

use nlkg::analysis::*;
use nlkg::evolution::EvolveConfig;
use nlkg::model::{DataFamily, ModelParams};
use nlkg::numerics::GridSpec;
use nlkg::spectral::oscillation_frequencies;
use nlkg::threshold::*;

const SECOND_FAMILY: DataFamily = DataFamily::ScaledStatic { width: 1.2 };

struct Trapped {
    sigma_star: f64,
    t: Vec<f64>,
    u: Vec<f64>,
    center: f64,
}

impl Trapped {
    fn run(alpha: f64, family: DataFamily, seeds: (f64, f64)) -> Self {
        let p = ModelParams::new(alpha).unwrap();
        let grid = GridSpec::covering(0.02, 80.0).unwrap();
        let cfg = EvolveConfig {
            t_end: 40.0,
            dt: 0.01,
            ..Default::default()
        };
        let rec = find_threshold(&p, family, &grid, &cfg, seeds, &BisectOptions::default()).unwrap();
        let star = rec.sigma_star_f64();
        let tr = trapped_continuation(&p, family, &grid, &cfg.with_t_end(150.0), star, 8.0).unwrap();
        let c = tr.center();
        Self {
            sigma_star: star,
            t: c.t.clone(),
            u: c.u.clone(),
            center: p.static_amplitude(),
        }
    }

    fn series(&self, window: (f64, f64)) -> TailSeries {
        TailSeries::new(&self.t, &self.u, self.center, window).unwrap()
    }

    fn tail(&self, t1: f64) -> TailFit {
        match fit_tail(&self.series((t1, 150.0))).unwrap() {
            TailResult::Fitted(f) => f,
            other => panic!("no tail exponent from t = {t1}: {other:?}"),
        }
    }
}

fn windows_agree(run: &Trapped) {
    for t1 in [10.0, 20.0, 40.0] {
        let (a, b) = (run.tail(t1).gamma, run.tail(1.25 * t1).gamma);
        assert!((a - b).abs() < 0.1, "gamma {a} from t = {t1} vs {b} from t = {}", 1.25 * t1);
    }
}

#[test]
fn fast_tail_is_family_and_window_independent() {
    let a = Trapped::run(1.5, DataFamily::Gaussian, (0.5, 3.0));
    let b = Trapped::run(1.5, SECOND_FAMILY, (0.5, 1.5));
    assert!((a.sigma_star - b.sigma_star).abs() > 0.1);
    let (fa, fb) = (a.tail(10.0), b.tail(10.0));
    assert!((fa.gamma - fb.gamma).abs() < 0.1, "gamma {} vs {}", fa.gamma, fb.gamma);
    for f in [fa.freq, fb.freq] {
        assert!((f - 1.0).abs() < 0.02, "frequency {f}");
    }
    windows_agree(&a);
    windows_agree(&b);
}

#[test]
fn slow_tail_is_window_independent() {
    let a = Trapped::run(1.0, DataFamily::Gaussian, (0.5, 3.0));
    windows_agree(&a);
}

#[test]
fn oscillatory_mode_is_family_independent_and_persists() {
    let omega1 = oscillation_frequencies(0.5)[0];
    for (family, seeds) in [(DataFamily::Gaussian, (0.5, 3.0)), (SECOND_FAMILY, (0.5, 1.5))] {
        let run = Trapped::run(0.5, family, seeds);
        let early = fit_oscillation(&run.series((10.0, 80.0)), 0.8 * omega1, 1.2 * omega1).unwrap();
        let late = fit_oscillation(&run.series((80.0, 150.0)), 0.8 * omega1, 1.2 * omega1).unwrap();
        for m in [early, late] {
            assert!((m.omega / omega1 - 1.0).abs() < 0.02, "{family:?}: omega {}", m.omega);
        }
        // no measurable decay of the mode amplitude over the window
        let change = (late.amplitude / early.amplitude - 1.0).abs();
        assert!(change < 0.05, "{family:?}: amplitude changed by {change}");
    }
}
