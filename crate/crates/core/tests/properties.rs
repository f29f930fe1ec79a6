//! Cross-module invariants as property tests.

use nlkg::analysis::project_mode;
use nlkg::evolution::*;
use nlkg::model::*;
use nlkg::numerics::{quadrature, DoubleDouble, GridSpec};
use nlkg::spectral::*;
use nlkg::threshold::*;
use proptest::prelude::*;

fn params(alpha: f64) -> ModelParams {
    ModelParams::new(alpha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tiers_agree_on_profiles_and_integrals(alpha in 0.2f64..3.0, x in 0.0f64..8.0) {
        let p = params(alpha);
        let a = static_solution::<f64>(&p, x);
        let b = static_solution::<DoubleDouble>(&p, DoubleDouble::from_f64(x)).to_f64();
        prop_assert!((a - b).abs() <= 1e-14 * b.abs());

        let g = GridSpec::covering(0.05, 30.0).unwrap();
        let qa = quadrature(&static_profile::<f64>(&p, &g), &g).unwrap();
        let qb = quadrature(&static_profile::<DoubleDouble>(&p, &g), &g).unwrap().to_f64();
        prop_assert!((qa - qb).abs() <= 1e-14 * qb.abs());
    }

    #[test]
    fn eigenvalue_structure(alpha in 0.05f64..6.0) {
        let l = discrete_eigenvalues(alpha);
        prop_assert_eq!(l.len(), highest_mode(alpha) + 1);
        prop_assert_eq!(l.iter().filter(|&&v| v > 1.0).count(), 1);
        for (n, &v) in l.iter().enumerate() {
            prop_assert!(v > 0.0);
            prop_assert!((v - (alpha + 1.0 - 2.0 * n as f64 * alpha)).abs() < 1e-12);
        }
        prop_assert!((growth_rate(alpha) - (alpha * (alpha + 2.0)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn static_energy_is_critical_along_rays(alpha in 0.3f64..2.5) {
        let p = params(alpha);
        let g = GridSpec::covering(0.02, 40.0).unwrap();
        let s = static_profile::<f64>(&p, &g);
        let e = |beta: f64| {
            let u: Vec<f64> = s.iter().map(|v| beta * v).collect();
            static_energy(&u, &p, &g).unwrap()
        };
        let h = 1e-3;
        let slope = (8.0 * (e(1.0 + h) - e(1.0 - h)) - (e(1.0 + 2.0 * h) - e(1.0 - 2.0 * h))) / (12.0 * h);
        prop_assert!(slope.abs() < 1e-7 * e(1.0).abs(), "dE/dbeta = {}", slope);
        prop_assert!(e(0.9) < e(1.0) && e(1.1) < e(1.0));
    }

    #[test]
    fn projection_is_linear(a in -0.5f64..0.5, b in -0.5f64..0.5) {
        let p = params(0.5);
        let g = GridSpec::covering(0.02, 40.0).unwrap();
        let s = static_profile::<f64>(&p, &g);
        let v0 = eigenfunction::<f64>(0.5, 0, &g).unwrap();
        let v1 = eigenfunction::<f64>(0.5, 1, &g).unwrap();
        let u: Vec<f64> = (0..g.n_points).map(|i| s[i] + a * v0[i] + b * v1[i]).collect();
        prop_assert!((project_mode(&u, &p, 0, &g).unwrap() - a).abs() < 1e-8);
        prop_assert!((project_mode(&u, &p, 1, &g).unwrap() - b).abs() < 1e-8);
    }
}

#[test]
fn evolution_is_bit_identical() {
    let p = params(1.0);
    let g = GridSpec::covering(0.02, 30.0).unwrap();
    let init = DataFamily::Gaussian.data(&p, 1.2f64, &g).unwrap();
    let cfg = EvolveConfig {
        t_end: 5.0,
        dt: 0.01,
        probe_points: vec![0.0, 1.0],
        ..Default::default()
    };
    let a = evolve(&p, &init, &g, &cfg).unwrap();
    let b = evolve(&p, &init, &g, &cfg).unwrap();
    assert_eq!(a.probes[0].u, b.probes[0].u);
    assert_eq!(a.probes[1].ut, b.probes[1].ut);
    assert_eq!(a.final_state.unwrap().u, b.final_state.unwrap().u);
}

#[test]
fn nonlinear_minus_linear_is_second_order() {
    let p = params(1.0);
    let g = GridSpec::covering(0.02, 20.0).unwrap();
    let cfg = EvolveConfig {
        t_end: 3.0,
        dt: 0.01,
        enforce_causal: false,
        ..Default::default()
    };
    let f = Perturbation::Bump {
        radius: 4.0,
        amplitude: 1.0,
    }
    .state::<f64>(&p, &g)
    .unwrap();
    let lin = evolve_linearized(&p, &f, &g, &cfg).unwrap().final_state.unwrap().u;
    let s = static_profile::<f64>(&p, &g);
    let defect = |eps: f64| {
        let u: Vec<f64> = s.iter().zip(&f.u).map(|(s, f)| s + eps * f).collect();
        let ut: Vec<f64> = f.ut.iter().map(|v| eps * v).collect();
        let nl = evolve(&p, &FieldState::new(u, ut), &g, &cfg).unwrap().final_state.unwrap().u;
        (0..g.n_points).map(|i| (nl[i] - s[i] - eps * lin[i]).abs()).fold(0.0, f64::max)
    };
    let ratio = defect(2e-3) / defect(1e-3);
    assert!((3.6..4.4).contains(&ratio), "defect ratio {ratio}, expected 4");
}

#[test]
fn bisection_iterates_respect_the_bracket() {
    let p = params(1.5);
    let g = GridSpec::covering(0.04, 40.0).unwrap();
    let cfg = EvolveConfig {
        t_end: 30.0,
        dt: 0.02,
        ..Default::default()
    };
    let opts = BisectOptions {
        target_digits: 5,
        ..Default::default()
    };
    let rec = find_threshold(&p, DataFamily::Gaussian, &g, &cfg, (0.5f64, 3.0f64), &opts).unwrap();
    assert!(rec.is_consistent());
    assert!(rec.digits >= 5.0);
    let b = rec.bracket::<f64>();
    assert!(b.lo < b.hi && b.hi - b.lo <= 2.0 * rec.sigma_star_f64() * 1e-5);
}
