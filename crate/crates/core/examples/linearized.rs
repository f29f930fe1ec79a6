//! Linearized dynamics about `S`: the unstable mode grows at `s0`, the
//! oscillatory mode of alpha = 1/2 rings at `omega_1` once the unstable
//! component is filtered out.

use nlkg::analysis::{crossing_frequency, fit_unstable, TailSeries};
use nlkg::evolution::{evolve_linearized, evolve_linearized_filtered, EvolveConfig, Perturbation};
use nlkg::model::ModelParams;
use nlkg::numerics::GridSpec;
use nlkg::spectral::{discrete_mode, growth_rate, oscillation_frequencies};

fn main() -> nlkg::Result<()> {
    let grid = GridSpec::covering(0.02, 60.0)?;
    let cfg = EvolveConfig {
        t_end: 10.0,
        dt: 0.01,
        enforce_causal: false,
        ..Default::default()
    };

    let params = ModelParams::new(1.0)?;
    let init = Perturbation::Unstable.state::<f64>(&params, &grid)?;
    let tr = evolve_linearized(&params, &init, &grid, &cfg)?;
    let p = tr.center();
    let fit = fit_unstable(&TailSeries::new(&p.t, &p.u, 0.0, (1.0, 10.0))?)?;
    println!("alpha = 1: growth rate {:.6} (s0 = {:.6})", fit.s0, growth_rate(1.0));

    let params = ModelParams::new(0.5)?;
    let init = Perturbation::Mode { n: 1 }.state::<f64>(&params, &grid)?;
    let filters = vec![discrete_mode(0.5, 0, &grid)?];
    let tr = evolve_linearized_filtered(&params, &init, &grid, &cfg.with_t_end(40.0), &filters)?;
    let p = tr.center();
    let w = crossing_frequency(&p.t, &p.u)?;
    println!(
        "alpha = 1/2: mode frequency {w:.5} (omega_1 = {:.5})",
        oscillation_frequencies(0.5)[0]
    );
    Ok(())
}
