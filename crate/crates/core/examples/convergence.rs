//! Self-convergence of the evolution and energy conservation under
//! refinement.

use nlkg::evolution::{evolve, EvolveConfig};
use nlkg::model::{DataFamily, ModelParams};
use nlkg::numerics::GridSpec;

fn main() -> nlkg::Result<()> {
    let params = ModelParams::new(1.0)?;
    let mut finals = Vec::new();
    for dx in [0.04, 0.02, 0.01] {
        let grid = GridSpec::covering(dx, 80.0)?;
        let init = DataFamily::Gaussian.data(&params, 0.5f64, &grid)?;
        let cfg = EvolveConfig {
            t_end: 50.0,
            dt: dx / 2.0,
            dispersal_hold: 100.0,
            energy_every: 10,
            ..Default::default()
        };
        let tr = evolve(&params, &init, &grid, &cfg)?;
        println!("dx = {dx:<5} energy drift over [0, 50] = {:.3e}", tr.energy_drift());
        let short = evolve(&params, &init, &grid, &cfg.clone().with_t_end(10.0))?;
        finals.push(short.final_state.expect("final state").u);
    }
    let diff = |fine: &[f64], coarse: &[f64]| {
        (0..coarse.len() - 2)
            .map(|k| (coarse[k] - fine[2 * k]).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (diff(&finals[1], &finals[0]), diff(&finals[2], &finals[1]));
    println!("self-convergence order at t = 10: {:.3}", (e1 / e2).log2());
    Ok(())
}
