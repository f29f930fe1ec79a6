//! Below the energy of `S` the sign of `K` decides between global existence
//! and blowup. Scaled copies `beta * S` sit on both sides.

use nlkg::evolution::{evolve, fitted_grid, payne_sattinger_check, EvolveConfig, PayneSattinger};
use nlkg::model::{static_profile, FieldState, ModelParams};

fn main() -> nlkg::Result<()> {
    let params = ModelParams::new(1.0)?;
    let t_end = 60.0;
    for beta in [0.8, 0.95, 1.05, 1.2] {
        let make = |g: &_| -> nlkg::Result<FieldState<f64>> {
            let u: Vec<f64> = static_profile::<f64>(&params, g).iter().map(|v| beta * v).collect();
            let n = u.len();
            Ok(FieldState::new(u, vec![0.0; n]))
        };
        let grid = fitted_grid(0.02, t_end, 10.0, &make)?;
        let init = make(&grid)?;
        let check = payne_sattinger_check(&init, &params, &grid)?;
        let cfg = EvolveConfig {
            t_end,
            dt: 0.01,
            ..Default::default()
        };
        let out = evolve(&params, &init, &grid, &cfg)?.outcome;
        let (e, e0, k) = match check {
            PayneSattinger::Dispersal { energy, static_energy, k } | PayneSattinger::Blowup { energy, static_energy, k } => {
                (energy, static_energy, k)
            }
            PayneSattinger::NotApplicable { energy, static_energy } => (energy, static_energy, f64::NAN),
        };
        println!(
            "beta = {beta:<5} E = {e:.5} (E0 = {e0:.5})  K = {k:+.4}  -> {} at t = {:.2}",
            out.name(),
            out.time()
        );
    }
    Ok(())
}
