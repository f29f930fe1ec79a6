//! Evolving `(S, 0)`: the static solution is stationary up to truncation
//! error, which seeds the unstable mode and grows like `e^{s0 t}`.

use nlkg::evolution::{evolve, EvolveConfig};
use nlkg::model::{static_profile, FieldState, ModelParams};
use nlkg::numerics::GridSpec;
use nlkg::spectral::growth_rate;

fn main() -> nlkg::Result<()> {
    let alpha = 1.0;
    let params = ModelParams::new(alpha)?;
    let grid = GridSpec::covering(0.02, 40.0)?;
    let s = static_profile::<f64>(&params, &grid);
    let init = FieldState::new(s.clone(), vec![0.0; grid.n_points]);
    let cfg = EvolveConfig {
        t_end: 16.0,
        dt: 0.01,
        enforce_causal: false,
        ..Default::default()
    };
    let tr = evolve(&params, &init, &grid, &cfg)?;
    let p = tr.center();
    println!("outcome: {}", tr.outcome.name());
    println!("{:>6} {:>14} {:>14}", "t", "|u(t,0) - S(0)|", "e^{s0 t} ratio");
    let s0 = growth_rate(alpha);
    let mut prev: Option<(f64, f64)> = None;
    for k in (0..p.t.len()).step_by(200) {
        let dev = (p.u[k] - s[0]).abs();
        match prev {
            Some((t, d)) => println!("{:>6.1} {:>14.3e} {:>14.3}", p.t[k], dev, (dev / d) / (s0 * (p.t[k] - t)).exp()),
            None => println!("{:>6.1} {:>14.3e} {:>14}", p.t[k], dev, "-"),
        }
        if dev > 0.0 {
            prev = Some((p.t[k], dev));
        }
    }
    Ok(())
}
