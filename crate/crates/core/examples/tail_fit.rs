//! Trapped-phase analysis at threshold. The run at sigma* is held on the
//! center-stable side of `S` by removing the unstable-mode component after
//! `t = 8`, so the approach to `S` can be followed to `t = 150`.
//!
//! cargo run --release --example tail_fit -- 0.5

use nlkg::analysis::{analyze, TailSeries};
use nlkg::evolution::EvolveConfig;
use nlkg::model::{DataFamily, ModelParams};
use nlkg::numerics::GridSpec;
use nlkg::threshold::{find_threshold, trapped_continuation, BisectOptions};

fn main() -> nlkg::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1.5);
    let params = ModelParams::new(alpha)?;
    let grid = GridSpec::covering(0.02, 80.0)?;
    let cfg = EvolveConfig {
        t_end: 40.0,
        dt: 0.01,
        ..Default::default()
    };
    let rec = find_threshold(&params, DataFamily::Gaussian, &grid, &cfg, (0.5f64, 3.0f64), &BisectOptions::default())?;
    let tr = trapped_continuation(&params, DataFamily::Gaussian, &grid, &cfg.with_t_end(150.0), rec.sigma_star_f64(), 8.0)?;
    let p = tr.center();
    let series = TailSeries::trapped(&p.t, &p.u, params.static_amplitude())?;
    let report = analyze(&params, &series)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
