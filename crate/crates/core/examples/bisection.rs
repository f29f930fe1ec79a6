//! Threshold search on the Gaussian family and the scaling of the time spent
//! near `S` with the distance from threshold.
//!
//! cargo run --release --example bisection -- 1.5

use nlkg::evolution::EvolveConfig;
use nlkg::model::{DataFamily, ModelParams};
use nlkg::numerics::GridSpec;
use nlkg::threshold::{ejection_scaling, find_threshold, BisectOptions};

fn main() -> nlkg::Result<()> {
    let alpha: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1.0);
    let params = ModelParams::new(alpha)?;
    let grid = GridSpec::covering(0.02, 80.0)?;
    let cfg = EvolveConfig {
        t_end: 40.0,
        dt: 0.01,
        ..Default::default()
    };
    let rec = find_threshold(&params, DataFamily::Gaussian, &grid, &cfg, (0.5f64, 3.0f64), &BisectOptions::default())?;
    println!(
        "alpha = {alpha}: sigma* = {} +- {} ({:.2} digits, {} iterations, {:?})",
        rec.sigma_star,
        rec.half_width,
        rec.digits,
        rec.iterations.len(),
        rec.stop_reason
    );
    let forced = rec.iterations.iter().filter(|i| i.forced_dispersal).count();
    if forced > 0 {
        println!("{forced} iterates were still oscillating at t_end and counted as dispersal");
    }
    let sc = ejection_scaling(&params, DataFamily::Gaussian, &grid, &cfg, rec.sigma_star_f64(), &[1e-4, 1e-6, 1e-8, 1e-10])?;
    for (d, t) in &sc.points {
        println!("  delta = {d:.0e}  ejection at t = {t:.3}");
    }
    println!(
        "slope {:.4} vs 1/s0 = {:.4} ({:.1}% off)",
        sc.slope,
        sc.expected_slope,
        100.0 * sc.relative_error
    );
    Ok(())
}
