//! Closed-form spectrum of the linearization about `S` and a check against
//! the discrete operator.
//!
//! cargo run --example spectrum -- 0.5 1 1.5

use nlkg::numerics::GridSpec;
use nlkg::spectral::{verify_spectrum_numerically, SpectralData};

fn main() -> nlkg::Result<()> {
    let alphas: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let alphas = if alphas.is_empty() { vec![0.5, 1.0, 1.5] } else { alphas };
    let grid = GridSpec::covering(0.01, 40.0)?;
    for alpha in alphas {
        let d = SpectralData::compute(alpha, &grid)?;
        println!("alpha = {alpha}");
        println!("  lambda_n  {:?}", d.lambdas);
        println!("  s0        {:.12}", d.s0);
        println!("  omega_n   {:?}", d.omegas);
        println!("  resonant  {}", d.resonant);
        println!("  antibound {:?}", d.antibound);
        let c = verify_spectrum_numerically(alpha, &grid)?;
        println!(
            "  discrete operator: {:?} (expected {:?}), max rel deviation {:.2e}",
            &c.computed[..c.expected.len()],
            c.expected,
            c.max_rel_deviation
        );
    }
    Ok(())
}
