//! The double-double tier: ~31 significant digits, used when the bisection
//! has to resolve sigma* beyond what a double can hold.

use nlkg::evolution::EvolveConfig;
use nlkg::model::{DataFamily, ModelParams};
use nlkg::numerics::{DoubleDouble, GridSpec, Real};
use nlkg::threshold::run_member;

fn main() -> nlkg::Result<()> {
    let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
    println!("1/3 = {}", third.to_decimal());
    println!("sqrt 2 = {}", DoubleDouble::from_f64(2.0).sqrt().to_decimal());

    // two members 1e-20 apart are the same double but distinct here
    let base = DoubleDouble::parse_decimal("1.54337758049354").expect("decimal");
    let near = base + DoubleDouble::parse_decimal("1e-20").expect("decimal");
    println!("as doubles equal: {}", base.to_f64() == near.to_f64());
    println!("difference: {}", (near - base).to_decimal());

    let params = ModelParams::new(1.0)?;
    let grid = GridSpec::covering(0.04, 40.0)?;
    let cfg = EvolveConfig {
        t_end: 5.0,
        dt: 0.02,
        ..Default::default()
    };
    let a = run_member(&params, DataFamily::Gaussian, base, &grid, &cfg)?;
    let b = run_member(&params, DataFamily::Gaussian, base.to_f64(), &grid, &cfg)?;
    let (pa, pb) = (a.center(), b.center());
    let dev = pa.u.iter().zip(&pb.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("max |u_dd(t,0) - u_native(t,0)| over t in [0, 5]: {dev:.2e}");
    Ok(())
}
