//! Driving the CLI layer from code: a config, one run directory, and the
//! checksummed manifest that indexes it.

use nlkg::cli::commands;
use nlkg::cli::config::RunConfig;
use nlkg::cli::output::RunManifest;

fn main() -> nlkg::Result<()> {
    let out = std::env::temp_dir().join("nlkg-example");
    let cfg = RunConfig::parse(
        r#"{"alpha": 1.5, "sigma": 1.0, "t_end": 20, "snapshots": [5, 10], "probes": [0, 2]}"#,
        "inline",
    )?;
    let cfg = RunConfig {
        out: Some(out),
        ..cfg
    };
    let dir = commands::evolve(&cfg)?;
    let m = RunManifest::load(&dir)?;
    println!("{}", dir.display());
    println!("outcome: {}", m.results["outcome"]);
    for f in &m.files {
        println!("  {:<28} {:>8} bytes  {}", f.path, f.bytes, &f.sha256[..16]);
    }
    Ok(())
}
