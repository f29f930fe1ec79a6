//! The five subcommands. Each writes one run directory and returns its path.

use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Map, Value};

use super::config::{Decimal, RunConfig, Start};
use super::output::{csv, RunDir, RunManifest, Table};
use crate::analysis::{self, analyze, extract_envelope, fit_unstable, growth_window, profile_match, TailSeries};
use crate::error::{invalid, Error, Result};
use crate::evolution::{evolve as run_evolve, evolve_linearized_filtered, Outcome, Trajectory};
use crate::model::{static_profile, static_solution, FieldState, ModelParams};
use crate::numerics::{DoubleDouble, GridSpec, Precision, Real};
use crate::spectral::{
    discrete_mode, eigenfunction, highest_mode, oscillation_frequencies, verify_spectrum_numerically, zero_mode,
    SpectralData,
};
use crate::threshold::{evolve_pair, find_threshold, trapped_continuation, trapping_time_estimate, BisectOptions};

/// Default domain for the spectrum command.
pub const SPECTRUM_X_MAX: f64 = 40.0;
/// Default offset of the sub/super-critical pair in half-widths.
pub const PAIR_HALF_WIDTHS: f64 = 10.0;
/// Levels, as multiples of `S(0)`, between which the pair difference is
/// fitted to an exponential.
pub const GROWTH_LEVELS: (f64, f64) = (1e-4, 5e-2);

fn parse<T: Real>(d: &Decimal, field: &str) -> Result<T> {
    T::parse_decimal(&d.as_str()).ok_or_else(|| Error::Config {
        field: field.to_string(),
        reason: format!("not a number: {}", d.as_str()),
    })
}

fn tag(alpha: f64) -> String {
    format!("a{alpha}")
}

fn outcome_value(o: &Outcome) -> Value {
    serde_json::to_value(o).unwrap_or(Value::Null)
}

pub fn evolve(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    match cfg.precision {
        Precision::Native => evolve_t::<f64>(cfg),
        Precision::Dd => evolve_t::<DoubleDouble>(cfg),
    }
}

fn evolve_t<T: Real>(cfg: &RunConfig) -> Result<PathBuf> {
    let params = ModelParams::new(cfg.alpha)?;
    let sigma: T = parse(&cfg.sigma, "sigma")?;
    let make = |g: &GridSpec| -> Result<FieldState<T>> {
        if cfg.linearized {
            cfg.perturbation.state(&params, g)
        } else {
            match cfg.start {
                Start::Family => cfg.family.data(&params, sigma, g),
                Start::Static => Ok(FieldState::new(static_profile(&params, g), vec![T::zero(); g.n_points])),
            }
        }
    };
    let grid = cfg.grid_for(cfg.t_end, make)?;
    let init = make(&grid)?;
    let mut ec = cfg.evolve_config();
    ec.enforce_causal = false;
    let tr = if cfg.linearized {
        let filters = if cfg.project_unstable {
            vec![discrete_mode(cfg.alpha, 0, &grid)?]
        } else {
            Vec::new()
        };
        evolve_linearized_filtered(&params, &init, &grid, &ec, &filters)?
    } else {
        run_evolve(&params, &init, &grid, &ec)?
    };
    info!("evolve alpha = {}: {}", cfg.alpha, tr.outcome.name());
    let name = cfg.name.clone().unwrap_or_else(|| format!("evolve_{}", tag(cfg.alpha)));
    let mut dir = RunDir::create(&cfg.out_root(), &name)?;
    dir.write_trajectory("", &tr)?;
    let mut results = Map::new();
    results.insert("outcome".into(), outcome_value(&tr.outcome));
    results.insert("steps".into(), json!(tr.steps));
    results.insert("truncated".into(), json!(tr.truncated));
    results.insert("energy_drift".into(), json!(tr.energy_drift()));
    results.insert("grid".into(), serde_json::to_value(grid)?);
    dir.finish("evolve", effective(cfg, &grid)?, results)
}

/// Config echo with the derived step and domain filled in.
fn effective(cfg: &RunConfig, grid: &GridSpec) -> Result<Value> {
    let mut c = cfg.clone();
    c.dt = Some(cfg.dt());
    c.x_max = Some(grid.x_max());
    c.out = None;
    Ok(serde_json::to_value(c)?)
}

pub fn bisect(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    match cfg.precision {
        Precision::Native => bisect_t::<f64>(cfg),
        Precision::Dd => bisect_t::<DoubleDouble>(cfg),
    }
}

fn bisect_t<T: Real>(cfg: &RunConfig) -> Result<PathBuf> {
    let params = ModelParams::new(cfg.alpha)?;
    let b = &cfg.bisection;
    let seeds: (T, T) = (parse(&b.seeds.0, "bisection.seeds[0]")?, parse(&b.seeds.1, "bisection.seeds[1]")?);
    // only the spacing matters: every iterate gets a domain sized for its t_end
    let template = GridSpec::covering(cfg.dx, cfg.x_max.unwrap_or(64.0))?;
    let mut ec = cfg.evolve_config();
    ec.snapshot_times.clear();
    let opts = BisectOptions {
        target_digits: b.target_digits,
        ..Default::default()
    };
    let rec = find_threshold(&params, cfg.family, &template, &ec, seeds, &opts)?;
    let name = cfg.name.clone().unwrap_or_else(|| format!("bisect_{}", tag(cfg.alpha)));
    let mut dir = RunDir::create(&cfg.out_root(), &name)?;
    dir.write_json("bisection.json", &rec)?;

    let star: T = rec.sigma_star();
    let half = T::parse_decimal(&rec.half_width).unwrap_or_else(T::zero);
    let offset: T = match &b.pair_offset {
        Some(d) => parse(d, "bisection.pair_offset")?,
        None => half.scale(PAIR_HALF_WIDTHS),
    };
    let pair_t_end = b
        .pair_t_end
        .unwrap_or_else(|| trapping_time_estimate(offset.to_f64(), cfg.alpha, None) + crate::threshold::T_MARGIN);
    let mut pc = cfg.evolve_config();
    pc.t_end = pair_t_end;
    pc.snapshot_times.retain(|&t| t <= pair_t_end);
    let (sub, sup) = evolve_pair(&params, cfg.family, &template, &pc, star, offset)?;
    dir.write_trajectory("sub/", &sub)?;
    dir.write_trajectory("super/", &sup)?;

    let mut results = Map::new();
    results.insert("sigma_star".into(), json!(rec.sigma_star));
    results.insert("half_width".into(), json!(rec.half_width));
    results.insert("digits".into(), json!(rec.digits));
    results.insert("iterations".into(), json!(rec.iterations.len()));
    results.insert("stop_reason".into(), serde_json::to_value(rec.stop_reason)?);
    results.insert("pair_offset".into(), json!(offset.to_decimal()));
    results.insert("sub_outcome".into(), outcome_value(&sub.outcome));
    results.insert("super_outcome".into(), outcome_value(&sup.outcome));
    if let Some(trap_end) = b.trap_t_end {
        let mut tc = cfg.evolve_config();
        tc.t_end = trap_end;
        let tr = trapped_continuation(&params, cfg.family, &template, &tc, star, b.trap_switch)?;
        dir.write_trajectory("trapped/", &tr)?;
        results.insert("trapped_outcome".into(), outcome_value(&tr.outcome));
    }
    let mut eff = cfg.clone();
    eff.dt = Some(cfg.dt());
    eff.out = None;
    dir.finish("bisect", serde_json::to_value(eff)?, results)
}

pub fn spectrum(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let grid = GridSpec::covering(cfg.dx, cfg.x_max.unwrap_or(SPECTRUM_X_MAX))?;
    let data = SpectralData::compute(cfg.alpha, &grid)?;
    let check = verify_spectrum_numerically(cfg.alpha, &grid)?;
    let name = cfg.name.clone().unwrap_or_else(|| format!("spectrum_{}", tag(cfg.alpha)));
    let mut dir = RunDir::create(&cfg.out_root(), &name)?;
    dir.write_json("spectrum.json", &json!({ "spectral_data": data, "numerical_check": check }))?;
    let mut header: Vec<String> = vec!["x".into()];
    header.extend((0..data.eigenprofiles.len()).map(|n| format!("v{n}")));
    header.push("zero_mode".into());
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..grid.n_points).map(|i| {
        let mut r = vec![grid.x(i)];
        r.extend(data.eigenprofiles.iter().map(|v| v[i]));
        r.push(data.zero_mode[i]);
        r
    });
    dir.write("profiles.csv", csv(&h, rows).as_bytes())?;
    let mut results = Map::new();
    results.insert("lambdas".into(), json!(data.lambdas));
    results.insert("s0".into(), json!(data.s0));
    results.insert("omegas".into(), json!(data.omegas));
    results.insert("resonant".into(), json!(data.resonant));
    results.insert("antibound".into(), json!(data.antibound));
    results.insert("max_rel_deviation".into(), json!(check.max_rel_deviation));
    dir.finish("spectrum", effective(cfg, &grid)?, results)
}

/// Probe series at `x = 0` and its run configuration.
struct RunData {
    dir: PathBuf,
    cfg: RunConfig,
    params: ModelParams,
}

impl RunData {
    fn open(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(super::output::MANIFEST);
        if !manifest_path.exists() {
            return Err(Error::MissingInput(manifest_path.display().to_string()));
        }
        let m = RunManifest::load(dir)?;
        let cfg: RunConfig = serde_json::from_value(m.config)?;
        let params = ModelParams::new(cfg.alpha)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            cfg,
            params,
        })
    }

    fn has(&self, rel: &str) -> bool {
        self.dir.join(rel).exists()
    }

    fn require(&self, rel: &str) -> Result<PathBuf> {
        let p = self.dir.join(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::MissingInput(p.display().to_string()))
        }
    }

    /// `(t, u, x)` from the first probe of `rel`.
    fn probe(&self, rel: &str) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let table = Table::read(&self.require(rel)?)?;
        let col = table
            .header
            .iter()
            .position(|h| h.starts_with("u@"))
            .ok_or_else(|| Error::MissingInput(format!("{rel}: no probe column")))?;
        let x: f64 = table.header[col][2..].parse().unwrap_or(0.0);
        let t = table.column("t").ok_or_else(|| Error::MissingInput(format!("{rel}: no t column")))?;
        Ok((t.to_vec(), table.columns[col].clone(), x))
    }

    /// Longest trapped record: the continued run when present.
    fn trapped_probe(&self) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        for rel in ["trapped/probes.csv", "probes.csv", "super/probes.csv"] {
            if self.has(rel) {
                return self.probe(rel);
            }
        }
        Err(Error::MissingInput(format!("{}: no probes.csv", self.dir.display())))
    }

    fn center(&self, x: f64) -> f64 {
        static_solution(&self.params, x)
    }
}

/// Exponential fit to the difference of the super- and sub-critical probes.
fn pair_growth(run: &RunData) -> Result<analysis::UnstableFit> {
    let (ta, ua, _) = run.probe("sub/probes.csv")?;
    let (_, ub, _) = run.probe("super/probes.csv")?;
    let m = ua.len().min(ub.len());
    let diff: Vec<f64> = (0..m).map(|i| ub[i] - ua[i]).collect();
    let s0 = run.params.static_amplitude();
    let w = growth_window(&ta[..m], &diff, GROWTH_LEVELS.0 * s0, GROWTH_LEVELS.1 * s0)
        .ok_or_else(|| invalid("pair", "difference never climbs through the fit levels"))?;
    fit_unstable(&TailSeries::new(&ta[..m], &diff, 0.0, w)?)
}

pub fn fit(run: &Path, window: Option<(f64, f64)>) -> Result<PathBuf> {
    let data = RunData::open(run)?;
    let (t, u, x) = data.trapped_probe()?;
    let center = data.center(x);
    let series = match window {
        Some(w) => TailSeries::new(&t, &u, center, w)?,
        None => TailSeries::trapped(&t, &u, center)?,
    };
    let mut report = analyze(&data.params, &series)?;
    if data.has("sub/probes.csv") && data.has("super/probes.csv") {
        match pair_growth(&data) {
            Ok(f) => {
                report.a0 = Some(f.a0);
                report.s0_measured = Some(f.s0);
            }
            Err(e) => report.warnings.push(format!("unstable fit: {e}")),
        }
    }
    for w in &report.warnings {
        warn!("{w}");
    }
    let mut dir = RunDir::create(&data.dir, "fit")?;
    dir.write_json("fit.json", &report)?;
    let rows = series.t.iter().zip(&series.y).map(|(&t, &y)| {
        let m = report.model(t);
        vec![t, y, m, y - m]
    });
    dir.write("residual.csv", csv(&["t", "y", "model", "residual"], rows).as_bytes())?;
    let offset = report.mode_amps.first().map_or(0.0, |m| m.offset);
    let centered = TailSeries::new(
        &series.t,
        &series.y.iter().map(|y| y - offset).collect::<Vec<_>>(),
        0.0,
        series.window,
    )?;
    if let Ok(env) = extract_envelope(&centered) {
        let rows = env.into_iter().map(|(t, a)| vec![t, a]);
        dir.write("envelope.csv", csv(&["t", "amplitude"], rows).as_bytes())?;
    }
    let mut results = Map::new();
    results.insert("fit".into(), serde_json::to_value(&report)?);
    dir.finish("fit", json!({ "run": run.display().to_string(), "window": window }), results)
}

fn figure_label(alpha: f64) -> String {
    match alpha {
        a if (a - 1.5).abs() < 1e-12 => "fig2".into(),
        a if (a - 1.0).abs() < 1e-12 => "fig3".into(),
        a if (a - 0.5).abs() < 1e-12 => "fig4".into(),
        a => format!("figure_{}", tag(a)),
    }
}

/// Snapshot profiles `(t, u)` under `prefix`.
fn read_snapshots(run: &RunData, prefix: &str) -> Result<Vec<(f64, Vec<f64>, f64)>> {
    let dir = run.dir.join(prefix).join("snapshots");
    let mut files: Vec<PathBuf> = match std::fs::read_dir(&dir) {
        Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).collect(),
        Err(_) => return Ok(Vec::new()),
    };
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            let t = text
                .lines()
                .next()
                .and_then(|l| l.strip_prefix("# t = "))
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::MissingInput(format!("{}: no time header", p.display())))?;
            let table = Table::parse(&text).ok_or_else(|| Error::MissingInput(p.display().to_string()))?;
            let x = table.column("x").ok_or_else(|| Error::MissingInput(p.display().to_string()))?;
            let dx = if x.len() > 1 { x[1] - x[0] } else { 1.0 };
            let u = table.column("u").ok_or_else(|| Error::MissingInput(p.display().to_string()))?;
            Ok((t, u.to_vec(), dx))
        })
        .collect()
}

/// Plot-data bundles: the sub/super-critical pair, normalized snapshot
/// profiles against the relevant reference, and for runs with an
/// oscillatory mode the second-order residual.
pub fn figures(runs: &[PathBuf], out_root: &Path) -> Result<PathBuf> {
    if runs.is_empty() {
        return Err(Error::Config {
            field: "runs".into(),
            reason: "no run directories given".into(),
        });
    }
    let opened = runs.iter().map(|r| RunData::open(r)).collect::<Result<Vec<_>>>()?;
    let mut dir = RunDir::create(out_root, "figures")?;
    let mut results = Map::new();
    for run in &opened {
        let label = figure_label(run.cfg.alpha);
        let (ta, ua, x) = run.probe("sub/probes.csv")?;
        let (_, ub, _) = run.probe("super/probes.csv")?;
        let m = ua.len().min(ub.len());
        let center = run.center(x);
        let rows = (0..m).map(|i| vec![ta[i], ua[i], ub[i], center]);
        dir.write(
            &format!("{label}/pair.csv"),
            csv(&["t", "u_sub", "u_super", "s"], rows).as_bytes(),
        )?;

        let prefix = if run.has("trapped/snapshots") { "trapped" } else { "super" };
        let snaps = read_snapshots(run, prefix)?;
        if snaps.is_empty() {
            return Err(Error::MissingInput(format!(
                "{}: no snapshots (rerun bisect with --snapshots)",
                run.dir.join(prefix).display()
            )));
        }
        let dx = snaps[0].2;
        let n = snaps[0].1.len();
        let grid = GridSpec::new(dx, n)?;
        let oscillatory = highest_mode(run.cfg.alpha) >= 1;
        let (reference, ref_name) = if oscillatory {
            (eigenfunction::<f64>(run.cfg.alpha, 1, &grid)?, "v1")
        } else {
            (zero_mode::<f64>(run.cfg.alpha, &grid)?, "zero_mode")
        };
        let s = static_profile::<f64>(&run.params, &grid);
        let mut matches = Vec::new();
        for (t, u, _) in &snaps {
            let pm = profile_match(u, &reference, &run.params, &grid, analysis::PROFILE_FIT_X)?;
            matches.push(json!({ "t": t, "scale": pm.scale, "misfit": pm.misfit }));
        }
        let keep = grid.index_of(2.0 * analysis::PROFILE_FIT_X) + 1;
        let mut header = vec!["x".to_string(), ref_name.to_string()];
        header.extend(snaps.iter().map(|(t, _, _)| format!("t={t}")));
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..keep.min(n)).map(|i| {
            let mut r = vec![grid.x(i), reference[i]];
            for ((_, u, _), m) in snaps.iter().zip(&matches) {
                let scale = m["scale"].as_f64().unwrap_or(1.0);
                r.push((u[i] - s[i]) / scale);
            }
            r
        });
        dir.write(&format!("{label}/profiles.csv"), csv(&h, rows).as_bytes())?;
        dir.write_json(&format!("{label}/profile_match.json"), &matches)?;

        let mut entry = Map::new();
        entry.insert("run".into(), json!(run.dir.display().to_string()));
        entry.insert("alpha".into(), json!(run.cfg.alpha));
        entry.insert("reference".into(), json!(ref_name));
        if oscillatory {
            let (t, u, x) = run.trapped_probe()?;
            let series = TailSeries::trapped(&t, &u, run.center(x))?;
            let report = analyze(&run.params, &series)?;
            let rows = series.t.iter().zip(&series.y).map(|(&t, &y)| vec![t, y - report.model(t)]);
            dir.write("fig5/residual.csv", csv(&["t", "residual"], rows).as_bytes())?;
            let two_omega = 2.0 * oscillation_frequencies(run.cfg.alpha)[0];
            dir.write_json(
                "fig5/marker.json",
                &json!({
                    "two_omega1": two_omega,
                    "residual_freq": report.residual_freq,
                    "residual_dft_freq": report.residual_dft_freq,
                }),
            )?;
            entry.insert("fig5".into(), json!(true));
        }
        results.insert(label, Value::Object(entry));
    }
    let list: Vec<String> = runs.iter().map(|r| r.display().to_string()).collect();
    dir.finish("figures", json!({ "runs": list }), results)
}

/// Short human summary of a finished trajectory.
pub fn describe(tr: &Trajectory) -> String {
    format!("{} after {} steps", tr.outcome.name(), tr.steps)
}
