//! Declarative run configuration: a JSON file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{fitted_grid, EvolveConfig, Perturbation, CFL_LIMIT, DEFAULT_CFL};
use crate::model::{DataFamily, FieldState};
use crate::numerics::{GridSpec, Precision, Real};

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "NLKG_OUT_DIR";
/// Padding added to `t_end` when the domain size is automatic.
pub const AUTO_PAD: f64 = 15.0;

/// A number given either as a JSON number or as a decimal string (the
/// latter keeps double-double parameters exact).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Number(f64),
    Text(String),
}

impl Decimal {
    pub fn as_str(&self) -> String {
        match self {
            Decimal::Number(x) => format!("{x:?}"),
            Decimal::Text(s) => s.trim().to_string(),
        }
    }
}

impl From<f64> for Decimal {
    fn from(x: f64) -> Self {
        Decimal::Number(x)
    }
}

/// Starting state of a nonlinear evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// A member of the data family at parameter `sigma`.
    #[default]
    Family,
    /// `(S, 0)`.
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BisectionBlock {
    pub seeds: (Decimal, Decimal),
    pub target_digits: u32,
    /// Offset of the sub/super-critical pair from σ*; default ten
    /// half-widths.
    pub pair_offset: Option<Decimal>,
    /// Length of the pair runs; default trapping estimate + 30.
    pub pair_t_end: Option<f64>,
    /// When set, σ* is also continued on the center-stable side to this time.
    pub trap_t_end: Option<f64>,
    /// Start of the unstable-mode suppression in the continued run.
    pub trap_switch: f64,
}

impl Default for BisectionBlock {
    fn default() -> Self {
        Self {
            seeds: (Decimal::Number(0.5), Decimal::Number(3.0)),
            target_digits: 12,
            pair_offset: None,
            pair_t_end: None,
            trap_t_end: None,
            trap_switch: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub dx: f64,
    /// Domain length; `None` means `t_end + 15` beyond the data support.
    pub x_max: Option<f64>,
    /// Time step; `None` means `cfl * dx`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub precision: Precision,
    pub t_end: f64,
    pub family: DataFamily,
    pub sigma: Decimal,
    pub start: Start,
    pub linearized: bool,
    pub perturbation: Perturbation,
    /// Remove the discrete unstable mode after every linearized step.
    pub project_unstable: bool,
    pub probes: Vec<f64>,
    pub snapshots: Vec<f64>,
    pub energy_every: usize,
    pub bisection: BisectionBlock,
    pub out: Option<PathBuf>,
    pub name: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            dx: 0.02,
            x_max: None,
            dt: None,
            cfl: DEFAULT_CFL,
            precision: Precision::Native,
            t_end: 50.0,
            family: DataFamily::Gaussian,
            sigma: Decimal::Number(1.0),
            start: Start::Family,
            linearized: false,
            perturbation: Perturbation::Unstable,
            project_unstable: false,
            probes: vec![0.0],
            snapshots: Vec::new(),
            energy_every: 50,
            bisection: BisectionBlock::default(),
            out: None,
            name: None,
        }
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Parses a config file; syntax and type errors carry line and column.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(&path.display().to_string(), e.to_string()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            config_err(
                origin,
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.cfl * self.dx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(config_err("alpha", format!("must be positive, got {}", self.alpha)));
        }
        if !(self.dx > 0.0) {
            return Err(config_err("dx", format!("must be positive, got {}", self.dx)));
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_LIMIT) {
            return Err(config_err("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        let dt = self.dt();
        if !(dt > 0.0) || dt > CFL_LIMIT * self.dx * (1.0 + 1e-12) {
            return Err(config_err(
                "dt",
                format!("dt = {dt} violates the CFL constraint dt <= {} * dx = {}", CFL_LIMIT, self.dx),
            ));
        }
        if !(self.t_end > 0.0) {
            return Err(config_err("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if let Some(x) = self.x_max {
            if !(x > 6.0 * self.dx) {
                return Err(config_err("x_max", format!("too small: {x}")));
            }
        }
        if self.energy_every == 0 {
            return Err(config_err("energy_every", "must be at least 1"));
        }
        if self.sigma.as_str().parse::<f64>().map_or(true, |s| !(s > 0.0)) {
            return Err(config_err("sigma", format!("not a positive number: {}", self.sigma.as_str())));
        }
        let b = &self.bisection;
        if b.target_digits > self.precision.max_digits() {
            return Err(config_err(
                "bisection.target_digits",
                format!(
                    "{} exceeds the {} digits available at {:?} precision",
                    b.target_digits,
                    self.precision.max_digits(),
                    self.precision
                ),
            ));
        }
        for (name, s) in [("bisection.seeds[0]", &b.seeds.0), ("bisection.seeds[1]", &b.seeds.1)] {
            if s.as_str().parse::<f64>().map_or(true, |v| !(v > 0.0)) {
                return Err(config_err(name, format!("not a positive number: {}", s.as_str())));
            }
        }
        Ok(())
    }

    /// Explicit domain when `x_max` is set, otherwise `t_end + 15` beyond
    /// the support of the data built by `make`.
    pub fn grid_for<T: Real>(&self, t_end: f64, make: impl Fn(&GridSpec) -> Result<FieldState<T>>) -> Result<GridSpec> {
        match self.x_max {
            Some(x) => GridSpec::covering(self.dx, x),
            None => fitted_grid(self.dx, t_end, AUTO_PAD, make),
        }
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            t_end: self.t_end,
            dt: self.dt(),
            probe_points: self.probes.clone(),
            snapshot_times: self.snapshots.clone(),
            energy_every: self.energy_every,
            enforce_causal: self.x_max.is_none(),
            ..Default::default()
        }
    }

    /// Output root: explicit setting, then the environment, then `runs`.
    pub fn out_root(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(RunConfig::parse(&text, "echo").unwrap(), c);
    }

    #[test]
    fn parse_errors_name_the_location() {
        let err = RunConfig::parse("{\n  \"alpha\": \"x\"\n}", "cfg.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let err = RunConfig::parse("{\"alpah\": 1}", "cfg.json").unwrap_err();
        assert!(err.to_string().contains("alpah"));
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let c = RunConfig {
            dt: Some(0.05),
            ..Default::default()
        };
        let e = c.validate().unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "dt"), "{e}");
        assert!(e.to_string().contains("CFL"));
    }

    #[test]
    fn sigma_accepts_strings() {
        let c = RunConfig::parse(r#"{"sigma": "1.5433775804935408123", "precision": "dd"}"#, "x").unwrap();
        assert_eq!(c.sigma.as_str(), "1.5433775804935408123");
        assert_eq!(c.precision, Precision::Dd);
        c.validate().unwrap();
    }
}
