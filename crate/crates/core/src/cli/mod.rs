//! Command-line front end.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::Precision;
use config::{Decimal, RunConfig, OUT_DIR_ENV};

#[derive(Debug, Parser)]
#[command(name = "nlkg", version, about = "Critical collapse in the 1D focusing nonlinear Klein-Gordon equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one initial datum and record probes, energy and snapshots.
    Evolve(Overrides),
    /// Bisect the data family for the threshold parameter.
    Bisect(Overrides),
    /// Spectrum of the linearized operator: closed form and numerical check.
    Spectrum(Overrides),
    /// Tail, mode and growth-rate fits on a finished run.
    Fit {
        /// Run directory written by `evolve` or `bisect`.
        run: PathBuf,
        /// Fit window as `lo,hi`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        window: Option<Vec<f64>>,
    },
    /// Plot-data bundles from finished bisection runs.
    Figures {
        runs: Vec<PathBuf>,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
}

/// Settings shared by the run commands. Flags override the config file.
#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exponent; a comma list runs a sweep.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Family parameter (decimal string, exact at dd precision).
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// native or dd.
    #[arg(long)]
    pub precision: Option<Precision>,
    /// Evolve the linearization about the static solution.
    #[arg(long)]
    pub linearized: bool,
    #[arg(long, value_delimiter = ',')]
    pub probes: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    #[arg(long)]
    pub target_digits: Option<u32>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// The effective configuration for each requested alpha.
    pub fn resolve(&self) -> Result<Vec<RunConfig>> {
        let mut base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &self.sigma {
            base.sigma = Decimal::Text(s.clone());
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f { base.$g = v; })* };
        }
        set!(dx => dx, cfl => cfl, t_end => t_end, precision => precision);
        if self.xmax.is_some() {
            base.x_max = self.xmax;
        }
        if self.dt.is_some() {
            base.dt = self.dt;
        }
        if self.linearized {
            base.linearized = true;
        }
        if let Some(p) = &self.probes {
            base.probes = p.clone();
        }
        if let Some(s) = &self.snapshots {
            base.snapshots = s.clone();
        }
        if let Some(d) = self.target_digits {
            base.bisection.target_digits = d;
        }
        if self.out.is_some() {
            base.out = self.out.clone();
        }
        let alphas = if self.alpha.is_empty() { vec![base.alpha] } else { self.alpha.clone() };
        let sweep = alphas.len() > 1;
        alphas
            .into_iter()
            .map(|a| {
                let mut c = base.clone();
                c.alpha = a;
                if sweep {
                    c.name = c.name.map(|n| format!("{n}_a{a}"));
                }
                c.validate()?;
                Ok(c)
            })
            .collect()
    }
}

fn sweep(o: &Overrides, f: fn(&RunConfig) -> Result<PathBuf>) -> Result<Vec<PathBuf>> {
    let configs = o.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(o.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config {
            field: "jobs".into(),
            reason: e.to_string(),
        })?;
    pool.install(|| configs.par_iter().map(f).collect())
}

/// Runs the parsed command and returns the run directories written.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Evolve(o) => sweep(&o, commands::evolve),
        Command::Bisect(o) => sweep(&o, commands::bisect),
        Command::Spectrum(o) => sweep(&o, commands::spectrum),
        Command::Fit { run, window } => {
            let w = window.map(|w| (w[0], w[1]));
            Ok(vec![commands::fit(&run, w)?])
        }
        Command::Figures { runs, out } => {
            let root = out.unwrap_or_else(|| PathBuf::from("runs"));
            Ok(vec![commands::figures(&runs, &root)?])
        }
    }
}
