//! Run configuration: a TOML file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Region,
    Manifold,
    Audit,
    Counterexample,
    Persist,
    Plotdata,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Region => "region",
            Command::Manifold => "manifold",
            Command::Audit => "audit",
            Command::Counterexample => "counterexample",
            Command::Persist => "persist",
            Command::Plotdata => "plotdata",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Whitespace-delimited columns under a `#` header.
    #[default]
    Table,
    /// One `key=value` line per row.
    Records,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Shoot,
    Transform,
}

/// Everything a command reads. Unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub system: Option<String>,
    pub params: BTreeMap<String, f64>,
    /// Samples per axis for sampled inequalities.
    pub density: Option<usize>,
    /// Grid intervals per z-axis; a single entry applies to every axis.
    pub intervals: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub orders: Option<Vec<u32>>,
    pub resolution: Option<f64>,
    pub method: Option<Method>,
    pub pairs: Option<usize>,
    pub seed: Option<u64>,
    pub t_probe: Option<f64>,
    /// `persist`: also intersect the forward and backward graphs.
    pub intersect: Option<bool>,
    /// `plotdata`: β sweep `[lo, hi]` with this many points, and the ω values.
    pub beta_range: Option<(f64, f64)>,
    pub beta_steps: Option<usize>,
    pub omegas: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `other` replace those in `self`; parameters are merged.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            command, system, density, intervals, tol, output, format, orders, resolution, method, pairs, seed,
            t_probe, intersect, beta_range, beta_steps, omegas
        );
        self.params.extend(other.params);
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Config(format!("{name} must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("tol", self.tol)?;
        positive("resolution", self.resolution)?;
        positive("t_probe", self.t_probe)?;
        if self.density == Some(0) {
            return Err(CliError::Config("density must be at least 1".into()));
        }
        if let Some(iv) = &self.intervals {
            if iv.is_empty() || iv.contains(&0) {
                return Err(CliError::Config("intervals must be nonempty and positive".into()));
            }
        }
        if let Some(orders) = &self.orders {
            if orders.contains(&0) {
                return Err(CliError::Config("orders start at 1".into()));
            }
        }
        if let Some((lo, hi)) = self.beta_range {
            if !(lo > 0.0 && hi > lo) {
                return Err(CliError::Config("beta_range must satisfy 0 < lo < hi".into()));
            }
        }
        Ok(())
    }

    pub fn system_name(&self) -> Result<&str, CliError> {
        self.system.as_deref().ok_or_else(|| CliError::Config("no system given".into()))
    }

    pub fn density(&self) -> usize {
        self.density.unwrap_or(17)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    /// Intervals for `m` axes, `default` when unset.
    pub fn intervals_for(&self, m: usize, default: usize) -> Result<Vec<usize>, CliError> {
        match &self.intervals {
            None => Ok(vec![default; m]),
            Some(v) if v.len() == 1 => Ok(vec![v[0]; m]),
            Some(v) if v.len() == m => Ok(v.clone()),
            Some(v) => Err(CliError::Config(format!("{} interval counts given for {m} axes", v.len()))),
        }
    }
}
