//! Campaign configuration: defaults, a flat `key = value` file format, and
//! key-by-key overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sampling::EnsembleKind;
use crate::su2::Spin;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Campaign {
    Distribution,
    MeansVsJ,
    ConfigGrid,
    MeansGivenTheta,
    BasePerturbation,
}

impl Campaign {
    pub const ALL: [Campaign; 5] = [
        Campaign::Distribution,
        Campaign::MeansVsJ,
        Campaign::ConfigGrid,
        Campaign::MeansGivenTheta,
        Campaign::BasePerturbation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Campaign::Distribution => "distribution",
            Campaign::MeansVsJ => "means-vs-j",
            Campaign::ConfigGrid => "config-grid",
            Campaign::MeansGivenTheta => "means-given-theta",
            Campaign::BasePerturbation => "base-perturbation",
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Campaign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().replace('_', "-");
        Campaign::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown campaign '{s}'")))
    }
}

/// Fixed configuration anchoring a perturbation scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseConfig {
    Regular,
    Disphenoid,
}

impl BaseConfig {
    pub fn name(self) -> &'static str {
        match self {
            BaseConfig::Regular => "regular",
            BaseConfig::Disphenoid => "disphenoid",
        }
    }
}

impl fmt::Display for BaseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "regular" => Ok(BaseConfig::Regular),
            "disphenoid" => Ok(BaseConfig::Disphenoid),
            other => Err(Error::Config(format!("unknown base '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub campaign: Campaign,
    /// The spin; for `means-vs-j` the largest spin of the sweep.
    pub j: Spin,
    /// Smallest spin of a `means-vs-j` sweep.
    pub j_min: Spin,
    pub ensemble: Option<EnsembleKind>,
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
    pub grid_a: usize,
    pub grid_b: usize,
    pub base: BaseConfig,
    pub tolerance: f64,
    pub max_restarts: usize,
    pub output_dir: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(campaign: Campaign) -> Self {
        Self {
            campaign,
            j: Spin::HALF,
            j_min: Spin::HALF,
            ensemble: None,
            samples: 1000,
            bins: 100,
            seed: 0,
            grid_a: 60,
            grid_b: 60,
            base: BaseConfig::Regular,
            tolerance: 1e-10,
            max_restarts: 32,
            output_dir: PathBuf::from("."),
            workers: 0,
        }
    }

    /// Sets one key. Accepts the long flag names with `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("invalid {what} '{value}'"));
        match key.trim().replace('-', "_").as_str() {
            "campaign" => self.campaign = value.parse()?,
            "j" | "j_max" => self.j = value.parse()?,
            "j_min" => self.j_min = value.parse()?,
            "ensemble" => self.ensemble = Some(value.parse()?),
            "samples" => self.samples = value.parse().map_err(|_| bad("samples"))?,
            "bins" => self.bins = value.parse().map_err(|_| bad("bins"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "grid" => (self.grid_a, self.grid_b) = parse_grid(value)?,
            "grid_a" => self.grid_a = value.parse().map_err(|_| bad("grid_a"))?,
            "grid_b" => self.grid_b = value.parse().map_err(|_| bad("grid_b"))?,
            "base" => self.base = value.parse()?,
            "tolerance" => self.tolerance = value.parse().map_err(|_| bad("tolerance"))?,
            "max_restarts" => self.max_restarts = value.parse().map_err(|_| bad("max_restarts"))?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            "workers" => self.workers = value.parse().map_err(|_| bad("workers"))?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.samples < 1 {
            return fail("samples must be at least 1");
        }
        if self.bins < 1 {
            return fail("bins must be at least 1");
        }
        if self.grid_a < 2 || self.grid_b < 2 {
            return fail("grid resolutions must be at least 2");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return fail("tolerance must be positive");
        }
        if self.campaign == Campaign::Distribution && self.ensemble.is_none() {
            return fail("the distribution campaign needs an ensemble");
        }
        if self.campaign == Campaign::MeansVsJ && self.j_min.twice() > self.j.twice() {
            return fail("j_min exceeds j");
        }
        Ok(())
    }
}

/// Parses `AxB`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let err = || Error::Config(format!("invalid grid '{s}', expected AxB"));
    let (a, b) = s.trim().split_once(['x', 'X']).ok_or_else(err)?;
    Ok((
        a.trim().parse().map_err(|_| err())?,
        b.trim().parse().map_err(|_| err())?,
    ))
}
