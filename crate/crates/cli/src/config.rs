use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use freqsec::assessment::{LocatedScenario, TableConfig, DEFAULT_NEIGHBORS};
use freqsec::fitting::FitConfig;
use freqsec::security::{CriticalInertiaOptions, SecurityThresholds};
use freqsec::sim::{NetworkTopology, SimSettings};
use serde::{Deserialize, Serialize};

/// Contents of a `--config` file. Relative paths are taken relative to the
/// file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub topology: PathBuf,
    pub scenarios: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Trajectory directory read by `fit`; `<output_dir>/trajectories` if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<PathBuf>,
    /// Offline table read by `assess`; `<output_dir>/offline_table.json` if unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Online case read by `assess`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub online: Option<PathBuf>,
    #[serde(default = "default_neighbors")]
    pub neighbors: usize,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSettings>,
    #[serde(default)]
    pub pmu_noise_sigma: f64,
    #[serde(default)]
    pub critical: CriticalInertiaOptions,
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_neighbors() -> usize {
    DEFAULT_NEIGHBORS
}

/// A config with its paths resolved and command-line overrides applied.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config `{}`", path.display()))?;
        let mut config: Self = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config `{}`", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut config.topology);
        fix(&mut config.scenarios);
        fix(&mut config.output_dir);
        for p in [
            &mut config.thresholds,
            &mut config.trajectories,
            &mut config.table,
            &mut config.online,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        Ok(config)
    }

    pub fn resolve(mut self, out: Option<PathBuf>, seed: Option<u64>) -> Resolved {
        if let Some(s) = seed {
            self.seed = s;
        }
        let out = out.unwrap_or_else(|| self.output_dir.clone());
        Resolved { config: self, out }
    }

    pub fn table_config(&self) -> TableConfig {
        let defaults = TableConfig::default();
        TableConfig {
            fit: self.fit.clone(),
            sim: self.sim.unwrap_or(defaults.sim),
            pmu_noise_sigma: self.pmu_noise_sigma,
            seed: self.seed,
            critical: self.critical,
        }
    }
}

impl Resolved {
    pub fn topology(&self) -> Result<NetworkTopology> {
        let path = &self.config.topology;
        if !path.exists() {
            bail!("topology file `{}` does not exist", path.display());
        }
        NetworkTopology::from_json_file(path)
            .with_context(|| format!("invalid topology `{}`", path.display()))
    }

    pub fn scenarios(&self) -> Result<Vec<LocatedScenario>> {
        let scenarios: Vec<LocatedScenario> = read_json(&self.config.scenarios, "scenario list")?;
        if scenarios.is_empty() {
            bail!("scenario list `{}` is empty", self.config.scenarios.display());
        }
        for s in &scenarios {
            check_name(&s.name)?;
            s.scenario
                .validate()
                .with_context(|| format!("scenario `{}` is invalid", s.name))?;
        }
        let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            bail!("scenario name `{}` appears twice", w[0]);
        }
        Ok(scenarios)
    }

    pub fn thresholds(&self) -> Result<SecurityThresholds> {
        let th = match &self.config.thresholds {
            Some(p) => read_json(p, "thresholds")?,
            None => SecurityThresholds::default(),
        };
        th.validate().context("invalid thresholds")?;
        Ok(th)
    }

    pub fn trajectory_dir(&self) -> PathBuf {
        self.config
            .trajectories
            .clone()
            .unwrap_or_else(|| self.out.join("trajectories"))
    }

    pub fn table_path(&self) -> PathBuf {
        self.config
            .table
            .clone()
            .unwrap_or_else(|| self.out.join("offline_table.json"))
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {what} `{}`", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {what} `{}`", path.display()))
}

/// Names become file and directory names.
pub fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if !ok {
        bail!("name `{name}` may only contain ASCII letters, digits, `-`, `_` and `.`");
    }
    Ok(())
}
