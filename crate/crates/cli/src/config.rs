use std::path::Path;

use anyhow::{Context, Result};
use causal_scope::downstream::CEMConfig;
use causal_scope::env::{CoreKind, DistractorLevel, EnvConfig, FamilyCounts};
use causal_scope::experiments::partial_base;
use causal_scope::probe::ProbeConfig;
use causal_scope::stats::TestConfig;
use serde::{Deserialize, Serialize};

use crate::exit::{Coded, CONFIG};

/// Contents of a `--env-config` file. A bare environment object is also
/// accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EnvConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub test: TestConfig,
    #[serde(default)]
    pub cem: CEMConfig,
}

impl RunConfig {
    pub fn with_env(env: EnvConfig) -> Self {
        Self { env, probe: ProbeConfig::default(), test: TestConfig::default(), cem: CEMConfig::default() }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyConfig {
    Run(RunConfig),
    Env(EnvConfig),
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: AnyConfig = serde_json::from_str(&text)
        .map_err(|e| Coded::new(CONFIG, format!("{}: not a run or environment config ({e})", path.display())))?;
    let cfg = match parsed {
        AnyConfig::Run(r) => r,
        AnyConfig::Env(e) => RunConfig::with_env(e),
    };
    cfg.env.validate()?;
    Ok(cfg)
}

pub const PRESETS: [&str; 9] = [
    "point_mass_none",
    "point_mass_easy",
    "point_mass_medium",
    "point_mass_hard",
    "chain_3",
    "confounded_mimic",
    "confounded_mimic_no_channel",
    "partial",
    "exogenous",
];

pub fn preset(name: &str) -> Result<RunConfig> {
    let env = match name {
        "point_mass_none" => EnvConfig::point_mass(DistractorLevel::None, 0),
        "point_mass_easy" => EnvConfig::point_mass(DistractorLevel::Easy, 0),
        "point_mass_medium" => EnvConfig::point_mass(DistractorLevel::Medium, 0),
        "point_mass_hard" => EnvConfig::point_mass(DistractorLevel::Hard, 0),
        "chain_3" => EnvConfig::chain(3, 0),
        "confounded_mimic" => EnvConfig::confounded_mimic(0),
        "confounded_mimic_no_channel" => EnvConfig { confounded_channel: false, ..EnvConfig::confounded_mimic(0) },
        "partial" => partial_base(0.3),
        "exogenous" => EnvConfig::new(CoreKind::None, DistractorLevel::Custom, 0)
            .with_custom(FamilyCounts::new(20, 20, 0, 0)),
        other => {
            return Err(Coded::new(CONFIG, format!("unknown preset `{other}` (known: {})", PRESETS.join(", "))).into())
        }
    };
    Ok(RunConfig::with_env(env))
}

/// `--env-config` or `--preset`, exactly one.
pub fn resolve(path: Option<&Path>, preset_name: Option<&str>) -> Result<RunConfig> {
    match (path, preset_name) {
        (Some(p), None) => load(p),
        (None, Some(n)) => preset(n),
        _ => Err(Coded::new(CONFIG, "pass exactly one of --env-config and --preset").into()),
    }
}
