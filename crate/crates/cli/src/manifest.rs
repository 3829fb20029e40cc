use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use causal_scope::baselines::Method;
use causal_scope::downstream::{MaskMethod, SweepSettings};
use causal_scope::env::{short_digest, DistractorLevel, EnvConfig};
use causal_scope::probe::ProbeConfig;
use causal_scope::stats::TestConfig;
use serde::{Deserialize, Serialize};

use crate::exit::{Coded, CONFIG};

pub const TOOL: &str = "causal-scope";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Scaling,
    Partial,
    Scout,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Scaling => "scaling",
            SweepKind::Partial => "partial",
            SweepKind::Scout => "scout",
        }
    }
}

/// Everything needed to recompute a command's outputs, apart from input
/// files and output locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Probe {
        env: EnvConfig,
        probe: ProbeConfig,
        csv: bool,
    },
    Discover {
        test: TestConfig,
    },
    Baseline {
        method: Method,
        budget: Option<usize>,
        seed: Option<u64>,
    },
    Sweep {
        kind: SweepKind,
        env: EnvConfig,
        levels: Vec<DistractorLevel>,
        methods: Vec<MaskMethod>,
        alphas: Vec<f64>,
        settings: SweepSettings,
    },
    Report {
        plots: bool,
    },
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Probe { .. } => "probe",
            Job::Discover { .. } => "discover",
            Job::Baseline { .. } => "baseline",
            Job::Sweep { .. } => "sweep",
            Job::Report { .. } => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub role: String,
    pub path: PathBuf,
    /// Digest of the file contents.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRef {
    pub role: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub job: Job,
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_hash: Option<String>,
    pub inputs: Vec<InputRef>,
    pub outputs: Vec<OutputRef>,
    pub created_unix: u64,
    pub manifest_hash: String,
}

/// The hashed part of a manifest: no paths, no timestamps.
#[derive(Serialize)]
struct Identity<'a> {
    tool: &'a str,
    version: &'a str,
    job: &'a Job,
    seeds: &'a [u64],
    env_hash: &'a Option<String>,
    inputs: Vec<(&'a str, &'a str)>,
}

impl Manifest {
    pub fn new(job: Job, seeds: Vec<u64>, env_hash: Option<String>, inputs: Vec<InputRef>, outputs: Vec<OutputRef>) -> Self {
        let mut m = Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            job,
            seeds,
            env_hash,
            inputs,
            outputs,
            created_unix: created_unix(),
            manifest_hash: String::new(),
        };
        m.manifest_hash = m.identity_hash();
        m
    }

    pub fn identity_hash(&self) -> String {
        let id = Identity {
            tool: &self.tool,
            version: &self.version,
            job: &self.job,
            seeds: &self.seeds,
            env_hash: &self.env_hash,
            inputs: self.inputs.iter().map(|i| (i.role.as_str(), i.digest.as_str())).collect(),
        };
        short_digest(&serde_json::to_vec(&id).expect("manifest identity serializes"))
    }

    pub fn output(&self, role: &str) -> Option<&Path> {
        self.outputs.iter().find(|o| o.role == role).map(|o| o.path.as_path())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| Coded::new(CONFIG, format!("{}: not a run manifest ({e})", path.display())).into())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &to_json(self)?)
    }
}

fn created_unix() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()) {
        return v;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn input_ref(role: &str, path: &Path) -> Result<InputRef> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let path = fs::canonicalize(path).with_context(|| format!("resolving {}", path.display()))?;
    Ok(InputRef { role: role.into(), path, digest: short_digest(&bytes) })
}

/// `dir/stem.ext` for a path `dir/stem.anything`.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{ext}"))
}
