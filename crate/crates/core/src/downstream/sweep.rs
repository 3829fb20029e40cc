use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{cem_train, CEMConfig};
use crate::baselines::{self, Method};
use crate::env::{DistractorLevel, EnvConfig, Environment};
use crate::metrics::{score_mask, BoundaryScore};
use crate::plot::{LineChart, Series};
use crate::probe::{self, PolicyKind};
use crate::stats::{self, TestConfig};
use crate::{Error, Result};

/// How a scaling-sweep run chooses its input mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMethod {
    Full,
    Ibd,
    Oracle,
    Mi,
    Variance,
    CondMi,
    GradAttr,
}

impl MaskMethod {
    pub const DEFAULT: [MaskMethod; 6] = [
        MaskMethod::Full,
        MaskMethod::Ibd,
        MaskMethod::Oracle,
        MaskMethod::Mi,
        MaskMethod::Variance,
        MaskMethod::CondMi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaskMethod::Full => "full",
            MaskMethod::Ibd => "ibd",
            MaskMethod::Oracle => "oracle",
            MaskMethod::Mi => "mi",
            MaskMethod::Variance => "variance",
            MaskMethod::CondMi => "cond_mi",
            MaskMethod::GradAttr => "grad_attr",
        }
    }
}

impl std::str::FromStr for MaskMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(MaskMethod::Full),
            "ibd" => Ok(MaskMethod::Ibd),
            "oracle" => Ok(MaskMethod::Oracle),
            other => other.parse::<Method>().map(|m| match m {
                Method::Mi => MaskMethod::Mi,
                Method::Variance => MaskMethod::Variance,
                Method::CondMi => MaskMethod::CondMi,
                Method::GradAttr => MaskMethod::GradAttr,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    /// Probe trajectories per mode for IBD; baselines get twice as many
    /// passive trajectories.
    pub n_trajectories: usize,
    pub probe_horizon: usize,
    pub test: TestConfig,
    pub cem: CEMConfig,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            n_trajectories: probe::DEFAULT_N,
            probe_horizon: probe::DEFAULT_HORIZON,
            test: TestConfig::default(),
            cem: CEMConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub level: DistractorLevel,
    pub n_distractors: usize,
    pub method: MaskMethod,
    pub seed: u64,
    #[serde(rename = "return")]
    pub mean_return: f64,
    pub score: BoundaryScore,
    pub n_selected: usize,
    pub empty_mask: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
}

/// Mask chosen by `method` for `env_config`, using `seed` for any data it
/// collects.
pub fn method_mask(method: MaskMethod, env_config: &EnvConfig, seed: u64, settings: &SweepSettings) -> Result<Vec<bool>> {
    let env = Environment::new(env_config)?;
    let truth = env.ground_truth_mask();
    let budget = truth.iter().filter(|&&t| t).count().max(1);
    let baseline = |m: Method| -> Result<Vec<bool>> {
        let obs = baselines::observational_set(env_config, settings.n_trajectories, settings.probe_horizon, seed)?;
        Ok(baselines::select(m, &obs, budget)?.mask)
    };
    match method {
        MaskMethod::Full => Ok(vec![true; env.obs_dim()]),
        MaskMethod::Oracle => Ok(truth),
        MaskMethod::Ibd => {
            let (b, i) = probe::collect_pair(
                env_config,
                settings.n_trajectories,
                settings.probe_horizon,
                seed,
                PolicyKind::StructuredRandom,
            )?;
            Ok(stats::discover(&b, &i, &settings.test)?.mask)
        }
        MaskMethod::Mi => baseline(Method::Mi),
        MaskMethod::Variance => baseline(Method::Variance),
        MaskMethod::CondMi => baseline(Method::CondMi),
        MaskMethod::GradAttr => baseline(Method::GradAttr),
    }
}

/// For each (level, method, seed): build the mask, train a linear policy
/// on it with CEM and record the held-out return and boundary score. Seed
/// `s` sets the environment, probe and CEM seeds.
pub fn scaling_sweep(
    base: &EnvConfig,
    levels: &[DistractorLevel],
    methods: &[MaskMethod],
    seeds: &[u64],
    settings: &SweepSettings,
) -> Result<ScalingReport> {
    let mut rows = Vec::new();
    for &level in levels {
        for &seed in seeds {
            let cfg = base.clone().with_level(level).with_seed(seed);
            let env = Environment::new(&cfg)?;
            let truth = env.ground_truth_mask();
            let n_distractors = env.spec().d_d;
            for &method in methods {
                let mask = method_mask(method, &cfg, seed, settings)?;
                let outcome = cem_train(&cfg, &mask, &settings.cem.clone().with_seed(seed))?;
                rows.push(ScalingRow {
                    level,
                    n_distractors,
                    method,
                    seed,
                    mean_return: outcome.mean_return,
                    score: score_mask(&mask, &truth)?,
                    n_selected: mask.iter().filter(|&&m| m).count(),
                    empty_mask: outcome.empty_mask,
                });
            }
        }
    }
    Ok(ScalingReport { rows })
}

impl ScalingReport {
    pub fn rows_for(&self, level: DistractorLevel, method: MaskMethod) -> Vec<&ScalingRow> {
        self.rows.iter().filter(|r| r.level == level && r.method == method).collect()
    }

    pub fn return_of(&self, level: DistractorLevel, method: MaskMethod, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.level == level && r.method == method && r.seed == seed)
            .map(|r| r.mean_return)
    }

    pub fn mean_return(&self, level: DistractorLevel, method: MaskMethod) -> Option<f64> {
        let rows = self.rows_for(level, method);
        if rows.is_empty() {
            return None;
        }
        Some(rows.iter().map(|r| r.mean_return).sum::<f64>() / rows.len() as f64)
    }

    /// `level,n_distractors,method,seed,return,precision,recall,f1,n_selected,empty_mask`.
    pub fn write_csv<W: Write>(&self, mut w: W, manifest_hash: Option<&str>) -> Result<()> {
        if let Some(h) = manifest_hash {
            writeln!(w, "# manifest_hash={h}")?;
        }
        writeln!(w, "level,n_distractors,method,seed,return,precision,recall,f1,n_selected,empty_mask")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}",
                r.level.as_str(),
                r.n_distractors,
                r.method.as_str(),
                r.seed,
                r.mean_return,
                r.score.precision,
                r.score.recall,
                r.score.f1,
                r.n_selected,
                r.empty_mask as u8
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Mean return against distractor count, one line per method.
    pub fn chart(&self) -> LineChart {
        let mut methods: Vec<MaskMethod> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        let series = methods
            .into_iter()
            .map(|m| {
                let mut counts: Vec<usize> =
                    self.rows.iter().filter(|r| r.method == m).map(|r| r.n_distractors).collect();
                counts.sort_unstable();
                counts.dedup();
                let points = counts
                    .into_iter()
                    .map(|c| {
                        let rs: Vec<f64> = self
                            .rows
                            .iter()
                            .filter(|r| r.method == m && r.n_distractors == c)
                            .map(|r| r.mean_return)
                            .collect();
                        (c as f64, rs.iter().sum::<f64>() / rs.len() as f64)
                    })
                    .collect();
                Series::line(m.as_str(), points)
            })
            .collect();
        LineChart {
            title: "Return vs. distractor count".into(),
            x_label: "distractor dimensions".into(),
            y_label: "mean return".into(),
            series,
        }
    }
}
