use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{MaskResult, TestConfig};
use crate::env::{DimLabel, EnvConfig};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<DimLabel>,
    pub p_by_horizon: Vec<f64>,
    pub adjusted_p_by_horizon: Vec<f64>,
    pub selected: bool,
}

/// JSON form of a [`MaskResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskReport {
    pub env_hash: String,
    pub config: TestConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_config: Option<EnvConfig>,
    pub horizons: Vec<usize>,
    pub per_dim: Vec<DimReport>,
    pub mask: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
}

impl MaskReport {
    pub fn new(
        result: &MaskResult,
        config: &TestConfig,
        env_hash: &str,
        env_config: Option<&EnvConfig>,
        labels: Option<&[DimLabel]>,
    ) -> Self {
        let per_dim = (0..result.mask.len())
            .map(|i| DimReport {
                index: i,
                label: labels.and_then(|l| l.get(i).copied()),
                p_by_horizon: result.raw_p[i].clone(),
                adjusted_p_by_horizon: result.adjusted_p[i].clone(),
                selected: result.mask[i],
            })
            .collect();
        Self {
            env_hash: env_hash.to_string(),
            config: config.clone(),
            env_config: env_config.cloned(),
            horizons: result.horizons.clone(),
            per_dim,
            mask: result.mask.iter().map(|&m| m as u8).collect(),
            manifest_hash: None,
        }
    }

    pub fn mask_bools(&self) -> Vec<bool> {
        self.mask.iter().map(|&m| m != 0).collect()
    }

    /// One row per (dimension, horizon): `index,label,horizon,p,adjusted_p,selected`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if let Some(h) = &self.manifest_hash {
            writeln!(w, "# manifest_hash={h}")?;
        }
        writeln!(w, "index,label,horizon,p,adjusted_p,selected")?;
        for dim in &self.per_dim {
            let label = dim.label.map(DimLabel::as_str).unwrap_or("");
            for (hi, h) in self.horizons.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{:e},{:e},{}",
                    dim.index,
                    label,
                    h,
                    dim.p_by_horizon[hi],
                    dim.adjusted_p_by_horizon[hi],
                    dim.selected as u8
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
