use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `a = clip(W x + b, -1, 1)` where `x` holds the observation components
/// kept by `mask`, in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPolicy {
    pub mask: Vec<bool>,
    pub d_a: usize,
    /// Row-major `d_a x d_in`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl LinearPolicy {
    pub fn zeros(mask: Vec<bool>, d_a: usize) -> Self {
        let d_in = mask.iter().filter(|&&m| m).count();
        Self { mask, d_a, w: vec![0.0; d_a * d_in], b: vec![0.0; d_a] }
    }

    pub fn d_in(&self) -> usize {
        self.w.len() / self.d_a.max(1)
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }

    /// Parameters as `[W row-major, b]`.
    pub fn flatten(&self) -> Vec<f64> {
        self.w.iter().chain(&self.b).copied().collect()
    }

    pub fn from_flat(mask: Vec<bool>, d_a: usize, theta: &[f64]) -> Result<Self> {
        let d_in = mask.iter().filter(|&&m| m).count();
        if theta.len() != d_a * (d_in + 1) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} policy parameters, got {}",
                d_a * (d_in + 1),
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite policy parameter".into()));
        }
        let (w, b) = theta.split_at(d_a * d_in);
        Ok(Self { mask, d_a, w: w.to_vec(), b: b.to_vec() })
    }

    pub fn act_into(&self, obs: &[f64], out: &mut [f64]) {
        let d_in = self.d_in();
        for (j, a) in out.iter_mut().enumerate() {
            let row = &self.w[j * d_in..(j + 1) * d_in];
            let mut acc = self.b[j];
            let mut k = 0;
            for (o, &m) in obs.iter().zip(&self.mask) {
                if m {
                    acc += row[k] * o;
                    k += 1;
                }
            }
            *a = acc.clamp(-1.0, 1.0);
        }
    }

    pub fn act(&self, obs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d_a];
        self.act_into(obs, &mut out);
        out
    }
}
