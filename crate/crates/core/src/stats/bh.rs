use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhResult {
    pub adjusted: Vec<f64>,
    pub reject: Vec<bool>,
}

/// Benjamini-Hochberg step-up adjustment. With `p_(1) <= .. <= p_(m)`
/// (stable on original index), `adj_(k) = min_{j >= k} min(1, m p_(j) / j)`;
/// a hypothesis is rejected when its adjusted value is below `alpha`.
pub fn bh_adjust(p_values: &[f64], alpha: f64) -> Result<BhResult> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::input(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        let scaled = (m as f64 * p_values[i] / (rank + 1) as f64).min(1.0);
        running = running.min(scaled);
        adjusted[i] = running;
    }
    let reject = adjusted.iter().map(|&a| a < alpha).collect();
    Ok(BhResult { adjusted, reject })
}
