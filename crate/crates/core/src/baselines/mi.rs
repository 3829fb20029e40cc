use crate::{Error, Result};

pub const MI_BINS: usize = 16;

/// Equal-frequency bin index per value. Equal values share the bin of
/// their lowest rank, so a constant column occupies a single bin.
pub fn equal_frequency_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0; n];
    let mut current = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank == 0 || values[i] != values[order[rank - 1]] {
            current = rank * bins / n;
        }
        out[i] = current;
    }
    out
}

/// Plug-in mutual information in nats between two binned variables.
pub fn plug_in_mi(x: &[usize], y: &[usize], bins: usize) -> f64 {
    let n = x.len() as f64;
    let mut joint = vec![0usize; bins * bins];
    let mut px = vec![0usize; bins];
    let mut py = vec![0usize; bins];
    for (&a, &b) in x.iter().zip(y) {
        joint[a * bins + b] += 1;
        px[a] += 1;
        py[b] += 1;
    }
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let pxy = c as f64 / n;
                mi += pxy * (pxy * n * n / (px[a] as f64 * py[b] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// MI estimate with [`MI_BINS`] equal-frequency bins per variable.
pub fn binned_mi(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch("MI inputs differ in length".into()));
    }
    if x.len() < 2 * MI_BINS {
        return Err(Error::input(format!("MI needs at least {} samples, got {}", 2 * MI_BINS, x.len())));
    }
    let bx = equal_frequency_bins(x, MI_BINS);
    let by = equal_frequency_bins(y, MI_BINS);
    Ok(plug_in_mi(&bx, &by, MI_BINS))
}
