//! Random-Fourier-feature ridge regression used as the forward dynamics
//! model of the observational baselines.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::probe::TrajectorySet;
use crate::seed::Rng;
use crate::{Error, Result};

pub const DEFAULT_FEATURES: usize = 128;
pub const DEFAULT_LAMBDA_SCALE: f64 = 1e-3;
const BANDWIDTH_SAMPLE: usize = 200;

/// Basis `[1, x, sqrt(2) cos(W x + b)]` on standardized inputs, with ridge
/// weights for every output column.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    /// Row-major `n_features x n_inputs`.
    pub omega: Vec<f64>,
    pub phase: Vec<f64>,
    pub bandwidth: f64,
    pub lambda: f64,
    /// `n_basis x n_outputs`.
    pub weights: DMatrix<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl ForwardModel {
    /// Fits on row-major inputs `x` (`n x p`) and targets `y` (`n x q`).
    /// The ridge penalty is `lambda_scale * n`.
    pub fn fit(
        x: &[f64],
        y: &[f64],
        p: usize,
        q: usize,
        n_features: usize,
        lambda_scale: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        if p == 0 || x.len() % p != 0 {
            return Err(Error::DimensionMismatch("input matrix shape".into()));
        }
        let n = x.len() / p;
        if y.len() != n * q {
            return Err(Error::DimensionMismatch("target rows differ from input rows".into()));
        }
        if n < 2 {
            return Err(Error::input("forward model needs at least two rows"));
        }
        if !(lambda_scale > 0.0) {
            return Err(Error::config("ridge penalty must be positive"));
        }
        let mut input_mean = vec![0.0; p];
        let mut input_std = vec![0.0; p];
        for row in x.chunks_exact(p) {
            for (m, v) in input_mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        input_mean.iter_mut().for_each(|m| *m /= n as f64);
        for row in x.chunks_exact(p) {
            for j in 0..p {
                let dv = row[j] - input_mean[j];
                input_std[j] += dv * dv;
            }
        }
        for s in &mut input_std {
            *s = (*s / (n - 1) as f64).sqrt();
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }

        let mut model = Self {
            n_inputs: p,
            n_outputs: q,
            input_mean,
            input_std,
            omega: Vec::new(),
            phase: Vec::new(),
            bandwidth: 1.0,
            lambda: lambda_scale * n as f64,
            weights: DMatrix::zeros(0, 0),
        };

        if n_features > 0 {
            let stride = (n / BANDWIDTH_SAMPLE).max(1);
            let sample: Vec<Vec<f64>> =
                x.chunks_exact(p).step_by(stride).take(BANDWIDTH_SAMPLE).map(|r| model.standardize(r)).collect();
            let mut dists = Vec::new();
            for a in 0..sample.len() {
                for b in a + 1..sample.len() {
                    let d2: f64 = sample[a].iter().zip(&sample[b]).map(|(u, v)| (u - v) * (u - v)).sum();
                    dists.push(d2.sqrt());
                }
            }
            let med = median(dists);
            model.bandwidth = if med > 1e-12 { med } else { 1.0 };
            model.omega = (0..n_features * p)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z / model.bandwidth
                })
                .collect();
            model.phase = (0..n_features).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        }

        let m = model.n_basis();
        let mut phi = DMatrix::<f64>::zeros(n, m);
        let mut buf = vec![0.0; m];
        for (r, row) in x.chunks_exact(p).enumerate() {
            model.basis_into(row, &mut buf);
            for (c, v) in buf.iter().enumerate() {
                phi[(r, c)] = *v;
            }
        }
        let targets = DMatrix::from_row_slice(n, q, y);
        let mut gram = phi.tr_mul(&phi);
        for i in 0..m {
            gram[(i, i)] += model.lambda;
        }
        let rhs = phi.tr_mul(&targets);
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Numerical("ridge system is not positive definite".into()))?;
        model.weights = chol.solve(&rhs);
        if model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("non-finite ridge weights".into()));
        }
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.phase.len()
    }

    pub fn n_basis(&self) -> usize {
        1 + self.n_inputs + self.n_features()
    }

    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.input_mean.iter().zip(&self.input_std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn basis_into(&self, row: &[f64], out: &mut [f64]) {
        let p = self.n_inputs;
        out[0] = 1.0;
        for j in 0..p {
            out[1 + j] = (row[j] - self.input_mean[j]) / self.input_std[j];
        }
        let (head, rff) = out.split_at_mut(1 + p);
        let z = &head[1..];
        for (k, o) in rff.iter_mut().enumerate() {
            let w = &self.omega[k * p..(k + 1) * p];
            let arg: f64 = w.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + self.phase[k];
            *o = std::f64::consts::SQRT_2 * arg.cos();
        }
    }

    pub fn predict_into(&self, row: &[f64], out: &mut [f64]) {
        let mut basis = vec![0.0; self.n_basis()];
        self.basis_into(row, &mut basis);
        let b = DVector::from_vec(basis);
        let pred = self.weights.tr_mul(&b);
        out.copy_from_slice(pred.as_slice());
    }

    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_outputs];
        self.predict_into(row, &mut out);
        out
    }

    /// Mean over `rows` of `sum_j |d f_i / d x_j|` for `j` in `inputs`, by
    /// central differences with step `h` in raw input units.
    pub fn sensitivity(&self, rows: &[f64], inputs: std::ops::Range<usize>, h: f64) -> Vec<f64> {
        let p = self.n_inputs;
        let q = self.n_outputs;
        let mut acc = vec![0.0; q];
        let mut up = vec![0.0; q];
        let mut down = vec![0.0; q];
        let mut count = 0usize;
        for row in rows.chunks_exact(p) {
            let mut probe = row.to_vec();
            for j in inputs.clone() {
                probe[j] = row[j] + h;
                self.predict_into(&probe, &mut up);
                probe[j] = row[j] - h;
                self.predict_into(&probe, &mut down);
                probe[j] = row[j];
                for i in 0..q {
                    acc[i] += ((up[i] - down[i]) / (2.0 * h)).abs();
                }
            }
            count += 1;
        }
        acc.iter().map(|v| v / count.max(1) as f64).collect()
    }
}

/// Transition data `(s_t, a_t) -> o_{t+1} - o_t`, split by trajectory into
/// a training part and a held-out tail.
#[derive(Debug, Clone)]
pub struct TransitionData {
    pub d: usize,
    pub d_a: usize,
    /// Row-major `[s, a]`.
    pub train_x: Vec<f64>,
    pub train_y: Vec<f64>,
    pub test_x: Vec<f64>,
    pub test_y: Vec<f64>,
}

impl TransitionData {
    pub fn from_set(set: &TrajectorySet, holdout_fraction: f64) -> Result<Self> {
        let n = set.trajectories.len();
        if n < 2 {
            return Err(Error::input("forward-model baselines need at least two trajectories"));
        }
        let n_test = ((n as f64 * holdout_fraction).round() as usize).clamp(1, n - 1);
        let n_train = n - n_test;
        let (d, d_a) = (set.d, set.d_a);
        let mut data = Self {
            d,
            d_a,
            train_x: Vec::new(),
            train_y: Vec::new(),
            test_x: Vec::new(),
            test_y: Vec::new(),
        };
        for (k, traj) in set.trajectories.iter().enumerate() {
            let (xs, ys) = if k < n_train {
                (&mut data.train_x, &mut data.train_y)
            } else {
                (&mut data.test_x, &mut data.test_y)
            };
            for t in 0..traj.horizon() {
                let s = traj.obs(t);
                xs.extend_from_slice(s);
                xs.extend_from_slice(traj.action(t));
                ys.extend(traj.obs(t + 1).iter().zip(s).map(|(b, a)| b - a));
            }
        }
        Ok(data)
    }

    pub fn p(&self) -> usize {
        self.d + self.d_a
    }

    /// Copies of the inputs with the action columns dropped.
    pub fn state_only(&self) -> (Vec<f64>, Vec<f64>) {
        let p = self.p();
        let strip = |x: &[f64]| x.chunks_exact(p).flat_map(|r| r[..self.d].iter().copied()).collect();
        (strip(&self.train_x), strip(&self.test_x))
    }
}

/// Held-out fit quality per output.
#[derive(Debug, Clone)]
pub struct FitQuality {
    pub residual_variance: Vec<f64>,
    pub r2: Vec<f64>,
}

pub fn evaluate(model: &ForwardModel, x: &[f64], y: &[f64]) -> FitQuality {
    let p = model.n_inputs;
    let q = model.n_outputs;
    let n = x.len() / p;
    let mut pred = vec![0.0; q];
    let mut sum_r = vec![0.0; q];
    let mut sum_r2 = vec![0.0; q];
    let mut sum_y = vec![0.0; q];
    let mut sum_y2 = vec![0.0; q];
    for (row, target) in x.chunks_exact(p).zip(y.chunks_exact(q)) {
        model.predict_into(row, &mut pred);
        for i in 0..q {
            let r = target[i] - pred[i];
            sum_r[i] += r;
            sum_r2[i] += r * r;
            sum_y[i] += target[i];
            sum_y2[i] += target[i] * target[i];
        }
    }
    let nf = n as f64;
    let mut residual_variance = vec![0.0; q];
    let mut r2 = vec![0.0; q];
    for i in 0..q {
        let mr = sum_r[i] / nf;
        residual_variance[i] = (sum_r2[i] / nf - mr * mr).max(0.0);
        let my = sum_y[i] / nf;
        let sst = (sum_y2[i] / nf - my * my).max(0.0);
        let mse = sum_r2[i] / nf;
        r2[i] = if sst > 1e-24 { 1.0 - mse / sst } else { 0.0 };
    }
    FitQuality { residual_variance, r2 }
}
