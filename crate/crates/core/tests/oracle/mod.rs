//! Brute-force reference implementations, written without the library.
#![allow(dead_code)]

/// Mean absolute difference over explicitly listed windows `[s, s + h]`,
/// `s = 0, h, 2h, ..` while the window fits.
pub fn delta(column: &[f64], h: usize) -> f64 {
    let last = column.len() - 1;
    let mut windows = Vec::new();
    let mut start = 0;
    while start + h <= last {
        windows.push((start, start + h));
        start += h;
    }
    let total: f64 = windows.iter().map(|&(a, b)| (column[b] - column[a]).abs()).sum();
    total / windows.len() as f64
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7, n = 9.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 + aa * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = 1.0 + aa / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 + aa * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = 1.0 + aa / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Textbook Welch test: `(t, df, two-sided p)`.
pub fn welch(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n1 = xs.len() as f64;
    let n2 = ys.len() as f64;
    let m1 = xs.iter().sum::<f64>() / n1;
    let m2 = ys.iter().sum::<f64>() / n2;
    let s1 = xs.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / (n1 - 1.0);
    let s2 = ys.iter().map(|y| (y - m2).powi(2)).sum::<f64>() / (n2 - 1.0);
    let se = (s1 / n1 + s2 / n2).sqrt();
    let t = (m1 - m2) / se;
    let df = (s1 / n1 + s2 / n2).powi(2) / ((s1 / n1).powi(2) / (n1 - 1.0) + (s2 / n2).powi(2) / (n2 - 1.0));
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t));
    (t, df, p)
}

/// Direct step-up adjustment: for each test, the minimum of
/// `min(1, m p_(j) / j)` over all ranks `j` at or after its own rank.
pub fn bh_adjusted(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let rank = |i: usize| -> usize {
        1 + (0..m).filter(|&j| p[j] < p[i] || (p[j] == p[i] && j < i)).count()
    };
    let ranks: Vec<usize> = (0..m).map(rank).collect();
    (0..m)
        .map(|i| {
            (0..m)
                .filter(|&j| ranks[j] >= ranks[i])
                .map(|j| (m as f64 * p[j] / ranks[j] as f64).min(1.0))
                .fold(1.0, f64::min)
        })
        .collect()
}

/// Classic step-up rejection: reject the `k` smallest p-values where `k`
/// is the largest rank with `p_(k) <= k alpha / m`.
pub fn bh_rejections(p: &[f64], alpha: f64) -> usize {
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = p.len() as f64;
    (1..=p.len()).filter(|&k| sorted[k - 1] <= k as f64 * alpha / m).max().unwrap_or(0)
}

/// Exact permutation p-value of `|Welch t|` over every split of the pooled
/// sample into groups of the original sizes.
pub fn permutation_exact(xs: &[f64], ys: &[f64]) -> f64 {
    let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
    let n = pooled.len();
    let abs_t = |mask: u32| -> f64 {
        let a: Vec<f64> = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| pooled[i]).collect();
        let b: Vec<f64> = (0..n).filter(|&i| mask & (1 << i) == 0).map(|i| pooled[i]).collect();
        let (t, _, _) = welch(&a, &b);
        if t.is_nan() {
            0.0
        } else {
            t.abs()
        }
    };
    let observed = abs_t((1 << xs.len()) - 1);
    let (mut hits, mut total) = (0usize, 0usize);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == xs.len() {
            total += 1;
            if abs_t(mask) >= observed * (1.0 - 1e-9) {
                hits += 1;
            }
        }
    }
    hits as f64 / total as f64
}
