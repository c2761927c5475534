//! Small statistical helpers used to compare Monte Carlo output with the
//! analysis.

use crate::error::{domain, Result};

/// One-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Sup-distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return domain("KS statistic needs at least one sample");
    }
    let mut sorted = samples.to_vec();
    if sorted.iter().any(|x| x.is_nan()) {
        return domain("samples contain NaN");
    }
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Asymptotic p-value of the KS statistic with Stephens' small-sample
/// correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    let statistic = ks_statistic(samples, cdf)?;
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_p_value(statistic, samples.len()),
        n: samples.len(),
    })
}

/// Linearly interpolated percentile (`q` in `[0, 100]`) of sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return domain("percentile of an empty sample");
    }
    if !(0.0..=100.0).contains(&q) {
        return domain(format!("percentile must lie in [0, 100], got {q}"));
    }
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Largest gap between two CDFs given as probability vectors over
/// `0, 1, 2, …` (the shorter one is padded with zero mass).
pub fn discrete_ks_distance(pmf_a: &[f64], pmf_b: &[f64]) -> f64 {
    let n = pmf_a.len().max(pmf_b.len());
    let (mut ca, mut cb, mut d) = (0.0, 0.0, 0.0f64);
    for i in 0..n {
        ca += pmf_a.get(i).copied().unwrap_or(0.0);
        cb += pmf_b.get(i).copied().unwrap_or(0.0);
        d = d.max((ca - cb).abs());
    }
    d
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return domain("need at least two samples");
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
