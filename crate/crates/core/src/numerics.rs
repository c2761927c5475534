//! Numeric kernel: adaptive quadrature, bracketing root finder and the small
//! set of special functions the analytic formulas need.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

/// Tolerances shared by every integral evaluation in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Probability mass kept when a semi-infinite integral over `R_L` is
    /// truncated.
    pub tail_quantile: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 40,
            tail_quantile: 1.0 - 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return domain(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol < 1.0) {
            return domain(format!("abs_tol must lie in (0, 1), got {}", self.abs_tol));
        }
        if self.max_depth < 4 {
            return domain(format!("max_depth must be at least 4, got {}", self.max_depth));
        }
        if !(self.tail_quantile > 0.5 && self.tail_quantile < 1.0) {
            return domain(format!(
                "tail_quantile must lie in (0.5, 1), got {}",
                self.tail_quantile
            ));
        }
        Ok(())
    }
}

// 7-point Gauss / 15-point Kronrod abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Hard cap on the number of bisections, independent of `max_depth`.
const MAX_SUBDIVISIONS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return domain(format!("integrand is not finite on [{a:e}, {b:e}]"));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the summed
/// error drops below `max(abs_tol, rel_tol·|I|)`. The 15-point rule never
/// evaluates the endpoints, so integrable endpoint singularities are allowed.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return domain(format!("integration limits must be finite, got [{a}, {b}]"));
    }
    if a > b {
        return domain(format!("lower limit {a} exceeds upper limit {b}"));
    }
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = kronrod15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        err,
        depth: 0,
    });
    let mut total = value;
    let mut total_err = err;
    for _ in 0..MAX_SUBDIVISIONS {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            // Re-sum so the result does not carry the running-sum drift.
            return Ok(heap.iter().map(|s| s.value).sum());
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= spec.max_depth {
            return Err(Error::NonConvergence {
                estimate: total,
                residual: total_err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod15(&f, worst.a, mid)?;
        let (v2, e2) = kronrod15(&f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        let depth = worst.depth + 1;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
            depth,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
            depth,
        });
    }
    Err(Error::NonConvergence {
        estimate: total,
        residual: total_err,
    })
}

/// Bisection root finder for a monotone `g` bracketed by `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` (or cannot be split further
/// in floating point) and returns its midpoint.
pub fn find_root_monotone<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo <= hi) || !(tol > 0.0) {
        return domain(format!("invalid bracket [{lo}, {hi}] or tolerance {tol}"));
    }
    let g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.is_nan() || g_hi.is_nan() || g_lo.signum() == g_hi.signum() {
        return Err(Error::NotBracketed { g_lo, g_hi });
    }
    let lo_negative = g_lo < 0.0;
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn factorial(n: u64) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

/// `C(n, k)` as a float; exact for the small arguments used here.
pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n > 60 {
        return (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp();
    }
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Binomial probability mass `C(n,k) p^k (1-p)^(n-k)`, with `0^0 = 1`.
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n > 60 {
        let ln =
            ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p();
        return ln.exp();
    }
    binomial_coefficient(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Poisson CDF `P(N ≤ k)` for `N ~ Poisson(mu)`.
///
/// Terms are accumulated in log space so large `k` or `mu` never overflow.
pub fn poisson_cdf(k: u64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("Poisson mean must be positive and finite, got {mu}"));
    }
    let ln_mu = mu.ln();
    let mut ln_term = -mu;
    let mut sum = ln_term.exp();
    for l in 1..=k {
        ln_term += ln_mu - (l as f64).ln();
        sum += ln_term.exp();
    }
    Ok(clamp_probability(sum))
}

/// Poisson survival function `P(N > k)`, summed directly from the upper tail
/// when that tail is small so that no cancellation occurs.
pub fn poisson_sf(k: u64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return domain(format!("Poisson mean must be positive and finite, got {mu}"));
    }
    if mu >= (k + 1) as f64 {
        return Ok(clamp_probability(1.0 - poisson_cdf(k, mu)?));
    }
    // Terms beyond k are strictly decreasing here.
    let ln_mu = mu.ln();
    let first = k + 1;
    let mut ln_term = -mu + first as f64 * ln_mu - ln_factorial(first);
    let mut sum = 0.0;
    let mut l = first;
    loop {
        let term = ln_term.exp();
        sum += term;
        if term <= 1e-17 * sum || term == 0.0 {
            break;
        }
        l += 1;
        ln_term += ln_mu - (l as f64).ln();
    }
    Ok(clamp_probability(sum))
}

/// CDF of the Erlang(shape, rate) distribution.
pub fn erlang_cdf(x: f64, shape: u64, rate: f64) -> Result<f64> {
    if shape == 0 || !(rate > 0.0) {
        return domain(format!("Erlang needs shape ≥ 1 and rate > 0, got ({shape}, {rate})"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    poisson_sf(shape - 1, rate * x)
}

/// Quantile of the Erlang(shape, rate) distribution.
///
/// The upper bracket starts at the mean and doubles until it covers `prob`;
/// by Markov's inequality this takes at most `log2(1/(1-prob)) + 1` steps.
pub fn erlang_quantile(shape: u64, rate: f64, prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return domain(format!("quantile probability must lie in (0, 1), got {prob}"));
    }
    if shape == 0 || !(rate > 0.0) || !rate.is_finite() {
        return domain(format!("Erlang needs shape ≥ 1 and rate > 0, got ({shape}, {rate})"));
    }
    let mut hi = shape as f64 / rate;
    while erlang_cdf(hi, shape, rate)? < prob {
        hi *= 2.0;
    }
    let tol = 1e-14 * hi;
    find_root_monotone(
        |x| erlang_cdf(x, shape, rate).map_or(f64::NAN, |c| c - prob),
        0.0,
        hi,
        tol,
    )
}

pub fn clamp_probability(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}
