//! Network scenario types and the basic distance distributions of the
//! Poisson base-station model.

use std::f64::consts::{LN_10, PI};

use crate::error::{domain, Result};
use crate::numerics::{binomial_pmf, ln_factorial};

/// Density of an infinite hexagonal grid with 500 m intersite distance, in
/// BS/m².
pub const HEX_500_DENSITY: f64 = 2.0 / (1.732_050_807_568_877_2 * 500.0 * 500.0);

/// Value returned for an SINR whose denominator is exactly zero.
pub const INFINITE_SINR: f64 = f64::INFINITY;

/// Full parameter set for one network and positioning configuration.
///
/// `beta` and `gamma` are linear. Construct through [`Scenario::builder`],
/// which enforces the parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    lambda: f64,
    alpha: f64,
    p: f64,
    q: f64,
    beta: f64,
    gamma: f64,
    l: usize,
    k: usize,
    noise_sigma2: f64,
    tx_power: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            lambda: HEX_500_DENSITY,
            alpha: 4.0,
            p: 1.0,
            q: 1.0,
            beta: 1.0,
            gamma: 1.0,
            l: 4,
            k: 1,
            noise_sigma2: 0.0,
            tx_power: 1.0,
        }
    }
}

impl Scenario {
    pub fn builder() -> ScenarioBuilder {
        ScenarioBuilder(Scenario::default())
    }

    pub fn to_builder(&self) -> ScenarioBuilder {
        ScenarioBuilder(*self)
    }

    /// BS density (BS/m²).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    /// Activity probability of the participating base stations.
    pub fn p(&self) -> f64 {
        self.p
    }
    /// Load of the non-participating network.
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// Required number of participating base stations.
    pub fn l(&self) -> usize {
        self.l
    }
    /// Frequency reuse factor.
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn noise_sigma2(&self) -> f64 {
        self.noise_sigma2
    }
    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    /// Pre-processing SINR threshold `β/γ`.
    pub fn threshold(&self) -> f64 {
        self.beta / self.gamma
    }

    /// `γ/β`, the quantity the closed forms are written in.
    pub fn gain_ratio(&self) -> f64 {
        self.gamma / self.beta
    }

    pub fn threshold_db(&self) -> f64 {
        crate::linear_to_db(self.threshold())
    }

    pub fn is_interference_limited(&self) -> bool {
        self.noise_sigma2 == 0.0
    }

    /// Same scenario with `β/γ` set to `threshold_db` by moving `β` (γ kept).
    pub fn with_threshold_db(&self, threshold_db: f64) -> Scenario {
        Scenario {
            beta: self.gamma * crate::db_to_linear(threshold_db),
            ..*self
        }
    }

    /// Same scenario with a different required count `L`.
    pub fn with_l(&self, l: usize) -> Result<Scenario> {
        self.to_builder().l(l).build()
    }

    /// Same scenario with a different density.
    pub fn with_lambda(&self, lambda: f64) -> Result<Scenario> {
        self.to_builder().lambda(lambda).build()
    }
}

/// Builder for [`Scenario`]; `build` validates every field.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioBuilder(Scenario);

impl ScenarioBuilder {
    pub fn lambda(mut self, v: f64) -> Self {
        self.0.lambda = v;
        self
    }
    pub fn alpha(mut self, v: f64) -> Self {
        self.0.alpha = v;
        self
    }
    pub fn p(mut self, v: f64) -> Self {
        self.0.p = v;
        self
    }
    pub fn q(mut self, v: f64) -> Self {
        self.0.q = v;
        self
    }
    pub fn beta(mut self, v: f64) -> Self {
        self.0.beta = v;
        self
    }
    pub fn gamma(mut self, v: f64) -> Self {
        self.0.gamma = v;
        self
    }
    pub fn beta_db(self, db: f64) -> Self {
        self.beta(crate::db_to_linear(db))
    }
    pub fn gamma_db(self, db: f64) -> Self {
        self.gamma(crate::db_to_linear(db))
    }
    /// Sets `β/γ` by fixing `γ = 1`.
    pub fn threshold_db(self, db: f64) -> Self {
        self.gamma(1.0).beta(crate::db_to_linear(db))
    }
    pub fn l(mut self, v: usize) -> Self {
        self.0.l = v;
        self
    }
    pub fn k(mut self, v: usize) -> Self {
        self.0.k = v;
        self
    }
    pub fn noise_sigma2(mut self, v: f64) -> Self {
        self.0.noise_sigma2 = v;
        self
    }
    pub fn tx_power(mut self, v: f64) -> Self {
        self.0.tx_power = v;
        self
    }

    pub fn build(self) -> Result<Scenario> {
        let s = self.0;
        if !(s.alpha > 2.0) || !s.alpha.is_finite() {
            return domain(format!("pathloss exponent must exceed 2, got {}", s.alpha));
        }
        if !(s.lambda > 0.0) || !s.lambda.is_finite() {
            return domain(format!("density must be positive, got {}", s.lambda));
        }
        if !(0.0..=1.0).contains(&s.p) || !(0.0..=1.0).contains(&s.q) {
            return domain(format!("activity factors must lie in [0, 1], got p={}, q={}", s.p, s.q));
        }
        if !(s.beta > 0.0) || !s.beta.is_finite() || !(s.gamma > 0.0) || !s.gamma.is_finite() {
            return domain(format!("beta and gamma must be positive, got {}, {}", s.beta, s.gamma));
        }
        if s.l == 0 || s.k == 0 {
            return domain(format!("L and K must be at least 1, got L={}, K={}", s.l, s.k));
        }
        if !(s.tx_power > 0.0) || !(s.noise_sigma2 >= 0.0) {
            return domain(format!(
                "need tx_power > 0 and noise_sigma2 ≥ 0, got {}, {}",
                s.tx_power, s.noise_sigma2
            ));
        }
        Ok(s)
    }
}

/// Log-normal shadowing applied to every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingSpec {
    pub sigma_db: f64,
    pub enabled: bool,
}

impl Default for ShadowingSpec {
    fn default() -> Self {
        Self {
            sigma_db: 0.0,
            enabled: false,
        }
    }
}

impl ShadowingSpec {
    pub fn new(sigma_db: f64) -> Result<Self> {
        if !(sigma_db >= 0.0) || !sigma_db.is_finite() {
            return domain(format!("shadowing deviation must be ≥ 0 dB, got {sigma_db}"));
        }
        Ok(Self {
            sigma_db,
            enabled: sigma_db > 0.0,
        })
    }

    /// Standard deviation of the natural log of the linear shadowing gain.
    pub fn sigma_ln(&self) -> f64 {
        self.sigma_db * LN_10 / 10.0
    }

    /// Fractional moment `E[S^t]` of the log-normal gain.
    pub fn fractional_moment(&self, t: f64) -> f64 {
        if !self.enabled {
            return 1.0;
        }
        let s = t * self.sigma_ln();
        (0.5 * s * s).exp()
    }
}

/// Density of the equivalent PPP once shadowing is folded into the
/// locations: `λ·E[S^{2/α}]`.
pub fn effective_density(lambda: f64, alpha: f64, shadow: &ShadowingSpec) -> Result<f64> {
    if !(alpha > 2.0) {
        return domain(format!("pathloss exponent must exceed 2, got {alpha}"));
    }
    Ok(lambda * shadow.fractional_moment(2.0 / alpha))
}

/// Density of the distance to the `L`-th nearest point of a PPP with density
/// `lambda`, `e^{-λπr²}·2(λπr²)^L / (r·(L-1)!)`.
pub fn pdf_rl(r: f64, l: usize, lambda: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("distance must be positive, got {r}"));
    }
    if l == 0 || !(lambda > 0.0) {
        return domain(format!("need L ≥ 1 and lambda > 0, got L={l}, lambda={lambda}"));
    }
    let s = lambda * PI * r * r;
    let ln = -s + l as f64 * s.ln() + 2f64.ln() - r.ln() - ln_factorial(l as u64 - 1);
    Ok(ln.exp())
}

/// Probability that `omega` of the `L-1` participants closer than the
/// `L`-th base station are active.
pub fn pmf_omega(omega: usize, l: usize, p: f64) -> Result<f64> {
    if l == 0 || omega > l - 1 {
        return domain(format!("omega must lie in 0..={}, got {omega}", l.saturating_sub(1)));
    }
    Ok(binomial_pmf(omega as u64, (l - 1) as u64, p))
}

/// CDF of the closest active participant's distance given `R_L = rl` and
/// `omega ≥ 1` active participants.
pub fn cdf_r1_given_rl_omega(r: f64, rl: f64, omega: usize) -> Result<f64> {
    if omega == 0 {
        return domain("omega must be at least 1");
    }
    if !(r >= 0.0) || !(r <= rl) {
        return domain(format!("need 0 ≤ r ≤ rl, got r={r}, rl={rl}"));
    }
    let frac = 1.0 - (r / rl) * (r / rl);
    Ok(1.0 - frac.powi(omega as i32))
}

/// CDF of `X = R_L / R̂₁`, `(1 - x^{-2})^ω`.
pub fn cdf_ratio_x(x: f64, omega: usize) -> Result<f64> {
    if !(x >= 1.0) {
        return domain(format!("ratio must be at least 1, got {x}"));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok((1.0 - 1.0 / (x * x)).powi(omega as i32))
}

/// Density of `X = R_L / R̂₁`, `2ω x^{-3}(1 - x^{-2})^{ω-1}`.
pub fn pdf_ratio_x(x: f64, omega: usize) -> Result<f64> {
    if !(x >= 1.0) {
        return domain(format!("ratio must be at least 1, got {x}"));
    }
    if omega == 0 {
        return domain("omega must be at least 1");
    }
    let inv2 = 1.0 / (x * x);
    Ok(2.0 * omega as f64 * inv2 / x * (1.0 - inv2).powi(omega as i32 - 1))
}

/// One sampled deployment as seen from the device at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    /// Ascending BS distances (equivalent distances when shadowing is folded in).
    pub distances: Vec<f64>,
    /// Activity marks, fixed for the whole procedure.
    pub activity: Vec<bool>,
    /// Band labels in `1..=K`.
    pub bands: Vec<u32>,
    /// Per-BS uniforms that generated `activity`, kept so that the marks can
    /// be re-derived consistently for a different participant count.
    pub activity_draws: Option<Vec<f64>>,
}

impl Realization {
    pub fn new(distances: Vec<f64>, activity: Vec<bool>, bands: Vec<u32>) -> Result<Self> {
        if activity.len() != distances.len() || bands.len() != distances.len() {
            return domain("activity and bands must have one entry per distance");
        }
        if distances.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return domain("distances must be positive and finite");
        }
        if distances.windows(2).any(|w| w[0] > w[1]) {
            return domain("distances must be sorted ascending");
        }
        Ok(Self {
            distances,
            activity,
            bands,
            activity_draws: None,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Number of active base stations among the `L-1` nearest.
    pub fn omega(&self, l: usize) -> usize {
        let end = l.saturating_sub(1).min(self.len());
        self.activity[..end].iter().filter(|&&a| a).count()
    }

    /// Activity marks for a procedure with `l` participants: BS `i` is
    /// active iff its uniform is below `p` (for `i ≤ l`) or `q` (otherwise).
    /// Without stored uniforms the original marks are returned.
    pub fn activity_for(&self, l: usize, p: f64, q: f64) -> Vec<bool> {
        match &self.activity_draws {
            Some(u) => u
                .iter()
                .enumerate()
                .map(|(i, &ui)| ui < if i < l { p } else { q })
                .collect(),
            None => self.activity.clone(),
        }
    }
}

/// Pre-processing SINR of the `k`-th nearest base station (1-based) when `L`
/// stations participate.
///
/// The station's own mark does not enter: its measurement assumes it
/// transmits. Every other active station interferes. A zero denominator
/// yields [`INFINITE_SINR`].
pub fn sinr_of(realization: &Realization, k: usize, l: usize, scenario: &Scenario) -> Result<f64> {
    let n = realization.len();
    if k == 0 || k > l || l > n {
        return domain(format!("need 1 ≤ k ≤ L ≤ {n}, got k={k}, L={l}"));
    }
    let power = scenario.tx_power();
    let alpha = scenario.alpha();
    let signal = power * realization.distances[k - 1].powf(-alpha);
    let interference: f64 = realization
        .distances
        .iter()
        .zip(&realization.activity)
        .enumerate()
        .filter(|&(i, (_, &active))| active && i != k - 1)
        .map(|(_, (&d, _))| power * d.powf(-alpha))
        .sum();
    let denom = interference + scenario.noise_sigma2();
    if denom == 0.0 {
        return Ok(INFINITE_SINR);
    }
    Ok(signal / denom)
}
