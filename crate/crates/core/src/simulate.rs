//! Monte Carlo ground truth.
//!
//! A realization places about `expected_bs` base stations in a disk around
//! the device (PPP) or lays out a hexagonal lattice with a random offset.
//! The SINR of every station follows the coordination-aware definition
//! exactly: participants blank with probability `1-p`, the rest of the
//! network is active with probability `q`, and a station's own mark never
//! enters its own SINR.
//!
//! Each realization is reduced to a *critical SINR*, the smallest SINR that
//! has to clear the threshold. Success at threshold `t` is then `crit ≥ t`,
//! so a whole curve comes out of one pass over the realizations.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::model::{effective_density, Realization, Scenario, ShadowingSpec, INFINITE_SINR};
use crate::par::{try_map_collect, Execution};
use crate::rng::{stream, StreamRole};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// How base stations are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Deployment {
    #[default]
    Ppp,
    HexGrid,
}

/// Which SINRs must clear the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruthMode {
    /// All `L` participants jointly.
    #[default]
    JointAllL,
    /// Only the `L`-th (weakest) participant.
    LastBsOnly,
}

/// How activity marks relate across candidate participant counts `ℓ` when
/// computing the participation metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivityCoupling {
    /// One uniform per station, compared against `p` or `q`.
    #[default]
    Coupled,
    /// Fresh marks for every `ℓ`.
    Independent,
}

/// Monte Carlo settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub realizations: usize,
    pub seed: u64,
    pub expected_bs: usize,
    pub deployment: Deployment,
    pub hex_isd: f64,
    pub shadow: ShadowingSpec,
    pub truth_mode: TruthMode,
    pub coupling: ActivityCoupling,
    /// Largest `ℓ` scanned by the participation metric.
    pub upsilon_cap: usize,
    /// Adds the mean interference of the network beyond the sampling window.
    pub tail_correction: bool,
    pub execution: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            realizations: 10_000,
            seed: 0,
            expected_bs: 1000,
            deployment: Deployment::Ppp,
            hex_isd: 500.0,
            shadow: ShadowingSpec::default(),
            truth_mode: TruthMode::JointAllL,
            coupling: ActivityCoupling::Coupled,
            upsilon_cap: 32,
            tail_correction: true,
            execution: Execution::Parallel,
        }
    }
}

impl SimConfig {
    pub fn new(realizations: usize, seed: u64) -> Self {
        Self {
            realizations,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        if self.realizations == 0 {
            return domain("realizations must be at least 1");
        }
        if self.expected_bs < 10 * scenario.l() {
            return domain(format!(
                "expected_bs must be at least 10·L = {}, got {}",
                10 * scenario.l(),
                self.expected_bs
            ));
        }
        if !(self.hex_isd > 0.0) || !self.hex_isd.is_finite() {
            return domain(format!("hex_isd must be positive, got {}", self.hex_isd));
        }
        if self.upsilon_cap == 0 {
            return domain("upsilon_cap must be at least 1");
        }
        Ok(())
    }
}

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn from_counts(successes: usize, n: usize) -> Self {
        let value = successes as f64 / n as f64;
        Self {
            value,
            stderr: (value * (1.0 - value) / n as f64).sqrt(),
            n,
        }
    }
}

/// Triangular-lattice density for intersite distance `isd`.
pub fn hex_density(isd: f64) -> f64 {
    2.0 / (SQRT_3 * isd * isd)
}

fn window_radius(expected_bs: usize, density: f64) -> f64 {
    (expected_bs as f64 / (density * PI)).sqrt()
}

fn activity_and_bands(
    scenario: &Scenario,
    config: &SimConfig,
    index: u64,
    n: usize,
) -> (Vec<f64>, Vec<bool>, Vec<u32>) {
    let mut a = stream(config.seed, index, StreamRole::Activity);
    let draws: Vec<f64> = (0..n).map(|_| a.random::<f64>()).collect();
    let l = scenario.l();
    let activity = draws
        .iter()
        .enumerate()
        .map(|(i, &u)| u < if i < l { scenario.p() } else { scenario.q() })
        .collect();
    let k = scenario.k() as u32;
    let bands = if k == 1 {
        vec![1; n]
    } else {
        let mut b = stream(config.seed, index, StreamRole::Bands);
        (0..n).map(|_| b.random_range(1..=k)).collect()
    };
    (draws, activity, bands)
}

fn assemble(scenario: &Scenario, config: &SimConfig, index: u64, distances: Vec<f64>) -> Result<Realization> {
    let (draws, activity, bands) = activity_and_bands(scenario, config, index, distances.len());
    let mut r = Realization::new(distances, activity, bands)?;
    r.activity_draws = Some(draws);
    Ok(r)
}

/// Draws realization `index` of a PPP. Shadowing is folded into the
/// locations through the effective density.
pub fn sample_ppp(scenario: &Scenario, config: &SimConfig, index: u64) -> Result<Realization> {
    let density = effective_density(scenario.lambda(), scenario.alpha(), &config.shadow)?;
    let radius = window_radius(config.expected_bs, density);
    let mut g = stream(config.seed, index, StreamRole::Geometry);
    let count = Poisson::new(config.expected_bs as f64)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sample(&mut g) as usize;
    // 1 - U lies in (0, 1], which keeps every distance positive.
    let mut d: Vec<f64> = (0..count).map(|_| radius * (1.0 - g.random::<f64>()).sqrt()).collect();
    d.sort_by(f64::total_cmp);
    assemble(scenario, config, index, d)
}

/// Draws realization `index` of the hexagonal grid with the device placed
/// uniformly in a cell.
pub fn sample_hex(scenario: &Scenario, config: &SimConfig, index: u64) -> Result<Realization> {
    let mut o = stream(config.seed, index, StreamRole::Offset);
    let (u, v): (f64, f64) = (o.random(), o.random());
    let a = config.hex_isd;
    let offset = [a * (u + 0.5 * v), a * SQRT_3 / 2.0 * v];
    sample_hex_with_offset(scenario, config, index, offset)
}

/// Hexagonal grid seen from `offset` relative to a lattice site. Distances
/// are equivalent distances `S^{-1/α}·d`, sorted, so that ordering follows
/// average received power. The scenario density is ignored; the lattice
/// density follows from `hex_isd`.
pub fn sample_hex_with_offset(
    scenario: &Scenario,
    config: &SimConfig,
    index: u64,
    offset: [f64; 2],
) -> Result<Realization> {
    let a = config.hex_isd;
    let radius = window_radius(config.expected_bs, hex_density(a));
    let rows = (radius / (a * SQRT_3 / 2.0)).ceil() as i64 + 2;
    let mut s = stream(config.seed, index, StreamRole::Shadowing);
    let sigma = config.shadow.sigma_ln();
    let inv_alpha = 1.0 / scenario.alpha();
    let mut d = Vec::with_capacity(config.expected_bs + 64);
    for j in -rows..=rows {
        let y = a * SQRT_3 / 2.0 * j as f64 - offset[1];
        let cols = (radius / a).ceil() as i64 + rows / 2 + 2;
        for i in -cols..=cols {
            let x = a * (i as f64 + 0.5 * j as f64) - offset[0];
            let r = x.hypot(y);
            if r > radius || r == 0.0 {
                continue;
            }
            if config.shadow.enabled {
                let z: f64 = s.sample(StandardNormal);
                d.push(r * (-sigma * z * inv_alpha).exp());
            } else {
                d.push(r);
            }
        }
    }
    d.sort_by(f64::total_cmp);
    assemble(scenario, config, index, d)
}

/// Mean interference of the network beyond the sampling window, scaled by
/// the activity of the background.
fn tail_interference(scenario: &Scenario, config: &SimConfig) -> Result<f64> {
    if !config.tail_correction {
        return Ok(0.0);
    }
    let alpha = scenario.alpha();
    let (density, radius) = match config.deployment {
        Deployment::Ppp => {
            let dens = effective_density(scenario.lambda(), alpha, &config.shadow)?;
            (dens, window_radius(config.expected_bs, dens))
        }
        Deployment::HexGrid => {
            let dens = hex_density(config.hex_isd);
            (
                dens * config.shadow.fractional_moment(1.0),
                window_radius(config.expected_bs, dens),
            )
        }
    };
    Ok(2.0 * PI * scenario.q() * density * scenario.tx_power() / (alpha - 2.0) * radius.powf(2.0 - alpha))
}

fn sample(scenario: &Scenario, config: &SimConfig, index: u64) -> Result<Realization> {
    match config.deployment {
        Deployment::Ppp => sample_ppp(scenario, config, index),
        Deployment::HexGrid => sample_hex(scenario, config, index),
    }
}

/// Received powers, in realization order.
fn powers(realization: &Realization, scenario: &Scenario) -> Vec<f64> {
    let (pw, alpha) = (scenario.tx_power(), scenario.alpha());
    realization.distances.iter().map(|d| pw * d.powf(-alpha)).collect()
}

/// Interference sums that do not depend on the candidate participant count.
struct Field<'a> {
    powers: &'a [f64],
    /// Interference from stations at positions `≥ near`, plus noise and tail.
    far: f64,
    near: usize,
}

impl<'a> Field<'a> {
    fn new<A: Fn(usize) -> bool>(powers: &'a [f64], near: usize, far_active: A, extra: f64) -> Self {
        let near = near.min(powers.len());
        // Summed from the weakest upward to limit rounding.
        let far = (near..powers.len())
            .rev()
            .filter(|&j| far_active(j))
            .map(|j| powers[j])
            .sum::<f64>()
            + extra;
        Self { powers, far, near }
    }

    /// Smallest SINR among the first `l` stations and the SINR of the
    /// `l`-th, given the activity of the near stations.
    fn critical<A: Fn(usize) -> bool>(&self, l: usize, active: A) -> (f64, f64) {
        debug_assert!(l >= 1 && l <= self.near);
        let s = self.powers;
        let mut suffix = vec![0.0; l];
        let mut acc = self.far;
        for j in (0..self.near).rev() {
            if j < l {
                suffix[j] = acc;
            }
            if active(j) {
                acc += s[j];
            }
        }
        let mut prefix = 0.0;
        let mut joint = INFINITE_SINR;
        let mut last = INFINITE_SINR;
        for (k, &suf) in suffix.iter().enumerate() {
            let denom = prefix + suf;
            let sinr = if denom == 0.0 { INFINITE_SINR } else { s[k] / denom };
            joint = joint.min(sinr);
            last = sinr;
            if active(k) {
                prefix += s[k];
            }
        }
        (joint, last)
    }
}

fn draws_of(realization: &Realization) -> Vec<f64> {
    realization.activity_draws.clone().unwrap_or_else(|| {
        // Fixed marks: 0 always passes, 1 never does.
        realization
            .activity
            .iter()
            .map(|&a| if a { -1.0 } else { 2.0 })
            .collect()
    })
}

/// Critical SINRs `(joint, last)` of one realization for the scenario's `L`.
/// Fewer than `L` stations give `(-∞, -∞)`.
pub fn critical_sinr(realization: &Realization, scenario: &Scenario, extra: f64) -> (f64, f64) {
    let l = scenario.l();
    if realization.len() < l {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let s = powers(realization, scenario);
    let u = draws_of(realization);
    let (p, q) = (scenario.p(), scenario.q());
    let field = Field::new(&s, l, |j| u[j] < q, extra + scenario.noise_sigma2());
    field.critical(l, |j| u[j] < if j < l { p } else { q })
}

/// Per-realization critical SINRs `(joint, last)` for the scenario's `L`.
pub fn critical_statistics(scenario: &Scenario, config: &SimConfig) -> Result<Vec<(f64, f64)>> {
    config.validate(scenario)?;
    let extra = tail_interference(scenario, config)?;
    try_map_collect(config.execution, config.realizations, |i| {
        let r = sample(scenario, config, i as u64)?;
        Ok(critical_sinr(&r, scenario, extra))
    })
}

fn pick(mode: TruthMode, c: (f64, f64)) -> f64 {
    match mode {
        TruthMode::JointAllL => c.0,
        TruthMode::LastBsOnly => c.1,
    }
}

fn count_at(stats: &[f64], threshold: f64) -> usize {
    stats.iter().filter(|&&c| c >= threshold).count()
}

/// Monte Carlo `P_L` at the scenario's threshold.
pub fn estimate_pl(scenario: &Scenario, config: &SimConfig) -> Result<McEstimate> {
    let stats: Vec<f64> = critical_statistics(scenario, config)?
        .into_iter()
        .map(|c| pick(config.truth_mode, c))
        .collect();
    Ok(McEstimate::from_counts(
        count_at(&stats, scenario.threshold()),
        stats.len(),
    ))
}

/// Monte Carlo `P_L` over a grid of `β/γ` values in dB, sharing one set of
/// realizations across the grid.
pub fn estimate_pl_curve(scenario: &Scenario, config: &SimConfig, thresholds_db: &[f64]) -> Result<Vec<McEstimate>> {
    let stats: Vec<f64> = critical_statistics(scenario, config)?
        .into_iter()
        .map(|c| pick(config.truth_mode, c))
        .collect();
    Ok(curve_from(&stats, scenario, thresholds_db))
}

/// Turns critical SINRs into a curve over `β/γ` values in dB.
pub fn curve_from(stats: &[f64], scenario: &Scenario, thresholds_db: &[f64]) -> Vec<McEstimate> {
    thresholds_db
        .iter()
        .map(|&db| {
            let t = scenario.with_threshold_db(db).threshold();
            McEstimate::from_counts(count_at(stats, t), stats.len())
        })
        .collect()
}

/// Smallest SINR among the first `ℓ` stations for every `ℓ = 1..=ℓ_max`
/// (`ℓ_max = min(N, cap)`), with marks re-derived for each `ℓ`.
pub fn participation_profile(realization: &Realization, scenario: &Scenario, cap: usize, extra: f64) -> Vec<f64> {
    let lmax = realization.len().min(cap);
    if lmax == 0 {
        return Vec::new();
    }
    let s = powers(realization, scenario);
    let u = draws_of(realization);
    let (p, q) = (scenario.p(), scenario.q());
    let field = Field::new(&s, lmax, |j| u[j] < q, extra + scenario.noise_sigma2());
    (1..=lmax)
        .map(|l| field.critical(l, |j| u[j] < if j < l { p } else { q }).0)
        .collect()
}

fn independent_profile(
    realization: &Realization,
    scenario: &Scenario,
    cap: usize,
    extra: f64,
    seed: u64,
    index: u64,
) -> Vec<f64> {
    let lmax = realization.len().min(cap);
    let s = powers(realization, scenario);
    let (p, q) = (scenario.p(), scenario.q());
    // Continues past the draws that generated the stored marks.
    let mut a = stream(seed, index, StreamRole::Activity);
    for _ in 0..realization.len() {
        let _: f64 = a.random();
    }
    (1..=lmax)
        .map(|l| {
            let u: Vec<f64> = (0..s.len()).map(|_| a.random()).collect();
            let field = Field::new(&s, lmax, |j| u[j] < q, extra + scenario.noise_sigma2());
            field.critical(l, |j| u[j] < if j < l { p } else { q }).0
        })
        .collect()
}

/// Largest `ℓ` whose profile entry clears `threshold` (0 if none).
pub fn upsilon_from_profile(profile: &[f64], threshold: f64) -> usize {
    profile.iter().rposition(|&c| c >= threshold).map_or(0, |i| i + 1)
}

/// Participation metric Υ: the largest number of nearest stations that can
/// all clear the threshold together, scanning `ℓ ≤ 32`.
pub fn participation_metric(realization: &Realization, scenario: &Scenario) -> usize {
    let profile = participation_profile(realization, scenario, 32, 0.0);
    upsilon_from_profile(&profile, scenario.threshold())
}

/// Per-realization participation profiles (see [`participation_profile`]).
pub fn participation_profiles(scenario: &Scenario, config: &SimConfig) -> Result<Vec<Vec<f64>>> {
    config.validate(scenario)?;
    let extra = tail_interference(scenario, config)?;
    try_map_collect(config.execution, config.realizations, |i| {
        let r = sample(scenario, config, i as u64)?;
        Ok(match config.coupling {
            ActivityCoupling::Coupled => participation_profile(&r, scenario, config.upsilon_cap, extra),
            ActivityCoupling::Independent => {
                independent_profile(&r, scenario, config.upsilon_cap, extra, config.seed, i as u64)
            }
        })
    })
}

/// Empirical distribution of Υ at the scenario's threshold, indexed
/// `0..=upsilon_cap`.
pub fn hearability_distribution(scenario: &Scenario, config: &SimConfig) -> Result<Vec<f64>> {
    let profiles = participation_profiles(scenario, config)?;
    Ok(hearability_pmf(&profiles, scenario.threshold(), config.upsilon_cap))
}

/// Distribution of Υ at `threshold` from precomputed profiles.
pub fn hearability_pmf(profiles: &[Vec<f64>], threshold: f64, cap: usize) -> Vec<f64> {
    let mut counts = vec![0usize; cap + 1];
    for p in profiles {
        counts[upsilon_from_profile(p, threshold).min(cap)] += 1;
    }
    counts.iter().map(|&c| c as f64 / profiles.len() as f64).collect()
}

/// Per-band prefix minima of the SINR, truncated at `depth` stations per
/// band.
fn band_profiles(realization: &Realization, scenario: &Scenario, extra: f64, depth: usize) -> Vec<Vec<f64>> {
    let s = powers(realization, scenario);
    let u = draws_of(realization);
    let p = scenario.p();
    let k = scenario.k();
    let l = depth;
    (1..=k as u32)
        .map(|band| {
            let idx: Vec<usize> = (0..s.len()).filter(|&i| realization.bands[i] == band).collect();
            let bs: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
            let bu: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
            let near = l.min(bs.len());
            if near == 0 {
                return Vec::new();
            }
            let field = Field::new(&bs, near, |j| bu[j] < p, extra + scenario.noise_sigma2());
            // With p = q the SINRs do not depend on ℓ, so one pass suffices.
            let mut out = Vec::with_capacity(near);
            let mut running = INFINITE_SINR;
            for j in 1..=near {
                let (_, last) = field.critical(j, |i| bu[i] < p);
                running = running.min(last);
                out.push(running);
            }
            out
        })
        .collect()
}

/// Monte Carlo `P_L` under random reuse over a grid of `β/γ` values in dB:
/// success when the per-band participation metrics add up to `L`.
pub fn estimate_pl_reuse_curve(
    scenario: &Scenario,
    config: &SimConfig,
    thresholds_db: &[f64],
) -> Result<Vec<McEstimate>> {
    let per = reuse_profiles(scenario, config, scenario.l())?;
    let l = scenario.l();
    Ok(thresholds_db
        .iter()
        .map(|&db| {
            let t = scenario.with_threshold_db(db).threshold();
            let ok = per
                .iter()
                .filter(|bands| bands.iter().map(|b| upsilon_from_profile(b, t)).sum::<usize>() >= l)
                .count();
            McEstimate::from_counts(ok, per.len())
        })
        .collect())
}

fn reuse_profiles(scenario: &Scenario, config: &SimConfig, depth: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    if scenario.p() != scenario.q() {
        return Err(Error::Incompatible(format!(
            "reuse simulation needs p = q, got p={}, q={}",
            scenario.p(),
            scenario.q()
        )));
    }
    config.validate(scenario)?;
    let extra = tail_interference(scenario, config)? / scenario.k() as f64;
    try_map_collect(config.execution, config.realizations, |i| {
        let r = sample(scenario, config, i as u64)?;
        Ok(band_profiles(&r, scenario, extra, depth))
    })
}

/// Empirical distribution of the total participation metric `Σ_k Υ_k`
/// over the `K` bands at the scenario's threshold, indexed `0..=upsilon_cap`.
/// With `K = 1` this is [`hearability_distribution`].
pub fn hearability_distribution_reuse(scenario: &Scenario, config: &SimConfig) -> Result<Vec<f64>> {
    let cap = config.upsilon_cap;
    let per = reuse_profiles(scenario, config, cap)?;
    let t = scenario.threshold();
    let mut counts = vec![0usize; cap + 1];
    for bands in &per {
        let total: usize = bands.iter().map(|b| upsilon_from_profile(b, t)).sum();
        counts[total.min(cap)] += 1;
    }
    Ok(counts.iter().map(|&c| c as f64 / per.len() as f64).collect())
}

/// Monte Carlo `P_L` under random reuse at the scenario's threshold.
pub fn estimate_pl_reuse(scenario: &Scenario, config: &SimConfig) -> Result<McEstimate> {
    let curve = estimate_pl_reuse_curve(scenario, config, &[scenario.threshold_db()])?;
    Ok(curve[0])
}

/// Quantities conditioned on in the dominant-interferer analysis, read off
/// one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSample {
    pub rl: f64,
    /// Active participants among the `L-1` nearest.
    pub omega: usize,
    /// Closest active participant, if any.
    pub r1_hat: Option<f64>,
    /// Distances of the other `Ω-1` active participants.
    pub others: Vec<f64>,
    /// Interference from the other active participants.
    pub i1: f64,
    /// Interference from active stations beyond `R_L` (plus the window tail).
    pub i2: f64,
}

/// Conditional quantities of every realization that has at least `L`
/// stations.
pub fn conditional_samples(scenario: &Scenario, config: &SimConfig) -> Result<Vec<ConditionalSample>> {
    config.validate(scenario)?;
    let extra = tail_interference(scenario, config)?;
    let l = scenario.l();
    let (pw, alpha) = (scenario.tx_power(), scenario.alpha());
    let all = try_map_collect(config.execution, config.realizations, |i| {
        let r = sample(scenario, config, i as u64)?;
        if r.len() < l {
            return Ok(None);
        }
        let active: Vec<f64> = (0..l - 1).filter(|&j| r.activity[j]).map(|j| r.distances[j]).collect();
        let i1 = active.iter().skip(1).map(|d| pw * d.powf(-alpha)).sum();
        let i2 = (l..r.len())
            .rev()
            .filter(|&j| r.activity[j])
            .map(|j| pw * r.distances[j].powf(-alpha))
            .sum::<f64>()
            + extra;
        Ok(Some(ConditionalSample {
            rl: r.distances[l - 1],
            omega: active.len(),
            r1_hat: active.first().copied(),
            others: active.iter().skip(1).copied().collect(),
            i1,
            i2,
        }))
    })?;
    Ok(all.into_iter().flatten().collect())
}

/// Region for [`sample_conditional_bpp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BppRegion {
    Disk,
    /// The disk with the inner disk of radius `inner` removed.
    Annulus {
        inner: f64,
    },
}

/// `omega` points uniform in the disk of radius `rl` or the annulus between
/// `inner` and `rl`.
pub fn sample_conditional_bpp(rl: f64, omega: usize, region: BppRegion, seed: u64) -> Result<Vec<[f64; 2]>> {
    if omega == 0 {
        return domain("omega must be at least 1");
    }
    if !(rl > 0.0) {
        return domain(format!("rl must be positive, got {rl}"));
    }
    let a = match region {
        BppRegion::Disk => 0.0,
        BppRegion::Annulus { inner } => {
            if !(inner > 0.0 && inner < rl) {
                return domain(format!("need 0 < inner < rl, got inner={inner}, rl={rl}"));
            }
            inner
        }
    };
    let mut g = stream(seed, 0, StreamRole::Bpp);
    Ok((0..omega)
        .map(|_| {
            let u: f64 = g.random();
            let phi = 2.0 * PI * g.random::<f64>();
            let r = (u * (rl * rl - a * a) + a * a).sqrt();
            [r * phi.cos(), r * phi.sin()]
        })
        .collect())
}
