//! OTDOA-style positioning trials and E911 percentile compliance.
//!
//! Each trial draws a PPP network with physical positions and per-link
//! log-normal shadowing, detects the base stations whose pre-processing SINR
//! clears the threshold, synthesizes pseudoranges (NLOS bias, ranging noise
//! from the TOA bound at the post-processing SINR, and clock error) and
//! solves for the position with Chan's two-stage TDOA estimator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::model::{Scenario, HEX_500_DENSITY};
use crate::par::{try_map_collect, Execution};
use crate::rng::{stream, StreamRole};
use crate::stats::percentile;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// FCC handset-based accuracy limits, 67th and 90th percentile.
pub const FCC_P67_LIMIT: f64 = 50.0;
pub const FCC_P90_LIMIT: f64 = 150.0;

const CONDITION_LIMIT: f64 = 1e12;

/// Spectrum shape behind the RMS bandwidth of the ranging bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RmsBandwidth {
    /// Flat over `[-B/2, B/2]`: `β_rms² = B²/12`.
    #[default]
    Flat,
    /// Power at the band edges: `β_rms² = B²/3`.
    BandEdge,
}

/// Which detected stations enter the fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BsSelection {
    /// Every detected station, optionally capped by `max_used`.
    #[default]
    AllDetected,
    /// Exactly the `L_min` strongest detected stations.
    BestLmin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct E911Config {
    pub bandwidth: f64,
    pub clock_std: f64,
    pub nlos_mean: f64,
    /// Linear pre-processing SINR needed for detection.
    pub pre_sinr_threshold: f64,
    pub alpha: f64,
    pub shadow_sigma_db: f64,
    pub hex_isd: f64,
    /// Processing gain applied to the detected SINR before the ranging bound.
    pub processing_gain_db: f64,
    pub spectrum: RmsBandwidth,
    /// When false the Gaussian ranging term is omitted.
    pub ranging_noise: bool,
    pub selection: BsSelection,
    pub max_used: Option<usize>,
    pub expected_bs: usize,
    pub trials: usize,
    pub min_hearability_grid: Vec<usize>,
    pub seed: u64,
    pub speed_of_light: f64,
    pub execution: Execution,
}

impl Default for E911Config {
    fn default() -> Self {
        Self {
            bandwidth: 1e7,
            clock_std: 1e-7,
            nlos_mean: 30.0,
            pre_sinr_threshold: 10f64.powf(-1.3),
            alpha: 3.76,
            shadow_sigma_db: 8.0,
            hex_isd: 500.0,
            processing_gain_db: 15.0,
            spectrum: RmsBandwidth::Flat,
            ranging_noise: true,
            selection: BsSelection::AllDetected,
            max_used: None,
            expected_bs: 1000,
            trials: 5000,
            min_hearability_grid: (4..=10).collect(),
            seed: 0,
            speed_of_light: SPEED_OF_LIGHT,
            execution: Execution::Parallel,
        }
    }
}

impl E911Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) {
            return domain(format!("bandwidth must be positive, got {}", self.bandwidth));
        }
        if !(self.clock_std >= 0.0) || !(self.nlos_mean >= 0.0) || !(self.shadow_sigma_db >= 0.0) {
            return domain("clock_std, nlos_mean and shadow_sigma_db must be non-negative");
        }
        if !(self.pre_sinr_threshold > 0.0) {
            return domain("pre_sinr_threshold must be positive");
        }
        if !(self.alpha > 2.0) {
            return domain(format!("alpha must exceed 2, got {}", self.alpha));
        }
        if self.trials < 100 {
            return domain(format!("trials must be at least 100, got {}", self.trials));
        }
        if self.min_hearability_grid.is_empty() || self.min_hearability_grid.iter().any(|&l| l < 4) {
            return domain("every minimum hearability must be at least 4");
        }
        if self.max_used.is_some_and(|m| m < 4) {
            return domain("max_used must be at least 4");
        }
        if self.expected_bs < 40 {
            return domain("expected_bs must be at least 40");
        }
        Ok(())
    }

    /// Network scenario matching the configuration: density of the
    /// hexagonal grid, full load and the detection threshold as `β/γ`.
    pub fn scenario(&self) -> Result<Scenario> {
        let lambda = if self.hex_isd == 500.0 {
            HEX_500_DENSITY
        } else {
            2.0 / (3f64.sqrt() * self.hex_isd * self.hex_isd)
        };
        Scenario::builder()
            .lambda(lambda)
            .alpha(self.alpha)
            .p(1.0)
            .q(1.0)
            .gamma_db(self.processing_gain_db)
            .beta(10f64.powf(self.processing_gain_db / 10.0) * self.pre_sinr_threshold)
            .build()
    }

    fn rms_bandwidth_sq(&self) -> f64 {
        let b2 = self.bandwidth * self.bandwidth;
        match self.spectrum {
            RmsBandwidth::Flat => b2 / 12.0,
            RmsBandwidth::BandEdge => b2 / 3.0,
        }
    }
}

/// Standard deviation of a TOA range estimate at post-processing SINR
/// `sinr_post`, `c/√(8π²β_rms²·SINR)`.
pub fn ranging_stddev(sinr_post: f64, cfg: &E911Config) -> Result<f64> {
    if !(sinr_post > 0.0) {
        return domain(format!("SINR must be positive, got {sinr_post}"));
    }
    Ok(cfg.speed_of_light / (8.0 * PI * PI * cfg.rms_bandwidth_sq() * sinr_post).sqrt())
}

/// One trial's network: positions relative to the device at the origin and
/// received powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub positions: Vec<[f64; 2]>,
    pub received: Vec<f64>,
    /// Interference and noise common to every link (window tail plus `σ²`).
    pub floor: f64,
}

impl Network {
    /// Pre-processing SINR of every station, full load.
    pub fn sinr(&self) -> Vec<f64> {
        let mut sorted = self.received.clone();
        sorted.sort_by(f64::total_cmp);
        let total: f64 = sorted.iter().sum::<f64>() + self.floor;
        self.received
            .iter()
            .map(|&s| {
                let denom = total - s;
                if denom <= 0.0 {
                    f64::INFINITY
                } else {
                    s / denom
                }
            })
            .collect()
    }

    /// Indices of stations with SINR at or above `threshold`, strongest first,
    /// with their SINRs.
    pub fn detect(&self, threshold: f64) -> Vec<(usize, f64)> {
        let sinr = self.sinr();
        let mut det: Vec<(usize, f64)> = sinr
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s >= threshold)
            .map(|(i, &s)| (i, s))
            .collect();
        det.sort_by(|a, b| self.received[b.0].total_cmp(&self.received[a.0]).then(a.0.cmp(&b.0)));
        det
    }
}

/// Draws the network of trial `index`.
pub fn sample_network(cfg: &E911Config, scenario: &Scenario, index: u64) -> Result<Network> {
    let lambda = scenario.lambda();
    let alpha = scenario.alpha();
    let radius = (cfg.expected_bs as f64 / (lambda * PI)).sqrt();
    let mut g = stream(cfg.seed, index, StreamRole::Geometry);
    let n = Poisson::new(cfg.expected_bs as f64)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sample(&mut g) as usize;
    let mut s = stream(cfg.seed, index, StreamRole::Shadowing);
    let sigma_ln = cfg.shadow_sigma_db * std::f64::consts::LN_10 / 10.0;
    let power = scenario.tx_power();
    let mut positions = Vec::with_capacity(n);
    let mut received = Vec::with_capacity(n);
    for _ in 0..n {
        let r = radius * (1.0 - g.random::<f64>()).sqrt();
        let phi = 2.0 * PI * g.random::<f64>();
        let z: f64 = s.sample(StandardNormal);
        positions.push([r * phi.cos(), r * phi.sin()]);
        received.push(power * (sigma_ln * z).exp() * r.powf(-alpha));
    }
    let mean_gain = (0.5 * sigma_ln * sigma_ln).exp();
    let tail = 2.0 * PI * lambda * mean_gain * power / (alpha - 2.0) * radius.powf(2.0 - alpha);
    Ok(Network {
        positions,
        received,
        floor: tail + scenario.noise_sigma2(),
    })
}

/// Range-difference measurements against a reference station.
#[derive(Debug, Clone, PartialEq)]
pub struct TdoaMeasurements {
    /// Station positions, reference first.
    pub stations: Vec<[f64; 2]>,
    /// `r_i - r_1` for every non-reference station, in order.
    pub range_differences: Vec<f64>,
    /// Standard deviation of each station's pseudorange error (used only
    /// for weighting).
    pub sigmas: Vec<f64>,
}

impl TdoaMeasurements {
    /// Exact range differences from `position`, with equal weights.
    pub fn noiseless(stations: Vec<[f64; 2]>, position: [f64; 2]) -> Self {
        let d: Vec<f64> = stations
            .iter()
            .map(|s| (s[0] - position[0]).hypot(s[1] - position[1]))
            .collect();
        let range_differences = d[1..].iter().map(|x| x - d[0]).collect();
        let sigmas = vec![1.0; stations.len()];
        Self {
            stations,
            range_differences,
            sigmas,
        }
    }
}

/// Detected stations and pseudoranges of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub detected: usize,
    pub measurements: Option<TdoaMeasurements>,
}

/// Builds pseudoranges for the detected stations of `network`, strongest
/// first, and forms range differences against the strongest one. At most
/// `max_used` stations are kept. Fewer than four detected stations yields no
/// measurements.
pub fn synthesize_observations(
    network: &Network,
    cfg: &E911Config,
    scenario: &Scenario,
    index: u64,
    max_used: Option<usize>,
) -> Result<Observations> {
    let detected = network.detect(scenario.threshold());
    if detected.len() < 4 {
        return Ok(Observations {
            detected: detected.len(),
            measurements: None,
        });
    }
    let used = max_used.map_or(detected.len(), |m| m.min(detected.len()));
    let gain = scenario.gamma();
    let clock_m = cfg.speed_of_light * cfg.clock_std;
    let mut m = stream(cfg.seed, index, StreamRole::Measurement);
    let mut stations = Vec::with_capacity(used);
    let mut ranges = Vec::with_capacity(used);
    let mut sigmas = Vec::with_capacity(used);
    // All detected stations consume draws so a cap does not shift the rest.
    for (rank, &(i, sinr)) in detected.iter().enumerate() {
        let e: f64 = Exp1.sample(&mut m);
        let n_rng: f64 = m.sample(StandardNormal);
        let n_clk: f64 = m.sample(StandardNormal);
        if rank >= used {
            continue;
        }
        let p = network.positions[i];
        let sd = ranging_stddev(gain * sinr, cfg)?;
        let rng_term = if cfg.ranging_noise { sd * n_rng } else { 0.0 };
        ranges.push(p[0].hypot(p[1]) + cfg.nlos_mean * e + rng_term + clock_m * n_clk);
        stations.push(p);
        let var = if cfg.ranging_noise { sd * sd } else { 0.0 } + clock_m * clock_m;
        sigmas.push(var.sqrt());
    }
    let range_differences = ranges[1..].iter().map(|r| r - ranges[0]).collect();
    Ok(Observations {
        detected: detected.len(),
        measurements: Some(TdoaMeasurements {
            stations,
            range_differences,
            sigmas,
        }),
    })
}

fn no_fix<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::NoFix(msg.into()))
}

/// Covariance of the range differences: independent per-station errors with
/// the reference error shared by every difference.
fn tdoa_covariance(sigmas: &[f64]) -> DMatrix<f64> {
    let max = sigmas.iter().copied().fold(0.0, f64::max);
    let floor = if max > 0.0 { 1e-6 * max } else { 1.0 };
    let var: Vec<f64> = sigmas.iter().map(|s| s.max(floor).powi(2)).collect();
    let m = sigmas.len() - 1;
    DMatrix::from_fn(m, m, |i, j| var[0] + if i == j { var[i + 1] } else { 0.0 })
}

/// Weighted least squares through the Cholesky factor of the covariance,
/// returning the solution and `(GᵀC⁻¹G)⁻¹`.
fn weighted_lstsq(g: &DMatrix<f64>, h: &DVector<f64>, cov: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let chol = match cov.clone().cholesky() {
        Some(c) => c,
        None => return no_fix("measurement covariance is not positive definite"),
    };
    let l = chol.l();
    let gw = match l.solve_lower_triangular(g) {
        Some(x) => x,
        None => return no_fix("singular covariance factor"),
    };
    let hw = match l.solve_lower_triangular(h) {
        Some(x) => x,
        None => return no_fix("singular covariance factor"),
    };
    let svd = gw.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > CONDITION_LIMIT {
        return no_fix(format!("degenerate station geometry (condition {:e})", smax / smin));
    }
    let z = match svd.solve(&hw, 0.0) {
        Ok(z) => z,
        Err(e) => return no_fix(e.to_string()),
    };
    let normal = gw.transpose() * &gw;
    let cov_z = match normal.try_inverse() {
        Some(c) => c,
        None => return no_fix("singular normal matrix"),
    };
    Ok((z, cov_z))
}

fn check_measurements(m: &TdoaMeasurements) -> Result<()> {
    let n = m.stations.len();
    if n < 4 {
        return no_fix(format!("need at least 4 stations, got {n}"));
    }
    if m.range_differences.len() != n - 1 || m.sigmas.len() != n {
        return domain("range_differences must have M-1 entries and sigmas M entries");
    }
    if m.range_differences.iter().chain(&m.sigmas).any(|x| !x.is_finite()) {
        return domain("measurements must be finite");
    }
    Ok(())
}

/// Chan's two-stage estimator.
///
/// Stage 1 solves the linearized system for `(x, y, R₁)` by weighted least
/// squares, re-weighted once with the implied ranges. Stage 2 refines with
/// the constraint `R₁² = x² + y²`. It is carried out with the reference at the
/// origin and the axes rotated so the stage-1 offset lies on the diagonal,
/// which keeps its weighting well conditioned and makes the estimator
/// rotation-equivariant. An ill-conditioned or infeasible stage 2 falls back
/// to Gauss–Newton from the stage-1 estimate.
pub fn solve_tdoa(m: &TdoaMeasurements) -> Result<[f64; 2]> {
    check_measurements(m)?;
    let origin = m.stations[0];
    let rel: Vec<[f64; 2]> = m
        .stations
        .iter()
        .map(|s| [s[0] - origin[0], s[1] - origin[1]])
        .collect();
    let rows = rel.len() - 1;
    let g = DMatrix::from_fn(rows, 3, |i, j| match j {
        0 => -rel[i + 1][0],
        1 => -rel[i + 1][1],
        _ => -m.range_differences[i],
    });
    let h = DVector::from_fn(rows, |i, _| {
        let k = rel[i + 1][0].powi(2) + rel[i + 1][1].powi(2);
        0.5 * (m.range_differences[i].powi(2) - k)
    });
    let q = tdoa_covariance(&m.sigmas);
    let (mut z, mut cov_z) = match weighted_lstsq(&g, &h, &q) {
        Ok(sol) => sol,
        // Range differences that all vanish leave the R₁ column empty; the
        // position columns alone still give a starting point.
        Err(Error::NoFix(_)) => {
            let (zxy, _) = weighted_lstsq(&g.columns(0, 2).into_owned(), &h, &q)?;
            return solve_tdoa_gauss_newton(m, [zxy[0] + origin[0], zxy[1] + origin[1]]);
        }
        Err(e) => return Err(e),
    };
    let ranges: Vec<f64> = (0..rows)
        .map(|i| (rel[i + 1][0] - z[0]).hypot(rel[i + 1][1] - z[1]))
        .collect();
    if ranges.iter().all(|&r| r > 0.0) {
        let b = DMatrix::from_diagonal(&DVector::from_vec(ranges));
        let psi = &b * &q * &b;
        (z, cov_z) = weighted_lstsq(&g, &h, &psi)?;
    }
    let stage1 = [z[0] + origin[0], z[1] + origin[1]];

    let v = Vector2::new(z[0], z[1]);
    let scale = rel.iter().map(|s| s[0].hypot(s[1])).fold(0.0, f64::max);
    if v.norm() <= 1e-9 * scale.max(1.0) {
        return Ok(stage1);
    }
    let theta = PI / 4.0 - v.y.atan2(v.x);
    let rot = Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
    let vr = rot * v;
    let mut t = DMatrix::<f64>::identity(3, 3);
    t.view_mut((0, 0), (2, 2)).copy_from(&rot);
    let cov_r = &t * &cov_z * t.transpose();
    let zr = DVector::from_vec(vec![vr.x, vr.y, z[2]]);
    let b2 = DMatrix::from_diagonal(&zr);
    let psi2 = &b2 * &cov_r * &b2;
    let g2 = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let h2 = zr.map(|x| x * x);
    let refined = weighted_lstsq(&g2, &h2, &psi2)
        .ok()
        .filter(|(z2, _)| z2[0] >= 0.0 && z2[1] >= 0.0);
    match refined {
        Some((z2, _)) => {
            let pr = Vector2::new(z2[0].sqrt(), z2[1].sqrt());
            let p = rot.transpose() * pr;
            Ok([p.x + origin[0], p.y + origin[1]])
        }
        None => solve_tdoa_gauss_newton(m, stage1),
    }
}

/// Iterative weighted least squares on the range-difference residuals.
pub fn solve_tdoa_gauss_newton(m: &TdoaMeasurements, init: [f64; 2]) -> Result<[f64; 2]> {
    check_measurements(m)?;
    let q = tdoa_covariance(&m.sigmas);
    let chol = match q.cholesky() {
        Some(c) => c,
        None => return no_fix("measurement covariance is not positive definite"),
    };
    let l = chol.l();
    let rows = m.stations.len() - 1;
    let mut x = Vector2::new(init[0], init[1]);
    for _ in 0..100 {
        let unit = |s: [f64; 2]| {
            let d = Vector2::new(x.x - s[0], x.y - s[1]);
            let n = d.norm();
            (n, if n > 0.0 { d / n } else { Vector2::zeros() })
        };
        let (d1, u1) = unit(m.stations[0]);
        let mut jac = DMatrix::zeros(rows, 2);
        let mut res = DVector::zeros(rows);
        for i in 0..rows {
            let (di, ui) = unit(m.stations[i + 1]);
            res[i] = m.range_differences[i] - (di - d1);
            let row = ui - u1;
            jac[(i, 0)] = row.x;
            jac[(i, 1)] = row.y;
        }
        let jw = l
            .solve_lower_triangular(&jac)
            .ok_or_else(|| Error::NoFix("singular weights".into()))?;
        let rw = l
            .solve_lower_triangular(&res)
            .ok_or_else(|| Error::NoFix("singular weights".into()))?;
        let step = jw
            .svd(true, true)
            .solve(&rw, 1e-12)
            .map_err(|e| Error::NoFix(e.to_string()))?;
        x += Vector2::new(step[0], step[1]);
        if !x.iter().all(|c| c.is_finite()) {
            return no_fix("Gauss-Newton diverged");
        }
        if step.norm() <= 1e-10 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok([x.x, x.y])
}

/// One positioning trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FixOutcome {
    pub detected: usize,
    pub true_position: [f64; 2],
    pub estimate: Option<[f64; 2]>,
    /// Horizontal error, present when a fix was produced.
    pub error: Option<f64>,
}

/// Runs trial `index` using at most `max_used` of the detected stations.
pub fn run_trial(cfg: &E911Config, scenario: &Scenario, index: u64, max_used: Option<usize>) -> Result<FixOutcome> {
    let net = sample_network(cfg, scenario, index)?;
    let obs = synthesize_observations(&net, cfg, scenario, index, max_used)?;
    let truth = [0.0, 0.0];
    let estimate = match &obs.measurements {
        Some(m) => match solve_tdoa(m) {
            Ok(p) => Some(p),
            Err(Error::NoFix(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(FixOutcome {
        detected: obs.detected,
        true_position: truth,
        estimate,
        error: estimate.map(|p| (p[0] - truth[0]).hypot(p[1] - truth[1])),
    })
}

/// Percentile errors for one minimum hearability.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceRow {
    pub l_min: usize,
    pub p67: Option<f64>,
    pub p90: Option<f64>,
    pub pass: bool,
    pub fixes: usize,
    pub trials: usize,
    /// Fraction of trials without a fix at this minimum hearability.
    pub no_fix_rate: f64,
}

fn row_from(l_min: usize, trials: usize, mut errors: Vec<f64>) -> Result<ComplianceRow> {
    errors.sort_by(f64::total_cmp);
    let fixes = errors.len();
    let (p67, p90) = if fixes == 0 {
        (None, None)
    } else {
        (Some(percentile(&errors, 67.0)?), Some(percentile(&errors, 90.0)?))
    };
    let pass = matches!((p67, p90), (Some(a), Some(b)) if a <= FCC_P67_LIMIT && b <= FCC_P90_LIMIT);
    Ok(ComplianceRow {
        l_min,
        p67,
        p90,
        pass,
        fixes,
        trials,
        no_fix_rate: 1.0 - fixes as f64 / trials as f64,
    })
}

/// 67th/90th percentile horizontal errors per minimum hearability, over the
/// trials that detect at least `L_min` stations and produce a fix.
pub fn fcc_compliance(cfg: &E911Config, scenario: &Scenario) -> Result<Vec<ComplianceRow>> {
    cfg.validate()?;
    match cfg.selection {
        BsSelection::AllDetected => {
            let outcomes = try_map_collect(cfg.execution, cfg.trials, |i| {
                run_trial(cfg, scenario, i as u64, cfg.max_used)
            })?;
            cfg.min_hearability_grid
                .iter()
                .map(|&l| {
                    let errs = outcomes
                        .iter()
                        .filter(|o| o.detected >= l)
                        .filter_map(|o| o.error)
                        .collect();
                    row_from(l, cfg.trials, errs)
                })
                .collect()
        }
        BsSelection::BestLmin => cfg
            .min_hearability_grid
            .iter()
            .map(|&l| {
                let outcomes = try_map_collect(cfg.execution, cfg.trials, |i| {
                    run_trial(cfg, scenario, i as u64, Some(l))
                })?;
                let errs = outcomes
                    .iter()
                    .filter(|o| o.detected >= l)
                    .filter_map(|o| o.error)
                    .collect();
                row_from(l, cfg.trials, errs)
            })
            .collect(),
    }
}

/// Smallest minimum hearability in the table that meets both limits.
pub fn smallest_passing(rows: &[ComplianceRow]) -> Option<usize> {
    rows.iter().filter(|r| r.pass).map(|r| r.l_min).min()
}
