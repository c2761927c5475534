//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. List values are comma
//! separated. Every key has a default, so an empty file is valid.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use hearability::e911::{BsSelection, E911Config, RmsBandwidth};
use hearability::model::HEX_500_DENSITY;
use hearability::simulate::ActivityCoupling;
use hearability::{Deployment, MethodTag, QuadratureSpec, Scenario, ShadowingSpec, SimConfig};

/// A curve in a sweep: an analytic evaluator or a Monte Carlo ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic(MethodTag),
    MonteCarloJoint,
    MonteCarloLastBs,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Analytic(m) => m.name(),
            Method::MonteCarloJoint => "MonteCarloJoint",
            Method::MonteCarloLastBs => "MonteCarloLastBs",
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        !matches!(self, Method::Analytic(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("MonteCarloJoint") {
            return Ok(Method::MonteCarloJoint);
        }
        if s.eq_ignore_ascii_case("MonteCarloLastBs") {
            return Ok(Method::MonteCarloLastBs);
        }
        s.parse::<MethodTag>().map(Method::Analytic).map_err(|_| {
            let mut names: Vec<&str> = MethodTag::ALL.iter().map(|m| m.name()).collect();
            names.extend(["MonteCarloJoint", "MonteCarloLastBs"]);
            anyhow!("unknown method `{s}` (valid: {})", names.join(", "))
        })
    }
}

/// The `β/γ` grid in dB, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbSweep {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Everything a subcommand or figure recipe may need.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub l: usize,
    pub k: usize,
    pub noise_sigma2: f64,
    pub tx_power: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub sweep: DbSweep,
    /// `None` lets each subcommand pick its own default curves.
    pub methods: Option<Vec<Method>>,
    pub sim: SimConfig,
    pub quad: QuadratureSpec,
    pub reuse_base: MethodTag,
    pub max_l: usize,
    pub hex_sigmas: Vec<f64>,
    pub e911: E911Config,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: HEX_500_DENSITY,
            alpha: 4.0,
            p: 1.0,
            q: 1.0,
            l: 4,
            k: 1,
            noise_sigma2: 0.0,
            tx_power: 1.0,
            beta: None,
            gamma: None,
            sweep: DbSweep {
                start: -20.0,
                stop: 0.0,
                step: 1.0,
            },
            methods: None,
            sim: SimConfig::default(),
            quad: QuadratureSpec::default(),
            reuse_base: MethodTag::SingleIntegralAlpha4,
            max_l: 10,
            hex_sigmas: vec![4.0, 8.0, 12.0],
            e911: E911Config::default(),
        }
    }
}

/// Keys accepted by [`RunConfig::set`].
pub const KEYS: &[&str] = &[
    "lambda",
    "alpha",
    "p",
    "q",
    "L",
    "K",
    "noise_sigma2",
    "tx_power",
    "beta",
    "gamma",
    "beta_db",
    "gamma_db",
    "sweep_start_db",
    "sweep_stop_db",
    "sweep_step_db",
    "methods",
    "realizations",
    "seed",
    "expected_bs",
    "deployment",
    "hex_isd",
    "shadow_sigma_db",
    "coupling",
    "upsilon_cap",
    "tail_correction",
    "quad_rel_tol",
    "quad_abs_tol",
    "quad_max_depth",
    "quad_tail_quantile",
    "reuse_base",
    "max_l",
    "hex_sigmas",
    "e911_bandwidth",
    "e911_clock_std",
    "e911_nlos_mean",
    "e911_threshold_db",
    "e911_alpha",
    "e911_shadow_sigma_db",
    "e911_hex_isd",
    "e911_gain_db",
    "e911_spectrum",
    "e911_ranging_noise",
    "e911_selection",
    "e911_max_used",
    "e911_trials",
    "e911_grid",
    "e911_expected_bs",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow!("key `{key}`: cannot parse `{value}` as a number"))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| num(key, v))
        .collect()
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("key `{key}`: expected true or false, got `{value}`"),
    }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(value))
        .map(|&(_, v)| v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            anyhow!("key `{key}`: expected one of {}, got `{value}`", names.join(", "))
        })
}

/// Splits configuration text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{line}`", i + 1))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Parses configuration text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (line, k, v) in parse_pairs(text)? {
            cfg.set(&k, &v).with_context(|| format!("line {line}"))?;
        }
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "lambda" => self.lambda = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "q" => self.q = num(key, value)?,
            "L" | "l" => self.l = num(key, value)?,
            "K" | "k" => self.k = num(key, value)?,
            "noise_sigma2" => self.noise_sigma2 = num(key, value)?,
            "tx_power" => self.tx_power = num(key, value)?,
            "beta" => self.beta = Some(num(key, value)?),
            "gamma" => self.gamma = Some(num(key, value)?),
            "beta_db" => self.beta = Some(hearability::db_to_linear(num(key, value)?)),
            "gamma_db" => self.gamma = Some(hearability::db_to_linear(num(key, value)?)),
            "sweep_start_db" => self.sweep.start = num(key, value)?,
            "sweep_stop_db" => self.sweep.stop = num(key, value)?,
            "sweep_step_db" => self.sweep.step = num(key, value)?,
            "methods" => {
                let methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| v.parse::<Method>().with_context(|| format!("key `{key}`")))
                    .collect::<Result<Vec<_>>>()?;
                self.methods = Some(methods);
            }
            "realizations" => self.sim.realizations = num(key, value)?,
            "seed" => {
                self.sim.seed = num(key, value)?;
                self.e911.seed = self.sim.seed;
            }
            "expected_bs" => self.sim.expected_bs = num(key, value)?,
            "deployment" => {
                self.sim.deployment = choice(key, value, &[("ppp", Deployment::Ppp), ("hex", Deployment::HexGrid)])?
            }
            "hex_isd" => self.sim.hex_isd = num(key, value)?,
            "shadow_sigma_db" => {
                self.sim.shadow = ShadowingSpec::new(num(key, value)?).map_err(|e| anyhow!("key `{key}`: {e}"))?
            }
            "coupling" => {
                self.sim.coupling = choice(
                    key,
                    value,
                    &[
                        ("coupled", ActivityCoupling::Coupled),
                        ("independent", ActivityCoupling::Independent),
                    ],
                )?
            }
            "upsilon_cap" => self.sim.upsilon_cap = num(key, value)?,
            "tail_correction" => self.sim.tail_correction = flag(key, value)?,
            "quad_rel_tol" => self.quad.rel_tol = num(key, value)?,
            "quad_abs_tol" => self.quad.abs_tol = num(key, value)?,
            "quad_max_depth" => self.quad.max_depth = num(key, value)?,
            "quad_tail_quantile" => self.quad.tail_quantile = num(key, value)?,
            "reuse_base" => {
                self.reuse_base = value.parse().map_err(|e| anyhow!("key `{key}`: {e}"))?;
            }
            "max_l" => self.max_l = num(key, value)?,
            "hex_sigmas" => self.hex_sigmas = list(key, value)?,
            "e911_bandwidth" => self.e911.bandwidth = num(key, value)?,
            "e911_clock_std" => self.e911.clock_std = num(key, value)?,
            "e911_nlos_mean" => self.e911.nlos_mean = num(key, value)?,
            "e911_threshold_db" => self.e911.pre_sinr_threshold = hearability::db_to_linear(num(key, value)?),
            "e911_alpha" => self.e911.alpha = num(key, value)?,
            "e911_shadow_sigma_db" => self.e911.shadow_sigma_db = num(key, value)?,
            "e911_hex_isd" => self.e911.hex_isd = num(key, value)?,
            "e911_gain_db" => self.e911.processing_gain_db = num(key, value)?,
            "e911_spectrum" => {
                self.e911.spectrum = choice(
                    key,
                    value,
                    &[("flat", RmsBandwidth::Flat), ("band_edge", RmsBandwidth::BandEdge)],
                )?
            }
            "e911_ranging_noise" => self.e911.ranging_noise = flag(key, value)?,
            "e911_selection" => {
                self.e911.selection = choice(
                    key,
                    value,
                    &[("all", BsSelection::AllDetected), ("best", BsSelection::BestLmin)],
                )?
            }
            "e911_max_used" => {
                self.e911.max_used = match value {
                    "" | "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "e911_trials" => self.e911.trials = num(key, value)?,
            "e911_grid" => self.e911.min_hearability_grid = list(key, value)?,
            "e911_expected_bs" => self.e911.expected_bs = num(key, value)?,
            _ => bail!("unknown configuration key `{key}`"),
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` override from the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{assignment}` is not of the form KEY=VALUE"))?;
        self.set(k.trim(), v.trim())
    }

    /// A single `β/γ` in dB when `beta` or `gamma` was set explicitly.
    pub fn point_db(&self) -> Option<f64> {
        if self.beta.is_none() && self.gamma.is_none() {
            return None;
        }
        Some(hearability::linear_to_db(
            self.beta.unwrap_or(1.0) / self.gamma.unwrap_or(1.0),
        ))
    }

    /// The `β/γ` grid: the explicit point if any, else the sweep.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(db) = self.point_db() {
            return Ok(vec![db]);
        }
        if self.sweep.step.is_nan() || self.sweep.step <= 0.0 {
            bail!("key `sweep_step_db`: step must be positive, got {}", self.sweep.step);
        }
        if self.sweep.start.partial_cmp(&self.sweep.stop) != Some(std::cmp::Ordering::Less) {
            bail!(
                "key `sweep_start_db`: start ({}) must be below sweep_stop_db ({})",
                self.sweep.start,
                self.sweep.stop
            );
        }
        Ok(self.sweep.points())
    }

    /// The network scenario at `β/γ = 0 dB`; sweeps move the threshold.
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::builder()
            .lambda(self.lambda)
            .alpha(self.alpha)
            .p(self.p)
            .q(self.q)
            .l(self.l)
            .k(self.k)
            .noise_sigma2(self.noise_sigma2)
            .tx_power(self.tx_power)
            .build()
            .map_err(|e| anyhow!("invalid scenario: {e}"))
    }

    /// The configured methods, or `default` when none were given.
    pub fn methods_or(&self, default: &[Method]) -> Result<Vec<Method>> {
        match &self.methods {
            Some(m) if m.is_empty() => bail!("key `methods`: at least one method is required"),
            Some(m) => Ok(m.clone()),
            None => Ok(default.to_vec()),
        }
    }
}
