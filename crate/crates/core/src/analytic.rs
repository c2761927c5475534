//! Closed-form and integral evaluations of the L-localizability probability
//! `P_L`, the probability that the `L` nearest base stations all clear the
//! SINR threshold.
//!
//! Every approximation treats the closest active participant (the dominant
//! interferer, at distance `R̂₁`) exactly and replaces the rest of the
//! interference by its conditional mean. Indicator functions inside the
//! integrands are never sampled: their boundaries are located with a
//! bisection root finder and the integrals run over smooth intervals only.
//!
//! All evaluators assume an interference-limited network (`σ² = 0`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::model::{cdf_ratio_x, pdf_rl, pmf_omega, Scenario};
use crate::numerics::{
    clamp_probability, erlang_cdf, erlang_quantile, find_root_monotone, integrate_adaptive, poisson_cdf, QuadratureSpec,
};

/// Which evaluator to use for `P_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodTag {
    /// Dominant-interferer upper bound.
    UpperBound,
    /// The `p = 1` bound whose inversion gives the minimum processing gain.
    ProcGainBound,
    /// Perfect coordination (`p = 0`) closed form.
    PerfectCoord,
    /// General double integral.
    DoubleIntegral,
    /// Single integral over `R_L/R̂₁` for any `α`.
    SingleIntegralGeneral,
    /// Single integral over `R_L`, `α = 4` only.
    SingleIntegralAlpha4,
    /// Closed form ignoring interference beyond `R_L`, `α = 4` only.
    NearFieldAlpha4,
}

impl MethodTag {
    pub const ALL: [MethodTag; 7] = [
        MethodTag::UpperBound,
        MethodTag::ProcGainBound,
        MethodTag::PerfectCoord,
        MethodTag::DoubleIntegral,
        MethodTag::SingleIntegralGeneral,
        MethodTag::SingleIntegralAlpha4,
        MethodTag::NearFieldAlpha4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodTag::UpperBound => "UpperBound",
            MethodTag::ProcGainBound => "ProcGainBound",
            MethodTag::PerfectCoord => "PerfectCoord",
            MethodTag::DoubleIntegral => "DoubleIntegral",
            MethodTag::SingleIntegralGeneral => "SingleIntegralGeneral",
            MethodTag::SingleIntegralAlpha4 => "SingleIntegralAlpha4",
            MethodTag::NearFieldAlpha4 => "NearFieldAlpha4",
        }
    }

    pub fn requires_alpha4(&self) -> bool {
        matches!(self, MethodTag::SingleIntegralAlpha4 | MethodTag::NearFieldAlpha4)
    }

    /// True when the output cannot depend on the density at all.
    pub fn is_density_free(&self) -> bool {
        !matches!(self, MethodTag::DoubleIntegral | MethodTag::SingleIntegralAlpha4)
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodTag::ALL
            .iter()
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown analytic method '{s}'")))
    }
}

/// `E[(r/R_L)^{-α}]` for `r` uniform (by area) on the annulus between
/// `u·R_L` and `R_L`.
///
/// Written with `expm1` so that the removable singularity at `u = 1` (where
/// the value is 1) is evaluated without cancellation.
pub fn annulus_mean_factor(u: f64, alpha: f64) -> f64 {
    if u >= 1.0 {
        return 1.0;
    }
    let ln_u = u.ln();
    2.0 / (2.0 - alpha) * ((2.0 - alpha) * ln_u).exp_m1() / (2.0 * ln_u).exp_m1()
}

/// Mean interference from the `Ω-1` active participants between the
/// dominant interferer and the `L`-th base station.
pub fn mean_i1(r1_hat: f64, rl: f64, omega: usize, scenario: &Scenario) -> Result<f64> {
    if !(r1_hat > 0.0) || !(r1_hat <= rl) {
        return domain(format!("need 0 < r1_hat ≤ rl, got r1_hat={r1_hat}, rl={rl}"));
    }
    if omega <= 1 {
        return Ok(0.0);
    }
    let alpha = scenario.alpha();
    Ok((omega - 1) as f64 * scenario.tx_power() * rl.powf(-alpha) * annulus_mean_factor(r1_hat / rl, alpha))
}

/// Mean interference from the background network beyond `R_L`,
/// `2Pπqλ/(α-2)·R_L^{2-α}`.
pub fn mean_i2(rl: f64, scenario: &Scenario) -> Result<f64> {
    let alpha = scenario.alpha();
    if !(alpha > 2.0) {
        return domain("mean background interference is unbounded for alpha ≤ 2");
    }
    if !(rl > 0.0) {
        return domain(format!("rl must be positive, got {rl}"));
    }
    Ok(2.0 * scenario.tx_power() * PI * scenario.q() * scenario.lambda() / (alpha - 2.0) * rl.powf(2.0 - alpha))
}

/// Floor of `γ/β`, snapping to the nearest integer when within 1e-12 so that
/// dB round trips cannot shift the result by one.
fn floor_snapped(x: f64) -> usize {
    let r = x.round();
    let f = if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    };
    f.max(0.0) as usize
}

/// Largest number of active participants that can still be tolerated,
/// `min{L-1, ⌊γ/β⌋}`.
pub fn chi(scenario: &Scenario) -> usize {
    (scenario.l() - 1).min(floor_snapped(scenario.gain_ratio()))
}

fn require_interference_limited(s: &Scenario, what: &str) -> Result<()> {
    if s.is_interference_limited() {
        Ok(())
    } else {
        Err(Error::Incompatible(format!(
            "{what} is derived for interference-limited networks (noise_sigma2 = 0)"
        )))
    }
}

fn require_alpha4(s: &Scenario, what: &str) -> Result<()> {
    if s.alpha() == 4.0 {
        Ok(())
    } else {
        Err(Error::Incompatible(format!(
            "{what} requires alpha = 4, got {}",
            s.alpha()
        )))
    }
}

/// Upper bound on `P_L`: the dominant interferer is kept, the remaining
/// active participants are pushed out to `R_L` and everything beyond `R_L`
/// is dropped.
pub fn pl_upper_bound(scenario: &Scenario) -> Result<f64> {
    let g = scenario.gain_ratio();
    let alpha = scenario.alpha();
    let l = scenario.l();
    let mut total = 0.0;
    for omega in 0..=chi(scenario) {
        let pm = pmf_omega(omega, l, scenario.p())?;
        if omega == 0 {
            total += pm;
            continue;
        }
        let base = 1.0 - (g - (omega as f64 - 1.0)).powf(-2.0 / alpha);
        total += base.max(0.0).powi(omega as i32) * pm;
    }
    Ok(clamp_probability(total))
}

/// The `p = q = 1` form of [`pl_upper_bound`], zero unless `β < γ/(L-1)`.
pub fn pl_upper_bound_full_load(scenario: &Scenario) -> Result<f64> {
    let s = scenario.to_builder().p(1.0).q(1.0).build()?;
    pl_upper_bound(&s)
}

/// Smallest processing gain for which the no-coordination bound reaches
/// `target_pl`, `β((1 - P_L^{1/(L-1)})^{-α/2} + L - 2)`.
pub fn min_processing_gain(target_pl: f64, l: usize, alpha: f64, beta: f64) -> Result<f64> {
    if !(target_pl > 0.0 && target_pl < 1.0) {
        return domain(format!("target probability must lie in (0, 1), got {target_pl}"));
    }
    if l < 2 {
        return domain("minimum processing gain needs L ≥ 2");
    }
    if !(alpha > 2.0) || !(beta > 0.0) {
        return domain(format!("need alpha > 2 and beta > 0, got {alpha}, {beta}"));
    }
    let root = target_pl.powf(1.0 / (l - 1) as f64);
    Ok(beta * ((1.0 - root).powf(-alpha / 2.0) + l as f64 - 2.0))
}

/// `P_L` under perfect coordination (`p = 0`): the probability that at
/// least `L` base stations fall inside the disk where the background
/// interference mean stays below the threshold.
pub fn pl_perfect_coord(scenario: &Scenario) -> Result<f64> {
    if scenario.q() == 0.0 {
        return Ok(1.0);
    }
    let mu = (scenario.alpha() - 2.0) / (2.0 * scenario.q() * scenario.threshold());
    Ok(clamp_probability(1.0 - poisson_cdf(scenario.l() as u64 - 1, mu)?))
}

/// Denominator of the normalized SIR of the `L`-th base station with the
/// dominant interferer at `u·R_L`, without the background term:
/// `u^{-α} + (Ω-1)·E[(r/R_L)^{-α}]`.
fn near_denominator(u: f64, omega: usize, alpha: f64) -> f64 {
    u.powf(-alpha) + (omega as f64 - 1.0) * annulus_mean_factor(u, alpha)
}

/// Coarse-grid check that `f` is monotone in the stated direction.
fn verify_monotone<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, increasing: bool, what: &str) -> Result<()> {
    const N: usize = 64;
    let mut prev = f(lo);
    for i in 1..=N {
        let x = lo + (hi - lo) * i as f64 / N as f64;
        let v = f(x);
        let ok = if increasing {
            v >= prev * (1.0 - 1e-12)
        } else {
            v <= prev * (1.0 + 1e-12)
        };
        if !ok {
            return Err(Error::NotMonotone(format!("{what} at x = {x:e}")));
        }
        prev = v;
    }
    Ok(())
}

fn truncation_radius(scenario: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    let rate = scenario.lambda() * PI;
    Ok(erlang_quantile(scenario.l() as u64, rate, quad.tail_quantile)?.sqrt())
}

/// Dominant-interferer double integral over `(R̂₁, R_L)`, general `α`.
///
/// For fixed `R_L` and `Ω` the SIR is increasing in `R̂₁`, so the inner
/// indicator selects `R̂₁ ∈ [t, R_L]`. The boundary `t` is found by
/// bisection and the inner integral of the `R̂₁` density is taken in closed
/// form, `(1 - t²/R_L²)^Ω`. The outer integral runs against `f_{R_L}` up to
/// the point where even `R̂₁ = R_L` fails, truncated at the `tail_quantile`
/// of `R_L`.
pub fn pl_double_integral(scenario: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    require_interference_limited(scenario, "the double integral")?;
    quad.validate()?;
    let alpha = scenario.alpha();
    let q = scenario.q();
    let g = scenario.gain_ratio();
    let l = scenario.l();
    let lambda_pi = scenario.lambda() * PI;
    let background = 2.0 * q / (alpha - 2.0);

    let mut total = pl_perfect_coord(scenario)? * pmf_omega(0, l, scenario.p())?;
    let r_trunc = truncation_radius(scenario, quad)?;

    for omega in 1..l {
        let pm = pmf_omega(omega, l, scenario.p())?;
        if pm == 0.0 || g <= omega as f64 {
            continue;
        }
        // SIR at R̂₁ = R_L is 1/(Ω + background·λπR_L²).
        let r_max = if q > 0.0 {
            ((g - omega as f64) / background / lambda_pi).sqrt()
        } else {
            f64::INFINITY
        };
        let upper = r_max.min(r_trunc);
        let u_floor = g.powf(-1.0 / alpha);
        verify_monotone(
            |u| near_denominator(u, omega, alpha),
            u_floor,
            1.0,
            false,
            "SIR denominator must decrease in the dominant interferer distance",
        )?;

        let inner = |r: f64| -> f64 {
            let target = g - background * lambda_pi * r * r;
            if target <= omega as f64 {
                return 0.0;
            }
            // Pulled in slightly: at Ω = 1 the bracket end is an exact root.
            let u_lo = target.powf(-1.0 / alpha) * (1.0 - 1e-12);
            let root = find_root_monotone(|u| near_denominator(u, omega, alpha) - target, u_lo, 1.0, 1e-15);
            match root {
                Ok(u) => (1.0 - u * u).max(0.0).powi(omega as i32),
                Err(_) => f64::NAN,
            }
        };
        let integral = integrate_adaptive(
            |r| {
                if r <= 0.0 {
                    return 0.0;
                }
                pdf_rl(r, l, scenario.lambda()).unwrap_or(0.0) * inner(r)
            },
            0.0,
            upper,
            quad,
        )?;
        total += pm * integral;
    }
    Ok(clamp_probability(total))
}

/// Single-integral approximation over `X = R_L/R̂₁`, any `α > 2`.
///
/// The background term is rescaled by `E[R̂₁²]/R̂₁²` so the SIR depends on
/// `X` alone. The feasible set is `[1, x*]`, and the integral of the `X`
/// density over it is `F_X(x*) = (1 - x*^{-2})^Ω`.
pub fn pl_single_integral_general(scenario: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    require_interference_limited(scenario, "the single-integral approximation")?;
    quad.validate()?;
    let alpha = scenario.alpha();
    let g = scenario.gain_ratio();
    let l = scenario.l();
    let background = 2.0 * scenario.q() / (alpha - 2.0);

    let mut total = pl_perfect_coord(scenario)? * pmf_omega(0, l, scenario.p())?;
    for omega in 1..l {
        let pm = pmf_omega(omega, l, scenario.p())?;
        if pm == 0.0 {
            continue;
        }
        let bracket = |x: f64| near_denominator(1.0 / x, omega, alpha) + background * x * x;
        if bracket(1.0) > g {
            continue;
        }
        // The bracket exceeds x^α, so x^α = γ/β closes the search interval.
        let x_hi = g.powf(1.0 / alpha) * (1.0 + 1e-12);
        if x_hi <= 1.0 {
            continue;
        }
        verify_monotone(bracket, 1.0, x_hi, true, "single-integral bracket must increase in x")?;
        let x_star = find_root_monotone(|x| bracket(x) - g, 1.0, x_hi, 1e-15 * x_hi)?;
        total += pm * cdf_ratio_x(x_star, omega)?;
    }
    Ok(clamp_probability(total))
}

/// `α = 4` single integral over `R_L`; reduces to the fully loaded form at
/// `p = q = 1` and to [`pl_nearfield_alpha4`] as `q → 0`.
pub fn pl_alpha4(scenario: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    require_alpha4(scenario, "SingleIntegralAlpha4")?;
    require_interference_limited(scenario, "SingleIntegralAlpha4")?;
    quad.validate()?;
    let g = scenario.gain_ratio();
    let l = scenario.l();
    let lambda = scenario.lambda();
    let qlp = PI * scenario.q() * lambda;
    let r_trunc = truncation_radius(scenario, quad)?;

    let mut total = 0.0;
    for omega in 0..=chi(scenario) {
        let pm = pmf_omega(omega, l, scenario.p())?;
        if pm == 0.0 {
            continue;
        }
        let r_max = if qlp > 0.0 {
            ((g - omega as f64).max(0.0) / qlp).sqrt()
        } else {
            f64::INFINITY
        };
        let upper = r_max.min(r_trunc);
        if omega == 0 {
            // Integral of f_{R_L} alone.
            total += pm * erlang_cdf(upper * upper, l as u64, lambda * PI)?;
            continue;
        }
        let w = omega as f64;
        let shift = (w - 1.0) / 2.0;
        let integral = integrate_adaptive(
            |r| {
                if r <= 0.0 {
                    return 0.0;
                }
                let root = (g - qlp * r * r + shift * shift).max(0.0).sqrt();
                let inner = (1.0 - 1.0 / (root - shift)).max(0.0).powi(omega as i32);
                inner * pdf_rl(r, l, lambda).unwrap_or(0.0)
            },
            0.0,
            upper,
            quad,
        )?;
        total += pm * integral;
    }
    Ok(clamp_probability(total))
}

/// `α = 4` closed form when only the interference from the other
/// participants matters.
pub fn pl_nearfield_alpha4(scenario: &Scenario) -> Result<f64> {
    require_alpha4(scenario, "NearFieldAlpha4")?;
    let g = scenario.gain_ratio();
    let l = scenario.l();
    let mut total = 0.0;
    for omega in 0..=chi(scenario) {
        let pm = pmf_omega(omega, l, scenario.p())?;
        if omega == 0 {
            total += pm;
            continue;
        }
        let shift = (omega as f64 - 1.0) / 2.0;
        let inner = 1.0 - 1.0 / ((g + shift * shift).sqrt() - shift);
        total += pm * inner.max(0.0).powi(omega as i32);
    }
    Ok(clamp_probability(total))
}

/// Evaluates `P_L` with the chosen method.
///
/// `ProcGainBound` evaluates the no-coordination bound that
/// [`min_processing_gain`] inverts, regardless of the scenario's `p` and `q`.
pub fn evaluate(method: MethodTag, scenario: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    if method.requires_alpha4() {
        require_alpha4(scenario, method.name())?;
    }
    let v = match method {
        MethodTag::UpperBound => pl_upper_bound(scenario)?,
        MethodTag::ProcGainBound => pl_upper_bound_full_load(scenario)?,
        MethodTag::PerfectCoord => {
            require_interference_limited(scenario, "PerfectCoord")?;
            pl_perfect_coord(scenario)?
        }
        MethodTag::DoubleIntegral => pl_double_integral(scenario, quad)?,
        MethodTag::SingleIntegralGeneral => pl_single_integral_general(scenario, quad)?,
        MethodTag::SingleIntegralAlpha4 => pl_alpha4(scenario, quad)?,
        MethodTag::NearFieldAlpha4 => pl_nearfield_alpha4(scenario)?,
    };
    Ok(clamp_probability(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HEX_500_DENSITY;
    use approx::assert_abs_diff_eq;

    fn scenario(l: usize, alpha: f64, p: f64, q: f64, threshold_db: f64) -> Scenario {
        Scenario::builder()
            .l(l)
            .alpha(alpha)
            .p(p)
            .q(q)
            .threshold_db(threshold_db)
            .build()
            .unwrap()
    }

    fn with_gain_ratio(l: usize, alpha: f64, p: f64, q: f64, g: f64) -> Scenario {
        Scenario::builder()
            .l(l)
            .alpha(alpha)
            .p(p)
            .q(q)
            .beta(1.0)
            .gamma(g)
            .build()
            .unwrap()
    }

    #[test]
    fn mean_i1_matches_annulus_oracle() {
        // One uniform point in the annulus [1, 2]: (2/3)∫₁² r^{-3} dr = 0.25.
        let s = Scenario::default();
        assert_abs_diff_eq!(mean_i1(1.0, 2.0, 2, &s).unwrap(), 0.25, epsilon = 1e-14);
        assert_eq!(mean_i1(1.0, 2.0, 1, &s).unwrap(), 0.0);
        assert_eq!(mean_i1(1.0, 2.0, 0, &s).unwrap(), 0.0);
        assert!(mean_i1(3.0, 2.0, 2, &s).is_err());
        // Removable singularity at r1_hat = rl: P(Ω-1)R_L^{-α}.
        assert_abs_diff_eq!(mean_i1(2.0, 2.0, 3, &s).unwrap(), 2.0 / 16.0, epsilon = 1e-15);
        let near = mean_i1(2.0 * (1.0 - 1e-9), 2.0, 3, &s).unwrap();
        assert_abs_diff_eq!(near, 2.0 / 16.0, epsilon = 1e-9);
    }

    #[test]
    fn annulus_factor_general_alpha() {
        // Direct evaluation of the textbook form away from u = 1.
        for &alpha in &[2.5, 3.0, 3.76, 4.0, 5.0] {
            for &u in &[0.05f64, 0.3, 0.7, 0.95] {
                let direct: f64 = 2.0 / (2.0 - alpha) * (1.0 - u.powf(2.0 - alpha)) / (1.0 - u * u);
                assert_abs_diff_eq!(annulus_mean_factor(u, alpha), direct, epsilon = 1e-10 * direct);
            }
        }
    }

    #[test]
    fn mean_i2_values() {
        let s = Scenario::builder().lambda(1.0 / PI).build().unwrap();
        assert_abs_diff_eq!(mean_i2(1.0, &s).unwrap(), 1.0, epsilon = 1e-15);
        let s0 = s.to_builder().q(0.0).build().unwrap();
        assert_eq!(mean_i2(1.0, &s0).unwrap(), 0.0);
        let half = s.to_builder().q(0.5).build().unwrap();
        assert_abs_diff_eq!(
            2.0 * mean_i2(1.7, &half).unwrap(),
            mean_i2(1.7, &s).unwrap(),
            epsilon = 1e-15
        );
        assert!(mean_i2(0.0, &s).is_err());
    }

    #[test]
    fn upper_bound_values() {
        let s = with_gain_ratio(4, 4.0, 1.0, 1.0, 100.0);
        // (1 - 98^{-1/2})³
        assert_abs_diff_eq!(pl_upper_bound(&s).unwrap(), 0.726_535_713_629_691_6, epsilon = 1e-12);
        assert_eq!(pl_upper_bound(&with_gain_ratio(4, 4.0, 1.0, 1.0, 3.0)).unwrap(), 0.0);
        assert_eq!(pl_upper_bound(&with_gain_ratio(4, 4.0, 1.0, 1.0, 2.5)).unwrap(), 0.0);
        for l in 1..8 {
            assert_eq!(pl_upper_bound(&with_gain_ratio(l, 3.5, 0.0, 1.0, 0.3)).unwrap(), 1.0);
        }
    }

    #[test]
    fn chi_snaps_near_integers() {
        let s = Scenario::builder().l(10).beta(1.0).gamma(3.0 - 1e-14).build().unwrap();
        assert_eq!(chi(&s), 3);
        let s = Scenario::builder().l(10).beta(1.0).gamma(2.999).build().unwrap();
        assert_eq!(chi(&s), 2);
        let s = Scenario::builder().l(3).beta(1.0).gamma(50.0).build().unwrap();
        assert_eq!(chi(&s), 2);
    }

    #[test]
    fn min_gain_values() {
        // (1 - 0.8^{1/3})^{-2} + 2
        assert_abs_diff_eq!(
            min_processing_gain(0.8, 4, 4.0, 1.0).unwrap(),
            196.615_284_371_535_5,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            min_processing_gain(0.8, 4, 3.0, 1.0).unwrap(),
            54.105_396_960_083_56,
            epsilon = 1e-9
        );
        let tiny = min_processing_gain(1e-30, 4, 4.0, 2.0).unwrap();
        assert_abs_diff_eq!(tiny, 2.0 * 3.0, epsilon = 1e-6);
        assert!(min_processing_gain(0.8, 1, 4.0, 1.0).is_err());
        assert!(min_processing_gain(1.0, 4, 4.0, 1.0).is_err());
    }

    #[test]
    fn min_gain_inverts_full_load_bound() {
        for l in 2..12 {
            for &alpha in &[3.0, 3.76, 4.0, 5.0] {
                let g = min_processing_gain(0.8, l, alpha, 1.0).unwrap();
                let s = with_gain_ratio(l, alpha, 1.0, 1.0, g);
                assert_abs_diff_eq!(pl_upper_bound(&s).unwrap(), 0.8, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn perfect_coord_values() {
        let s = scenario(4, 4.0, 0.0, 1.0, -10.0);
        assert_abs_diff_eq!(pl_perfect_coord(&s).unwrap(), 0.989_663_949_324_074_3, epsilon = 1e-12);
        let s = scenario(1, 4.0, 0.0, 1.0, 0.0);
        assert_abs_diff_eq!(pl_perfect_coord(&s).unwrap(), 1.0 - (-1f64).exp(), epsilon = 1e-15);
        let a = pl_perfect_coord(&s).unwrap();
        let b = pl_perfect_coord(&s.with_lambda(10.0 * s.lambda()).unwrap()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(pl_perfect_coord(&s.to_builder().q(0.0).build().unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn perfect_coord_is_an_erlang_probability() {
        // At least L points of the PPP inside the disk of squared radius
        // (α-2)/(2πqλβ/γ): invert through the Erlang quantile instead.
        for &(l, alpha, q, t_db) in &[(4, 4.0, 1.0, -10.0), (2, 3.0, 0.5, -5.0), (6, 3.76, 0.8, -12.0)] {
            let s = scenario(l, alpha, 0.0, q, t_db);
            let pl = pl_perfect_coord(&s).unwrap();
            let rate = s.lambda() * PI;
            let r2 = (alpha - 2.0) / (2.0 * PI * q * s.lambda() * s.threshold());
            let x = erlang_quantile(l as u64, rate, pl).unwrap();
            assert!((x / r2 - 1.0).abs() < 1e-8, "{x} vs {r2}");
        }
    }

    #[test]
    fn nearfield_values() {
        assert_abs_diff_eq!(
            pl_nearfield_alpha4(&with_gain_ratio(4, 4.0, 1.0, 1.0, 100.0)).unwrap(),
            0.703_784_469_674_449_3,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pl_nearfield_alpha4(&with_gain_ratio(2, 4.0, 0.5, 1.0, 4.0)).unwrap(),
            0.75,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            pl_nearfield_alpha4(&with_gain_ratio(2, 4.0, 1.0, 1.0, 4.0)).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(
            pl_nearfield_alpha4(&with_gain_ratio(4, 4.0, 1.0, 1.0, 3.0)).unwrap(),
            0.0
        );
        assert!(pl_nearfield_alpha4(&with_gain_ratio(4, 3.76, 1.0, 1.0, 3.0)).is_err());
    }

    #[test]
    fn double_integral_reduces_to_perfect_coord() {
        let quad = QuadratureSpec::default();
        for &t in &[-20.0, -10.0, -3.0, 0.0] {
            let s = scenario(4, 3.5, 0.0, 0.7, t);
            let a = pl_double_integral(&s, &quad).unwrap();
            let b = evaluate(MethodTag::PerfectCoord, &s, &quad).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn double_integral_matches_brute_force_grid() {
        // Frozen from a 6000 × 12000 midpoint grid over (λπR_L², R̂₁/R_L)
        // with the indicator evaluated pointwise.
        let quad = QuadratureSpec::default();
        let cases = [
            (4, 4.0, 1.0, 1.0, -16.0, 0.516_612),
            (4, 3.0, 2.0 / 3.0, 1.0, -16.0, 0.786_875),
            (2, 4.0, 0.5, 1.0, -8.0, 0.739_517),
        ];
        for &(l, alpha, p, q, t, expect) in &cases {
            let v = pl_double_integral(&scenario(l, alpha, p, q, t), &quad).unwrap();
            assert_abs_diff_eq!(v, expect, epsilon = 1e-5);
        }
    }

    #[test]
    fn alpha4_family_agrees() {
        let quad = QuadratureSpec::default();
        for &(p, q) in &[(1.0, 1.0), (0.5, 0.75), (2.0 / 3.0, 1.0), (0.2, 0.3)] {
            for i in 0..=20 {
                let t = -20.0 + i as f64;
                let s = scenario(4, 4.0, p, q, t);
                let a = pl_alpha4(&s, &quad).unwrap();
                let b = pl_double_integral(&s, &quad).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn alpha4_single_bs_is_perfect_coord() {
        let quad = QuadratureSpec::default();
        for &t in &[-15.0, -5.0, 0.0, 3.0] {
            let s = scenario(1, 4.0, 0.6, 0.9, t);
            assert_abs_diff_eq!(
                pl_alpha4(&s, &quad).unwrap(),
                pl_perfect_coord(&s).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn alpha4_vanishing_load_is_nearfield() {
        let quad = QuadratureSpec::default();
        for &p in &[1.0, 0.5] {
            for &t in &[-20.0, -14.0, -8.0] {
                let s = scenario(4, 4.0, p, 1e-9, t);
                let a = pl_alpha4(&s, &quad).unwrap();
                let b = pl_nearfield_alpha4(&s).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn single_integral_edge_terms() {
        let quad = QuadratureSpec::default();
        // With zero background load and a huge gain the ratio is unconstrained.
        let s = with_gain_ratio(3, 3.0, 1.0, 0.0, 1e12);
        assert_abs_diff_eq!(pl_single_integral_general(&s, &quad).unwrap(), 1.0, epsilon = 1e-6);
        // At α = 4 and q = 0 it coincides with the near-field closed form.
        for &t in &[-20.0, -12.0, -6.0] {
            let s = scenario(4, 4.0, 0.7, 0.0, t);
            assert_abs_diff_eq!(
                pl_single_integral_general(&s, &quad).unwrap(),
                pl_nearfield_alpha4(&s).unwrap(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn methods_are_density_free() {
        let quad = QuadratureSpec::default();
        for &alpha in &[3.0, 4.0] {
            let s = scenario(4, alpha, 0.5, 0.75, -12.0);
            let s10 = s.with_lambda(10.0 * s.lambda()).unwrap();
            for m in MethodTag::ALL {
                if m.requires_alpha4() && alpha != 4.0 {
                    continue;
                }
                let a = evaluate(m, &s, &quad).unwrap();
                let b = evaluate(m, &s10, &quad).unwrap();
                if m.is_density_free() {
                    assert_eq!(a.to_bits(), b.to_bits(), "{m}");
                } else {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn dispatcher_guards() {
        let quad = QuadratureSpec::default();
        let s = scenario(4, 3.76, 1.0, 1.0, -10.0);
        assert!(matches!(
            evaluate(MethodTag::NearFieldAlpha4, &s, &quad),
            Err(Error::Incompatible(_))
        ));
        assert!(matches!(
            evaluate(MethodTag::SingleIntegralAlpha4, &s, &quad),
            Err(Error::Incompatible(_))
        ));
        let noisy = s.to_builder().noise_sigma2(1e-13).build().unwrap();
        assert!(evaluate(MethodTag::DoubleIntegral, &noisy, &quad).is_err());
        assert!(evaluate(MethodTag::UpperBound, &noisy, &quad).is_ok());
        assert_eq!(
            "doubleintegral".parse::<MethodTag>().unwrap(),
            MethodTag::DoubleIntegral
        );
        assert!("Nope".parse::<MethodTag>().is_err());
    }

    #[test]
    fn bound_dominates_double_integral() {
        let quad = QuadratureSpec::default();
        for &alpha in &[3.0, 3.5, 4.0, 4.5] {
            for &p in &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
                for i in 0..=10 {
                    let s = scenario(4, alpha, p, 1.0, -20.0 + 2.0 * i as f64);
                    let ub = pl_upper_bound(&s).unwrap();
                    let di = pl_double_integral(&s, &quad).unwrap();
                    assert!(ub + 1e-6 >= di, "alpha={alpha} p={p} i={i}: {ub} < {di}");
                }
            }
        }
    }

    #[test]
    fn fully_loaded_anchor() {
        let quad = QuadratureSpec::default();
        let s = Scenario::builder()
            .lambda(HEX_500_DENSITY)
            .threshold_db(-16.0)
            .build()
            .unwrap();
        let v = pl_alpha4(&s, &quad).unwrap();
        assert!((v - 0.50).abs() <= 0.03, "{v}");
    }
}
