//! L-localizability under random frequency reuse.
//!
//! Each base station picks one of `K` bands uniformly, so every band sees an
//! independent thinned network of density `λ/K`. With `p = q` the number of
//! hearable stations per band is independent across bands, and the device
//! succeeds when the per-band counts add up to at least `L`.

use crate::analytic::{evaluate, MethodTag};
use crate::error::{domain, Error, Result};
use crate::model::Scenario;
use crate::numerics::{binomial_coefficient, QuadratureSpec};

/// Largest number of compositions enumerated term by term before switching
/// to the convolution form.
const ENUMERATION_CAP: f64 = 2.0e7;

/// Inputs of a reuse evaluation. `p = q` is enforced at construction.
#[derive(Debug, Clone)]
pub struct ReuseQuery {
    base_method: MethodTag,
    scenario: Scenario,
    quad: QuadratureSpec,
}

impl ReuseQuery {
    pub fn new(base_method: MethodTag, scenario: Scenario, quad: QuadratureSpec) -> Result<Self> {
        if scenario.p() != scenario.q() {
            return Err(Error::Incompatible(format!(
                "frequency reuse needs p = q, got p={}, q={}",
                scenario.p(),
                scenario.q()
            )));
        }
        quad.validate()?;
        Ok(Self {
            base_method,
            scenario,
            quad,
        })
    }

    pub fn base_method(&self) -> MethodTag {
        self.base_method
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// `P_n` of one band (density `λ/K`), with `P_0 = 1`.
    pub fn band_pl(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        let k = self.scenario.k() as f64;
        let band = self
            .scenario
            .to_builder()
            .l(n)
            .k(1)
            .lambda(self.scenario.lambda() / k)
            .build()?;
        evaluate(self.base_method, &band, &self.quad)
    }
}

/// Probabilities that exactly `n` stations are hearable on one band,
/// `e(n) = P_n - P_{n+1}`, for `n = 0..len`.
pub fn exact_count_probabilities(query: &ReuseQuery, len: usize) -> Result<Vec<f64>> {
    let pl: Vec<f64> = (0..=len).map(|n| query.band_pl(n)).collect::<Result<_>>()?;
    pl.windows(2)
        .enumerate()
        .map(|(n, w)| {
            let e = w[0] - w[1];
            if e < -1e-9 {
                Err(Error::Domain(format!(
                    "{} is not monotone in L: P_{n} - P_{} = {e:e}",
                    query.base_method,
                    n + 1
                )))
            } else {
                Ok(e.max(0.0))
            }
        })
        .collect()
}

/// Sum over all `(n_1..n_K)` with `Σn_i ≤ budget` of `Π e(n_i)`.
fn enumerate(e: &[f64], bands: usize, budget: usize) -> f64 {
    if bands == 0 {
        return 1.0;
    }
    (0..=budget).map(|n| e[n] * enumerate(e, bands - 1, budget - n)).sum()
}

/// Reuse composition by explicit enumeration of band-count compositions.
pub fn pl_with_reuse_enumerated(query: &ReuseQuery) -> Result<f64> {
    let l = query.scenario.l();
    let e = exact_count_probabilities(query, l)?;
    let miss = enumerate(&e, query.scenario.k(), l - 1);
    Ok((1.0 - miss).clamp(0.0, 1.0))
}

/// Reuse composition by `K`-fold convolution of the truncated count
/// distribution.
pub fn pl_with_reuse_convolved(query: &ReuseQuery) -> Result<f64> {
    let l = query.scenario.l();
    let e = exact_count_probabilities(query, l)?;
    let mut acc = vec![0.0; l];
    acc[0] = 1.0;
    for _ in 0..query.scenario.k() {
        let mut next = vec![0.0; l];
        for (i, &a) in acc.iter().enumerate() {
            for (j, &b) in e.iter().enumerate().take(l - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    Ok((1.0 - acc.iter().sum::<f64>()).clamp(0.0, 1.0))
}

/// Reuse composition from externally supplied per-band probabilities
/// `P_1..P_L` (for example Monte Carlo estimates).
pub fn pl_with_reuse_from(per_band: &[f64], k: usize) -> Result<f64> {
    let l = per_band.len();
    if l == 0 || k == 0 {
        return domain("need at least one per-band probability and one band");
    }
    let mut pl = vec![1.0];
    pl.extend_from_slice(per_band);
    let e: Vec<f64> = pl.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect();
    Ok((1.0 - enumerate(&e, k, l - 1)).clamp(0.0, 1.0))
}

/// `P_L` under random reuse with `K` bands.
pub fn pl_with_reuse(query: &ReuseQuery) -> Result<f64> {
    let l = query.scenario.l();
    if l == 0 {
        return domain("L must be at least 1");
    }
    let k = query.scenario.k();
    if k == 1 {
        return evaluate(query.base_method, &query.scenario, &query.quad);
    }
    let terms = binomial_coefficient((l - 1 + k) as u64, k as u64);
    if terms <= ENUMERATION_CAP {
        pl_with_reuse_enumerated(query)
    } else {
        pl_with_reuse_convolved(query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn query(method: MethodTag, l: usize, k: usize, p: f64, t_db: f64) -> ReuseQuery {
        let s = Scenario::builder()
            .l(l)
            .k(k)
            .p(p)
            .q(p)
            .threshold_db(t_db)
            .build()
            .unwrap();
        ReuseQuery::new(method, s, QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn rejects_unequal_activity() {
        let s = Scenario::builder().p(0.5).q(1.0).build().unwrap();
        assert!(matches!(
            ReuseQuery::new(MethodTag::UpperBound, s, QuadratureSpec::default()),
            Err(Error::Incompatible(_))
        ));
    }

    #[test]
    fn single_band_telescopes() {
        for &t in &[-18.0, -10.0, -4.0] {
            let q = query(MethodTag::SingleIntegralAlpha4, 4, 1, 1.0, t);
            let base = evaluate(
                MethodTag::SingleIntegralAlpha4,
                q.scenario(),
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert_abs_diff_eq!(pl_with_reuse_enumerated(&q).unwrap(), base, epsilon = 1e-12);
            assert_abs_diff_eq!(pl_with_reuse_convolved(&q).unwrap(), base, epsilon = 1e-12);
            assert_eq!(pl_with_reuse(&q).unwrap(), base);
        }
    }

    #[test]
    fn single_station_closed_form() {
        for &k in &[2, 3, 6] {
            let q = query(MethodTag::SingleIntegralAlpha4, 1, k, 1.0, -3.0);
            let p1 = q.band_pl(1).unwrap();
            let expect = 1.0 - (1.0 - p1).powi(k as i32);
            assert_abs_diff_eq!(pl_with_reuse(&q).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn enumeration_matches_convolution() {
        for &m in &[
            MethodTag::UpperBound,
            MethodTag::NearFieldAlpha4,
            MethodTag::SingleIntegralAlpha4,
        ] {
            for &(l, k) in &[(2, 2), (4, 3), (4, 6), (7, 5)] {
                for &t in &[-20.0, -12.0, -6.0] {
                    let q = query(m, l, k, 0.7, t);
                    let a = pl_with_reuse_enumerated(&q).unwrap();
                    let b = pl_with_reuse_convolved(&q).unwrap();
                    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn count_distribution_sums_to_one() {
        for &m in &[
            MethodTag::UpperBound,
            MethodTag::SingleIntegralAlpha4,
            MethodTag::DoubleIntegral,
        ] {
            for &t in &[-20.0, -10.0, -3.0] {
                let q = query(m, 1, 1, 0.8, t);
                let mut len = 1;
                while q.band_pl(len).unwrap() >= 1e-12 && len < 200 {
                    len += 1;
                }
                let e = exact_count_probabilities(&q, len).unwrap();
                assert!(e.iter().all(|&x| x >= 0.0));
                assert_abs_diff_eq!(e.iter().sum::<f64>(), 1.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn more_bands_help() {
        for i in 0..=20 {
            let t = -20.0 + i as f64;
            let v: Vec<f64> = [1, 3, 6]
                .iter()
                .map(|&k| pl_with_reuse(&query(MethodTag::SingleIntegralAlpha4, 4, k, 1.0, t)).unwrap())
                .collect();
            assert!(v[0] <= v[1] && v[1] <= v[2], "t={t}: {v:?}");
        }
    }
}
