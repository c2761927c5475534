use hearability::analytic::{mean_i1, mean_i2};
use hearability::model::cdf_r1_given_rl_omega;
use hearability::simulate::{conditional_samples, sample_conditional_bpp, BppRegion};
use hearability::stats::{ks_test, mean_and_stderr};
use hearability::{Scenario, SimConfig};

fn uniform(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn samples(seed: u64) -> (Scenario, Vec<hearability::simulate::ConditionalSample>) {
    let s = Scenario::builder().l(5).alpha(3.5).p(0.6).q(0.8).build().unwrap();
    let mut c = SimConfig::new(20_000, seed);
    c.expected_bs = 100;
    let cs = conditional_samples(&s, &c).unwrap();
    (s, cs)
}

#[test]
fn bpp_sampler_is_uniform_by_area() {
    let disk = sample_conditional_bpp(250.0, 20_000, BppRegion::Disk, 1).unwrap();
    let r2: Vec<f64> = disk.iter().map(|p| (p[0].hypot(p[1]) / 250.0).powi(2)).collect();
    assert!(ks_test(&r2, uniform).unwrap().p_value > 0.01);
    let angle: Vec<f64> = disk
        .iter()
        .map(|p| (p[1].atan2(p[0]) + std::f64::consts::PI) / std::f64::consts::TAU)
        .collect();
    assert!(ks_test(&angle, uniform).unwrap().p_value > 0.01);

    let ring = sample_conditional_bpp(250.0, 20_000, BppRegion::Annulus { inner: 100.0 }, 2).unwrap();
    let t: Vec<f64> = ring
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] - 100.0 * 100.0) / (250.0 * 250.0 - 100.0 * 100.0))
        .collect();
    assert!(ks_test(&t, uniform).unwrap().p_value > 0.01);
    assert!(sample_conditional_bpp(1.0, 0, BppRegion::Disk, 0).is_err());
    assert!(sample_conditional_bpp(1.0, 3, BppRegion::Annulus { inner: 2.0 }, 0).is_err());
}

#[test]
fn active_participants_are_uniform_in_the_disk() {
    let (_, cs) = samples(21);
    let x: Vec<f64> = cs
        .iter()
        .flat_map(|c| {
            c.r1_hat
                .into_iter()
                .chain(c.others.iter().copied())
                .map(move |d| (d / c.rl).powi(2))
        })
        .collect();
    assert!(x.len() > 20_000);
    assert!(ks_test(&x, uniform).unwrap().p_value > 0.01);
}

#[test]
fn nearest_active_follows_its_conditional_cdf() {
    let (_, cs) = samples(22);
    let pit: Vec<f64> = cs
        .iter()
        .filter_map(|c| c.r1_hat.map(|r| cdf_r1_given_rl_omega(r, c.rl, c.omega).unwrap()))
        .collect();
    assert!(ks_test(&pit, uniform).unwrap().p_value > 0.01);
}

#[test]
fn others_are_uniform_in_the_annulus() {
    let (_, cs) = samples(23);
    let t: Vec<f64> = cs
        .iter()
        .flat_map(|c| {
            let r1 = c.r1_hat.unwrap_or(0.0);
            c.others
                .iter()
                .map(move |d| (d * d - r1 * r1) / (c.rl * c.rl - r1 * r1))
        })
        .collect();
    assert!(ks_test(&t, uniform).unwrap().p_value > 0.01);
}

#[test]
fn conditional_interference_means() {
    let (s, cs) = samples(24);
    let r1: Vec<f64> = cs
        .iter()
        .filter(|c| c.omega >= 2)
        .map(|c| c.i1 / mean_i1(c.r1_hat.unwrap(), c.rl, c.omega, &s).unwrap())
        .collect();
    let (m, se) = mean_and_stderr(&r1).unwrap();
    assert!((m - 1.0).abs() <= 3.0 * se, "I1 ratio {m} ± {se}");
    let r2: Vec<f64> = cs.iter().map(|c| c.i2 / mean_i2(c.rl, &s).unwrap()).collect();
    let (m, se) = mean_and_stderr(&r2).unwrap();
    assert!((m - 1.0).abs() <= 3.0 * se, "I2 ratio {m} ± {se}");
}
