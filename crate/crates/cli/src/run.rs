//! Subcommands and figure recipes.

use anyhow::{anyhow, bail, Result};
use hearability::analytic::min_processing_gain;
use hearability::e911::fcc_compliance;
use hearability::par::{map_collect, Execution};
use hearability::reuse::{pl_with_reuse, ReuseQuery};
use hearability::simulate::{
    critical_statistics, curve_from, estimate_pl_reuse_curve, hearability_distribution_reuse, hex_density,
};
use hearability::stats::percentile;
use hearability::{evaluate, linear_to_db, Deployment, MethodTag, Scenario, ShadowingSpec};

use crate::config::{Method, RunConfig};
use crate::output::{fmt_num, Axis, Row, Table};

/// Figure recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureName {
    /// E911 compliance versus minimum hearability.
    Fig2,
    /// All evaluators against Monte Carlo (L=4, α=4, full load).
    Fig3,
    /// Double and single integrals across path-loss exponents.
    Fig4,
    /// Required processing gain versus L.
    Fig5,
    /// Required processing gain versus α.
    Fig6,
    /// Varying activity probability p.
    Fig7,
    /// Varying L with p=1/2, q=3/4.
    Fig8,
    /// Random frequency reuse, K ∈ {1, 3, 6}.
    Fig9,
    /// Hexagonal grid versus PPP across shadowing deviations.
    Fig10,
    /// Hexagonal grid versus PPP with K=6, σ=8 dB.
    Fig11,
}

impl FigureName {
    pub fn name(&self) -> &'static str {
        match self {
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
            FigureName::Fig7 => "fig7",
            FigureName::Fig8 => "fig8",
            FigureName::Fig9 => "fig9",
            FigureName::Fig10 => "fig10",
            FigureName::Fig11 => "fig11",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analytic,
    Simulate,
    Reuse,
    Hexgrid,
    E911,
    Figure(FigureName),
}

/// A finished table plus what its plot script should show.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: Table,
    pub axis: Axis,
    pub ylabel: &'static str,
}

impl Output {
    fn curves(rows: Vec<Row>) -> Self {
        Self {
            table: Table::Sweep(rows),
            axis: Axis::BetaOverGamma,
            ylabel: "P_L",
        }
    }
}

const GAIN_TARGET: f64 = 0.8;
const HEX_DEFAULT_DB: f64 = -10.0;

pub fn run(command: Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::Analytic => {
            let methods = cfg.methods_or(&[
                Method::Analytic(MethodTag::UpperBound),
                Method::Analytic(MethodTag::DoubleIntegral),
            ])?;
            if let Some(m) = methods.iter().find(|m| m.is_monte_carlo()) {
                bail!("key `methods`: `analytic` takes analytic methods only, got {m} (use `simulate`)");
            }
            Ok(Output::curves(run_sweep(cfg, &methods)?))
        }
        Command::Simulate => {
            let methods = cfg.methods_or(&[Method::MonteCarloJoint])?;
            Ok(Output::curves(run_sweep(cfg, &methods)?))
        }
        Command::Reuse => Ok(Output::curves(run_reuse(cfg)?)),
        Command::Hexgrid => Ok(Output {
            table: Table::Sweep(run_hexgrid(cfg)?),
            axis: Axis::L,
            ylabel: "P(hearability >= L)",
        }),
        Command::E911 => run_e911(cfg),
        Command::Figure(name) => run_figure(name, cfg),
    }
}

fn row(s: &Scenario, db: f64, method: &str, value: Option<f64>, stderr: Option<f64>) -> Row {
    Row {
        beta_over_gamma_db: db,
        l: s.l(),
        p: s.p(),
        q: s.q(),
        alpha: s.alpha(),
        k: s.k(),
        lambda: s.lambda(),
        method: method.to_string(),
        value,
        stderr,
    }
}

/// One row per grid point and method. Failed analytic evaluations produce
/// rows without a value and a warning on stderr.
pub fn run_sweep(cfg: &RunConfig, methods: &[Method]) -> Result<Vec<Row>> {
    if methods.is_empty() {
        bail!("key `methods`: at least one method is required");
    }
    let grid = cfg.grid()?;
    let base = cfg.scenario()?;
    cfg.quad.validate().map_err(|e| anyhow!("quadrature settings: {e}"))?;
    for m in methods {
        if let Method::Analytic(tag) = m {
            if tag.requires_alpha4() && base.alpha() != 4.0 {
                bail!("key `methods`: {tag} requires alpha = 4, got {}", base.alpha());
            }
        }
    }
    let mut rows = Vec::new();
    let mut stats: Option<Vec<(f64, f64)>> = None;
    for &m in methods {
        match m {
            Method::Analytic(tag) => {
                let values = map_collect(Execution::Parallel, grid.len(), |i| {
                    evaluate(tag, &base.with_threshold_db(grid[i]), &cfg.quad)
                });
                for (&db, v) in grid.iter().zip(values) {
                    let value = match v {
                        Ok(x) => Some(x),
                        Err(e) => {
                            eprintln!("warning: {tag} at beta/gamma = {} dB: {e}", fmt_num(db));
                            None
                        }
                    };
                    rows.push(row(&base, db, tag.name(), value, None));
                }
            }
            Method::MonteCarloJoint | Method::MonteCarloLastBs => {
                if stats.is_none() {
                    stats = Some(critical_statistics(&base, &cfg.sim).map_err(|e| anyhow!("simulation: {e}"))?);
                }
                let st = stats.as_deref().unwrap_or_default();
                let pick: Vec<f64> = st
                    .iter()
                    .map(|c| if m == Method::MonteCarloJoint { c.0 } else { c.1 })
                    .collect();
                for (&db, est) in grid.iter().zip(curve_from(&pick, &base, &grid)) {
                    rows.push(row(&base, db, m.name(), Some(est.value), Some(est.stderr)));
                }
            }
        }
    }
    Ok(rows)
}

/// Reuse composition over the grid with `reuse_base` per band, next to the
/// reuse simulation.
pub fn run_reuse(cfg: &RunConfig) -> Result<Vec<Row>> {
    let grid = cfg.grid()?;
    let base = cfg.scenario()?;
    if cfg.reuse_base.requires_alpha4() && base.alpha() != 4.0 {
        bail!(
            "key `reuse_base`: {} requires alpha = 4, got {}",
            cfg.reuse_base,
            base.alpha()
        );
    }
    if base.p() != base.q() {
        bail!(
            "key `q`: frequency reuse needs p = q, got p={}, q={}",
            base.p(),
            base.q()
        );
    }
    let values = map_collect(Execution::Parallel, grid.len(), |i| {
        ReuseQuery::new(cfg.reuse_base, base.with_threshold_db(grid[i]), cfg.quad).and_then(|q| pl_with_reuse(&q))
    });
    let mut rows = Vec::new();
    for (&db, v) in grid.iter().zip(values) {
        let value = match v {
            Ok(x) => Some(x),
            Err(e) => {
                eprintln!(
                    "warning: reuse {} at beta/gamma = {} dB: {e}",
                    cfg.reuse_base,
                    fmt_num(db)
                );
                None
            }
        };
        rows.push(row(&base, db, cfg.reuse_base.name(), value, None));
    }
    let mc = estimate_pl_reuse_curve(&base, &cfg.sim, &grid).map_err(|e| anyhow!("simulation: {e}"))?;
    for (&db, est) in grid.iter().zip(mc) {
        rows.push(row(&base, db, "MonteCarloReuse", Some(est.value), Some(est.stderr)));
    }
    Ok(rows)
}

/// `P(Σ Υ ≥ L)` for `L = 1..=max_l` from PPP and hexagonal deployments
/// at each shadowing deviation in `hex_sigmas`.
pub fn run_hexgrid(cfg: &RunConfig) -> Result<Vec<Row>> {
    if cfg.max_l == 0 {
        bail!("key `max_l`: must be at least 1");
    }
    if cfg.hex_sigmas.is_empty() {
        bail!("key `hex_sigmas`: at least one deviation is required");
    }
    let db = cfg.point_db().unwrap_or(HEX_DEFAULT_DB);
    let mut c = cfg.clone();
    c.lambda = hex_density(cfg.sim.hex_isd);
    let base = c.scenario()?.with_threshold_db(db);
    let mut sim = cfg.sim.clone();
    sim.upsilon_cap = sim.upsilon_cap.max(cfg.max_l);
    let mut rows = Vec::new();
    for &sigma in &cfg.hex_sigmas {
        sim.shadow = ShadowingSpec::new(sigma).map_err(|e| anyhow!("key `hex_sigmas`: {e}"))?;
        for (deployment, label) in [
            (Deployment::Ppp, "MonteCarloPpp"),
            (Deployment::HexGrid, "MonteCarloHex"),
        ] {
            sim.deployment = deployment;
            let pmf = hearability_distribution_reuse(&base, &sim).map_err(|e| anyhow!("simulation: {e}"))?;
            let method = format!("{label}_s{}", fmt_num(sigma));
            for l in 1..=cfg.max_l {
                let v = hearability::numerics::clamp_probability(pmf[l.min(pmf.len())..].iter().sum());
                let se = (v * (1.0 - v) / sim.realizations as f64).sqrt();
                let s = base.with_l(l).map_err(|e| anyhow!("{e}"))?;
                rows.push(row(&s, db, &method, Some(v), Some(se)));
            }
        }
    }
    Ok(rows)
}

fn run_e911(cfg: &RunConfig) -> Result<Output> {
    let scenario = cfg.e911.scenario().map_err(|e| anyhow!("e911 settings: {e}"))?;
    let rows = fcc_compliance(&cfg.e911, &scenario).map_err(|e| anyhow!("e911: {e}"))?;
    Ok(Output {
        table: Table::Compliance(rows),
        axis: Axis::L,
        ylabel: "horizontal error (m)",
    })
}

/// Processing gain (dB) that achieves `P_L = 0.8` at full load: the bound
/// inversion and the Monte Carlo 20th percentile of the critical SINR.
fn gain_rows(cfg: &RunConfig, scenarios: &[Scenario]) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for s in scenarios {
        let g = min_processing_gain(GAIN_TARGET, s.l(), s.alpha(), 1.0).map_err(|e| anyhow!("{e}"))?;
        let bound_db = linear_to_db(g);
        rows.push(row(s, -bound_db, MethodTag::ProcGainBound.name(), Some(bound_db), None));

        let mut crit: Vec<f64> = critical_statistics(s, &cfg.sim)
            .map_err(|e| anyhow!("simulation: {e}"))?
            .into_iter()
            .map(|c| c.0)
            .collect();
        crit.sort_by(f64::total_cmp);
        let n = crit.len() as f64;
        let q = 1.0 - GAIN_TARGET;
        let gain_at = |pct: f64| -> Result<f64> {
            let t = percentile(&crit, pct.clamp(0.0, 100.0)).map_err(|e| anyhow!("{e}"))?;
            Ok(-linear_to_db(t))
        };
        let mc_db = gain_at(100.0 * q)?;
        let spread = 100.0 * (q * (1.0 - q) / n).sqrt();
        let se = 0.5 * (gain_at(100.0 * q - spread)? - gain_at(100.0 * q + spread)?).abs();
        rows.push(row(s, -mc_db, "MonteCarloJoint", Some(mc_db), Some(se)));
    }
    Ok(rows)
}

fn with(cfg: &RunConfig, f: impl FnOnce(&mut RunConfig)) -> RunConfig {
    let mut c = cfg.clone();
    c.methods = None;
    c.beta = None;
    c.gamma = None;
    c.lambda = hearability::model::HEX_500_DENSITY;
    c.alpha = 4.0;
    c.p = 1.0;
    c.q = 1.0;
    c.l = 4;
    c.k = 1;
    c.noise_sigma2 = 0.0;
    f(&mut c);
    c
}

fn a(tag: MethodTag) -> Method {
    Method::Analytic(tag)
}

/// Materializes a figure recipe on top of `cfg` (whose simulation, seed
/// and quadrature settings are kept) and runs it.
pub fn run_figure(name: FigureName, cfg: &RunConfig) -> Result<Output> {
    let mut rows = Vec::new();
    match name {
        FigureName::Fig2 => return run_e911(cfg),
        FigureName::Fig3 => {
            let c = with(cfg, |_| {});
            let methods = [
                a(MethodTag::UpperBound),
                a(MethodTag::NearFieldAlpha4),
                a(MethodTag::SingleIntegralAlpha4),
                Method::MonteCarloJoint,
            ];
            rows = run_sweep(&c, &methods)?;
        }
        FigureName::Fig4 => {
            for alpha in [3.0, 3.5, 4.0, 4.5] {
                let c = with(cfg, |c| {
                    c.alpha = alpha;
                    c.p = 2.0 / 3.0;
                });
                let methods = [
                    a(MethodTag::DoubleIntegral),
                    a(MethodTag::SingleIntegralGeneral),
                    Method::MonteCarloJoint,
                ];
                rows.extend(run_sweep(&c, &methods)?);
            }
        }
        FigureName::Fig5 | FigureName::Fig6 => {
            let scenarios: Vec<Scenario> = if name == FigureName::Fig5 {
                (2..=cfg.max_l.max(2))
                    .map(|l| with(cfg, |c| c.l = l).scenario())
                    .collect::<Result<_>>()?
            } else {
                [3.0, 3.5, 4.0, 4.5, 5.0]
                    .iter()
                    .map(|&alpha| with(cfg, |c| c.alpha = alpha).scenario())
                    .collect::<Result<_>>()?
            };
            return Ok(Output {
                table: Table::Sweep(gain_rows(cfg, &scenarios)?),
                axis: if name == FigureName::Fig5 { Axis::L } else { Axis::Alpha },
                ylabel: "processing gain for P_L = 0.8 (dB)",
            });
        }
        FigureName::Fig7 => {
            for p in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
                let c = with(cfg, |c| c.p = p);
                rows.extend(run_sweep(
                    &c,
                    &[a(MethodTag::SingleIntegralAlpha4), Method::MonteCarloJoint],
                )?);
            }
        }
        FigureName::Fig8 => {
            for l in [2, 4, 6, 8] {
                let c = with(cfg, |c| {
                    c.l = l;
                    c.p = 0.5;
                    c.q = 0.75;
                });
                rows.extend(run_sweep(
                    &c,
                    &[a(MethodTag::SingleIntegralAlpha4), Method::MonteCarloJoint],
                )?);
            }
        }
        FigureName::Fig9 => {
            for k in [1, 3, 6] {
                let c = with(cfg, |c| {
                    c.k = k;
                    c.reuse_base = MethodTag::SingleIntegralAlpha4;
                });
                rows.extend(run_reuse(&c)?);
            }
        }
        FigureName::Fig10 | FigureName::Fig11 => {
            let c = with(cfg, |c| {
                c.beta = Some(hearability::db_to_linear(HEX_DEFAULT_DB));
                c.max_l = c.max_l.max(10);
                if name == FigureName::Fig11 {
                    c.k = 6;
                    c.hex_sigmas = vec![8.0];
                } else {
                    c.hex_sigmas = vec![4.0, 8.0, 12.0];
                }
            });
            return Ok(Output {
                table: Table::Sweep(run_hexgrid(&c)?),
                axis: Axis::L,
                ylabel: "P(hearability >= L)",
            });
        }
    }
    Ok(Output::curves(rows))
}
