use serde_json::json;
use skewbm::density::{density_driftless, density_one_barrier_drift, TransitionDensity};
use skewbm::oracles::{
    check_chapman, check_detailed_balance, check_flux, check_normalization, check_transmission,
    fourier_density_drift, fourier_density_driftless, grid_cdf, ks_statistic, skew_walk_simulate,
    walk_chi_square, CheckDetail, CheckReport, FourierOracle, QuadratureSpec, KS_CRITICAL_1PCT,
};
use skewbm::{RandomStream, SkewParams, TruncationPolicy};

use crate::commands::{evaluator, num, sharded_samples, Output};
use crate::config::{RunConfig, Suite};
use crate::CliError;

const WALK_DX: f64 = 0.01;
const WALK_BINS: usize = 20;

fn report(name: &str, passed: bool, tolerance: f64, details: Vec<CheckDetail>) -> CheckReport {
    let max_residual = details.iter().map(|d| d.residual).fold(0.0, f64::max);
    CheckReport {
        name: name.into(),
        passed,
        max_residual,
        tolerance,
        details,
    }
}

fn detail(label: impl Into<String>, residual: f64) -> CheckDetail {
    CheckDetail {
        label: label.into(),
        residual,
    }
}

/// Points `(t, x, y)` with `t ∈ [0.2, 2]` and `x, y` within one unit of the barriers.
fn random_points(cfg: &RunConfig, n: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = RandomStream::new(cfg.seed, cfg.stream);
    let (lo, hi) = (cfg.params.z1() - 1.0, cfg.params.z2() + 1.0);
    (0..n)
        .map(|_| {
            let t = 0.2 + 1.8 * rng.uniform();
            let x = lo + (hi - lo) * rng.uniform();
            let y = lo + (hi - lo) * rng.uniform();
            (t, x, y)
        })
        .collect()
}

fn random_pairs(cfg: &RunConfig, n: usize) -> Vec<(f64, f64)> {
    random_points(cfg, n)
        .into_iter()
        .map(|(_, x, y)| (x, y))
        .collect()
}

pub fn validate(cfg: RunConfig) -> Result<Output, CliError> {
    let suite = cfg
        .suite
        .ok_or_else(|| CliError::Usage("validate needs --suite".into()))?;
    let (name, eval) = evaluator(&cfg.params, &cfg.policy)?;
    let d = eval.as_ref();
    let (t, x) = (cfg.t, cfg.x);
    let reports = match suite {
        Suite::Normalization => vec![check_normalization(t, x, d, 1e-6)?],
        Suite::Transmission => vec![
            check_transmission(t, x, d, 1e-6)?,
            check_flux(t, x, d, 1e-3)?,
        ],
        Suite::Chapman => {
            let pairs = random_pairs(&cfg, 10);
            vec![
                check_chapman(0.5 * t, 0.5 * t, &pairs, d, 1e-5)?,
                check_chapman(0.3 * t, 0.7 * t, &pairs, d, 1e-5)?,
            ]
        }
        Suite::Balance => vec![check_detailed_balance(
            t,
            &random_pairs(&cfg, 200),
            d,
            1e-8,
        )?],
        Suite::Ks => vec![ks(&cfg)?],
        Suite::Reduction => reduction(&cfg)?,
        Suite::OracleEquivalence => vec![oracle_equivalence(&cfg, d)?],
        Suite::Walk => vec![walk(&cfg, d)?],
    };
    let passed = reports.iter().all(|r| r.passed);
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.passed.to_string(),
                num(r.max_residual),
                num(r.tolerance),
            ]
        })
        .collect();
    let stats = json!({ "evaluator": name, "checks": reports.len(), "passed": passed });
    Ok(Output {
        config: cfg,
        header: "check,passed,max_residual,tolerance",
        rows,
        data: serde_json::to_value(&reports)?,
        stats,
        passed,
    })
}

fn ks(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let shards = sharded_samples(cfg)?;
    let ys: Vec<f64> = shards.into_iter().flat_map(|(s, _)| s).collect();
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min) - 0.01;
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 0.01;
    let cells = ((hi - lo) / 0.005).ceil() as usize;
    let grid: Vec<f64> = (0..=cells)
        .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
        .collect();
    let oracle = FourierOracle::new(cfg.params, QuadratureSpec::default());
    let cdf = grid_cdf(cfg.t, cfg.x, &oracle, &grid)?;
    let stat = ks_statistic(&ys, |y| cdf.eval(y))?;
    let crit = KS_CRITICAL_1PCT / (ys.len() as f64).sqrt();
    Ok(report(
        "ks",
        stat < crit,
        crit,
        vec![detail(format!("n = {}", ys.len()), stat)],
    ))
}

fn reduction(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    let z1 = cfg.params.z1();
    let (b1, b2) = (cfg.params.beta1(), cfg.params.beta2());
    let pol = TruncationPolicy::new(60, 1e-15)?;
    let rel = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            0.0
        } else {
            (a - b).abs() / s
        }
    };

    let one_sided = SkewParams::new(z1, cfg.params.z2(), b1, 0.0, 0.0)?;
    let mut prop = Vec::new();
    for (t, x, y) in random_points(cfg, 50) {
        let a = density_one_barrier_drift(t, x, y, z1, b1, 0.0)?.value;
        let b = density_driftless(t, x, y, &one_sided, &pol)?.value;
        prop.push(detail(format!("t = {t}, x = {x}, y = {y}"), rel(a, b)));
    }
    let prop_ok = prop.iter().all(|d| d.residual <= 1e-12);

    let phi = |u: f64, t: f64| (-u * u / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
    let mut image = Vec::new();
    for (t, x, y) in random_points(cfg, 50) {
        let (x, y) = (z1 + (x - z1).abs(), z1 + (y - z1).abs());
        let got = density_one_barrier_drift(t, x, y, z1, 1.0, 0.0)?.value;
        image.push(detail(
            format!("t = {t}, x = {x}, y = {y}"),
            rel(got, phi(y - x, t) + phi(y + x - 2.0 * z1, t)),
        ));
    }
    let image_ok = image.iter().all(|d| d.residual <= 1e-12);

    let t: f64 = 10.0;
    let x = cfg.x;
    let mut limit = Vec::new();
    for gap in [5.0, 10.0, 20.0] {
        let p = SkewParams::new(z1, z1 + gap, b1, b2, 0.0)?;
        let mut sup: f64 = 0.0;
        for i in 0..=120 {
            let y = x - 3.0 * t.sqrt() + 0.05 * t.sqrt() * i as f64;
            let two = density_driftless(t, x, y, &p, &pol)?.value;
            let one = density_one_barrier_drift(t, x, y, z1, b1, 0.0)?.value;
            sup = sup.max((two - one).abs());
        }
        limit.push(detail(format!("z2 - z1 = {gap}"), sup));
    }
    let monotone = limit.windows(2).all(|w| w[1].residual <= w[0].residual);

    Ok(vec![
        report("one_barrier_vs_series", prop_ok, 1e-12, prop),
        report("reflection_vs_images", image_ok, 1e-12, image),
        report("far_barrier_limit_monotone", monotone, f64::NAN, limit),
    ])
}

fn oracle_equivalence(cfg: &RunConfig, d: &dyn TransitionDensity) -> Result<CheckReport, CliError> {
    let spec = QuadratureSpec::default();
    let p = cfg.params;
    let drift = p.mu() != 0.0;
    let slack = if drift { 1e-6 } else { 1e-9 };
    let mut details = Vec::new();
    for (t, x, y) in random_points(cfg, 100) {
        let v = d.density(t, x, y)?;
        let q = if drift {
            fourier_density_drift(t, x, y, &p, &spec)?
        } else {
            fourier_density_driftless(t, x, y, &p, &spec)?
        };
        let bound = if v.rigorous_bound { v.error_bound } else { 0.0 };
        details.push(detail(
            format!("t = {t}, x = {x}, y = {y}"),
            ((v.value - q).abs() - bound).max(0.0),
        ));
    }
    let ok = details.iter().all(|d| d.residual <= slack);
    Ok(report("oracle_equivalence", ok, slack, details))
}

fn walk(cfg: &RunConfig, d: &dyn TransitionDensity) -> Result<CheckReport, CliError> {
    let steps = (cfg.t / (WALK_DX * WALK_DX)).round().max(1.0) as usize;
    let mut rng = RandomStream::new(cfg.seed, cfg.stream);
    let hist = skew_walk_simulate(steps, cfg.n, WALK_DX, cfg.x, &cfg.params, &mut rng)?;
    let x0 = hist.position(steps);
    let r = walk_chi_square(&hist, x0, d, WALK_BINS)?;
    Ok(report(
        "walk_chi_square",
        r.p_value > 0.01,
        0.01,
        vec![detail(
            format!("p-value, chi2 = {}, dof = {}", r.statistic, r.dof),
            r.p_value,
        )],
    ))
}
