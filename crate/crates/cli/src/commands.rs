use serde_json::{json, Value};
use skewbm::density::{DriftSeries, DriftlessSeries, OneBarrierDrift, TransitionDensity};
use skewbm::sampler::{acceptance_stats, sample_many, sample_path, AcceptanceRecord};
use skewbm::{RandomStream, SkewParams, TruncationPolicy};

use crate::config::{Command, Format, RunConfig};
use crate::{suites, CliError};

/// Offset of the two rows emitted at each barrier.
pub const BARRIER_EPS: f64 = 1e-9;

/// Result of one command, ready to be rendered as CSV or JSON.
pub struct Output {
    pub config: RunConfig,
    pub header: &'static str,
    pub rows: Vec<Vec<String>>,
    pub data: Value,
    pub stats: Value,
    pub passed: bool,
}

impl Output {
    pub fn render(&self) -> Result<String, CliError> {
        match self.config.format {
            Format::Json => {
                let doc = json!({ "config": self.config, "data": self.data, "stats": self.stats });
                Ok(serde_json::to_string_pretty(&doc)? + "\n")
            }
            Format::Csv => {
                let mut s = format!("# config: {}\n", serde_json::to_string(&self.config)?);
                s.push_str(self.header);
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s.push_str(&format!(
                    "# stats: {}\n",
                    serde_json::to_string(&self.stats)?
                ));
                Ok(s)
            }
        }
    }
}

/// Seventeen significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// The evaluator matching a parameter set: the driftless series without
/// drift, the one-barrier closed form when one skewness is zero, and the
/// drifted two-barrier series otherwise.
pub fn evaluator(
    params: &SkewParams,
    policy: &TruncationPolicy,
) -> Result<(&'static str, Box<dyn TransitionDensity>), CliError> {
    let p = params;
    Ok(if p.mu() == 0.0 {
        (
            "driftless_series",
            Box::new(DriftlessSeries::new(*p, *policy)?),
        )
    } else if p.beta2() == 0.0 {
        (
            "one_barrier_closed_form",
            Box::new(OneBarrierDrift::new(p.z1(), p.beta1(), p.mu())?),
        )
    } else if p.beta1() == 0.0 {
        (
            "one_barrier_closed_form",
            Box::new(OneBarrierDrift::new(p.z2(), p.beta2(), p.mu())?),
        )
    } else {
        ("drift_series", Box::new(DriftSeries::new(*p, *policy)?))
    })
}

pub fn run(config: RunConfig) -> Result<Output, CliError> {
    match config.command {
        Command::Density => density(config),
        Command::Sample => sample(config),
        Command::Path => path(config),
        Command::Validate => suites::validate(config),
    }
}

/// `ysteps` equispaced points on `[ymin, ymax]`; each barrier strictly
/// inside is replaced by the pair `z ± ε`.
pub fn density_grid(cfg: &RunConfig) -> Vec<f64> {
    let (lo, hi) = (cfg.ymin, cfg.ymax);
    let step = (hi - lo) / (cfg.ysteps - 1) as f64;
    let barriers = [cfg.params.z1(), cfg.params.z2()];
    let mut ys: Vec<f64> = (0..cfg.ysteps)
        .map(|i| lo + step * i as f64)
        .filter(|y| !barriers.contains(y))
        .collect();
    for z in barriers {
        if z >= lo && z <= hi {
            ys.push(z - BARRIER_EPS);
            ys.push(z + BARRIER_EPS);
        }
    }
    ys.sort_by(|a, b| a.total_cmp(b));
    ys
}

fn density(cfg: RunConfig) -> Result<Output, CliError> {
    if !(cfg.ymax > cfg.ymin) {
        return Err(CliError::Usage("--ymax must exceed --ymin".into()));
    }
    let (name, eval) = evaluator(&cfg.params, &cfg.policy)?;
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for y in density_grid(&cfg) {
        let d = eval.density(cfg.t, cfg.x, y)?;
        rows.push(vec![
            num(y),
            num(d.value),
            num(d.error_bound),
            d.terms_used.to_string(),
        ]);
        data.push(json!({
            "y": y,
            "density": d.value,
            "error_bound": d.error_bound,
            "terms": d.terms_used,
            "exact_formula": d.exact_formula,
            "rigorous_bound": d.rigorous_bound,
        }));
    }
    let stats = json!({ "evaluator": name, "points": data.len() });
    Ok(Output {
        config: cfg,
        header: "y,density,error_bound,terms",
        rows,
        data: Value::Array(data),
        stats,
        passed: true,
    })
}

/// Samples of one stream with their proposal records.
pub type Shard = (Vec<f64>, Vec<AcceptanceRecord>);

/// Samples split over `shards` streams `stream, stream + 1, …`, the first
/// `n mod shards` shards taking one extra draw; shards run concurrently
/// and are concatenated in shard order.
pub fn sharded_samples(cfg: &RunConfig) -> Result<Vec<Shard>, CliError> {
    let shards = cfg.shards;
    let sizes: Vec<usize> = (0..shards)
        .map(|i| cfg.n / shards + usize::from(i < cfg.n % shards))
        .collect();
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| {
                scope.spawn(move || {
                    let mut rng = RandomStream::new(cfg.seed, cfg.stream + i as u64);
                    sample_many(size, cfg.t, cfg.x, &cfg.params, &cfg.policy, &mut rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling thread panicked"))
            .collect::<Vec<_>>()
    });
    results
        .into_iter()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

fn sample(cfg: RunConfig) -> Result<Output, CliError> {
    if cfg.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let shards = sharded_samples(&cfg)?;
    let mut rows = Vec::with_capacity(cfg.n);
    let mut ys = Vec::with_capacity(cfg.n);
    let mut records = Vec::new();
    for (s, (samples, recs)) in shards.into_iter().enumerate() {
        for (i, y) in samples.into_iter().enumerate() {
            rows.push(vec![s.to_string(), i.to_string(), num(y)]);
            ys.push(y);
        }
        records.extend(recs);
    }
    let a = acceptance_stats(&records)?;
    let p = &cfg.params;
    let stats = json!({
        "n_samples": ys.len(),
        "n_proposals": records.len(),
        "mean_decision_index": a.mean_decision_index,
        "exact_fraction": a.exact_fraction,
        "acceptance_rate": a.acceptance_rate,
        "seed": cfg.seed,
        "stream": cfg.stream,
        "shards": cfg.shards,
        "vbar": p.vbar(),
        "delta_nmax": p.delta(cfg.policy.n_max()),
    });
    Ok(Output {
        config: cfg,
        header: "shard,index,y",
        rows,
        data: json!(ys),
        stats,
        passed: true,
    })
}

fn path(cfg: RunConfig) -> Result<Output, CliError> {
    if !(cfg.dt > 0.0 && cfg.horizon > 0.0) {
        return Err(CliError::Usage(
            "--dt and --horizon must be positive".into(),
        ));
    }
    let steps = (cfg.horizon / cfg.dt).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * cfg.dt).collect();
    let mut rng = RandomStream::new(cfg.seed, cfg.stream);
    let p = sample_path(&times, cfg.x0, &cfg.params, &cfg.policy, &mut rng)?;
    let rows = p
        .times
        .iter()
        .zip(&p.positions)
        .map(|(t, x)| vec![num(*t), num(*x)])
        .collect();
    let a = acceptance_stats(&p.records)?;
    let stats = json!({
        "steps": steps,
        "n_proposals": p.records.len(),
        "mean_decision_index": a.mean_decision_index,
        "exact_fraction": a.exact_fraction,
        "acceptance_rate": a.acceptance_rate,
        "seed": cfg.seed,
        "stream": cfg.stream,
    });
    Ok(Output {
        config: cfg,
        header: "t,x",
        rows,
        data: json!({ "times": p.times, "positions": p.positions }),
        stats,
        passed: true,
    })
}
