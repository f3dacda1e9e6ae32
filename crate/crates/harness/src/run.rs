//! Task dispatch and exit-status mapping.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use fibertherm_counting::DEFAULT_BUDGET;
use fibertherm_katok::{katok_at_expansivity, katok_entropy_estimate, KatokOptions, MeasureSampler};
use fibertherm_pressure::pressure::{pressure_curve, PressureMethod, PressureOptions};
use fibertherm_shadowing::{mixing_gap, random_specification, shadow, OmegaSpecification};
use fibertherm_pressure::spectrum::{
    legendre_conjugate, level_set_rates, spectrum_crosscheck, CountMethod, CrosscheckConfig, LevelSetOptions,
};
use fibertherm::{Error, FiberPoint, SkewSystem};

use crate::config::{build_observable, build_system, ConfigError, ExperimentConfig, Resolved, Task};
use crate::output::{num, Chart, OutputDir, Provenance};

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub budget: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Compute(Error),
    Io(io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Compute(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

/// Variant name of a computation error.
fn error_kind(e: &Error) -> String {
    let debug = format!("{e:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string()
}

impl Failure {
    /// 2 for refusals (budget or spacing preconditions), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Compute(Error::BudgetExceeded { .. } | Error::SpacingTooSmall { .. }) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, field) = match self {
            Failure::Config(e) => ("ConfigError".to_string(), e.field.clone()),
            Failure::Compute(e) => (error_kind(e), None),
            Failure::Io(_) => ("IoError".to_string(), None),
        };
        json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "error": kind,
            "field": field,
            "message": self.to_string(),
        })
    }
}

/// Files written by a successful run.
#[derive(Debug)]
pub struct RunReport {
    pub out: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Runs `task` and writes its artifacts. On failure `error.json` is written
/// to the output directory when it can be created.
pub fn run(task: Task, cfg: &ExperimentConfig, ov: &Overrides) -> Result<RunReport, Failure> {
    let out = ov
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let result = run_in(task, cfg, ov, &out);
    if let Err(f) = &result {
        if std::fs::create_dir_all(&out).is_ok() {
            let mut s = serde_json::to_string_pretty(&f.to_json()).expect("json serializes");
            s.push('\n');
            let _ = std::fs::write(out.join("error.json"), s);
        }
    }
    result
}

fn run_in(task: Task, cfg: &ExperimentConfig, ov: &Overrides, out: &Path) -> Result<RunReport, Failure> {
    if let Some(declared) = cfg.task.filter(|&t| t != task) {
        return Err(ConfigError::at("task", format!("config declares task {declared}, command is {task}")).into());
    }
    if let Some(t) = ov.threads.or(cfg.threads) {
        fibertherm::parallel::set_threads(t);
    }
    let seed = ov.seed.or(cfg.seed).unwrap_or(0);
    let budget = ov.budget.or(cfg.budget).unwrap_or(DEFAULT_BUDGET);
    let r = Resolved::new(cfg, task, seed, budget);
    let sys = build_system(&r.system)?;
    let phi = build_observable(&r.observable)?;
    let mut dir = OutputDir::create(out, Provenance::new(&r.to_toml(), seed))?;
    let summary = match task {
        Task::Pressure => pressure_task(&sys, &phi, &r, &mut dir)?,
        Task::Spectrum => spectrum_task(&sys, &phi, &r, &mut dir)?,
        Task::Crosscheck => crosscheck_task(&sys, &phi, &r, &mut dir)?,
        Task::Katok => katok_task(&sys, &r, &mut dir)?,
        Task::Shadow => shadow_task(&sys, &r, &mut dir)?,
    };
    dir.json("summary.json", summary.clone())?;
    Ok(RunReport {
        out: out.to_path_buf(),
        files: dir.written.clone(),
        summary,
    })
}

fn pressure_options(r: &Resolved) -> Result<PressureOptions, Failure> {
    let mut po = PressureOptions::new(r.epsilon, r.ns()?);
    po.omega_samples = r.omega_samples;
    po.seed = r.seed;
    po.budget = r.budget;
    po.method = r.grid().map(PressureMethod::Grid).unwrap_or(PressureMethod::Auto);
    Ok(po)
}

fn level_options(r: &Resolved) -> Result<LevelSetOptions, Failure> {
    let mut lo = LevelSetOptions::new(r.epsilon, r.level_ns()?, r.deltas.clone());
    lo.budget = r.budget;
    lo.method = r.grid().map(CountMethod::Grid).unwrap_or(CountMethod::Auto);
    Ok(lo)
}

fn pressure_task(sys: &SkewSystem, phi: &fibertherm::Observable, r: &Resolved, dir: &mut OutputDir) -> Result<serde_json::Value, Failure> {
    let po = pressure_options(r)?;
    let curve = pressure_curve(sys, phi, &r.q_grid, &po)?;
    let (n_min, n_max) = (po.ns[0], *po.ns.last().unwrap());
    let rows: Vec<Vec<String>> = (0..curve.q.len())
        .map(|i| {
            vec![
                num(curve.q[i]),
                num(curve.pressure[i]),
                num(curve.stderr[i]),
                n_min.to_string(),
                n_max.to_string(),
                num(curve.eps),
            ]
        })
        .collect();
    dir.csv("pressure.csv", &["q", "pressure", "stderr", "n_min", "n_max", "epsilon"], &rows)?;
    dir.svg(
        "pressure.svg",
        &Chart {
            title: "Fiber pressure".into(),
            x_label: "q".into(),
            y_label: "pressure".into(),
            series: vec![("estimate".into(), curve.q.iter().copied().zip(curve.pressure.iter().copied()).collect())],
        },
    )?;
    Ok(json!({
        "task": "pressure",
        "method": curve.method.tag(),
        "entropy": curve.entropy(),
        "convexity_defect": curve.convexity_defect,
        "max_omega_deviation": curve.estimates.iter().map(|e| e.max_deviation).fold(0.0, f64::max),
        "fiber_steps": curve.estimates.first().map(|e| e.fiber_steps),
    }))
}

fn flag(boundary: bool, out_of_range: bool) -> &'static str {
    match (boundary, out_of_range) {
        (false, false) => "ok",
        (true, false) => "boundary",
        (false, true) => "out_of_range",
        (true, true) => "boundary+out_of_range",
    }
}

fn spectrum_task(sys: &SkewSystem, phi: &fibertherm::Observable, r: &Resolved, dir: &mut OutputDir) -> Result<serde_json::Value, Failure> {
    let po = pressure_options(r)?;
    let curve = pressure_curve(sys, phi, &r.q_grid, &po)?;
    let spec = legendre_conjugate(&curve, &r.alpha_grid)?;
    let omega = sys.driving.point(r.omega);
    let rates = level_set_rates(sys, phi, &omega, &r.alpha_grid, &level_options(r)?)?;
    let rows: Vec<Vec<String>> = (0..spec.alpha.len())
        .map(|i| {
            vec![
                num(spec.alpha[i]),
                num(spec.value[i]),
                num(rates[i].rate),
                flag(spec.boundary[i], rates[i].out_of_range).to_string(),
            ]
        })
        .collect();
    dir.csv("spectrum.csv", &["alpha", "legendre", "counting_rate", "flag"], &rows)?;
    dir.svg(
        "spectrum.svg",
        &Chart {
            title: "Multifractal spectrum".into(),
            x_label: "alpha".into(),
            y_label: "entropy".into(),
            series: vec![
                ("Legendre".into(), spec.alpha.iter().copied().zip(spec.value.iter().copied()).collect()),
                ("counting".into(), spec.alpha.iter().copied().zip(rates.iter().map(|x| x.rate)).collect()),
            ],
        },
    )?;
    Ok(json!({
        "task": "spectrum",
        "method": curve.method.tag(),
        "observed_range": [spec.observed_range.0, spec.observed_range.1],
        "concavity_defect": spec.concavity_defect,
        "convexity_defect": curve.convexity_defect,
    }))
}

fn crosscheck_task(sys: &SkewSystem, phi: &fibertherm::Observable, r: &Resolved, dir: &mut OutputDir) -> Result<serde_json::Value, Failure> {
    let config = CrosscheckConfig {
        q_grid: r.q_grid.clone(),
        pressure: pressure_options(r)?,
        level: level_options(r)?,
    };
    let report = spectrum_crosscheck(sys, phi, &r.alpha_grid, &config)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|x| {
            vec![
                num(x.alpha),
                x.omega_index.to_string(),
                num(x.legendre),
                num(x.rate),
                num(x.discrepancy),
                flag(x.boundary, x.out_of_range).to_string(),
            ]
        })
        .collect();
    dir.csv(
        "crosscheck.csv",
        &["alpha", "omega_index", "legendre", "counting_rate", "discrepancy", "flag"],
        &rows,
    )?;
    let sp = &report.spectrum;
    let first: Vec<(f64, f64)> = report.rows.iter().filter(|x| x.omega_index == 0).map(|x| (x.alpha, x.rate)).collect();
    dir.svg(
        "crosscheck.svg",
        &Chart {
            title: "Legendre spectrum against counting rates".into(),
            x_label: "alpha".into(),
            y_label: "entropy".into(),
            series: vec![
                ("Legendre".into(), sp.alpha.iter().copied().zip(sp.value.iter().copied()).collect()),
                ("counting".into(), first),
            ],
        },
    )?;
    Ok(json!({
        "task": "crosscheck",
        "max_interior_discrepancy": report.max_interior_discrepancy,
        "rows": report.rows.len(),
    }))
}

fn katok_task(sys: &SkewSystem, r: &Resolved, dir: &mut OutputDir) -> Result<serde_json::Value, Failure> {
    let mut o = KatokOptions::new(r.epsilon, r.delta, r.ns()?);
    o.sample_size = r.sample_size;
    o.per_ball = (r.per_ball > 0.0).then_some(r.per_ball);
    o.max_sample = r.max_sample;
    o.budget = r.budget.max(o.budget);
    let sampler = MeasureSampler::for_system(sys, r.seed);
    let omega = sys.driving.point(r.omega);
    let e = if r.at_expansivity {
        katok_at_expansivity(sys, &sampler, &omega, &o)?
    } else {
        katok_entropy_estimate(sys, &sampler, &omega, &o)?
    };
    let rows: Vec<Vec<String>> = e
        .rows
        .iter()
        .map(|x| {
            vec![
                x.n.to_string(),
                x.count.to_string(),
                num(e.eps),
                num(e.delta),
                x.sample_size.to_string(),
                x.covered.to_string(),
            ]
        })
        .collect();
    dir.csv(
        "katok.csv",
        &["n", "spanning_count", "epsilon", "delta", "sample_size", "covered"],
        &rows,
    )?;
    Ok(json!({
        "task": "katok",
        "slope": e.slope,
        "stderr": e.stderr,
        "epsilon": e.eps,
        "sampler": if e.sampler_invariant { "invariant" } else { "sampler not proven invariant" },
        "fiber_steps": e.fiber_steps,
        "note": "greedy covers bound the spanning count from above",
    }))
}

fn shadow_task(sys: &SkewSystem, r: &Resolved, dir: &mut OutputDir) -> Result<serde_json::Value, Failure> {
    let s = &r.shadow;
    let eps = s.epsilon.unwrap_or(r.epsilon);
    let gap = mixing_gap(sys, eps)?;
    let spacing = s.spacing.unwrap_or(gap.n);
    let omega = sys.driving.point(s.omega.unwrap_or(r.omega));
    if !s.intervals.is_empty() {
        let spec = OmegaSpecification::new(
            omega,
            s.intervals.iter().map(|i| (i.a, i.b)).collect(),
            s.intervals.iter().map(|i| FiberPoint::torus(i.anchor[0], i.anchor[1])).collect(),
            spacing,
        )?;
        let sh = shadow(sys, &spec, eps)?;
        let rows: Vec<Vec<String>> = sh
            .certificate
            .rows
            .iter()
            .map(|&(t, d)| vec![t.to_string(), num(d)])
            .collect();
        dir.csv("certificate.csv", &["t", "distance"], &rows)?;
        let c = sh.fiber_point.coords();
        return Ok(json!({
            "task": "shadow",
            "point": [c[0], c[1]],
            "max_distance": sh.certificate.max_distance,
            "worst_time": sh.certificate.worst_time,
            "epsilon": eps,
            "mixing_gap": gap.n,
            "ok": sh.certificate.max_distance < eps,
        }));
    }
    let count = s.random.unwrap_or(100);
    let max_k = s.max_intervals.unwrap_or(6).max(1);
    let max_len = s.max_length.unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let mut rows = Vec::with_capacity(count);
    let mut passed = 0usize;
    let mut worst: f64 = 0.0;
    for i in 0..count {
        let k = rng.random_range(1..=max_k);
        let spec = random_specification(sys, &mut rng, k, spacing, max_len)?;
        let sh = shadow(sys, &spec, eps)?;
        let ok = sh.certificate.max_distance < eps;
        passed += ok as usize;
        worst = worst.max(sh.certificate.max_distance);
        rows.push(vec![
            i.to_string(),
            k.to_string(),
            num(sh.certificate.max_distance),
            sh.certificate.worst_time.to_string(),
            ok.to_string(),
        ]);
    }
    dir.csv("shadow_runs.csv", &["index", "intervals", "max_distance", "worst_time", "ok"], &rows)?;
    Ok(json!({
        "task": "shadow",
        "specifications": count,
        "passed": passed,
        "max_distance": worst,
        "epsilon": eps,
        "mixing_gap": gap.n,
    }))
}
