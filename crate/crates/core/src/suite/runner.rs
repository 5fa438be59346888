use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{to_pretty_json, MatrixJson};
use crate::linalg::{c, hermitian_part, identity, re, HermitianMatrix, PsdMatrix, C64};
use crate::states::{ginibre, label_hash};

use super::checks::*;
use super::ensemble::{random_diagonal_state, EnsembleChannelKind, EnsembleStateKind, Instance, InstanceEnsemble};
use super::GapReport;

/// Registered check names, in report order.
pub const CHECK_NAMES: [&str; 15] = [
    "alt",
    "gt",
    "lieb",
    "dpi_relative_entropy",
    "dpi_sandwiched",
    "dpi_p_fidelity",
    "recovery_p",
    "universal_recovery",
    "measured_recovery",
    "quadratic",
    "petz_equality",
    "hirschman_scalar",
    "entropy_derivative",
    "fidelity_identity",
    "interpolation",
];

/// Largest dimension accepted by the suite runner.
pub const MAX_SUITE_DIM: usize = 16;

/// Exponent grids per check, `None` for checks without one.
fn default_p_grid(check: &str) -> Option<&'static [f64]> {
    match check {
        "alt" | "dpi_p_fidelity" => Some(&[1.0, 2.0, 4.0]),
        "gt" | "recovery_p" | "universal_recovery" => Some(&[1.0, 2.0]),
        "dpi_sandwiched" => Some(&[1.5, 2.0, 3.0]),
        _ => None,
    }
}

pub fn registry() -> &'static [&'static str] {
    &CHECK_NAMES
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub checks: Vec<String>,
    pub dims: Vec<usize>,
    pub instances_per_dim: usize,
    pub seed: u64,
    /// Overrides the exponent grid of every check that has one; values outside
    /// a check's domain are dropped for that check.
    #[serde(default)]
    pub p_values: Option<Vec<f64>>,
    #[serde(default)]
    pub settings: CheckSettings,
    /// Record wall-clock time per check; off by default so reports are reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn new(checks: &[&str], dims: &[usize], instances_per_dim: usize, seed: u64) -> Self {
        Self {
            checks: checks.iter().map(|s| s.to_string()).collect(),
            dims: dims.to_vec(),
            instances_per_dim,
            seed,
            p_values: None,
            settings: CheckSettings::default(),
            timing: false,
            threads: None,
        }
    }

    /// Check names with `all` expanded, validated against the registry.
    pub fn resolved_checks(&self) -> Result<Vec<&'static str>> {
        let mut out: Vec<&'static str> = Vec::new();
        for name in &self.checks {
            if name == "all" {
                for n in CHECK_NAMES {
                    if !out.contains(&n) {
                        out.push(n);
                    }
                }
                continue;
            }
            let known = CHECK_NAMES
                .iter()
                .find(|n| **n == name.as_str())
                .ok_or_else(|| Error::InvalidParameter(format!("unknown check '{name}'; known: all, {}", CHECK_NAMES.join(", "))))?;
            if !out.contains(known) {
                out.push(known);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("no checks selected".into()));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.resolved_checks()?;
        if self.dims.is_empty() {
            return Err(Error::InvalidParameter("no dimensions selected".into()));
        }
        if let Some(d) = self.dims.iter().find(|d| !(2..=MAX_SUITE_DIM).contains(*d)) {
            return Err(Error::InvalidParameter(format!("suite dimension {d} outside 2..={MAX_SUITE_DIM}")));
        }
        if self.instances_per_dim == 0 {
            return Err(Error::InvalidParameter("instances per dimension must be positive".into()));
        }
        if let Some(ps) = &self.p_values {
            if ps.is_empty() || ps.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
                return Err(Error::InvalidParameter("exponents must be finite and >= 1".into()));
            }
        }
        let reg = self.settings.regularization;
        if !(0.0..1.0).contains(&reg) {
            return Err(Error::InvalidParameter(format!("regularization {reg} outside [0,1)")));
        }
        Ok(())
    }

    fn p_grid(&self, check: &str) -> Vec<f64> {
        let Some(default) = default_p_grid(check) else {
            return Vec::new();
        };
        let valid = |p: &f64| if check == "dpi_sandwiched" { *p > 1.0 } else { *p >= 1.0 };
        match &self.p_values {
            Some(ps) => {
                let kept: Vec<f64> = ps.iter().copied().filter(valid).collect();
                if kept.is_empty() {
                    default.to_vec()
                } else {
                    kept
                }
            }
            None => default.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub instances: usize,
    pub min_margin: Option<f64>,
    pub mean_margin: Option<f64>,
    pub failures: Vec<String>,
    pub slack: String,
    pub runtime_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub config: SuiteConfig,
    pub checks: Vec<CheckSummary>,
    pub total_failures: usize,
}

/// Report plus per-instance rows and replay payloads for failures.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub rows: Vec<GapReport>,
    pub replays: Vec<(String, Value)>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.report.total_failures == 0
    }

    pub fn to_json(&self) -> Result<String> {
        to_pretty_json(&self.report)
    }

    /// One row per (check, instance); diagnostics as `key=value` pairs.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(["check", "instance_id", "lhs", "rhs", "margin", "slack", "pass", "diagnostics", "error"])
            .map_err(csv_err)?;
        for r in &self.rows {
            let diag = r
                .diagnostics
                .iter()
                .map(|(k, v)| format!("{k}={v:e}"))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.check.clone(),
                r.instance_id.clone(),
                format!("{:e}", r.lhs),
                format!("{:e}", r.rhs),
                format!("{:e}", r.margin),
                format!("{:e}", r.slack),
                r.pass.to_string(),
                diag,
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    /// Writes `<check>-<instance>.json` replay files; returns the paths.
    pub fn write_replays(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        if self.replays.is_empty() {
            return Ok(Vec::new());
        }
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, payload) in &self.replays {
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, to_pretty_json(payload)?)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

struct Job {
    check: &'static str,
    dim: usize,
    index: usize,
}

struct JobOutput {
    report: GapReport,
    replay: Option<Value>,
    elapsed_ms: u64,
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutcome> {
    config.validate()?;
    let checks = config.resolved_checks()?;
    let mut jobs = Vec::new();
    for &check in &checks {
        for &dim in &config.dims {
            for index in 0..config.instances_per_dim {
                jobs.push(Job { check, dim, index });
            }
        }
    }
    let threads = config.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let outputs: Vec<JobOutput> = pool.install(|| jobs.par_iter().map(|job| run_job(config, job)).collect());

    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    let mut replays = Vec::new();
    let mut offset = 0;
    for &check in &checks {
        let n = config.dims.len() * config.instances_per_dim;
        let chunk = &outputs[offset..offset + n];
        offset += n;
        let margins: Vec<f64> = chunk.iter().map(|o| o.report.margin).filter(|m| m.is_finite()).collect();
        let failures: Vec<String> = chunk
            .iter()
            .filter(|o| !o.report.pass)
            .map(|o| o.report.instance_id.clone())
            .collect();
        for o in chunk.iter().filter(|o| !o.report.pass) {
            let payload = json!({
                "check": check,
                "report": o.report,
                "instance": o.replay,
            });
            replays.push((format!("{check}-{}", o.report.instance_id), payload));
        }
        let mut params = BTreeMap::new();
        let grid = config.p_grid(check);
        if !grid.is_empty() {
            params.insert("p".to_string(), json!(grid));
        }
        for (k, v) in extra_params(check) {
            params.insert(k.to_string(), v);
        }
        params.insert("regularization".into(), json!(config.settings.regularization));
        summaries.push(CheckSummary {
            check: check.to_string(),
            params,
            instances: chunk.len(),
            min_margin: margins.iter().cloned().reduce(f64::min),
            mean_margin: (!margins.is_empty()).then(|| margins.iter().sum::<f64>() / margins.len() as f64),
            failures,
            slack: slack_description(check).to_string(),
            runtime_ms: config.timing.then(|| chunk.iter().map(|o| o.elapsed_ms).sum()),
        });
        rows.extend(chunk.iter().map(|o| o.report.clone()));
    }
    let total_failures = summaries.iter().map(|s| s.failures.len()).sum();
    Ok(SuiteOutcome {
        report: SuiteReport {
            version: crate::VERSION.to_string(),
            config: config.clone(),
            checks: summaries,
            total_failures,
        },
        rows,
        replays,
    })
}

fn slack_description(check: &str) -> &'static str {
    match check {
        "fidelity_identity" => "0 (tolerance 1e-8 in rhs)",
        "entropy_derivative" => "0 (tolerance 1e-3*max(1,gap) in rhs)",
        "interpolation" => "1e-6",
        _ => "1e-7*max(1,|lhs|,|rhs|)",
    }
}

fn extra_params(check: &str) -> Vec<(&'static str, Value)> {
    match check {
        "alt" => vec![
            ("r", json!([0.25, 0.5, 1.0])),
            ("w", json!([0.0, 0.5, 1.0])),
            ("n", json!([1, 2, 3])),
            ("commuting_every", json!(10)),
        ],
        "gt" => vec![("n", json!([1, 2, 3])), ("trotter_r", json!(TROTTER_STEPS)), ("commuting_every", json!(10))],
        "lieb" => vec![("p", json!([1.0]))],
        "recovery_p" | "universal_recovery" | "measured_recovery" | "quadratic" => {
            vec![("sufficient_every", json!(10))]
        }
        "petz_equality" => vec![("equality_tol", json!(1e-9)), ("sufficient_every", json!(2))],
        "entropy_derivative" => vec![("theta", json!(DERIVATIVE_STEPS)), ("q0", json!(DERIVATIVE_Q0)), ("delta", json!(0.3))],
        "fidelity_identity" => vec![("theta", json!([0.25, 0.5, 1.0])), ("t", json!([-1.0, 0.0, 1.0]))],
        "interpolation" => vec![("theta", json!([0.25, 0.5])), ("q0", json!(64.0)), ("q1", json!(2.0))],
        "hirschman_scalar" => vec![("terms", json!([1, 4]))],
        _ => Vec::new(),
    }
}

fn run_job(config: &SuiteConfig, job: &Job) -> JobOutput {
    let start = Instant::now();
    let id = format!("d{}-{:04}", job.dim, job.index);
    let seed = config.seed ^ label_hash(job.check);
    let ensemble = InstanceEnsemble::new(job.dim, config.instances_per_dim, seed)
        .param("regularization", config.settings.regularization);
    let ctx = JobContext {
        ensemble,
        index: job.index,
        p_grid: config.p_grid(job.check),
        settings: &config.settings,
    };
    let result = match job.check {
        "alt" => job_alt(&ctx),
        "gt" => job_gt(&ctx),
        "lieb" => job_lieb(&ctx),
        "dpi_relative_entropy" => job_instance(&ctx, Pool::Random, |i, _| {
            check_dpi_relative_entropy(&i.rho, &i.eta, &i.channel)
        }),
        "dpi_sandwiched" => job_instance(&ctx, Pool::Random, |i, c| {
            over_p(c, "dpi_sandwiched", |p| check_dpi_sandwiched(&i.rho, &i.eta, &i.channel, p))
        }),
        "dpi_p_fidelity" => job_instance(&ctx, Pool::Random, |i, c| {
            over_p(c, "dpi_p_fidelity", |p| check_dpi_p_fidelity(&i.rho, &i.eta, &i.channel, p))
        }),
        "recovery_p" => job_instance(&ctx, Pool::WithSufficient(10), |i, c| {
            over_p(c, "recovery_p", |p| check_recovery_p(&i.rho, &i.eta, &i.channel, p, c.settings))
        }),
        "universal_recovery" => job_instance(&ctx, Pool::WithSufficient(10), |i, c| {
            over_p(c, "universal_recovery", |p| {
                check_universal_recovery(&i.rho, &i.eta, &i.channel, p, c.settings)
            })
        }),
        "measured_recovery" => job_instance(&ctx, Pool::WithSufficient(10), |i, c| {
            check_measured_recovery(&i.rho, &i.eta, &i.channel, MeasuredTarget::Rho, c.settings)
        }),
        "quadratic" => job_instance(&ctx, Pool::WithSufficient(10), |i, c| {
            check_quadratic(&i.rho, &i.eta, &i.channel, c.settings)
        }),
        "petz_equality" => job_instance(&ctx, Pool::WithSufficient(2), |i, c| {
            check_petz_equality(&i.rho, &i.eta, &i.channel, c.settings)
        }),
        "hirschman_scalar" => job_hirschman(&ctx),
        "entropy_derivative" => job_instance(&ctx, Pool::Comparable(0.3), |i, _| {
            check_entropy_derivative(&i.rho, &i.eta, &i.channel, &DERIVATIVE_STEPS)
        }),
        "fidelity_identity" => job_instance(&ctx, Pool::Comparable(0.2), |i, _| {
            check_fidelity_identity(&i.rho, &i.eta, &i.channel, &fidelity_grid())
        }),
        "interpolation" => job_instance(&ctx, Pool::Comparable(0.2), |i, c| {
            let parts = [0.25, 0.5]
                .iter()
                .map(|&theta| {
                    Ok((
                        format!("theta={theta}"),
                        check_interpolation(&i.rho, &i.eta, &i.channel, theta, 64.0, 2.0, c.settings)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(GapReport::worst("interpolation", parts))
        }),
        other => Err(Error::InvalidParameter(format!("unknown check '{other}'"))),
    };
    let (report, replay) = match result {
        Ok((report, replay)) => {
            let replay = (!report.pass).then_some(replay);
            (report.id(id), replay)
        }
        Err(e) => (GapReport::errored(job.check, &id, e.to_string()), None),
    };
    JobOutput {
        report,
        replay,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

/// `z = θ + it` for `θ ∈ {1/4, 1/2, 1}`, `t ∈ {−1, 0, 1}`.
pub fn fidelity_grid() -> Vec<C64> {
    let mut zs = Vec::new();
    for theta in [0.25, 0.5, 1.0] {
        for t in [-1.0, 0.0, 1.0] {
            zs.push(c(theta, t));
        }
    }
    zs
}

struct JobContext<'a> {
    ensemble: InstanceEnsemble,
    index: usize,
    p_grid: Vec<f64>,
    settings: &'a CheckSettings,
}

enum Pool {
    Random,
    /// Every n-th instance is an engineered sufficient triple.
    WithSufficient(usize),
    Comparable(f64),
}

fn job_instance(
    ctx: &JobContext<'_>,
    pool: Pool,
    check: impl Fn(&Instance, &JobContext<'_>) -> Result<GapReport>,
) -> Result<(GapReport, Value)> {
    let ensemble = match pool {
        Pool::Random => ctx.ensemble.clone(),
        Pool::WithSufficient(n) if ctx.index % n == n - 1 => ctx.ensemble.clone().channels(EnsembleChannelKind::Sufficient),
        Pool::WithSufficient(_) => ctx.ensemble.clone(),
        Pool::Comparable(delta) => ctx.ensemble.clone().states(EnsembleStateKind::Comparable).param("delta", delta),
    };
    let instance = ensemble.instance(ctx.index)?;
    let report = check(&instance, ctx)?;
    Ok((report.diag("regularized", f64::from(u8::from(instance.regularized))), instance.to_json()))
}

fn over_p(ctx: &JobContext<'_>, check: &str, f: impl Fn(f64) -> Result<GapReport>) -> Result<GapReport> {
    let parts = ctx
        .p_grid
        .iter()
        .map(|&p| Ok((format!("p={p}"), f(p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapReport::worst(check, parts))
}

fn random_psd(d: usize, rng: &mut impl Rng) -> Result<PsdMatrix> {
    let g = ginibre(d, d, rng);
    PsdMatrix::from_hermitian_part(&(&g * g.adjoint() * re(1.0 / d as f64)))
}

fn random_hermitian(d: usize, scale: f64, rng: &mut impl Rng) -> Result<HermitianMatrix> {
    HermitianMatrix::from_hermitian_part(&(hermitian_part(&ginibre(d, d, rng)) * re(scale)))
}

fn random_diagonal_psd(d: usize, rng: &mut impl Rng) -> Result<PsdMatrix> {
    let v: Vec<f64> = (0..d).map(|_| 0.05 + 2.0 * rng.random::<f64>()).collect();
    PsdMatrix::from_real_diagonal(&v)
}

fn random_diagonal_hermitian(d: usize, rng: &mut impl Rng) -> Result<HermitianMatrix> {
    let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.5).collect();
    HermitianMatrix::from_real_diagonal(&v)
}

const ALT_R: [f64; 3] = [0.25, 0.5, 1.0];
const ALT_W: [f64; 3] = [0.0, 0.5, 1.0];

fn job_alt(ctx: &JobContext<'_>) -> Result<(GapReport, Value)> {
    let ps = &ctx.p_grid;
    let combos = ps.len() * 27;
    let k = ctx.index % combos;
    let (p, r, w, n) = (ps[k / 27], ALT_R[(k / 9) % 3], ALT_W[(k / 3) % 3], k % 3 + 1);
    let d = ctx.ensemble.dim;
    let commuting = ctx.index.is_multiple_of(10);
    let mut rng = ctx.ensemble.aux_rng(ctx.index);
    let (rho, eta, xs) = if commuting {
        let rho = random_diagonal_state(d, &mut rng)?;
        let eta = random_diagonal_state(d, &mut rng)?;
        let xs = (0..n).map(|_| random_diagonal_psd(d, &mut rng)).collect::<Result<Vec<_>>>()?;
        (rho, eta, xs)
    } else {
        let inst = ctx.ensemble.instance(ctx.index)?;
        let xs = (0..n).map(|_| random_psd(d, &mut rng)).collect::<Result<Vec<_>>>()?;
        (inst.rho, inst.eta, xs)
    };
    let report = check_alt(&xs, &rho, &eta, p, r, w, ctx.settings)?
        .diag("p", p)
        .diag("r", r)
        .diag("w", w)
        .diag("n", n as f64)
        .diag("commuting", f64::from(u8::from(commuting)));
    let replay = json!({
        "p": p, "r": r, "w": w,
        "rho": MatrixJson::from_matrix(rho.matrix()),
        "eta": MatrixJson::from_matrix(eta.matrix()),
        "xs": xs.iter().map(|x| MatrixJson::from_matrix(x.matrix())).collect::<Vec<_>>(),
    });
    Ok((report, replay))
}

fn job_gt(ctx: &JobContext<'_>) -> Result<(GapReport, Value)> {
    let d = ctx.ensemble.dim;
    let commuting = ctx.index.is_multiple_of(10);
    let mut rng = ctx.ensemble.aux_rng(ctx.index);
    let rho = if commuting {
        random_diagonal_state(d, &mut rng)?
    } else {
        ctx.ensemble.clone().states(EnsembleStateKind::Mixed).instance(ctx.index)?.rho
    };
    let hs = (0..3)
        .map(|_| if commuting { random_diagonal_hermitian(d, &mut rng) } else { random_hermitian(d, 0.5, &mut rng) })
        .collect::<Result<Vec<_>>>()?;
    let mut parts = Vec::new();
    for &p in &ctx.p_grid {
        for n in 1..=3 {
            parts.push((format!("p={p},n={n}"), check_gt(&hs[..n], &rho, p, ctx.settings)?));
        }
    }
    let report = GapReport::worst("gt", parts).diag("commuting", f64::from(u8::from(commuting)));
    let replay = json!({
        "rho": MatrixJson::from_matrix(rho.matrix()),
        "hs": hs.iter().map(|h| MatrixJson::from_matrix(h.matrix())).collect::<Vec<_>>(),
    });
    Ok((report, replay))
}

fn job_lieb(ctx: &JobContext<'_>) -> Result<(GapReport, Value)> {
    let d = ctx.ensemble.dim;
    let mut rng = ctx.ensemble.aux_rng(ctx.index);
    let h0 = random_hermitian(d, 0.5, &mut rng)?;
    let shift = |x: PsdMatrix| PsdMatrix::from_hermitian_part(&(x.matrix() + identity(d) * re(0.05)));
    let x1 = shift(random_psd(d, &mut rng)?)?;
    let x2 = shift(random_psd(d, &mut rng)?)?;
    let lambda = rng.random::<f64>();
    let report = check_lieb(&h0, 1.0, &x1, &x2, lambda)?;
    let replay = json!({
        "p": 1.0, "lambda": lambda,
        "h0": MatrixJson::from_matrix(h0.matrix()),
        "x1": MatrixJson::from_matrix(x1.matrix()),
        "x2": MatrixJson::from_matrix(x2.matrix()),
    });
    Ok((report, replay))
}

/// Random exponential sum whose modulus on both boundary lines stays above a
/// fifth of its maximum there (sampled on a grid), so that zeros keep away from
/// the lines and the boundary integrands are smooth.
pub fn random_exponential_sum(rng: &mut impl Rng) -> Vec<(C64, f64)> {
    loop {
        let terms = rng.random_range(1..=4);
        let mut coeffs: Vec<(C64, f64)> = (0..terms)
            .map(|_| {
                let ck = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
                (ck, rng.random_range(-2.0..2.0))
            })
            .collect();
        if rng.random::<bool>() {
            let bound: f64 = coeffs.iter().map(|(ck, ak)| ck.norm() * ak.abs().exp().max(1.0)).sum();
            coeffs.push((c(1.1 * bound + 0.1, 0.0), 0.0));
        }
        let g = |z: C64| -> f64 { coeffs.iter().map(|(ck, ak)| ck * (z * ak).exp()).sum::<C64>().norm() };
        let boundary: Vec<f64> = (-1200..=1200)
            .flat_map(|k| {
                let t = k as f64 * 0.01;
                [g(c(0.0, t)), g(c(1.0, t))]
            })
            .collect();
        let low = boundary.iter().cloned().fold(f64::INFINITY, f64::min);
        let high = boundary.iter().cloned().fold(0.0, f64::max);
        if low >= 0.2 * high {
            return coeffs;
        }
    }
}

fn job_hirschman(ctx: &JobContext<'_>) -> Result<(GapReport, Value)> {
    let mut rng = ctx.ensemble.aux_rng(ctx.index);
    let coeffs = random_exponential_sum(&mut rng);
    let theta = rng.random_range(0.1..0.9);
    let report = check_hirschman_scalar(&coeffs, theta, &ctx.settings.rule)?;
    let replay = json!({
        "theta": theta,
        "terms": coeffs.iter().map(|(ck, ak)| json!({"re": ck.re, "im": ck.im, "a": ak})).collect::<Vec<_>>(),
    });
    Ok((report, replay))
}
