use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rodshape::inverse::{InteriorDiag, OrderRow};
use rodshape::{run_inverse, synthesize_dataset, Profile, RecoveredProfile, ResponseSample};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{format_dataset, format_profile, read_dataset, read_profile, write_atomic, write_json};
use crate::scenarios::scenarios;

const HEAD: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub total: usize,
    pub regular: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointSummary {
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    pub q: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub count: usize,
    pub dropped: usize,
    pub mu_first: Vec<f64>,
    pub beta_first: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `Q_N*` of the endpoint fit.
    pub endpoint: f64,
    pub interior_max: f64,
    pub interior: Vec<InteriorDiag>,
}

/// Everything `invert` reports except wall times, which go to a separate
/// file so that reports of repeated runs compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub samples: SampleCounts,
    pub n_star: usize,
    pub selection: Vec<OrderRow>,
    pub endpoint: EndpointSummary,
    pub eigen: EigenSummary,
    pub residuals: Residuals,
    pub h: Option<f64>,
}

impl Report {
    pub fn new(config: &RunConfig, rec: &RecoveredProfile) -> Self {
        let d = &rec.diagnostics;
        let head = |v: &[f64]| v.iter().take(HEAD).copied().collect();
        Report {
            config: config.clone(),
            samples: SampleCounts { total: d.samples, regular: d.regular_samples },
            n_star: d.n_star,
            selection: d.selection.clone(),
            endpoint: EndpointSummary { g: d.endpoint.g.clone(), s: d.endpoint.s.clone(), q: d.endpoint.qn, r: d.endpoint.rn },
            eigen: EigenSummary {
                count: d.eigen.len(),
                dropped: d.dropped_pairs,
                mu_first: head(&d.eigen.mu),
                beta_first: head(&d.eigen.beta),
            },
            residuals: Residuals {
                endpoint: d.endpoint.qn,
                interior_max: d.interior.iter().map(|i| i.residual).fold(0.0, f64::max),
                interior: d.interior.clone(),
            },
            h: rec.h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sup: f64,
    /// Root mean square of the pointwise relative error.
    pub l2_mean: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
struct Timings {
    forward_seconds: Option<f64>,
    invert_seconds: Option<f64>,
    compare_seconds: Option<f64>,
}

pub fn forward(config: &RunConfig, out: &Path) -> Result<Vec<ResponseSample>, CliError> {
    let profile = config.require_profile()?;
    let omegas = config.require_frequencies()?;
    let data = synthesize_dataset(&profile, &config.params, &omegas, config.noise.delta, config.noise.seed)
        .map_err(|e| match e {
            rodshape::Error::InvalidParameter(m) => CliError::Config(m),
            other => CliError::Forward(other),
        })?;
    let path = config.dataset_path(out);
    write_atomic(&path, format_dataset(&data).as_bytes())?;
    info!("wrote {} samples to {}", data.len(), path.display());
    Ok(data)
}

pub fn invert(config: &RunConfig, out: &Path) -> Result<(RecoveredProfile, Report), CliError> {
    let data = read_dataset(&config.dataset_path(out))?;
    let rec = run_inverse(&data, &config.params, &config.inversion)?;
    let report = Report::new(config, &rec);
    write_atomic(&out.join("profile.csv"), format_profile(&rec).as_bytes())?;
    write_json(&out.join("report.json"), &report)?;
    info!(
        "N* = {}, {} eigenpairs, max interior residual {:e}",
        report.n_star, report.eigen.count, report.residuals.interior_max
    );
    Ok((rec, report))
}

pub fn relative_errors(profile: &Profile, x: &[f64], area: &[f64]) -> Result<Vec<f64>, CliError> {
    if let Some(bad) = x.iter().find(|x| !(0.0..=std::f64::consts::PI).contains(*x)) {
        return Err(CliError::Config(format!("recovered grid point {bad} lies outside [0, pi]")));
    }
    Ok(x.iter().zip(area).map(|(&xi, &f)| ((f - profile.area(xi)) / profile.area(xi)).abs()).collect())
}

pub fn metrics(errors: &[f64]) -> Metrics {
    let n = errors.len().max(1) as f64;
    Metrics {
        sup: errors.iter().copied().fold(0.0, f64::max),
        l2_mean: (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
        points: errors.len(),
    }
}

pub fn compare(config: &RunConfig, out: &Path) -> Result<Metrics, CliError> {
    let profile = config.require_profile()?;
    let (x, area) = read_profile(&config.recovered_path(out))?;
    let errors = relative_errors(&profile, &x, &area)?;
    let mut csv = String::from("x,F_recovered,F_true,rel_error\n");
    for ((&xi, &f), e) in x.iter().zip(&area).zip(&errors) {
        use crate::io::fmt_f64;
        csv.push_str(&format!("{},{},{},{}\n", fmt_f64(xi), fmt_f64(f), fmt_f64(profile.area(xi)), fmt_f64(*e)));
    }
    write_atomic(&out.join("errors.csv"), csv.as_bytes())?;
    let m = metrics(&errors);
    write_json(&out.join("metrics.json"), &m)?;
    info!("sup relative error {:e}, rms {:e}", m.sup, m.l2_mean);
    Ok(m)
}

fn seconds(start: Instant) -> Option<f64> {
    Some(start.elapsed().as_secs_f64())
}

pub fn run_forward(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let t = Instant::now();
    forward(config, out)?;
    write_json(&out.join("timings.json"), &Timings { forward_seconds: seconds(t), ..Default::default() })
}

pub fn run_invert(config: &RunConfig, out: &Path) -> Result<Report, CliError> {
    let t = Instant::now();
    let (_, report) = invert(config, out)?;
    write_json(&out.join("timings.json"), &Timings { invert_seconds: seconds(t), ..Default::default() })?;
    Ok(report)
}

pub fn run_compare(config: &RunConfig, out: &Path) -> Result<Metrics, CliError> {
    let t = Instant::now();
    let m = compare(config, out)?;
    write_json(&out.join("timings.json"), &Timings { compare_seconds: seconds(t), ..Default::default() })?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub name: String,
    pub n_star: usize,
    pub sup: f64,
    pub l2_mean: f64,
}

/// Runs every variant of a worked example in its own subdirectory of
/// `out/example<n>`: config, dataset, profile, report, errors and metrics.
pub fn run_example(number: u8, seed: Option<u64>, out: &Path) -> Result<Vec<VariantSummary>, CliError> {
    let root = out.join(format!("example{number}"));
    let mut summary = Vec::new();
    for mut scenario in scenarios(number)? {
        if let Some(seed) = seed {
            scenario.config.noise.seed = seed;
        }
        let dir: PathBuf = root.join(&scenario.name);
        let config = scenario.config;
        write_json(&dir.join("config.json"), &config)?;

        let mut timings = Timings::default();
        let t = Instant::now();
        forward(&config, &dir)?;
        timings.forward_seconds = seconds(t);
        let t = Instant::now();
        let (_, report) = invert(&config, &dir)?;
        timings.invert_seconds = seconds(t);
        let t = Instant::now();
        let m = compare(&config, &dir)?;
        timings.compare_seconds = seconds(t);
        write_json(&dir.join("timings.json"), &timings)?;

        info!("example {number} / {}: N* = {}, sup error {:e}", scenario.name, report.n_star, m.sup);
        summary.push(VariantSummary { name: scenario.name, n_star: report.n_star, sup: m.sup, l2_mean: m.l2_mean });
    }
    write_json(&root.join("summary.json"), &summary)?;
    Ok(summary)
}
