//! The inversion pipeline: measured response -> endpoint coefficients ->
//! eigendata -> interior coefficients -> cross-section area.
//!
//! 1. Frequencies become spectral parameters `rho_l = omega_l sqrt(r/E)` and
//!    responses become `f(rho_l) = sqrt(F0) f~(omega_l)`.
//! 2. Samples are split into regular ones (including `rho = 0`) and
//!    resonances.
//! 3. `g_n(pi)`, `s_n(pi)` solve an overdetermined linear system in the
//!    least-squares sense; the truncation order comes from the penalised
//!    functional `R_N`.
//! 4. Zeros `mu_k` of the truncated `phi(rho, pi)` and multipliers
//!    `beta_k = -S(mu_k, pi)` follow from those coefficients alone.
//! 5. At every grid point `x` a second linear system in `g_n(x)`, `t_n(x)`
//!    is solved; only `g_0(x)` is kept.
//! 6. `F(x) = F0 (g_0(x) + 1)^2`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::forward::{uniform_grid, ResponseSample};
use crate::lstsq::{rank_abs_tol, svd_lstsq, Truncation};
use crate::nsbf::{eval_s, recover_f_on, recover_q_h, EndpointCoeffs, InteriorCoeffs};
use crate::profile::{omega_to_rho, RodParams};
use crate::special::spherical_j_into;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Regular,
    Zero,
    Resonant,
}

/// A datum in the spectral variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub rho: f64,
    /// `f(rho) = sqrt(F0) f~(omega)`; `None` for resonances.
    pub f: Option<f64>,
    pub kind: SampleKind,
}

/// Eigenvalue square roots `mu_k` and multipliers `beta_k`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub mu: Vec<f64>,
    pub beta: Vec<f64>,
}

impl EigenData {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// How the truncation order is read off the `R_N` table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderRule {
    /// With `N^ = argmin_{N >= 1} R_N`, use order `N^ - 1`. A small `R_N`
    /// means the order-`N` fit adds nothing to the order-`N - 1` fit, so the
    /// smaller order is already converged.
    #[default]
    PrecedingMinimum,
    /// Use `argmin_{N >= 0} R_N` itself.
    Minimum,
}

/// Pseudoinverse cutoff for the final interior solve. Column counts are
/// always chosen by the block ranks at `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorCutoff {
    /// Machine-precision cutoff (`rows * eps * sigma_max`).
    #[default]
    Machine,
    /// Drop singular values `<= tau` as well.
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InverseOptions {
    /// Largest order tried in the endpoint fit; `None` picks
    /// `min(floor(L/2) - 1, 100)`.
    #[serde(rename = "N_max", alias = "n_max")]
    pub n_max: Option<usize>,
    pub alpha: f64,
    /// Index of the last eigenpair, i.e. `M + 1` pairs are computed.
    #[serde(rename = "M", alias = "m")]
    pub m: usize,
    pub x_points: usize,
    #[serde(rename = "N_cap", alias = "n_cap")]
    pub n_cap: usize,
    pub tau: f64,
    /// Responses with `|f~|` above this are treated as resonances.
    pub resonance_threshold: Option<f64>,
    pub order_rule: OrderRule,
    pub interior_cutoff: InteriorCutoff,
    pub scan_step: f64,
    pub rho_floor: f64,
    pub rho_max_pad: f64,
    pub recover_q: bool,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            n_max: None,
            alpha: 1e-3,
            m: 999,
            x_points: 201,
            n_cap: 40,
            tau: 1e-2,
            resonance_threshold: None,
            order_rule: OrderRule::default(),
            interior_cutoff: InteriorCutoff::default(),
            scan_step: 0.05,
            rho_floor: 0.01,
            rho_max_pad: 2.0,
            recover_q: true,
        }
    }
}

/// Step of the pipeline an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Classify,
    Endpoint,
    Eigenvalues,
    Interior,
    Reconstruction,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Step::Classify => "classify",
            Step::Endpoint => "endpoint",
            Step::Eigenvalues => "eigenvalues",
            Step::Interior => "interior",
            Step::Reconstruction => "reconstruction",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{step} step failed: {source}")]
pub struct PipelineError {
    pub step: Step,
    pub source: Error,
}

trait AtStep<T> {
    fn at(self, step: Step) -> Result<T, PipelineError>;
}

impl<T> AtStep<T> for Result<T, Error> {
    fn at(self, step: Step) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { step, source })
    }
}

/// One row of the order-selection table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub n: usize,
    pub q: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub n_star: usize,
    pub coeffs: EndpointCoeffs,
    pub table: Vec<OrderRow>,
}

/// Per-grid-point record of the interior solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorDiag {
    pub x: f64,
    pub residual: f64,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorSolution {
    pub coeffs: InteriorCoeffs,
    pub residual: f64,
    pub rank_g: usize,
    pub rank_t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Total samples `L` and regular samples `L1`.
    pub samples: usize,
    pub regular_samples: usize,
    pub n_star: usize,
    pub selection: Vec<OrderRow>,
    pub endpoint: EndpointCoeffs,
    pub eigen: EigenData,
    pub dropped_pairs: usize,
    pub interior: Vec<InteriorDiag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredProfile {
    pub x: Vec<f64>,
    pub g0: Vec<f64>,
    pub area: Vec<f64>,
    pub q: Option<Vec<f64>>,
    pub h: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Converts responses to spectral samples: regular and zero samples first,
/// then resonances, each group ascending in `rho`.
pub fn classify(
    samples: &[ResponseSample],
    params: &RodParams,
    resonance_threshold: Option<f64>,
) -> Result<Vec<SpectralSample>, Error> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("empty dataset".into()));
    }
    params.validate()?;
    let scale = params.f0.sqrt();
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        if !(s.omega >= 0.0) || !s.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid frequency {}", s.omega)));
        }
        let rho = omega_to_rho(s.omega, params);
        let value = s.f_tilde.filter(|v| v.is_finite() && !s.resonant);
        let above = match (value, resonance_threshold) {
            (Some(v), Some(t)) => v.abs() > t,
            _ => false,
        };
        let sample = match value {
            Some(v) if !above => SpectralSample {
                rho,
                f: Some(scale * v),
                kind: if rho == 0.0 { SampleKind::Zero } else { SampleKind::Regular },
            },
            _ => SpectralSample { rho, f: None, kind: SampleKind::Resonant },
        };
        out.push(sample);
    }
    out.sort_by(|a, b| {
        let ga = a.kind == SampleKind::Resonant;
        let gb = b.kind == SampleKind::Resonant;
        ga.cmp(&gb).then(a.rho.total_cmp(&b.rho))
    });
    if out.iter().all(|s| s.kind == SampleKind::Resonant) {
        return Err(Error::NoRegularData);
    }
    Ok(out)
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Assembles the endpoint system with columns `[g_0..g_N1, s_0..s_N2]`.
pub fn endpoint_system(
    samples: &[SpectralSample],
    c: f64,
    n1: usize,
    n2: usize,
) -> Result<(DMatrix<f64>, DVector<f64>), Error> {
    let regular = samples.iter().filter(|s| s.kind != SampleKind::Resonant).count();
    if n2 + 1 > regular {
        return Err(Error::UnderdeterminedS { unknowns: n2 + 1, equations: regular });
    }
    let rows = samples.len();
    let cols = n1 + n2 + 2;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    let mut j = vec![0.0; 2 * n1.max(n2) + 2];
    for (row, s) in samples.iter().enumerate() {
        let z = s.rho * PI;
        match (s.kind, s.f) {
            (SampleKind::Zero, Some(f)) => {
                a[(row, 0)] = f;
                a[(row, n1 + 1)] = PI * c / 3.0;
                b[row] = -f - PI * c;
            }
            (SampleKind::Regular, Some(f)) => {
                spherical_j_into(z, &mut j);
                for n in 0..=n1 {
                    a[(row, n)] = f * sign(n) * j[2 * n];
                }
                for n in 0..=n2 {
                    a[(row, n1 + 1 + n)] = c / s.rho * sign(n) * j[2 * n + 1];
                }
                b[row] = -f * z.cos() - c * z.sin() / s.rho;
            }
            _ => {
                spherical_j_into(z, &mut j);
                for n in 0..=n1 {
                    a[(row, n)] = sign(n) * j[2 * n];
                }
                b[row] = -z.cos();
            }
        }
    }
    Ok((a, b))
}

/// Least-squares endpoint coefficients at order `N1 = N2 = n`; returns `Q_n`.
pub fn qn_of(n: usize, samples: &[SpectralSample], c: f64) -> Result<(f64, EndpointCoeffs), Error> {
    let (a, b) = endpoint_system(samples, c, n, n)?;
    let fit = svd_lstsq(&a, &b, Truncation::machine(a.nrows()))?;
    let g = fit.solution[..=n].to_vec();
    let s = fit.solution[n + 1..].to_vec();
    Ok((fit.residual_norm, EndpointCoeffs { g, s, qn: fit.residual_norm, rn: fit.residual_norm }))
}

fn penalty(current: &EndpointCoeffs, previous: Option<&EndpointCoeffs>) -> f64 {
    let n = current.g.len() - 1;
    let mut sum = 0.0;
    match previous {
        Some(prev) => {
            for k in 0..n {
                sum += (current.g[k] - prev.g[k]).powi(2) + (current.s[k] - prev.s[k]).powi(2);
            }
            sum += current.g[n].powi(2) + current.s[n].powi(2);
        }
        None => sum = current.g[0].powi(2) + current.s[0].powi(2),
    }
    sum.sqrt()
}

/// Fits every order `0..=n_max` and picks one from the `R_N` table.
pub fn select_n(
    samples: &[SpectralSample],
    c: f64,
    alpha: f64,
    n_max: usize,
    rule: OrderRule,
) -> Result<Selection, Error> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    let mut fits: Vec<EndpointCoeffs> = Vec::with_capacity(n_max + 1);
    let mut table = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let (q, mut coeffs) = qn_of(n, samples, c)?;
        let r = q + alpha * penalty(&coeffs, fits.last());
        coeffs.rn = r;
        table.push(OrderRow { n, q, r });
        fits.push(coeffs);
    }
    let argmin = |from: usize| {
        let mut best = from;
        for row in &table[from..] {
            if row.r < table[best].r {
                best = row.n;
            }
        }
        best
    };
    let n_star = match rule {
        OrderRule::Minimum => argmin(0),
        OrderRule::PrecedingMinimum if n_max == 0 => 0,
        OrderRule::PrecedingMinimum => argmin(1) - 1,
    };
    Ok(Selection { n_star, coeffs: fits.swap_remove(n_star), table })
}

/// Evaluates `cos(rho pi) + sum (-1)^n g_n j_{2n}(rho pi)` with a reused buffer.
struct PhiAtPi<'a> {
    g: &'a [f64],
    buf: Vec<f64>,
}

impl<'a> PhiAtPi<'a> {
    fn new(g: &'a [f64]) -> Self {
        PhiAtPi { g, buf: vec![0.0; 2 * g.len().max(1)] }
    }

    fn eval(&mut self, rho: f64) -> f64 {
        let z = rho * PI;
        spherical_j_into(z, &mut self.buf);
        z.cos() + self.g.iter().enumerate().map(|(n, g)| sign(n) * g * self.buf[2 * n]).sum::<f64>()
    }
}

/// The first `m + 1` positive zeros of the truncated `phi(rho, pi)`.
pub fn find_eigenvalues(coeffs: &EndpointCoeffs, m: usize, rho_max_pad: f64) -> Result<Vec<f64>, Error> {
    find_eigenvalues_with(coeffs, m, rho_max_pad, 0.05, 0.01)
}

pub fn find_eigenvalues_with(
    coeffs: &EndpointCoeffs,
    m: usize,
    rho_max_pad: f64,
    step: f64,
    rho_floor: f64,
) -> Result<Vec<f64>, Error> {
    if !(step > 0.0) || !(rho_floor >= 0.0) {
        return Err(Error::InvalidParameter("scan step must be positive".into()));
    }
    let wanted = m + 1;
    let upper = (m + 1) as f64 + rho_max_pad;
    let mut phi = PhiAtPi::new(&coeffs.g);
    let mut roots = Vec::with_capacity(wanted);
    let mut left = rho_floor;
    let mut f_left = phi.eval(left);
    let mut i = 1usize;
    while roots.len() < wanted {
        let right = rho_floor + step * i as f64;
        if right > upper {
            break;
        }
        let f_right = phi.eval(right);
        if f_left == 0.0 {
            roots.push(left);
        } else if f_left * f_right < 0.0 {
            roots.push(bisect(&mut phi, left, right, f_left));
        }
        left = right;
        f_left = f_right;
        i += 1;
    }
    if roots.len() < wanted {
        return Err(Error::MissingRoots { found: roots.len(), wanted });
    }
    Ok(roots)
}

fn bisect(phi: &mut PhiAtPi<'_>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = phi.eval(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// `beta_k = -S(mu_k, pi)` from the endpoint `s` coefficients. Pairs with a
/// numerically vanishing multiplier are dropped; the count is returned.
pub fn compute_beta(coeffs: &EndpointCoeffs, mu: &[f64]) -> (EigenData, usize) {
    let mut eigen = EigenData::default();
    let mut dropped = 0;
    for &m in mu {
        let beta = -eval_s(&coeffs.s, m, PI);
        if beta.abs() < 1e-13 * (1.0 + 1.0 / m) {
            log::warn!("dropping eigenpair at mu = {m}: beta = {beta:e}");
            dropped += 1;
            continue;
        }
        eigen.mu.push(m);
        eigen.beta.push(beta);
    }
    (eigen, dropped)
}

/// Solves for `g_n(x)`, `t_n(x)` at one point from the eigendata.
pub fn interior_solve(eigen: &EigenData, x: f64, n_cap: usize, tau: f64) -> Result<InteriorSolution, Error> {
    interior_solve_with(eigen, x, n_cap, tau, InteriorCutoff::Machine)
}

pub fn interior_solve_with(
    eigen: &EigenData,
    x: f64,
    n_cap: usize,
    tau: f64,
    cutoff: InteriorCutoff,
) -> Result<InteriorSolution, Error> {
    let rows = eigen.len();
    if !(0.0..=PI).contains(&x) {
        return Err(Error::InvalidParameter(format!("x = {x} outside [0, pi]")));
    }
    if rows < n_cap + 1 {
        return Err(Error::InvalidParameter(format!(
            "{rows} eigenpairs cannot support {} coefficients per block",
            n_cap + 1
        )));
    }
    let cols = n_cap + 1;
    let mut g_block = DMatrix::<f64>::zeros(rows, cols);
    let mut t_block = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    let mut even = vec![0.0; 2 * cols - 1];
    let mut odd = vec![0.0; 2 * cols];
    for (k, (&mu, &beta)) in eigen.mu.iter().zip(&eigen.beta).enumerate() {
        let weight = 1.0 / (beta * mu);
        spherical_j_into(mu * x, &mut even);
        spherical_j_into(mu * (x - PI), &mut odd);
        for n in 0..cols {
            g_block[(k, n)] = sign(n) * even[2 * n];
            t_block[(k, n)] = -sign(n) * odd[2 * n + 1] * weight;
        }
        rhs[k] = -(mu * x).cos() + (mu * (x - PI)).sin() * weight;
    }
    let rank_g = rank_abs_tol(&g_block, tau)?;
    let rank_t = rank_abs_tol(&t_block, tau)?;
    let n1 = rank_g.saturating_sub(1).min(n_cap);
    let n2 = rank_t.saturating_sub(1).min(n_cap);

    let mut system = DMatrix::<f64>::zeros(rows, n1 + n2 + 2);
    system.columns_mut(0, n1 + 1).copy_from(&g_block.columns(0, n1 + 1));
    system.columns_mut(n1 + 1, n2 + 1).copy_from(&t_block.columns(0, n2 + 1));
    let trunc = match cutoff {
        InteriorCutoff::Machine => Truncation::machine(rows),
        InteriorCutoff::Tau => Truncation::Absolute(tau),
    };
    let fit = svd_lstsq(&system, &rhs, trunc)?;
    Ok(InteriorSolution {
        coeffs: InteriorCoeffs {
            x,
            g: fit.solution[..=n1].to_vec(),
            t: fit.solution[n1 + 1..].to_vec(),
        },
        residual: fit.residual_norm,
        rank_g,
        rank_t,
    })
}

/// Default cap for the endpoint order given `L` samples of which `L1` are regular.
pub fn default_n_max(total: usize, regular: usize) -> usize {
    let by_rows = (total / 2).saturating_sub(1);
    by_rows.min(100).min(regular.saturating_sub(1))
}

/// Runs the full inversion on a measured dataset.
pub fn run_inverse(
    dataset: &[ResponseSample],
    params: &RodParams,
    options: &InverseOptions,
) -> Result<RecoveredProfile, PipelineError> {
    let samples = classify(dataset, params, options.resonance_threshold).at(Step::Classify)?;
    let total = samples.len();
    let regular = samples.iter().filter(|s| s.kind != SampleKind::Resonant).count();
    let c = -params.load / (params.youngs_modulus * params.f0.sqrt());

    let n_max = options.n_max.unwrap_or_else(|| default_n_max(total, regular));
    let selection = select_n(&samples, c, options.alpha, n_max, options.order_rule).at(Step::Endpoint)?;
    // From here on only the endpoint coefficients are used.
    drop(samples);

    let mu = find_eigenvalues_with(
        &selection.coeffs,
        options.m,
        options.rho_max_pad,
        options.scan_step,
        options.rho_floor,
    )
    .at(Step::Eigenvalues)?;
    let (eigen, dropped_pairs) = compute_beta(&selection.coeffs, &mu);

    if options.x_points < 2 {
        return Err(PipelineError {
            step: Step::Interior,
            source: Error::InvalidParameter("need at least two grid points".into()),
        });
    }
    let x = uniform_grid(0.0, PI, options.x_points);
    let solve = |&xi: &f64| interior_solve_with(&eigen, xi, options.n_cap, options.tau, options.interior_cutoff);
    #[cfg(feature = "parallel")]
    let solutions: Result<Vec<_>, Error> = {
        use rayon::prelude::*;
        x.par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let solutions: Result<Vec<_>, Error> = x.iter().map(solve).collect();
    let solutions = solutions.at(Step::Interior)?;

    let g0: Vec<f64> = solutions.iter().map(|s| s.coeffs.g[0]).collect();
    let area = recover_f_on(&g0, Some(&x), params.f0).at(Step::Reconstruction)?;
    let (q, h) = if options.recover_q && x.len() >= 5 {
        let (q, h) = recover_q_h(&g0, &x).at(Step::Reconstruction)?;
        (Some(q), Some(h))
    } else {
        (None, None)
    };
    let interior = solutions
        .iter()
        .map(|s| InteriorDiag {
            x: s.coeffs.x,
            residual: s.residual,
            n1: s.coeffs.g.len() - 1,
            n2: s.coeffs.t.len() - 1,
        })
        .collect();

    Ok(RecoveredProfile {
        x,
        g0,
        area,
        q,
        h,
        diagnostics: Diagnostics {
            samples: total,
            regular_samples: regular,
            n_star: selection.n_star,
            selection: selection.table,
            endpoint: selection.coeffs,
            eigen,
            dropped_pairs,
            interior,
        },
    })
}
