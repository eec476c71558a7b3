//! Direct problem: solutions of `-y'' + q y = rho^2 y` and the synthetic
//! amplitude-frequency response `f~(omega)` measured at the loaded end.
//!
//! The ODE path uses an adaptive 8(5,3) Dormand-Prince pair at tolerance
//! `1e-12`, restarted at every profile junction so that jumps in `q` never
//! fall inside a step. Quartic and exponential profiles have closed forms.

use std::f64::consts::PI;

use ode_solvers::dop853::Dop853;
use ode_solvers::{OutputType, SVector, System, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::profile::{omega_to_rho, to_problem_b, ProblemB, Profile, ProfileSpec, RodParams};
use crate::special::spherical_j_into;
use crate::Error;

pub const ODE_TOLERANCE: f64 = 1e-12;

/// `|phi(rho, pi)|` below `RESONANCE_FACTOR * (1 + |rho|)` marks a resonance.
pub const RESONANCE_FACTOR: f64 = 1e-9;

/// One measured (or synthesized) point of the amplitude-frequency response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSample {
    pub omega: f64,
    /// Displacement amplitude at `x = 0`; `None` at a resonance.
    pub f_tilde: Option<f64>,
    pub resonant: bool,
}

impl ResponseSample {
    pub fn regular(omega: f64, f_tilde: f64) -> Self {
        ResponseSample { omega, f_tilde: Some(f_tilde), resonant: false }
    }

    pub fn resonant(omega: f64) -> Self {
        ResponseSample { omega, f_tilde: None, resonant: true }
    }
}

/// Which fundamental solution to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solution {
    /// `phi(0) = 1`, `phi'(0) = h`.
    Phi,
    /// `S(0) = 0`, `S'(0) = 1`.
    S,
    /// `T(pi) = 0`, `T'(pi) = 1`.
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvpSolution {
    pub rho: f64,
    /// Value at the terminal point (`pi` for `Phi` and `S`, `0` for `T`).
    pub y_end: f64,
    pub yprime_end: f64,
    /// `(x, y, y')` at the requested sample abscissae, in ascending `x`.
    pub trajectory: Option<Vec<(f64, f64, f64)>>,
}

struct PairRhs<'a> {
    profile: &'a Profile,
    rho2: f64,
    reflect: bool,
    x_lo: f64,
    x_hi: f64,
}

// The independent variable is carried as a fifth component: the solver
// evaluates explicitly time-dependent right-hand sides at wrong stage times.
type State = SVector<f64, 5>;

impl System<f64, State> for PairRhs<'_> {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let t = y[4];
        let x = if self.reflect { PI - t } else { t };
        let k = self.profile.q(x.clamp(self.x_lo, self.x_hi)) - self.rho2;
        dy[0] = y[1];
        dy[1] = k * y[0];
        dy[2] = y[3];
        dy[3] = k * y[2];
        dy[4] = 1.0;
    }
}

/// Integrates two solutions at once over `t in [0, pi]` and returns the state
/// at every knot. With `reflect` the equation is written in `t = pi - x`.
fn shoot(profile: &Profile, rho: f64, reflect: bool, init: Vector4<f64>, knots: &[f64]) -> Result<Vec<Vector4<f64>>, Error> {
    let to_x = |t: f64| if reflect { PI - t } else { t };
    let mut states = Vec::with_capacity(knots.len());
    let mut y = State::from([init[0], init[1], init[2], init[3], 0.0]);
    states.push(init);
    for w in knots.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let (xa, xb) = (to_x(t0), to_x(t1));
        let (lo, hi) = (xa.min(xb), xa.max(xb));
        // keep q on the open segment so one-sided values are used at junctions
        let (x_lo, x_hi) = if lo.next_up() < hi.next_down() {
            (lo.next_up(), hi.next_down())
        } else {
            let mid = 0.5 * (lo + hi);
            (mid, mid)
        };
        let rhs = PairRhs { profile, rho2: rho * rho, reflect, x_lo, x_hi };
        y[4] = t0;
        let mut solver = Dop853::new(rhs, t0, t1, t1 - t0, y, ODE_TOLERANCE, ODE_TOLERANCE);
        solver.set_output(OutputType::Sparse);
        solver
            .integrate()
            .map_err(|e| Error::IntegrationFailure(format!("rho = {rho}, segment [{t0}, {t1}]: {e:?}")))?;
        y = *solver
            .y_out()
            .last()
            .ok_or_else(|| Error::IntegrationFailure(format!("no output on segment [{t0}, {t1}]")))?;
        states.push(Vector4::new(y[0], y[1], y[2], y[3]));
    }
    Ok(states)
}

fn knots_with(profile: &Profile, samples: &[f64], reflect: bool) -> Vec<f64> {
    let mut knots: Vec<f64> = vec![0.0, PI];
    knots.extend(profile.junctions());
    knots.extend(samples.iter().copied().filter(|x| *x > 0.0 && *x < PI));
    if reflect {
        for k in knots.iter_mut() {
            *k = PI - *k;
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    // a reflected endpoint can land one ulp off
    knots.retain(|&t| (0.0..=PI).contains(&t));
    if knots.first() != Some(&0.0) {
        knots.insert(0, 0.0);
    }
    if knots.last() != Some(&PI) {
        knots.push(PI);
    }
    knots
}

/// Integrates one fundamental solution, optionally sampling it at `samples`.
pub fn solve_ivp(pb: &ProblemB, rho: f64, which: Solution, samples: Option<&[f64]>) -> Result<IvpSolution, Error> {
    let reflect = which == Solution::T;
    let knots = knots_with(&pb.profile, samples.unwrap_or(&[]), reflect);
    let init = match which {
        Solution::Phi => Vector4::new(1.0, pb.h, 0.0, 1.0),
        Solution::S => Vector4::new(0.0, 1.0, 1.0, pb.h),
        // in t = pi - x: Y(0) = T(pi) = 0, dY/dt = -T'(pi) = -1
        Solution::T => Vector4::new(0.0, -1.0, 1.0, 0.0),
    };
    let states = shoot(&pb.profile, rho, reflect, init, &knots)?;
    let sign = if reflect { -1.0 } else { 1.0 };
    let last = states[states.len() - 1];
    let trajectory = samples.map(|xs| {
        let mut points: Vec<(f64, f64, f64)> = knots
            .iter()
            .zip(&states)
            .map(|(&t, s)| (if reflect { PI - t } else { t }, s[0], sign * s[1]))
            .filter(|(x, _, _)| xs.iter().any(|s| (s - x).abs() <= 4.0 * f64::EPSILON * PI))
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points
    });
    Ok(IvpSolution { rho, y_end: last[0], yprime_end: sign * last[1], trajectory })
}

/// `(phi(rho, pi), S(rho, pi))` by numerical integration only.
pub fn phi_s_ode(pb: &ProblemB, rho: f64) -> Result<(f64, f64), Error> {
    let knots = knots_with(&pb.profile, &[], false);
    let init = Vector4::new(1.0, pb.h, 0.0, 1.0);
    let states = shoot(&pb.profile, rho, false, init, &knots)?;
    let last = states[states.len() - 1];
    Ok((last[0], last[2]))
}

/// `(phi(rho, pi), S(rho, pi))`, using closed forms where they exist.
pub fn integrate_phi_s(pb: &ProblemB, rho: f64) -> Result<(f64, f64), Error> {
    match *pb.profile.spec() {
        ProfileSpec::Quartic { a, b } => Ok(quartic_phi_s(a, b, rho, PI)),
        ProfileSpec::Exponential { b, .. } => Ok(exponential_phi_s(b, rho, PI)),
        _ => phi_s_ode(pb, rho),
    }
}

/// `T(rho, 0)` by integration from `x = pi`.
pub fn integrate_t(pb: &ProblemB, rho: f64) -> Result<f64, Error> {
    Ok(solve_ivp(pb, rho, Solution::T, None)?.y_end)
}

/// Closed forms for `F = (a + b x)^4`, where the series have at most two terms.
pub fn quartic_phi_s(a: f64, b: f64, rho: f64, x: f64) -> (f64, f64) {
    let mut j = [0.0; 3];
    spherical_j_into(rho * x, &mut j);
    let l = a + b * x;
    let phi = (rho * x).cos() + b * x * (2.0 * a + b * x) / (a * a) * j[0] + b.powi(3) * x.powi(3) / (a * a * l) * j[2];
    let s0 = b * b * x * x / (a * l);
    let s = if rho == 0.0 {
        x * (1.0 + s0 / 3.0)
    } else {
        (rho * x).sin() / rho + s0 * j[1] / rho
    };
    (phi, s)
}

/// Closed forms for `F = exp(2 (a + b x))`, i.e. `q = b^2`, `h = b`.
pub fn exponential_phi_s(b: f64, rho: f64, x: f64) -> (f64, f64) {
    let k2 = rho * rho - b * b;
    // sin(k x)/k and cos(k x) continued through k = 0 to imaginary k
    let (cos_kx, sinc) = if k2 > 0.0 {
        let k = k2.sqrt();
        ((k * x).cos(), (k * x).sin() / k)
    } else if k2 < 0.0 {
        let k = (-k2).sqrt();
        ((k * x).cosh(), (k * x).sinh() / k)
    } else {
        (1.0, x)
    };
    (cos_kx + b * sinc, sinc)
}

/// Response at a single frequency.
pub fn response(profile: &Profile, params: &RodParams, omega: f64) -> Result<ResponseSample, Error> {
    if !(omega >= 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("frequency must be finite and nonnegative, got {omega}")));
    }
    let a0 = profile.a(0.0);
    if ((a0 * a0 - params.f0) / params.f0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "F0 = {} does not match the profile, F(0) = {}",
            params.f0,
            a0 * a0
        )));
    }
    let pb = to_problem_b(profile, params);
    let rho = omega_to_rho(omega, params);
    let (phi, s) = integrate_phi_s(&pb, rho)?;
    if phi.abs() < RESONANCE_FACTOR * (1.0 + rho.abs()) {
        return Ok(ResponseSample::resonant(omega));
    }
    let f = -pb.c * s / phi;
    Ok(ResponseSample::regular(omega, f / params.f0.sqrt()))
}

/// Multiplies every regular sample by `1 + delta * xi_l` with standard normal
/// `xi_l`. Sample `l` draws from its own ChaCha stream, so the result depends
/// only on `(seed, l)`.
pub fn add_noise(samples: &[ResponseSample], delta: f64, seed: u64) -> Result<Vec<ResponseSample>, Error> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("noise level must be nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(samples.to_vec());
    }
    Ok(samples
        .iter()
        .enumerate()
        .map(|(l, s)| match s.f_tilde {
            Some(v) if !s.resonant => {
                let xi: f64 = StandardNormal.sample(&mut sample_rng(seed, l as u64));
                ResponseSample { f_tilde: Some(v * (1.0 + delta * xi)), ..*s }
            }
            _ => *s,
        })
        .collect())
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Responses on a frequency list followed by multiplicative noise.
pub fn synthesize_dataset(
    profile: &Profile,
    params: &RodParams,
    omegas: &[f64],
    delta: f64,
    seed: u64,
) -> Result<Vec<ResponseSample>, Error> {
    params.validate()?;
    #[cfg(feature = "parallel")]
    let clean: Result<Vec<_>, Error> = {
        use rayon::prelude::*;
        omegas.par_iter().map(|&w| response(profile, params, w)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let clean: Result<Vec<_>, Error> = omegas.iter().map(|&w| response(profile, params, w)).collect();
    add_noise(&clean?, delta, seed)
}

/// `count` equally spaced points from `start` to `stop` inclusive.
pub fn uniform_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| if i + 1 == count { stop } else { start + (stop - start) * i as f64 / (count - 1) as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(spec: ProfileSpec) -> (Profile, ProblemB, RodParams) {
        let profile = Profile::new(spec).unwrap();
        let a0 = profile.a(0.0);
        let params = RodParams::new(3.0, 4.0, 2.0, a0 * a0).unwrap();
        let pb = to_problem_b(&profile, &params);
        (profile, pb, params)
    }

    #[test]
    fn constant_profile_closed_forms() {
        let (_, pb, _) = problem(ProfileSpec::Constant { area: 1.0 });
        let (phi, s) = integrate_phi_s(&pb, 0.5).unwrap();
        assert!(phi.abs() < 1e-11);
        assert!((s - 2.0).abs() < 1e-11);
        assert!(integrate_t(&pb, 1.0).unwrap().abs() < 1e-11);
        assert!((integrate_t(&pb, 0.5).unwrap() + 2.0).abs() < 1e-11);
    }

    #[test]
    fn quartic_closed_form_matches_stated_value() {
        let (phi, _) = quartic_phi_s(1.0, 1.0, 1.0, PI);
        let mut j = [0.0; 3];
        spherical_j_into(PI, &mut j);
        let expected = PI.cos() + PI * (2.0 + PI) * j[0] + PI.powi(3) / (1.0 + PI) * j[2];
        assert!((phi - expected).abs() < 1e-14);
    }

    #[test]
    fn exponential_closed_form() {
        let (_, s) = exponential_phi_s(1.0, 2.0, PI);
        let r3 = 3f64.sqrt();
        assert!((s - (r3 * PI).sin() / r3).abs() < 1e-14);
        // continuity across rho = b
        let (p0, s0) = exponential_phi_s(1.0, 1.0, PI);
        let (p1, s1) = exponential_phi_s(1.0, 1.0 + 1e-9, PI);
        assert!((p0 - p1).abs() < 1e-7 && (s0 - s1).abs() < 1e-7);
    }

    #[test]
    fn constant_response_and_zero_frequency() {
        let (profile, _, params) = problem(ProfileSpec::Constant { area: 1.0 });
        let rho_per_omega = params.rho_factor();
        for omega in [0.3, 1.1, 2.0] {
            let s = response(&profile, &params, omega).unwrap();
            let rho = omega * rho_per_omega;
            let expected = params.load * (rho * PI).tan() / (params.youngs_modulus * rho);
            assert!(((s.f_tilde.unwrap() - expected) / expected).abs() < 1e-9);
        }
        let s = response(&profile, &params, 0.0).unwrap();
        let expected = params.load * PI / params.youngs_modulus;
        assert!((s.f_tilde.unwrap() - expected).abs() < 1e-11);
    }

    #[test]
    fn resonance_is_flagged() {
        let (profile, _, params) = problem(ProfileSpec::Constant { area: 1.0 });
        // phi = cos(rho pi) vanishes at rho = 1/2
        let omega = 0.5 / params.rho_factor();
        let s = response(&profile, &params, omega).unwrap();
        assert!(s.resonant);
        assert!(s.f_tilde.is_none());
    }

    #[test]
    fn response_checks_f0() {
        let profile = Profile::new(ProfileSpec::Constant { area: 1.0 }).unwrap();
        let params = RodParams::new(3.0, 4.0, 2.0, 2.0).unwrap();
        assert!(response(&profile, &params, 1.0).is_err());
        let params = RodParams::new(3.0, 4.0, 2.0, 1.0).unwrap();
        assert!(response(&profile, &params, -1.0).is_err());
    }

    #[test]
    fn noise_is_identity_at_zero_and_reproducible() {
        let samples: Vec<_> = (0..5).map(|i| ResponseSample::regular(i as f64, 1.0 + i as f64)).collect();
        assert_eq!(add_noise(&samples, 0.0, 7).unwrap(), samples);
        let a = add_noise(&samples, 1e-6, 7).unwrap();
        let b = add_noise(&samples, 1e-6, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_noise(&samples, 1e-6, 8).unwrap());
        let mut with_resonance = samples.clone();
        with_resonance[2] = ResponseSample::resonant(2.0);
        let noisy = add_noise(&with_resonance, 1e-3, 1).unwrap();
        assert_eq!(noisy[2], ResponseSample::resonant(2.0));
        assert!(add_noise(&samples, -1.0, 1).is_err());
    }

    #[test]
    fn noise_strength() {
        let samples: Vec<_> = (0..10_000).map(|i| ResponseSample::regular(i as f64, 2.0)).collect();
        let noisy = add_noise(&samples, 1e-6, 2024).unwrap();
        let dev: Vec<f64> = noisy.iter().map(|s| s.f_tilde.unwrap() / 2.0 - 1.0).collect();
        let mean = dev.iter().sum::<f64>() / dev.len() as f64;
        let var = dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (dev.len() - 1) as f64;
        assert!((var.sqrt() / 1e-6 - 1.0).abs() < 0.05);
    }

    #[test]
    fn grids() {
        let g = uniform_grid(1.0, 2.0, 12);
        assert_eq!(g.len(), 12);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[11], 2.0);
        assert!((g[1] - (1.0 + 1.0 / 11.0)).abs() < 1e-15);
        let omega3 = uniform_grid(1.0, 9.0, 21);
        for (k, w) in omega3.iter().enumerate() {
            assert!((w - (1.0 + 2.0 * k as f64 / 5.0)).abs() < 1e-14);
        }
    }
}
