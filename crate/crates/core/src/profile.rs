//! Rod constants and cross-section profiles.
//!
//! A profile is described by `a(x) = sqrt(F(x))` together with its first two
//! derivatives. Everything the reduced equation needs follows from those:
//! `q = a''/a`, `h = a'(0)/a(0)`, `c = -p / (E a(0))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::spline::NaturalSpline;
use crate::Error;

const VALIDATION_POINTS: usize = 10_000;

/// Physical constants of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RodParams {
    /// Young's modulus `E`.
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    /// Density `r`.
    #[serde(rename = "r")]
    pub density: f64,
    /// Amplitude `p` of the force applied at `x = 0`.
    #[serde(rename = "p")]
    pub load: f64,
    /// Cross-section area at the loaded end, `F(0)`.
    #[serde(rename = "F0")]
    pub f0: f64,
}

impl RodParams {
    pub fn new(youngs_modulus: f64, density: f64, load: f64, f0: f64) -> Result<Self, Error> {
        let params = RodParams { youngs_modulus, density, load, f0 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let finite = [self.youngs_modulus, self.density, self.load, self.f0].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("rod constants must be finite".into()));
        }
        if !(self.youngs_modulus > 0.0) {
            return Err(Error::InvalidParameter(format!("E must be positive, got {}", self.youngs_modulus)));
        }
        if !(self.density > 0.0) {
            return Err(Error::InvalidParameter(format!("r must be positive, got {}", self.density)));
        }
        if !(self.f0 > 0.0) {
            return Err(Error::InvalidParameter(format!("F0 must be positive, got {}", self.f0)));
        }
        if self.load == 0.0 {
            return Err(Error::InvalidParameter("p must be nonzero".into()));
        }
        Ok(())
    }

    /// `sqrt(r / E)`, the factor converting frequency to spectral parameter.
    pub fn rho_factor(&self) -> f64 {
        (self.density / self.youngs_modulus).sqrt()
    }
}

/// `rho = omega * sqrt(r / E)`.
pub fn omega_to_rho(omega: f64, params: &RodParams) -> f64 {
    omega * params.rho_factor()
}

/// Serializable description of a cross section, `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// `F(x) = F0`.
    Constant {
        #[serde(rename = "F0")]
        area: f64,
    },
    /// `F(x) = (a + b x)^4`.
    Quartic { a: f64, b: f64 },
    /// `F(x) = exp(2 (a + b x))`.
    Exponential { a: f64, b: f64 },
    /// Unit rod with a cosine bulge around `pi/3` and a cosine constriction
    /// around `3 pi/4`.
    BumpPairCos,
    /// Unit rod with two compactly supported smooth bumps.
    BumpPairExp,
    /// Measured areas `F(x_i)`; `sqrt(F)` is interpolated by a natural cubic spline.
    Tabulated {
        x: Vec<f64>,
        #[serde(rename = "F")]
        area: Vec<f64>,
    },
}

impl ProfileSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ProfileSpec::Constant { .. } => "constant",
            ProfileSpec::Quartic { .. } => "quartic",
            ProfileSpec::Exponential { .. } => "exponential",
            ProfileSpec::BumpPairCos => "bump_pair_cos",
            ProfileSpec::BumpPairExp => "bump_pair_exp",
            ProfileSpec::Tabulated { .. } => "tabulated",
        }
    }
}

/// A validated cross-section profile with analytic `a`, `a'`, `a''`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    spec: ProfileSpec,
    spline: Option<NaturalSpline>,
}

impl Profile {
    /// Builds a profile and checks `a(x) > 0` on a dense grid over `[0, pi]`.
    pub fn new(spec: ProfileSpec) -> Result<Self, Error> {
        let spline = match &spec {
            ProfileSpec::Constant { area } => {
                require_finite(&[*area])?;
                if !(*area > 0.0) {
                    return Err(Error::NonPositiveProfile { x: 0.0, value: *area });
                }
                None
            }
            ProfileSpec::Quartic { a, b } => {
                require_finite(&[*a, *b])?;
                // sampling can step over the double root of (a + b x)^4
                let root = if *b == 0.0 { f64::NAN } else { -a / b };
                if *a == 0.0 && *b == 0.0 || (0.0..=PI).contains(&root) {
                    return Err(Error::NonPositiveProfile { x: if root.is_nan() { 0.0 } else { root }, value: 0.0 });
                }
                None
            }
            ProfileSpec::Exponential { a, b } => {
                require_finite(&[*a, *b])?;
                None
            }
            ProfileSpec::BumpPairCos | ProfileSpec::BumpPairExp => None,
            ProfileSpec::Tabulated { x, area } => Some(tabulated_spline(x, area)?),
        };
        let profile = Profile { spec, spline };
        for i in 0..VALIDATION_POINTS {
            let x = PI * i as f64 / (VALIDATION_POINTS - 1) as f64;
            let value = profile.a(x);
            if !(value > 0.0) {
                return Err(Error::NonPositiveProfile { x, value });
            }
        }
        Ok(profile)
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    /// `a(x) = sqrt(F(x))`.
    pub fn a(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn a1(&self, x: f64) -> f64 {
        self.eval(x).1
    }

    pub fn a2(&self, x: f64) -> f64 {
        self.eval(x).2
    }

    /// Cross-section area `F(x) = a(x)^2`.
    pub fn area(&self, x: f64) -> f64 {
        let a = self.a(x);
        a * a
    }

    /// Potential `q(x) = a''(x) / a(x)`.
    pub fn q(&self, x: f64) -> f64 {
        let (a, _, a2) = self.eval(x);
        a2 / a
    }

    /// Robin constant `h = a'(0) / a(0)`.
    pub fn h(&self) -> f64 {
        let (a, a1, _) = self.eval(0.0);
        a1 / a
    }

    /// Abscissae in `(0, pi)` where `q` may be discontinuous or its
    /// derivatives jump; the integrator steps exactly onto them.
    pub fn junctions(&self) -> Vec<f64> {
        match &self.spec {
            ProfileSpec::BumpPairCos => COS_BUMPS.iter().flat_map(|b| [b.lo, b.hi]).collect(),
            ProfileSpec::BumpPairExp => EXP_BUMPS.iter().flat_map(|b| [b.lo(), b.hi()]).collect(),
            ProfileSpec::Tabulated { .. } => self
                .spline
                .as_ref()
                .map(|s| s.nodes().iter().copied().filter(|&x| x > 0.0 && x < PI).collect())
                .unwrap_or_default(),
            _ => Vec::new(),
        }
    }

    /// `(a, a', a'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match &self.spec {
            ProfileSpec::Constant { area } => (area.sqrt(), 0.0, 0.0),
            ProfileSpec::Quartic { a, b } => {
                let l = a + b * x;
                (l * l, 2.0 * b * l, 2.0 * b * b)
            }
            ProfileSpec::Exponential { a, b } => {
                let e = (a + b * x).exp();
                (e, b * e, b * b * e)
            }
            ProfileSpec::BumpPairCos => {
                for bump in &COS_BUMPS {
                    if x > bump.lo && x < bump.hi {
                        return bump.eval(x);
                    }
                }
                (1.0, 0.0, 0.0)
            }
            ProfileSpec::BumpPairExp => {
                for bump in &EXP_BUMPS {
                    if x > bump.lo() && x < bump.hi() {
                        return bump.eval(x);
                    }
                }
                (1.0, 0.0, 0.0)
            }
            ProfileSpec::Tabulated { .. } => self.spline.as_ref().map(|s| s.eval(x)).unwrap_or((f64::NAN, 0.0, 0.0)),
        }
    }
}

fn require_finite(values: &[f64]) -> Result<(), Error> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("profile parameters must be finite".into()))
    }
}

fn tabulated_spline(x: &[f64], area: &[f64]) -> Result<NaturalSpline, Error> {
    if x.len() != area.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "tabulated profile needs matching x and F arrays with at least two nodes, got {} and {}",
            x.len(),
            area.len()
        )));
    }
    require_finite(x)?;
    require_finite(area)?;
    if x[0] > 0.0 || x[x.len() - 1] < PI {
        return Err(Error::InvalidParameter("tabulated profile must cover [0, pi]".into()));
    }
    if let Some((i, &v)) = area.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveProfile { x: x[i], value: v });
    }
    let a: Vec<f64> = area.iter().map(|f| f.sqrt()).collect();
    NaturalSpline::new(x.to_vec(), a)
        .ok_or_else(|| Error::InvalidParameter("tabulated abscissae must be strictly increasing".into()))
}

/// `1 + amp (1 + cos(freq (x - center)))` on `(lo, hi)`.
struct CosBump {
    lo: f64,
    hi: f64,
    center: f64,
    freq: f64,
    amp: f64,
}

impl CosBump {
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (s, c) = (self.freq * (x - self.center)).sin_cos();
        (
            1.0 + self.amp * (1.0 + c),
            -self.amp * self.freq * s,
            -self.amp * self.freq * self.freq * c,
        )
    }
}

// Each support interval is exactly one period of the cosine about its center,
// so a and a' match the unit background at both ends.
const COS_BUMPS: [CosBump; 2] = [
    CosBump { lo: PI / 6.0, hi: PI / 2.0, center: PI / 3.0, freq: 6.0, amp: 0.25 },
    CosBump { lo: 5.0 * PI / 8.0, hi: 7.0 * PI / 8.0, center: 3.0 * PI / 4.0, freq: 8.0, amp: -0.2 },
];

/// `1 + amp * exp(1 - pi^2 / ((hi_k pi - k x)(k x - lo_k pi)))` on `(lo_k pi / k, hi_k pi / k)`.
struct ExpBump {
    k: f64,
    lo_k: f64,
    hi_k: f64,
    amp: f64,
}

impl ExpBump {
    fn lo(&self) -> f64 {
        self.lo_k * PI / self.k
    }

    fn hi(&self) -> f64 {
        self.hi_k * PI / self.k
    }

    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let left = self.hi_k * PI - self.k * x;
        let right = self.k * x - self.lo_k * PI;
        let u = left * right;
        let u1 = self.k * (left - right);
        let u2 = -2.0 * self.k * self.k;
        let e = (1.0 - PI * PI / u).exp();
        if e == 0.0 {
            return (1.0, 0.0, 0.0);
        }
        let p1 = PI * PI * u1 / (u * u);
        let p2 = PI * PI * (u2 / (u * u) - 2.0 * u1 * u1 / (u * u * u));
        let v = self.amp * e;
        (1.0 + v, v * p1, v * (p1 * p1 + p2))
    }
}

const EXP_BUMPS: [ExpBump; 2] = [
    ExpBump { k: 12.0, lo_k: 3.0, hi_k: 5.0, amp: 0.1 },
    ExpBump { k: 40.0, lo_k: 29.0, hi_k: 31.0, amp: -1.0 / 15.0 },
];

/// Data of the reduced problem `-y'' + q y = rho^2 y`, `y'(0) - h y(0) = c`, `y(pi) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemB {
    pub profile: Profile,
    pub h: f64,
    pub c: f64,
}

impl ProblemB {
    pub fn q(&self, x: f64) -> f64 {
        self.profile.q(x)
    }
}

pub fn to_problem_b(profile: &Profile, params: &RodParams) -> ProblemB {
    let (a0, a1, _) = profile.eval(0.0);
    ProblemB {
        profile: profile.clone(),
        h: a1 / a0,
        c: -params.load / (params.youngs_modulus * a0),
    }
}
