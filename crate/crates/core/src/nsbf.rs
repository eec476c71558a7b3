//! Truncated Neumann series of Bessel functions for `phi`, `S` and `T`, and
//! recovery of the profile from the first coefficient `g_0(x)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::special::spherical_j_into;
use crate::Error;

/// Endpoint coefficients `g_n(pi)`, `s_n(pi)` together with fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointCoeffs {
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    /// Achieved discrepancy `Q_N`.
    pub qn: f64,
    /// Penalised functional `R_N` (equal to `qn` when not computed).
    pub rn: f64,
}

impl EndpointCoeffs {
    pub fn n1(&self) -> usize {
        self.g.len().saturating_sub(1)
    }

    pub fn n2(&self) -> usize {
        self.s.len().saturating_sub(1)
    }
}

/// Coefficients `g_n(x)`, `t_n(x)` at one interior point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorCoeffs {
    pub x: f64,
    pub g: Vec<f64>,
    pub t: Vec<f64>,
}

fn alternating(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `sum_n (-1)^n c_n j_{2n + offset}(z)`.
fn alternating_sum(coeffs: &[f64], offset: usize, z: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let mut j = vec![0.0; 2 * coeffs.len() + offset];
    spherical_j_into(z, &mut j);
    coeffs.iter().enumerate().map(|(n, c)| alternating(n) * c * j[2 * n + offset]).sum()
}

/// `phi(rho, x) = cos(rho x) + sum (-1)^n g_n j_{2n}(rho x)`.
pub fn eval_phi(g: &[f64], rho: f64, x: f64) -> f64 {
    (rho * x).cos() + alternating_sum(g, 0, rho * x)
}

/// `S(rho, x) = sin(rho x)/rho + (1/rho) sum (-1)^n s_n j_{2n+1}(rho x)`.
///
/// At `rho = 0` the limit `x (1 + s_0 / 3)` is returned.
pub fn eval_s(s: &[f64], rho: f64, x: f64) -> f64 {
    if rho == 0.0 {
        return x * (1.0 + s.first().copied().unwrap_or(0.0) / 3.0);
    }
    ((rho * x).sin() + alternating_sum(s, 1, rho * x)) / rho
}

/// `T(rho, x) = sin(rho (x - pi))/rho + (1/rho) sum (-1)^n t_n j_{2n+1}(rho (x - pi))`.
pub fn eval_t(t: &[f64], rho: f64, x: f64) -> f64 {
    let d = x - PI;
    if rho == 0.0 {
        return d * (1.0 + t.first().copied().unwrap_or(0.0) / 3.0);
    }
    ((rho * d).sin() + alternating_sum(t, 1, rho * d)) / rho
}

/// `F(x_j) = F0 (g_0(x_j) + 1)^2`.
pub fn recover_f(g0: &[f64], f0: f64) -> Result<Vec<f64>, Error> {
    recover_f_on(g0, None, f0)
}

pub(crate) fn recover_f_on(g0: &[f64], x: Option<&[f64]>, f0: f64) -> Result<Vec<f64>, Error> {
    g0.iter()
        .enumerate()
        .map(|(i, &g)| {
            if g > -1.0 {
                Ok(f0 * (g + 1.0) * (g + 1.0))
            } else {
                Err(Error::PhysicalityViolation { x: x.map_or(f64::NAN, |x| x[i]), g0: g })
            }
        })
        .collect()
}

/// `q = g_0'' / (g_0 + 1)` by finite differences, and `h = g_0'(0)`.
///
/// Second differences are central in the interior and second-order one-sided
/// at the ends; `h` uses a fourth-order one-sided first difference.
pub fn recover_q_h(g0: &[f64], x: &[f64]) -> Result<(Vec<f64>, f64), Error> {
    let n = g0.len();
    if n < 5 || x.len() != n {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 matching grid points, got {} values on {} nodes",
            n,
            x.len()
        )));
    }
    let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
    let uniform = x.iter().enumerate().all(|(i, xi)| (xi - (x[0] + dx * i as f64)).abs() <= 1e-9 * dx.abs().max(1.0));
    if !uniform || !(dx > 0.0) {
        return Err(Error::InvalidParameter("grid must be uniform and increasing".into()));
    }
    if let Some(i) = (0..n).find(|&i| (g0[i] + 1.0).abs() < 1e-8) {
        return Err(Error::PhysicalityViolation { x: x[i], g0: g0[i] });
    }
    let dx2 = dx * dx;
    let second = |i: usize| -> f64 {
        if i == 0 {
            (2.0 * g0[0] - 5.0 * g0[1] + 4.0 * g0[2] - g0[3]) / dx2
        } else if i == n - 1 {
            (2.0 * g0[n - 1] - 5.0 * g0[n - 2] + 4.0 * g0[n - 3] - g0[n - 4]) / dx2
        } else {
            (g0[i + 1] - 2.0 * g0[i] + g0[i - 1]) / dx2
        }
    };
    let q = (0..n).map(|i| second(i) / (g0[i] + 1.0)).collect();
    let h = (-25.0 * g0[0] + 48.0 * g0[1] - 36.0 * g0[2] + 16.0 * g0[3] - 3.0 * g0[4]) / (12.0 * dx);
    Ok((q, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficients_give_free_solutions() {
        let zeros = [0.0; 4];
        for (rho, x) in [(0.7, 1.2), (3.0, PI), (10.0, 0.4)] {
            assert!((eval_phi(&zeros, rho, x) - (rho * x).cos()).abs() < 1e-15);
            assert!((eval_s(&zeros, rho, x) - (rho * x).sin() / rho).abs() < 1e-15);
            assert!((eval_t(&zeros, rho, x) - (rho * (x - PI)).sin() / rho).abs() < 1e-15);
        }
    }

    #[test]
    fn values_at_the_ends() {
        let g = [0.3, -1.2, 4.0];
        assert!((eval_phi(&g, 5.0, 0.0) - 1.3).abs() < 1e-15);
        assert_eq!(eval_t(&[1.0, 2.0, 3.0], 4.0, PI), 0.0);
    }

    #[test]
    fn s_at_zero_rho_is_the_limit() {
        let s = [0.9, 0.2];
        let x = 2.0;
        assert_eq!(eval_s(&s, 0.0, x), x * (1.0 + 0.3));
        let near = eval_s(&s, 1e-5, x);
        assert!((near - eval_s(&s, 0.0, x)).abs() < 1e-8);
        // s_0 = 3 (S(0, x)/x - 1)
        assert!((3.0 * (eval_s(&s, 0.0, x) / x - 1.0) - s[0]).abs() < 1e-15);
    }

    #[test]
    fn area_from_g0() {
        assert_eq!(recover_f(&[0.0; 3], 1.0).unwrap(), vec![1.0; 3]);
        assert_eq!(recover_f(&[-0.5], 4.0).unwrap(), vec![1.0]);
        let xs: Vec<f64> = (0..11).map(|i| PI * i as f64 / 10.0).collect();
        let g0: Vec<f64> = xs.iter().map(|x| x * (2.0 + x)).collect();
        for (f, x) in recover_f(&g0, 1.0).unwrap().iter().zip(&xs) {
            assert!((f - (1.0 + x).powi(4)).abs() < 1e-12 * f);
        }
        assert!(matches!(recover_f(&[0.0, -1.5], 1.0), Err(Error::PhysicalityViolation { .. })));
    }

    #[test]
    fn q_and_h_from_g0() {
        let n = 2001;
        let xs: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();

        let (q, h) = recover_q_h(&vec![0.0; n], &xs).unwrap();
        assert!(q.iter().all(|v| *v == 0.0));
        assert_eq!(h, 0.0);

        let g0: Vec<f64> = xs.iter().map(|x| x * (2.0 + x)).collect();
        let (q, h) = recover_q_h(&g0, &xs).unwrap();
        for (qi, x) in q.iter().zip(&xs) {
            assert!((qi - 2.0 / (1.0 + x).powi(2)).abs() < 1e-6);
        }
        assert!((h - 2.0).abs() < 1e-9);

        let g0: Vec<f64> = xs.iter().map(|x| x.exp() - 1.0).collect();
        let (q, h) = recover_q_h(&g0, &xs).unwrap();
        assert!(q.iter().all(|v| (v - 1.0).abs() < 1e-5));
        assert!((h - 1.0).abs() < 1e-9);
    }

    #[test]
    fn q_rejects_bad_input() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert!(recover_q_h(&[0.0; 4], &xs).is_err());
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(matches!(recover_q_h(&[0.0, -1.0, 0.0, 0.0, 0.0], &xs), Err(Error::PhysicalityViolation { .. })));
        let uneven = [0.0, 1.0, 2.5, 3.0, 4.0];
        assert!(recover_q_h(&[0.0; 5], &uneven).is_err());
    }
}
