//! Spherical Bessel functions of the first kind for real arguments.
//!
//! Orders below `|z|` are produced by forward recurrence from `j_0`, `j_1`,
//! which is stable there. Orders at or above `|z|` come from a Miller-type
//! downward recurrence anchored on the forward value at `floor(|z|)` (or on
//! `j_0` when `|z| < 1`). Negative arguments are reduced by parity first.

/// Values `j_0(z) ..= j_{n_max}(z)` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselBatch {
    pub n_max: usize,
    pub z: f64,
    pub values: Vec<f64>,
}

impl BesselBatch {
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `j_n(z)` for a single order.
pub fn spherical_j(n: usize, z: f64) -> f64 {
    let x = z.abs();
    let magnitude = if x == 0.0 {
        if n == 0 {
            1.0
        } else {
            0.0
        }
    } else if x < 1e-4 * (n as f64 + 1.0) {
        ascending_series(n, x)
    } else {
        let mut buf = vec![0.0; n + 1];
        fill_nonnegative(x, &mut buf);
        buf[n]
    };
    apply_parity(n, z, magnitude)
}

/// `j_0(z) ..= j_{n_max}(z)`.
pub fn spherical_j_batch(n_max: usize, z: f64) -> BesselBatch {
    let mut values = vec![0.0; n_max + 1];
    spherical_j_into(z, &mut values);
    BesselBatch { n_max, z, values }
}

/// Writes `j_n(z)` into `out[n]` for every `n < out.len()`.
///
/// This is the allocation-free kernel used when assembling linear systems.
pub fn spherical_j_into(z: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    fill_nonnegative(z.abs(), out);
    if z < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

fn apply_parity(n: usize, z: f64, magnitude: f64) -> f64 {
    if z < 0.0 && n % 2 == 1 {
        -magnitude
    } else {
        magnitude
    }
}

fn fill_nonnegative(x: f64, out: &mut [f64]) {
    let n_max = out.len() - 1;
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let (sin, cos) = x.sin_cos();
    let j0 = sin / x;
    out[0] = j0;

    // forward region: n <= floor(x)
    let top_forward = (x.floor() as usize).min(n_max);
    if top_forward >= 1 {
        out[1] = (j0 - cos) / x;
        for n in 1..top_forward {
            out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        }
    }
    if top_forward == n_max {
        return;
    }
    miller_downward(x, top_forward, out);
}

/// Fills `out[anchor+1..]` by downward recurrence normalised on `out[anchor]`.
fn miller_downward(x: f64, anchor: usize, out: &mut [f64]) {
    let n_max = out.len() - 1;
    let start = starting_order(n_max, x);
    let mut upper = 0.0_f64; // f_{n+1}
    let mut current = 1e-300_f64; // f_n
    for n in (anchor + 1..=start).rev() {
        if n <= n_max {
            out[n] = current;
        }
        let lower = (2 * n + 1) as f64 / x * current - upper;
        upper = current;
        current = lower;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            upper *= RESCALE_BY;
            if n <= n_max {
                for v in &mut out[n..] {
                    *v *= RESCALE_BY;
                }
            }
        }
    }
    // `current` now holds the unnormalised value at `anchor`.
    let scale = out[anchor] / current;
    for v in &mut out[anchor + 1..] {
        *v *= scale;
    }
}

fn starting_order(n_max: usize, x: f64) -> usize {
    let top = n_max.max(x.ceil() as usize);
    top + 20 + (160.0 * (top as f64 + 1.0)).sqrt().ceil() as usize
}

/// Ascending power series, accurate when `x` is small relative to `n`.
fn ascending_series(n: usize, x: f64) -> f64 {
    let mut lead = 1.0;
    for i in 1..=n {
        lead *= x / (2 * i + 1) as f64;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let half_sq = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= half_sq / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}
