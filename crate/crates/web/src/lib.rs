//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Profiles are passed as the JSON used by the command-line configs,
//! e.g. `{"kind": "quartic", "params": {"a": 1, "b": 1}}`.

use rodshape::forward::uniform_grid;
use rodshape::{response, run_inverse, synthesize_dataset, InverseOptions, Profile, ProfileSpec, RodParams};
use wasm_bindgen::prelude::*;

fn profile_from_json(json: &str) -> Result<Profile, String> {
    let spec: ProfileSpec = serde_json::from_str(json).map_err(|e| format!("profile: {e}"))?;
    Profile::new(spec).map_err(|e| e.to_string())
}

fn rod(profile: &Profile, e: f64, r: f64, p: f64) -> Result<RodParams, String> {
    RodParams::new(e, r, p, profile.area(0.0)).map_err(|e| e.to_string())
}

/// Amplitude-frequency response on a uniform grid. Resonances are NaN.
#[wasm_bindgen]
pub struct Curve {
    omega: Vec<f64>,
    f_tilde: Vec<f64>,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn omega(&self) -> Vec<f64> {
        self.omega.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn f_tilde(&self) -> Vec<f64> {
        self.f_tilde.clone()
    }
}

pub fn curve(profile_json: &str, e: f64, r: f64, p: f64, start: f64, stop: f64, count: usize) -> Result<Curve, String> {
    let profile = profile_from_json(profile_json)?;
    let params = rod(&profile, e, r, p)?;
    let omega = uniform_grid(start, stop, count);
    let f_tilde = omega
        .iter()
        .map(|&w| response(&profile, &params, w).map(|s| s.f_tilde.unwrap_or(f64::NAN)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Curve { omega, f_tilde })
}

#[wasm_bindgen]
pub fn response_curve(
    profile_json: &str,
    e: f64,
    r: f64,
    p: f64,
    start: f64,
    stop: f64,
    count: usize,
) -> Result<Curve, JsError> {
    curve(profile_json, e, r, p, start, stop, count).map_err(|m| JsError::new(&m))
}

/// Recovered profile next to the true one, with the order-selection table.
#[wasm_bindgen]
pub struct Recovery {
    x: Vec<f64>,
    area: Vec<f64>,
    true_area: Vec<f64>,
    orders: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
    n_star: usize,
    eigen_count: usize,
}

#[wasm_bindgen]
impl Recovery {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn area(&self) -> Vec<f64> {
        self.area.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn true_area(&self) -> Vec<f64> {
        self.true_area.clone()
    }

    /// `N` column of the selection table.
    #[wasm_bindgen(getter)]
    pub fn orders(&self) -> Vec<f64> {
        self.orders.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn q(&self) -> Vec<f64> {
        self.q.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn r(&self) -> Vec<f64> {
        self.r.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn n_star(&self) -> usize {
        self.n_star
    }

    #[wasm_bindgen(getter)]
    pub fn eigen_count(&self) -> usize {
        self.eigen_count
    }

    /// Largest pointwise relative error against the true profile.
    #[wasm_bindgen(getter)]
    pub fn sup_error(&self) -> f64 {
        self.area.iter().zip(&self.true_area).map(|(a, t)| ((a - t) / t).abs()).fold(0.0, f64::max)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn recover_profile(
    profile_json: &str,
    e: f64,
    r: f64,
    p: f64,
    start: f64,
    stop: f64,
    count: usize,
    delta: f64,
    seed: u32,
    eigenpairs: usize,
) -> Result<Recovery, String> {
    let profile = profile_from_json(profile_json)?;
    let params = rod(&profile, e, r, p)?;
    let data = synthesize_dataset(&profile, &params, &uniform_grid(start, stop, count), delta, seed.into())
        .map_err(|e| e.to_string())?;
    let options = InverseOptions { m: eigenpairs.max(1) - 1, ..InverseOptions::default() };
    let rec = run_inverse(&data, &params, &options).map_err(|e| e.to_string())?;
    let table = &rec.diagnostics.selection;
    Ok(Recovery {
        true_area: rec.x.iter().map(|&x| profile.area(x)).collect(),
        orders: table.iter().map(|row| row.n as f64).collect(),
        q: table.iter().map(|row| row.q).collect(),
        r: table.iter().map(|row| row.r).collect(),
        n_star: rec.diagnostics.n_star,
        eigen_count: rec.diagnostics.eigen.len(),
        x: rec.x,
        area: rec.area,
    })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn recover(
    profile_json: &str,
    e: f64,
    r: f64,
    p: f64,
    start: f64,
    stop: f64,
    count: usize,
    delta: f64,
    seed: u32,
    eigenpairs: usize,
) -> Result<Recovery, JsError> {
    recover_profile(profile_json, e, r, p, start, stop, count, delta, seed, eigenpairs).map_err(|m| JsError::new(&m))
}
