//! The four worked examples as ready-made configurations.

use rodshape::{InverseOptions, ProfileSpec, RodParams};

use crate::config::{FrequencyGrid, Noise, RunConfig};
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub config: RunConfig,
}

fn params(e: f64, r: f64, p: f64, f0: f64) -> RodParams {
    RodParams::new(e, r, p, f0).expect("example parameters are valid")
}

fn config(params: RodParams, profile: ProfileSpec, grid: FrequencyGrid, delta: f64) -> RunConfig {
    RunConfig {
        params,
        profile: Some(profile),
        frequencies: Some(grid),
        dataset: None,
        recovered: None,
        noise: Noise { delta, seed: DEFAULT_SEED },
        inversion: InverseOptions::default(),
    }
}

fn grid(start: f64, stop: f64, count: usize) -> FrequencyGrid {
    FrequencyGrid::Uniform { start, stop, count }
}

/// Quartic rod `(1 + x)^4`, 12 frequencies on `[1, 2]`.
pub fn example1(delta: f64) -> RunConfig {
    config(params(3.0, 4.0, 2.0, 1.0), ProfileSpec::Quartic { a: 1.0, b: 1.0 }, grid(1.0, 2.0, 12), delta)
}

/// Exponential rod `exp(2 (1 + x))` on one of the four frequency sets.
pub fn example2(set: usize, delta: f64) -> RunConfig {
    let g = match set {
        1 => grid(1.0, 3.0, 21),
        2 => grid(1.0, 3.0, 81),
        3 => grid(1.0, 9.0, 21),
        4 => grid(1.0, 9.0, 81),
        _ => panic!("frequency sets are numbered 1 to 4"),
    };
    config(params(3.0, 4.0, 2.0, (2.0f64).exp()), ProfileSpec::Exponential { a: 1.0, b: 1.0 }, g, delta)
}

/// Unit rod with cosine bumps, 101 frequencies on `[0.1, 20]`.
pub fn example3() -> RunConfig {
    config(params(4.0, 3.0, 2.0, 1.0), ProfileSpec::BumpPairCos, grid(0.1, 20.0, 101), 0.0)
}

/// Unit rod with exponential bumps, sampled at the first `count` points of
/// the 201-point mesh on `[0.1, 50]`.
pub fn example4(count: usize) -> RunConfig {
    let mut omegas = grid(0.1, 50.0, 201).omegas();
    omegas.truncate(count);
    config(params(4.0, 3.0, 2.0, 1.0), ProfileSpec::BumpPairExp, FrequencyGrid::List(omegas), 0.0)
}

pub fn scenarios(number: u8) -> Result<Vec<Scenario>, CliError> {
    let s = |name: String, config| Scenario { name, config };
    Ok(match number {
        1 => vec![s("clean".into(), example1(0.0)), s("noisy".into(), example1(1e-6))],
        2 => (1..=4)
            .flat_map(|k| {
                [
                    s(format!("omega{k}-clean"), example2(k, 0.0)),
                    s(format!("omega{k}-noisy"), example2(k, 1e-7)),
                ]
            })
            .collect(),
        3 => vec![s("points101".into(), example3())],
        4 => [41, 81, 201].into_iter().map(|n| s(format!("points{n}"), example4(n))).collect(),
        n => return Err(CliError::Config(format!("there is no example {n}; choose 1, 2, 3 or 4"))),
    })
}
