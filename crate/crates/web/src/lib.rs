//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Everything crosses the boundary as flat `f64` arrays so the page can
//! draw straight from them. The plain functions do the work and are what
//! the host-side tests exercise; the `#[wasm_bindgen]` wrappers only turn
//! errors into JS exceptions.

use std::f64::consts::PI;

use spheremix::discrepancy::{bound_report, exact_discrepancy_with, ExactOptions, SearchGrid};
use spheremix::spectral::{eval_profile_radius, DeviationSeries, DEFAULT_EPSILON};
use spheremix::walk::{run_walk, Formulation, WalkConfig};
use wasm_bindgen::prelude::*;

/// Degree cap for the heat map; enough for the picture, cheap per pixel.
pub const SURFACE_DEGREE: usize = 2000;
/// Coarser search than the CLI default keeps the page responsive.
pub const CURVE_GRID: usize = 96;

/// Signed deviation `P(cap) - uniform(cap)` on an `n x n` grid of
/// `(γ, r) ∈ [0, π]²`, row-major in γ, followed by its minimum and maximum.
pub fn surface(theta: f64, k: u32, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("need at least a 2 x 2 grid".into());
    }
    let series = DeviationSeries::best_effort(theta, k, DEFAULT_EPSILON)
        .map_err(|e| e.to_string())?
        .truncated(SURFACE_DEGREE);
    let step = PI / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n + 2);
    for i in 0..n {
        let a = series.profile_in_radius(i as f64 * step);
        out.extend((0..n).map(|j| eval_profile_radius(&a, j as f64 * step)));
    }
    let (lo, hi) = out
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    out.push(lo);
    out.push(hi);
    Ok(out)
}

/// Rows of `[k, lower_plancherel, exact, uncertainty, upper_closed]` for
/// `k = 2..=k_max`, flattened.
pub fn curve_rows(theta: f64, k_max: u32) -> Result<Vec<f64>, String> {
    if k_max < 2 {
        return Err("k_max must be at least 2".into());
    }
    let opts = ExactOptions {
        grid: SearchGrid {
            n_gamma: CURVE_GRID,
            n_r: CURVE_GRID,
        },
        ..ExactOptions::default()
    };
    let mut out = Vec::with_capacity(5 * (k_max as usize - 1));
    for k in 2..=k_max {
        let bounds = bound_report(theta, k).map_err(|e| e.to_string())?;
        let exact = exact_discrepancy_with(theta, k, &opts).map_err(|e| e.to_string())?.result;
        out.extend([k as f64, bounds.lower_plancherel, exact.value, exact.uncertainty, bounds.upper_closed]);
    }
    Ok(out)
}

/// End points of `m` simulated walks as `[x0, y0, z0, x1, ...]`.
pub fn points(theta: f64, k: u32, formulation: &str, m: usize, seed: u64) -> Result<Vec<f64>, String> {
    let f: Formulation = formulation.parse().map_err(|e: spheremix::Error| e.to_string())?;
    let cfg = WalkConfig::new(theta, k, f, seed, m).map_err(|e| e.to_string())?;
    let samples = run_walk(&cfg).map_err(|e| e.to_string())?;
    Ok(samples.points.iter().flat_map(|p| p.to_array()).collect())
}

#[wasm_bindgen]
pub fn deviation_surface(theta: f64, k: u32, n: usize) -> Result<Vec<f64>, JsError> {
    surface(theta, k, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn discrepancy_curve(theta: f64, k_max: u32) -> Result<Vec<f64>, JsError> {
    curve_rows(theta, k_max).map_err(|e| JsError::new(&e))
}

/// `seed` is a `u32` so it arrives as a plain JS number rather than a BigInt.
#[wasm_bindgen]
pub fn simulate_points(theta: f64, k: u32, formulation: &str, m: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    points(theta, k, formulation, m, seed.into()).map_err(|e| JsError::new(&e))
}
