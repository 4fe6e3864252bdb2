//! Browser bindings: kick a ground-state rotor and sample its field-free
//! evolution. Every function returns flat `Float64Array`s.

use wasm_bindgen::prelude::*;

use rotorkick::observables::{self, ObservableSeries};
use rotorkick::sudden::kick_wavepacket_auto;
use rotorkick::{InitialState, KickStrengths, Wavepacket};

fn packet(p_eta: f64, p_zeta: f64) -> Result<Wavepacket, JsError> {
    let kick = KickStrengths::new(p_eta, p_zeta).map_err(|e| JsError::new(&e.to_string()))?;
    kick_wavepacket_auto(InitialState::GROUND, kick).map_err(|e| JsError::new(&e.to_string()))
}

/// Populations |C^J|² for J = 0..=j_max.
#[wasm_bindgen]
pub fn populations(p_eta: f64, p_zeta: f64) -> Result<Vec<f64>, JsError> {
    Ok(observables::populations(&packet(p_eta, p_zeta)?).into_iter().map(|(_, p)| p).collect())
}

/// Density over one revival period, row-major with `n_theta` rows (θ from 0
/// towards π) and `n_tau` columns (τ from 0 to π).
#[wasm_bindgen]
pub fn carpet(p_eta: f64, p_zeta: f64, n_theta: usize, n_tau: usize) -> Result<Vec<f64>, JsError> {
    let c = observables::carpet(&packet(p_eta, p_zeta)?, n_theta, n_tau).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(c.density.into_iter().flatten().collect())
}

/// `n_tau` orientation values followed by `n_tau` alignment values over one
/// revival period.
#[wasm_bindgen]
pub fn series(p_eta: f64, p_zeta: f64, n_tau: usize) -> Result<Vec<f64>, JsError> {
    let wp = packet(p_eta, p_zeta)?;
    let s = ObservableSeries::compute(&wp, &observables::revival_grid(n_tau)).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(s.orientation.into_iter().chain(s.alignment).collect())
}
