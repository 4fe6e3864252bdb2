//! Reduced descriptions of the driven rotor: the two-level model, σ-resonance
//! scans, classical kick energetics and the characteristic rays of carpets.

mod classical;
mod resonance;
mod two_level;

pub use classical::{
    classical_kick_energy, j_bar_closed_form, j_bar_from_energy, ray_set, Fraction, Ray, RayKind, RaySet,
};
pub use resonance::{
    estimate_period, resonance_map, resonance_map_with, resonance_scan, resonance_scan_with, Engine, MapEntry, Resonance,
    ResonanceScan, ScanOptions,
};
pub use two_level::{two_level_energy, two_level_propagate, TwoLevelState, TWO_LEVEL_STEPS_PER_SIGMA};
