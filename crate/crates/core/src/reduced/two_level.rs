use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::GaussianPulse;

/// Default RK4 step is σ divided by this.
pub const TWO_LEVEL_STEPS_PER_SIGMA: f64 = 2000.0;
/// Half-width of the integrated interval around the pulse centre, in σ.
const ACTIVE_HALF_WIDTH: f64 = 12.0;
const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Interaction-picture amplitudes of the two lowest m = 0 rotor states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelState {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl TwoLevelState {
    pub const GROUND: TwoLevelState =
        TwoLevelState { c0: Complex64 { re: 1.0, im: 0.0 }, c1: Complex64 { re: 0.0, im: 0.0 } };

    pub fn norm_defect(&self) -> f64 {
        (self.c0.norm_sqr() + self.c1.norm_sqr() - 1.0).abs()
    }

    /// ⟨J²⟩ = 2|c1|².
    pub fn kinetic_energy(&self) -> f64 {
        2.0 * self.c1.norm_sqr()
    }

    fn derivative(&self, tau: f64, coupling: f64) -> (Complex64, Complex64) {
        let phase = Complex64::from_polar(1.0, 2.0 * tau);
        let i = Complex64::i();
        (i * phase.conj() * coupling * self.c1, i * phase * coupling * self.c0)
    }

    fn axpy(&self, h: f64, d: (Complex64, Complex64)) -> Self {
        Self { c0: self.c0 + d.0 * h, c1: self.c1 + d.1 * h }
    }
}

/// Integrates the orienting two-level equations through the pulse with
/// classical RK4 at step ≈ `dt`, starting in the ground state.
///
/// Only the orienting field enters. Outside τ₀/2 ± 12σ the coupling is below
/// double-precision resolution and the amplitudes are constant, so only that
/// stretch (clipped to the window) is integrated.
pub fn two_level_propagate(pulse: &GaussianPulse, dt: f64) -> Result<TwoLevelState> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidInput(format!("dt = {dt} must be finite and > 0")));
    }
    let mut state = TwoLevelState::GROUND;
    if pulse.eta0 == 0.0 {
        return Ok(state);
    }
    let start = (pulse.centre() - ACTIVE_HALF_WIDTH * pulse.sigma).max(0.0);
    let end = (pulse.centre() + ACTIVE_HALF_WIDTH * pulse.sigma).min(pulse.tau0);
    let n = ((end - start) / dt).ceil().max(1.0) as usize;
    let h = (end - start) / n as f64;
    let coupling = |t: f64| pulse.eta(t) / 3f64.sqrt();
    for k in 0..n {
        let t = start + k as f64 * h;
        let (g0, gm, g1) = (coupling(t), coupling(t + h / 2.0), coupling(t + h));
        let k1 = state.derivative(t, g0);
        let k2 = state.axpy(h / 2.0, k1).derivative(t + h / 2.0, gm);
        let k3 = state.axpy(h / 2.0, k2).derivative(t + h / 2.0, gm);
        let k4 = state.axpy(h, k3).derivative(t + h, g1);
        state.c0 += (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * (h / 6.0);
        state.c1 += (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * (h / 6.0);
        let defect = state.norm_defect();
        if !(defect <= NORM_DRIFT_LIMIT) {
            return Err(Error::Instability { tau: t + h, defect });
        }
    }
    Ok(state)
}

/// Post-pulse ⟨J²⟩ of the two-level model at the default step σ/2000.
pub fn two_level_energy(pulse: &GaussianPulse) -> Result<f64> {
    Ok(two_level_propagate(pulse, pulse.sigma / TWO_LEVEL_STEPS_PER_SIGMA)?.kinetic_energy())
}
