//! Finite-width Gaussian pulses and their numerical propagation.
//!
//! The state is carried in a truncated Legendre basis (FBR). Each Strang step
//! applies half a kinetic phase, moves to the Gauss–Legendre grid (DVR) for
//! the pointwise potential phase, and returns for the second kinetic half.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, normalized_legendre_all, QuadratureRule};
use crate::sudden::KickStrengths;
use crate::wavepacket::{rotor_energy, InitialState, Provenance, Wavepacket};

/// Simulation window in units of σ.
pub const DEFAULT_WINDOW: f64 = 100.0;
/// Largest tolerated norm defect during a propagation.
pub const INSTABILITY_THRESHOLD: f64 = 1e-8;
/// Field strengths whose step phase falls below this are skipped.
const FIELD_FREE_PHASE: f64 = 1e-17;
/// Target number of recorded samples when the stride is chosen automatically.
const DEFAULT_RECORDS: usize = 1000;

/// Gaussian orienting and aligning pulse pair centred in `[0, tau0]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub eta0: f64,
    pub zeta0: f64,
    pub sigma: f64,
    pub tau0: f64,
}

impl GaussianPulse {
    pub fn new(eta0: f64, zeta0: f64, sigma: f64, tau0: f64) -> Result<Self> {
        for (name, v) in [("eta0", eta0), ("zeta0", zeta0)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        for (name, v) in [("sigma", sigma), ("tau0", tau0)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} = {v} must be finite and > 0")));
            }
        }
        Ok(Self { eta0, zeta0, sigma, tau0 })
    }

    /// Pulse with the standard window τ₀ = 100σ.
    pub fn centred(eta0: f64, zeta0: f64, sigma: f64) -> Result<Self> {
        Self::new(eta0, zeta0, sigma, DEFAULT_WINDOW * sigma)
    }

    pub fn centre(&self) -> f64 {
        self.tau0 / 2.0
    }

    /// η(τ) = η₀/(√(2π)σ) exp(−(τ−τ₀/2)²/(2σ²))
    pub fn eta(&self, tau: f64) -> f64 {
        let s = (tau - self.centre()) / self.sigma;
        self.eta0 / ((2.0 * PI).sqrt() * self.sigma) * (-0.5 * s * s).exp()
    }

    /// ζ(τ) = ζ₀/(2πσ²) exp(−(τ−τ₀/2)²/σ²)
    pub fn zeta(&self, tau: f64) -> f64 {
        let s = (tau - self.centre()) / self.sigma;
        self.zeta0 / (2.0 * PI * self.sigma * self.sigma) * (-s * s).exp()
    }
}

/// Kick strengths delivered by a pulse over its window.
pub fn kick_strengths_of(pulse: &GaussianPulse) -> KickStrengths {
    let (eta_frac, zeta_frac) = window_fractions(pulse.sigma, pulse.tau0);
    KickStrengths {
        p_eta: pulse.eta0 * eta_frac,
        p_zeta: pulse.zeta0 * zeta_frac / (2.0 * PI.sqrt() * pulse.sigma),
    }
}

/// Pulse of width σ (window 100σ) delivering the requested kick strengths.
pub fn pulse_for_kicks(target: KickStrengths, sigma: f64) -> Result<GaussianPulse> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidInput(format!("sigma = {sigma} must be finite and > 0")));
    }
    let tau0 = DEFAULT_WINDOW * sigma;
    let (eta_frac, zeta_frac) = window_fractions(sigma, tau0);
    GaussianPulse::new(
        target.p_eta / eta_frac,
        2.0 * PI.sqrt() * sigma * target.p_zeta / zeta_frac,
        sigma,
        tau0,
    )
}

fn window_fractions(sigma: f64, tau0: f64) -> (f64, f64) {
    (
        libm::erf(tau0 / (2.0 * 2f64.sqrt() * sigma)),
        libm::erf(tau0 / (2.0 * sigma)),
    )
}

/// Numerical settings for [`propagate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub j_max: u32,
    pub dt: f64,
    pub rule: QuadratureRule,
    pub record_stride: usize,
}

impl PropagatorConfig {
    /// Validated configuration. The rule must have at least `j_max + 1` nodes.
    pub fn new(j_max: u32, dt: f64, rule: QuadratureRule, record_stride: usize) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidInput(format!("dt = {dt} must be finite and > 0")));
        }
        if rule.order() < j_max as usize + 1 {
            return Err(Error::InvalidInput(format!(
                "quadrature order {} below j_max + 1 = {}",
                rule.order(),
                j_max + 1
            )));
        }
        if record_stride == 0 {
            return Err(Error::InvalidInput("record_stride must be >= 1".into()));
        }
        Ok(Self { j_max, dt, rule, record_stride })
    }

    /// Defaults for a pulse: dt = min(σ/100, 0.25/E_{j_max}), a square
    /// `j_max + 1` point grid, and a stride giving about 1000 records.
    pub fn for_pulse(pulse: &GaussianPulse, j_max: u32) -> Result<Self> {
        let dt = default_dt(pulse.sigma, j_max);
        let steps = (pulse.tau0 / dt).ceil() as usize;
        let stride = (steps / DEFAULT_RECORDS).max(1);
        Self::new(j_max, dt, gauss_legendre(j_max as usize + 1)?, stride)
    }
}

pub fn default_dt(sigma: f64, j_max: u32) -> f64 {
    let e = rotor_energy(j_max.max(1));
    (sigma / 100.0).min(0.25 / e)
}

/// Recorded state at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tau: f64,
    pub coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub final_state: Wavepacket,
    pub trajectory: Vec<Snapshot>,
    pub norm_defect_max: f64,
    /// (τ, ⟨J²⟩) at every recorded step.
    pub kinetic_series: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// FBR ↔ DVR change of basis, `T[n,J] = √w_n · √((2J+1)/2) 𝒫_J(x_n)`.
#[derive(Clone, Debug)]
pub struct Transform {
    n_nodes: usize,
    n_basis: usize,
    /// row-major, `n_nodes × n_basis`
    matrix: Vec<f64>,
}

impl Transform {
    pub fn new(rule: &QuadratureRule, j_max: u32) -> Self {
        let n_basis = j_max as usize + 1;
        let n_nodes = rule.order();
        let mut matrix = vec![0.0; n_nodes * n_basis];
        for (n, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
            let row = &mut matrix[n * n_basis..(n + 1) * n_basis];
            normalized_legendre_all(x, row);
            let sw = w.sqrt();
            row.iter_mut().for_each(|v| *v *= sw);
        }
        Self { n_nodes, n_basis, matrix }
    }

    pub fn entry(&self, n: usize, j: usize) -> f64 {
        self.matrix[n * self.n_basis + j]
    }

    fn forward_into(&self, fbr: &[Complex64], dvr: &mut [Complex64]) {
        for (g, row) in dvr.iter_mut().zip(self.matrix.chunks_exact(self.n_basis)) {
            *g = row.iter().zip(fbr).map(|(t, c)| c * t).sum();
        }
    }

    fn backward_into(&self, dvr: &[Complex64], fbr: &mut [Complex64]) {
        fbr.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (g, row) in dvr.iter().zip(self.matrix.chunks_exact(self.n_basis)) {
            for (c, t) in fbr.iter_mut().zip(row) {
                *c += g * t;
            }
        }
    }

    pub fn apply(&self, v: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
        match direction {
            Direction::Forward => {
                check_len(self.n_basis, v.len())?;
                let mut out = vec![Complex64::new(0.0, 0.0); self.n_nodes];
                self.forward_into(v, &mut out);
                Ok(out)
            }
            Direction::Backward => {
                check_len(self.n_nodes, v.len())?;
                let mut out = vec![Complex64::new(0.0, 0.0); self.n_basis];
                self.backward_into(v, &mut out);
                Ok(out)
            }
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// One-shot FBR ↔ DVR transform of a coefficient or grid vector.
pub fn fbr_dvr_transform(
    coeffs: &[Complex64],
    rule: &QuadratureRule,
    j_max: u32,
    direction: Direction,
) -> Result<Vec<Complex64>> {
    Transform::new(rule, j_max).apply(coeffs, direction)
}

/// Integrates the driven rotor from `init` through the pulse window.
pub fn propagate(init: InitialState, pulse: &GaussianPulse, cfg: &PropagatorConfig) -> Result<PropagationResult> {
    if init.m0() != 0 {
        return Err(Error::InvalidInput(format!(
            "propagation supports m0 = 0 only, got {}",
            init.m0()
        )));
    }
    let dt = cfg.dt;
    // Step boundaries sit at τ₀/2 ± k·dt so the field region is sampled
    // identically for any window length; leftover slivers go at both ends.
    let n_half = (pulse.centre() / dt).floor() as usize;
    let sliver = pulse.centre() - n_half as f64 * dt;
    let mut sizes = Vec::with_capacity(3);
    if sliver > 0.0 {
        sizes.push((sliver, 1));
    }
    sizes.push((dt, 2 * n_half));
    if sliver > 0.0 {
        sizes.push((sliver, 1));
    }
    let n_steps: usize = sizes.iter().map(|s| s.1).sum();

    let transform = Transform::new(&cfg.rule, cfg.j_max);
    let nodes = cfg.rule.nodes();
    let energies: Vec<f64> = (0..=cfg.j_max).map(rotor_energy).collect();

    let mut psi = Wavepacket::identity(init, cfg.j_max)?.coeffs().to_vec();
    let mut grid = vec![Complex64::new(0.0, 0.0); nodes.len()];
    let mut trajectory = vec![Snapshot { tau: 0.0, coeffs: psi.clone() }];
    let mut kinetic_series = vec![(0.0, kinetic(&psi, &energies))];
    let mut norm_defect_max = 0.0f64;

    let mut tau = 0.0;
    let mut done = 0usize;
    for &(h, count) in &sizes {
        let half_kin: Vec<Complex64> = energies.iter().map(|e| Complex64::from_polar(1.0, -e * h / 2.0)).collect();
        let full_kin: Vec<Complex64> = half_kin.iter().map(|k| k * k).collect();
        for _ in 0..count {
            let mid = tau + h / 2.0;
            let (eta, zeta) = (pulse.eta(mid), pulse.zeta(mid));
            if eta * h < FIELD_FREE_PHASE && zeta * h < FIELD_FREE_PHASE {
                psi.iter_mut().zip(&full_kin).for_each(|(c, k)| *c *= k);
            } else {
                psi.iter_mut().zip(&half_kin).for_each(|(c, k)| *c *= k);
                transform.forward_into(&psi, &mut grid);
                for (g, &x) in grid.iter_mut().zip(nodes) {
                    *g *= Complex64::from_polar(1.0, (eta * x + zeta * x * x) * h);
                }
                transform.backward_into(&grid, &mut psi);
                psi.iter_mut().zip(&half_kin).for_each(|(c, k)| *c *= k);
            }
            tau += h;
            done += 1;
            let defect = (psi.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs();
            if !(defect <= INSTABILITY_THRESHOLD) {
                return Err(Error::Instability { tau, defect });
            }
            norm_defect_max = norm_defect_max.max(defect);
            if done % cfg.record_stride == 0 || done == n_steps {
                kinetic_series.push((tau, kinetic(&psi, &energies)));
                trajectory.push(Snapshot { tau, coeffs: psi.clone() });
            }
        }
    }

    let meta = Provenance::Pulse { init, pulse: *pulse, dt, quadrature_order: cfg.rule.order() };
    Ok(PropagationResult {
        final_state: Wavepacket::new(0, psi, meta)?,
        trajectory,
        norm_defect_max,
        kinetic_series,
    })
}

/// Post-pulse ⟨J²⟩ from the ground state, using default numerical settings.
pub fn post_pulse_energy(pulse: &GaussianPulse, j_max: u32) -> Result<f64> {
    let mut cfg = PropagatorConfig::for_pulse(pulse, j_max)?;
    cfg.record_stride = usize::MAX;
    let res = propagate(InitialState::GROUND, pulse, &cfg)?;
    Ok(kinetic(res.final_state.coeffs(), &(0..=j_max).map(rotor_energy).collect::<Vec<_>>()))
}

fn kinetic(psi: &[Complex64], energies: &[f64]) -> f64 {
    psi.iter().zip(energies).map(|(c, e)| e * c.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sudden::kick_wavepacket_with_j_max;

    fn pops(wp: &Wavepacket) -> Vec<f64> {
        wp.coeffs().iter().map(|c| c.norm_sqr()).collect()
    }

    #[test]
    fn pulse_integrals() {
        let p = GaussianPulse::centred(1.3, 0.7, 0.4).unwrap();
        let rule = gauss_legendre(400).unwrap();
        let half = p.tau0 / 2.0;
        let eta: f64 = rule.integrate(|x| p.eta(half + half * x)) * half;
        let zeta: f64 = rule.integrate(|x| p.zeta(half + half * x)) * half;
        assert!((eta - 1.3).abs() < 1e-10);
        assert!((zeta - 0.7 / (2.0 * PI.sqrt() * 0.4)).abs() < 1e-10);
        let k = kick_strengths_of(&p);
        assert!((k.p_eta - eta).abs() < 1e-10 && (k.p_zeta - zeta).abs() < 1e-10);
    }

    #[test]
    fn kick_inversion() {
        let k = KickStrengths::new(1.5, 2.5).unwrap();
        for sigma in [0.001, 0.5, 1.0, 7.0] {
            let back = kick_strengths_of(&pulse_for_kicks(k, sigma).unwrap());
            assert!((back.p_eta - k.p_eta).abs() < 1e-12);
            assert!((back.p_zeta - k.p_zeta).abs() < 1e-12);
        }
        let p = pulse_for_kicks(KickStrengths::new(0.0, 1.5).unwrap(), 0.5).unwrap();
        assert!((p.zeta0 - 2.0 * PI.sqrt() * 0.5 * 1.5).abs() < 1e-12);
        assert_eq!(kick_strengths_of(&GaussianPulse::centred(0.0, 0.0, 1.0).unwrap()), KickStrengths::ZERO);
        assert!(pulse_for_kicks(k, 0.0).is_err());
    }

    #[test]
    fn transform_round_trip_and_columns() {
        let rule = gauss_legendre(13).unwrap();
        let v: Vec<Complex64> = (0..13).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let back = fbr_dvr_transform(
            &fbr_dvr_transform(&v, &rule, 12, Direction::Forward).unwrap(),
            &rule,
            12,
            Direction::Backward,
        )
        .unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        let mut ground = vec![Complex64::new(0.0, 0.0); 13];
        ground[0] = Complex64::new(1.0, 0.0);
        let g = fbr_dvr_transform(&ground, &rule, 12, Direction::Forward).unwrap();
        for (gv, w) in g.iter().zip(rule.weights()) {
            assert!((gv.re - w.sqrt() / 2f64.sqrt()).abs() < 1e-14);
        }
        assert!(matches!(
            fbr_dvr_transform(&ground, &rule, 11, Direction::Forward),
            Err(Error::DimensionMismatch { expected: 12, got: 13 })
        ));
    }

    #[test]
    fn free_rotor_only_gains_phases() {
        let pulse = GaussianPulse::centred(0.0, 0.0, 0.05).unwrap();
        let cfg = PropagatorConfig::for_pulse(&pulse, 6).unwrap();
        let init = InitialState::new(3, 0).unwrap();
        let res = propagate(init, &pulse, &cfg).unwrap();
        let c = res.final_state.coeff(3);
        let expected = Complex64::from_polar(1.0, -12.0 * pulse.tau0);
        assert!((c - expected).norm() < 1e-10);
        assert!(propagate(InitialState::new(1, 1).unwrap(), &pulse, &cfg).is_err());
    }

    #[test]
    fn sudden_limit() {
        for (pe, pz) in [(1.5, 0.0), (0.0, 2.8), (2.8, 2.8)] {
            let k = KickStrengths::new(pe, pz).unwrap();
            let pulse = pulse_for_kicks(k, 0.001).unwrap();
            let cfg = PropagatorConfig::for_pulse(&pulse, 30).unwrap();
            let res = propagate(InitialState::GROUND, &pulse, &cfg).unwrap();
            assert!(res.norm_defect_max < 1e-10);
            let exact = kick_wavepacket_with_j_max(InitialState::GROUND, k, 30).unwrap();
            for (a, b) in pops(&res.final_state).iter().zip(pops(&exact)) {
                assert!((a - b).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn adiabatic_limit() {
        let pulse = pulse_for_kicks(KickStrengths::new(1.5, 0.0).unwrap(), 3.0).unwrap();
        let e = post_pulse_energy(&pulse, 14).unwrap();
        assert!(e < 1e-8, "{e}");
    }

    #[test]
    fn second_order_convergence() {
        let pulse = pulse_for_kicks(KickStrengths::new(1.2, 0.8).unwrap(), 0.3).unwrap();
        let run = |dt: f64| {
            let cfg = PropagatorConfig::new(12, dt, gauss_legendre(13).unwrap(), usize::MAX).unwrap();
            pops(&propagate(InitialState::GROUND, &pulse, &cfg).unwrap().final_state)
        };
        let dt = pulse.tau0 / 4000.0;
        let (a, b, c) = (run(dt), run(dt / 2.0), run(dt / 4.0));
        let d1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let d2: f64 = b.iter().zip(&c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let ratio = d1 / d2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} ({d1:e}, {d2:e})");
    }

    #[test]
    fn window_doubling() {
        let k = KickStrengths::new(1.5, 1.0).unwrap();
        let short = pulse_for_kicks(k, 0.5).unwrap();
        let long = GaussianPulse::new(short.eta0, short.zeta0, short.sigma, 2.0 * short.tau0).unwrap();
        let dt = default_dt(0.5, 12);
        let cfg = PropagatorConfig::new(12, dt, gauss_legendre(13).unwrap(), usize::MAX).unwrap();
        let a = pops(&propagate(InitialState::GROUND, &short, &cfg).unwrap().final_state);
        let b = pops(&propagate(InitialState::GROUND, &long, &cfg).unwrap().final_state);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
