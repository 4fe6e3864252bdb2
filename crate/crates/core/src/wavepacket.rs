//! The central state object: expansion coefficients over free-rotor states
//! `Y_J^m` at fixed azimuthal quantum number.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::GaussianPulse;
use crate::sudden::KickStrengths;

/// Default tolerance on |Σ|C^J|² − 1| for a certified wavepacket.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Default bound on the population of the last retained state.
pub const TAIL_THRESHOLD: f64 = 1e-14;

/// Free-rotor energy E_J = J(J+1) in units of B.
#[inline]
pub fn rotor_energy(j: u32) -> f64 {
    let j = j as f64;
    j * (j + 1.0)
}

/// Free-rotor eigenstate the rotor starts in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialState {
    j0: u32,
    m0: i32,
}

impl InitialState {
    pub const GROUND: InitialState = InitialState { j0: 0, m0: 0 };

    pub fn new(j0: u32, m0: i32) -> Result<Self> {
        if m0.unsigned_abs() > j0 {
            return Err(Error::InvalidInput(format!("|m0| = {} exceeds j0 = {j0}", m0.abs())));
        }
        Ok(Self { j0, m0 })
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    pub fn m0(&self) -> i32 {
        self.m0
    }
}

/// How the coefficients of the kick phase factor were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PhaseMethod {
    Quadrature { order: usize },
    Series { k_max: usize },
    /// Zero kick, no expansion needed.
    Identity,
}

/// Where a wavepacket came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    Kick {
        init: InitialState,
        kick: KickStrengths,
        phase: PhaseMethod,
    },
    OrientingClosedForm {
        p_eta: f64,
    },
    AligningClosedForm {
        p_zeta: f64,
    },
    Pulse {
        init: InitialState,
        pulse: GaussianPulse,
        dt: f64,
        quadrature_order: usize,
    },
    Identity {
        init: InitialState,
    },
    /// Loaded from a file or assembled by hand.
    External,
}

/// Expansion coefficients C^J for J = |m| ..= j_max.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wavepacket {
    m: i32,
    coeffs: Vec<Complex64>,
    meta: Provenance,
}

impl Wavepacket {
    pub fn new(m: i32, coeffs: Vec<Complex64>, meta: Provenance) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("wavepacket needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite wavepacket coefficient".into()));
        }
        Ok(Self { m, coeffs, meta })
    }

    /// The unkicked state Y_{j0}^{m0} in a basis up to `j_max`.
    pub fn identity(init: InitialState, j_max: u32) -> Result<Self> {
        let j_min = init.m0().unsigned_abs();
        if j_max < init.j0() {
            return Err(Error::InvalidInput(format!("j_max {j_max} below j0 {}", init.j0())));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (j_max - j_min + 1) as usize];
        coeffs[(init.j0() - j_min) as usize] = Complex64::new(1.0, 0.0);
        Self::new(init.m0(), coeffs, Provenance::Identity { init })
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn j_min(&self) -> u32 {
        self.m.unsigned_abs()
    }

    pub fn j_max(&self) -> u32 {
        self.j_min() + self.coeffs.len() as u32 - 1
    }

    /// Coefficients indexed from `J = j_min()`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn meta(&self) -> &Provenance {
        &self.meta
    }

    pub fn with_meta(mut self, meta: Provenance) -> Self {
        self.meta = meta;
        self
    }

    /// C^J, zero outside the stored range.
    pub fn coeff(&self, j: u32) -> Complex64 {
        if j < self.j_min() {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs
            .get((j - self.j_min()) as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// (J, C^J) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        let j_min = self.j_min();
        self.coeffs.iter().enumerate().map(move |(i, &c)| (j_min + i as u32, c))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_defect(&self) -> f64 {
        (self.norm_sqr() - 1.0).abs()
    }

    /// Largest population among the last two retained states (one of them may
    /// vanish by parity).
    pub fn tail_population(&self) -> f64 {
        self.coeffs.iter().rev().take(2).map(|c| c.norm_sqr()).fold(0.0, f64::max)
    }

    /// Checks the normalization and truncation invariants.
    pub fn certify(&self, norm_tolerance: f64, tail_threshold: f64) -> Result<()> {
        let defect = self.norm_defect();
        if defect > norm_tolerance {
            return Err(Error::Normalization { defect, tolerance: norm_tolerance });
        }
        let tail = self.tail_population();
        if tail >= tail_threshold {
            return Err(Error::Convergence(format!(
                "tail population {tail:e} at j_max = {} not below {tail_threshold:e}",
                self.j_max()
            )));
        }
        Ok(())
    }

    /// Phase γ_J of C^J.
    pub fn gamma(&self, j: u32) -> f64 {
        self.coeff(j).arg()
    }

    /// Δγ_{JJ'} = γ_J − γ_J'.
    pub fn delta_gamma(&self, j: u32, jp: u32) -> f64 {
        self.gamma(j) - self.gamma(jp)
    }

    /// ΔE_{JJ'} = E_J − E_J'.
    pub fn delta_e(j: u32, jp: u32) -> f64 {
        rotor_energy(j) - rotor_energy(jp)
    }

    /// Coefficients of the field-free state at time τ: C^J e^{−iE_J τ}.
    pub fn evolved(&self, tau: f64) -> Vec<Complex64> {
        self.iter()
            .map(|(j, c)| c * Complex64::from_polar(1.0, -rotor_energy(j) * tau))
            .collect()
    }
}
