//! Exact post-δ-kick wavepackets.
//!
//! A δ-kick multiplies the initial state by the phase factor
//! `exp(i(P_η cosθ + P_ζ cos²θ))`. Its Legendre coefficients `c^{J'}` are
//! obtained either from the double power series or by direct quadrature;
//! the state coefficients then follow from a Clebsch–Gordan contraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::specfun::{
    clebsch_gordan, gauss_legendre, hyp1f1_imag, legendre_p_all, ln_gamma, sph_bessel_j_all,
    CGKey, QuadratureRule, DEFAULT_QUADRATURE_ORDER,
};
use crate::wavepacket::{InitialState, PhaseMethod, Provenance, Wavepacket, TAIL_THRESHOLD};

pub const SERIES_MAX_J_PRIME: usize = 60;
pub const SERIES_MAX_K: usize = 120;
/// k-shell count used when none is requested explicitly.
pub const DEFAULT_K_MAX: usize = 80;
/// Largest tolerated |Σ|C^J|² − 1| when building a kicked packet.
pub const KICK_NORM_TOLERANCE: f64 = 1e-6;

pub const AUTO_J_MAX_START: u32 = 20;
pub const AUTO_J_MAX_CAP: u32 = 128;

/// Dimensionless orienting and aligning kick strengths (P_η, P_ζ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickStrengths {
    pub p_eta: f64,
    pub p_zeta: f64,
}

impl KickStrengths {
    pub const ZERO: KickStrengths = KickStrengths { p_eta: 0.0, p_zeta: 0.0 };
    /// Upper end of the range the defaults are tuned for.
    pub const SUPPORTED_MAX: f64 = 10.0;

    pub fn new(p_eta: f64, p_zeta: f64) -> Result<Self> {
        for (name, v) in [("p_eta", p_eta), ("p_zeta", p_zeta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(Self { p_eta, p_zeta })
    }

    pub fn is_zero(&self) -> bool {
        self.p_eta == 0.0 && self.p_zeta == 0.0
    }

    /// Closed-form post-kick ⟨J²⟩ from the ground state: (2/3)P_η² + (8/15)P_ζ².
    pub fn kinetic_energy(&self) -> f64 {
        2.0 / 3.0 * self.p_eta * self.p_eta + 8.0 / 15.0 * self.p_zeta * self.p_zeta
    }
}

/// Legendre coefficients c^{J'} of the kick phase factor,
/// `exp(i(P_η x + P_ζ x²)) = Σ c^{J'} 𝒫_{J'}(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseExpansion {
    c: Vec<Complex64>,
    kick: KickStrengths,
    method: PhaseMethod,
    /// Per J': magnitude of the last retained k-shell (series path only).
    truncation: Option<Vec<f64>>,
}

impl PhaseExpansion {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    pub fn kick(&self) -> KickStrengths {
        self.kick
    }

    pub fn method(&self) -> PhaseMethod {
        self.method
    }

    pub fn j_prime_max(&self) -> usize {
        self.c.len() - 1
    }

    pub fn truncation(&self) -> Option<&[f64]> {
        self.truncation.as_deref()
    }

    /// Σ c^{J'} 𝒫_{J'}(x)
    pub fn reconstruct(&self, x: f64) -> Complex64 {
        let mut p = vec![0.0; self.c.len()];
        legendre_p_all(x, &mut p);
        self.c.iter().zip(&p).map(|(c, p)| c * p).sum()
    }

    fn identity(kick: KickStrengths, j_prime_max: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); j_prime_max + 1];
        c[0] = Complex64::new(1.0, 0.0);
        Self { c, kick, method: PhaseMethod::Identity, truncation: None }
    }
}

/// Integrals ∫₋₁¹ xⁿ 𝒫_{J'}(x) dx for n ≤ n_max, J' ≤ j_max, built from the
/// exact rational recurrences
/// `I(J',J') = 2·J'!/(2J'+1)!!` and
/// `I(n+2,J') = I(n,J')·(n+1)(n+2)/((n−J'+2)(n+J'+3))`.
fn moment_table(n_max: usize, j_max: usize) -> Vec<Vec<TwoFloat>> {
    let zero = TwoFloat::from(0.0);
    let mut table = vec![vec![zero; n_max + 1]; j_max + 1];
    let mut diag = TwoFloat::from(2.0);
    for (jp, row) in table.iter_mut().enumerate() {
        if jp > 0 {
            diag = diag * (jp as f64) / ((2 * jp + 1) as f64);
        }
        if jp > n_max {
            continue;
        }
        row[jp] = diag;
        let mut n = jp;
        while n + 2 <= n_max {
            let num = ((n + 1) * (n + 2)) as f64;
            let den = ((n - jp + 2) * (n + jp + 3)) as f64;
            row[n + 2] = row[n] * num / den;
            n += 2;
        }
    }
    table
}

/// `p^a / a!` for a = 0..=n in double-double precision.
fn scaled_powers(p: f64, n: usize) -> Vec<TwoFloat> {
    let mut out = Vec::with_capacity(n + 1);
    let mut v = TwoFloat::from(1.0);
    out.push(v);
    for a in 1..=n {
        v = v * p / (a as f64);
        out.push(v);
    }
    out
}

/// c^{J'} from the double power series of the phase factor.
///
/// Shells are accumulated in double-double arithmetic from exact rational
/// moment recurrences. The magnitude of the last retained k-shell is kept as
/// the truncation estimate.
pub fn phase_coeffs_series(
    kick: KickStrengths,
    j_prime_max: usize,
    k_max: usize,
) -> Result<PhaseExpansion> {
    if j_prime_max > SERIES_MAX_J_PRIME || k_max > SERIES_MAX_K {
        return Err(Error::InvalidInput(format!(
            "series limited to J' <= {SERIES_MAX_J_PRIME}, k <= {SERIES_MAX_K}"
        )));
    }
    if kick.is_zero() {
        let mut id = PhaseExpansion::identity(kick, j_prime_max);
        id.method = PhaseMethod::Series { k_max };
        id.truncation = Some(vec![0.0; j_prime_max + 1]);
        return Ok(id);
    }

    let eta_pow = scaled_powers(kick.p_eta, k_max);
    let zeta_pow = scaled_powers(kick.p_zeta, k_max);
    let moments = moment_table(2 * k_max, j_prime_max);
    let zero = TwoFloat::from(0.0);

    let mut c = Vec::with_capacity(j_prime_max + 1);
    let mut truncation = Vec::with_capacity(j_prime_max + 1);
    for (jp, row) in moments.iter().enumerate() {
        // i^k cycles 1, i, −1, −i
        let mut re = zero;
        let mut im = zero;
        let mut last_shell = 0.0;
        for k in 0..=k_max {
            let mut shell = zero;
            for l in 0..=k {
                let n = k + l;
                if n < jp || (n + jp) % 2 == 1 {
                    continue;
                }
                shell += eta_pow[k - l] * zeta_pow[l] * row[n];
            }
            match k % 4 {
                0 => re += shell,
                1 => im += shell,
                2 => re -= shell,
                _ => im -= shell,
            }
            if k == k_max {
                last_shell = f64::from(shell).abs();
            }
        }
        let scale = (2 * jp + 1) as f64 / 2.0;
        c.push(Complex64::new(f64::from(re) * scale, f64::from(im) * scale));
        truncation.push(last_shell * scale);
    }

    let largest = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = truncation.iter().cloned().fold(0.0, f64::max);
    if worst > 1e-12 * largest {
        return Err(Error::Convergence(format!(
            "last k-shell {worst:e} exceeds 1e-12 of max |c| = {largest:e}; raise k_max above {k_max}"
        )));
    }
    Ok(PhaseExpansion {
        c,
        kick,
        method: PhaseMethod::Series { k_max },
        truncation: Some(truncation),
    })
}

/// c^{J'} by direct quadrature of `(2J'+1)/2 ∫ 𝒫_{J'}(x) e^{i(P_η x + P_ζ x²)} dx`.
///
/// Nodes are paired as ±x so that odd J' vanish identically when P_η = 0.
pub fn phase_coeffs_quadrature(
    kick: KickStrengths,
    j_prime_max: usize,
    rule: &QuadratureRule,
) -> Result<PhaseExpansion> {
    if rule.order() < 2 * j_prime_max {
        return Err(Error::InvalidInput(format!(
            "quadrature order {} below 2*j_prime_max = {}",
            rule.order(),
            2 * j_prime_max
        )));
    }
    let method = PhaseMethod::Quadrature { order: rule.order() };
    if kick.is_zero() {
        let mut id = PhaseExpansion::identity(kick, j_prime_max);
        id.method = method;
        return Ok(id);
    }

    let n = rule.order();
    let mut acc = vec![Complex64::new(0.0, 0.0); j_prime_max + 1];
    let mut p = vec![0.0; j_prime_max + 1];
    // positive half (and the centre node when the order is odd)
    for i in (n / 2)..n {
        let x = rule.nodes()[i];
        let w = rule.weights()[i];
        legendre_p_all(x, &mut p);
        let even = kick.p_zeta * x * x;
        let plus = Complex64::from_polar(w, even + kick.p_eta * x);
        if n % 2 == 1 && i == n / 2 {
            for (a, pj) in acc.iter_mut().zip(&p) {
                *a += plus * pj;
            }
            continue;
        }
        let minus = Complex64::from_polar(w, even - kick.p_eta * x);
        let sym = plus + minus;
        let anti = plus - minus;
        for (jp, (a, pj)) in acc.iter_mut().zip(&p).enumerate() {
            *a += if jp % 2 == 0 { sym } else { anti } * pj;
        }
    }
    let c = acc
        .into_iter()
        .enumerate()
        .map(|(jp, a)| a * ((2 * jp + 1) as f64 / 2.0))
        .collect();
    Ok(PhaseExpansion { c, kick, method, truncation: None })
}

/// C^J for J = |m0|..=j_max by Clebsch–Gordan contraction of the phase
/// coefficients:
/// `C^J = Σ_{J'} c^{J'} √((2J0+1)/(2J+1)) ⟨J'0,J0 0|J0⟩⟨J'0,J0 M0|J M0⟩`.
pub fn kick_wavepacket(init: InitialState, phase: &PhaseExpansion, j_max: u32) -> Result<Wavepacket> {
    let wp = contract(init, phase, j_max)?;
    let defect = wp.norm_defect();
    if defect > KICK_NORM_TOLERANCE {
        return Err(Error::Normalization { defect, tolerance: KICK_NORM_TOLERANCE });
    }
    Ok(wp)
}

fn contract(init: InitialState, phase: &PhaseExpansion, j_max: u32) -> Result<Wavepacket> {
    let j0 = init.j0();
    let m0 = init.m0();
    if j_max < j0 {
        return Err(Error::InvalidInput(format!("j_max {j_max} below j0 {j0}")));
    }
    let needed = (j_max + j0) as usize;
    if phase.j_prime_max() < needed {
        return Err(Error::InvalidInput(format!(
            "phase expansion covers J' <= {}, need {needed}",
            phase.j_prime_max()
        )));
    }
    let meta = Provenance::Kick { init, kick: phase.kick(), phase: phase.method() };
    if phase.method() == PhaseMethod::Identity {
        return Ok(Wavepacket::identity(init, j_max)?.with_meta(meta));
    }

    let c = phase.coeffs();
    let (j0i, m0i) = (j0 as i32, m0);
    let coeffs: Vec<Complex64> = (m0.unsigned_abs()..=j_max)
        .map(|j| {
            let ji = j as i32;
            let pref = ((2 * j0 + 1) as f64 / (2 * j + 1) as f64).sqrt();
            let lo = (ji - j0i).unsigned_abs();
            let hi = j + j0;
            (lo..=hi)
                .filter(|jp| (j + jp + j0) % 2 == 0)
                .map(|jp| {
                    let jpi = jp as i32;
                    let a = clebsch_gordan(CGKey::new(jpi, 0, j0i, 0, ji, 0));
                    let b = clebsch_gordan(CGKey::new(jpi, 0, j0i, m0i, ji, m0i));
                    c[jp as usize] * (pref * a * b)
                })
                .sum()
        })
        .collect();

    Wavepacket::new(m0, coeffs, meta)
}

/// Quadrature rule order used for a phase expansion up to `j_prime_max`.
pub fn quadrature_order_for(j_prime_max: usize) -> usize {
    DEFAULT_QUADRATURE_ORDER.max(2 * j_prime_max + 2)
}

/// Kicked wavepacket with the basis size chosen automatically: start at
/// J_max = 20 and double until the tail population drops below 1e-14,
/// capped at 128.
pub fn kick_wavepacket_auto(init: InitialState, kick: KickStrengths) -> Result<Wavepacket> {
    let mut j_max = AUTO_J_MAX_START.max(init.j0() + 2);
    loop {
        let jp_max = (j_max + init.j0()) as usize;
        let rule = gauss_legendre(quadrature_order_for(jp_max))?;
        let phase = phase_coeffs_quadrature(kick, jp_max, &rule)?;
        let wp = contract(init, &phase, j_max)?;
        if wp.tail_population() < TAIL_THRESHOLD {
            let defect = wp.norm_defect();
            if defect > KICK_NORM_TOLERANCE {
                return Err(Error::Normalization { defect, tolerance: KICK_NORM_TOLERANCE });
            }
            return Ok(wp);
        }
        if j_max >= AUTO_J_MAX_CAP {
            return Err(Error::Convergence(format!(
                "tail population {:e} still above {TAIL_THRESHOLD:e} at j_max = {j_max}",
                wp.tail_population()
            )));
        }
        j_max = (2 * j_max).min(AUTO_J_MAX_CAP);
    }
}

/// Kicked wavepacket at a fixed basis size, via the quadrature path.
pub fn kick_wavepacket_with_j_max(
    init: InitialState,
    kick: KickStrengths,
    j_max: u32,
) -> Result<Wavepacket> {
    let jp_max = (j_max + init.j0()) as usize;
    let rule = gauss_legendre(quadrature_order_for(jp_max))?;
    let phase = phase_coeffs_quadrature(kick, jp_max, &rule)?;
    kick_wavepacket(init, &phase, j_max)
}

/// Purely orienting kick from the ground state:
/// `C^J = i^J √(2J+1) j_J(P_η)`. Not renormalized.
pub fn orienting_closed_form(p_eta: f64, j_max: u32) -> Result<Wavepacket> {
    if !p_eta.is_finite() || p_eta < 0.0 {
        return Err(Error::InvalidInput(format!("p_eta = {p_eta} must be finite and >= 0")));
    }
    let bessel = sph_bessel_j_all(j_max, p_eta);
    let coeffs = bessel
        .iter()
        .enumerate()
        .map(|(j, b)| i_pow(j as u32) * (((2 * j + 1) as f64).sqrt() * b))
        .collect();
    Wavepacket::new(0, coeffs, Provenance::OrientingClosedForm { p_eta })
}

/// Purely aligning kick from the ground state. Even J:
/// `C^J = √(2J+1)/2 (iP_ζ)^{J/2} Γ(J/2+1/2)/Γ(J+3/2) ₁F₁(J/2+1/2; J+3/2; iP_ζ)`;
/// odd J vanish.
pub fn aligning_closed_form(p_zeta: f64, j_max: u32) -> Result<Wavepacket> {
    if !p_zeta.is_finite() || p_zeta < 0.0 {
        return Err(Error::InvalidInput(format!("p_zeta = {p_zeta} must be finite and >= 0")));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); j_max as usize + 1];
    for j in (0..=j_max).step_by(2) {
        let half = j / 2;
        let jf = j as f64;
        let magnitude = if p_zeta == 0.0 {
            if j == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            let ln_mag = 0.5 * (2.0 * jf + 1.0).ln() - std::f64::consts::LN_2
                + 0.5 * jf * p_zeta.ln()
                + ln_gamma(jf / 2.0 + 0.5)
                - ln_gamma(jf + 1.5);
            ln_mag.exp()
        };
        if magnitude == 0.0 {
            continue;
        }
        let f = hyp1f1_imag(jf / 2.0 + 0.5, jf + 1.5, p_zeta)?;
        coeffs[j as usize] = i_pow(half) * f * magnitude;
    }
    Wavepacket::new(0, coeffs, Provenance::AligningClosedForm { p_zeta })
}

fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
