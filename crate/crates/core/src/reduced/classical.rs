use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{density_at, kinetic_energy};
use crate::specfun::QuadratureRule;
use crate::sudden::KickStrengths;
use crate::wavepacket::Wavepacket;

/// Mean kinetic energy of a uniform classical ensemble after the kick,
/// `½∫₋₁¹ (1−x²)(P_η + 2P_ζ x)² dx`.
pub fn classical_kick_energy(kick: KickStrengths, rule: &QuadratureRule) -> f64 {
    0.5 * rule.integrate(|x| {
        let v = kick.p_eta + 2.0 * kick.p_zeta * x;
        (1.0 - x * x) * v * v
    })
}

/// J̄ solving J̄(J̄+1) = ⟨J²⟩.
pub fn j_bar_from_energy(energy: f64) -> f64 {
    0.5 * ((4.0 * energy + 1.0).sqrt() - 1.0)
}

/// J̄ from the closed-form post-kick energy.
pub fn j_bar_closed_form(kick: KickStrengths) -> f64 {
    0.5 * ((8.0 / 3.0 * kick.p_eta.powi(2) + 32.0 / 15.0 * kick.p_zeta.powi(2) + 1.0).sqrt() - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u32,
    pub den: u32,
}

impl Fraction {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidInput(format!("fraction {num}/{den} must be positive")));
        }
        Ok(Self { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayKind {
    Classical,
    Reversed,
    Fractional,
}

/// A straight segment of a carpet overlay, clipped to [0,π]×[0,π].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    #[serde(rename = "type")]
    pub kind: RayKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<Fraction>,
    /// Time the ray family is anchored to (focusing or reversed focusing).
    pub anchor: f64,
    /// (τ, θ) vertices
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySet {
    pub j_bar: f64,
    /// J̄ recovered from the packet's ⟨J²⟩.
    pub j_bar_packet: f64,
    pub j_bar_rounded: u32,
    pub tau_cl: f64,
    pub tau_f: f64,
    pub tau_rf: f64,
    /// False when τ_rf comes from a density scan rather than the mirror relation.
    pub tau_rf_exact: bool,
    pub tau_rf_bracket: Option<(f64, f64)>,
    pub rays: Vec<Ray>,
}

const SNAP: f64 = 1e-12;

/// Portion of the line θ = θ_a + slope·(τ − τ_a), τ ∈ [t_lo, t_hi], inside
/// the carpet square. Endpoints cut by θ = 0 or θ = π land exactly there.
fn clip_line(tau_a: f64, theta_a: f64, slope: f64, t_lo: f64, t_hi: f64) -> Option<Vec<(f64, f64)>> {
    let theta_of = |t: f64| theta_a + slope * (t - tau_a);
    let mut lo = (t_lo.max(0.0), None);
    let mut hi = (t_hi.min(PI), None);
    if slope != 0.0 {
        for edge in [0.0, PI] {
            let t = if edge == theta_a { tau_a } else { tau_a + (edge - theta_a) / slope };
            let entering = (slope > 0.0) == (edge == 0.0);
            if entering && t >= lo.0 - SNAP {
                lo = (t.max(lo.0), Some(edge));
            } else if !entering && t <= hi.0 + SNAP {
                hi = (t.min(hi.0), Some(edge));
            }
        }
    } else if !(0.0..=PI).contains(&theta_a) {
        return None;
    }
    if hi.0 <= lo.0 {
        return None;
    }
    let at = |(t, edge): (f64, Option<f64>)| (t, edge.unwrap_or_else(|| theta_of(t).clamp(0.0, PI)));
    Some(vec![at(lo), at(hi)])
}

const REVERSED_SCAN_POINTS: usize = 2001;

/// Characteristic rays, focusing times and fractional-revival loci of a
/// kicked ground-state packet.
pub fn ray_set(wp: &Wavepacket, kick: KickStrengths, beta_max: u32, fractions: &[Fraction]) -> Result<RaySet> {
    if kick.is_zero() {
        return Err(Error::InvalidInput("focusing time undefined for a zero kick".into()));
    }
    let j_bar = j_bar_closed_form(kick);
    let j_bar_rounded = j_bar.round() as u32;
    let tau_cl = PI / (2 * j_bar_rounded + 1) as f64;
    let tau_f = 1.0 / (2.0 * kick.p_eta + 4.0 * kick.p_zeta);

    let (tau_rf, tau_rf_exact, tau_rf_bracket) = if kick.p_zeta == 0.0 {
        (PI - tau_f, true, None)
    } else {
        let lo = 0.8 * PI;
        let step = (PI - lo) / (REVERSED_SCAN_POINTS - 1) as f64;
        let mut best = (lo, f64::NEG_INFINITY);
        for k in 0..REVERSED_SCAN_POINTS {
            let t = lo + k as f64 * step;
            let d = density_at(wp, PI, t)?;
            if d > best.1 {
                best = (t, d);
            }
        }
        (best.0, false, Some(((best.0 - step).max(lo), (best.0 + step).min(PI))))
    };

    let slope = PI / tau_cl;
    let mut rays = Vec::new();
    for beta in 0..=beta_max {
        let b = beta as f64;
        let (start, end) = (tau_f + b * tau_cl, tau_f + (b + 1.0) * tau_cl);
        let (theta_a, s) = if beta % 2 == 0 { (0.0, slope) } else { (PI, -slope) };
        if let Some(points) = clip_line(start, theta_a, s, start, end) {
            rays.push(Ray { kind: RayKind::Classical, beta: Some(beta), nu: None, anchor: tau_f, points });
        }
        let (start, end) = (tau_rf - (b + 1.0) * tau_cl, tau_rf - b * tau_cl);
        let (theta_a, s) = if beta % 2 == 0 { (PI, slope) } else { (0.0, -slope) };
        if let Some(points) = clip_line(end, theta_a, s, start, end) {
            rays.push(Ray { kind: RayKind::Reversed, beta: Some(beta), nu: None, anchor: tau_rf, points });
        }
    }
    for &nu in fractions {
        let s = 1.0 / nu.value();
        if let Some(points) = clip_line(tau_f, 0.0, s, tau_f, PI) {
            rays.push(Ray { kind: RayKind::Fractional, beta: None, nu: Some(nu), anchor: tau_f, points });
        }
        if let Some(points) = clip_line(tau_rf, PI, s, 0.0, tau_rf) {
            rays.push(Ray { kind: RayKind::Fractional, beta: None, nu: Some(nu), anchor: tau_rf, points });
        }
    }

    Ok(RaySet {
        j_bar,
        j_bar_packet: j_bar_from_energy(kinetic_energy(wp)),
        j_bar_rounded,
        tau_cl,
        tau_f,
        tau_rf,
        tau_rf_exact,
        tau_rf_bracket,
        rays,
    })
}
