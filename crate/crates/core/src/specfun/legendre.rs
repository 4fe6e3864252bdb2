use std::f64::consts::PI;

use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

fn check_x(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::Domain(format!("Legendre argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Legendre polynomial 𝒫_j(x) by upward recurrence.
pub fn legendre_p(j: u32, x: f64) -> Result<f64> {
    let x = check_x(x)?;
    let (mut p0, mut p1) = (1.0, x);
    if j == 0 {
        return Ok(p0);
    }
    for n in 1..j {
        let n = n as f64;
        let p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    Ok(p1)
}

/// Fills `out[j] = 𝒫_j(x)` for `j = 0..out.len()`.
///
/// No domain check: callers pass quadrature nodes or clamped cosines.
pub fn legendre_p_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Orthonormal Legendre functions on [-1, 1]: `√((2j+1)/2)·𝒫_j(x)`.
pub fn normalized_legendre_all(x: f64, out: &mut [f64]) {
    legendre_p_all(x, out);
    for (j, v) in out.iter_mut().enumerate() {
        *v *= ((2 * j + 1) as f64 / 2.0).sqrt();
    }
}

/// θ-part of the spherical harmonic, Condon–Shortley phase:
/// `Y_j^m(θ, φ) = sph_harm_m(j, m, θ)·e^{imφ}`.
pub fn sph_harm_m(j: u32, m: i32, theta: f64) -> Result<f64> {
    if m.unsigned_abs() > j {
        return Err(Error::Domain(format!("|m| = {} exceeds j = {j}", m.abs())));
    }
    let column = sph_harm_m_all(j, m, theta)?;
    Ok(column[(j - m.unsigned_abs()) as usize])
}

/// θ-parts of `Y_J^m` for `J = |m|..=j_max`, index 0 holding `J = |m|`.
///
/// Uses the three-term recurrence for fully normalized associated Legendre
/// functions, which stays well scaled up to high degree.
pub fn sph_harm_m_all(j_max: u32, m: i32, theta: f64) -> Result<Vec<f64>> {
    let am = m.unsigned_abs();
    if am > j_max {
        return Err(Error::Domain(format!("|m| = {am} exceeds j_max = {j_max}")));
    }
    let x = theta.cos();
    let s = theta.sin().abs();

    // P̄_m^m including (-1)^m
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=am {
        let k = k as f64;
        pmm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }

    let len = (j_max - am + 1) as usize;
    let mut out = Vec::with_capacity(len);
    out.push(pmm);
    if len > 1 {
        out.push(x * ((2 * am + 3) as f64).sqrt() * pmm);
    }
    let mf = am as f64;
    for l in (am + 2)..=j_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let a_prev = ((4.0 * lp * lp - 1.0) / (lp * lp - mf * mf)).sqrt();
        let idx = (l - am) as usize;
        let next = a * (x * out[idx - 1] - out[idx - 2] / a_prev);
        out.push(next);
    }

    // Y_j^{-m} = (-1)^m (Y_j^m)^*, and the θ-part is real.
    if m < 0 && am % 2 == 1 {
        for v in &mut out {
            *v = -*v;
        }
    }
    Ok(out)
}
