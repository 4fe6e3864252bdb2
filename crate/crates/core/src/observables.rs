//! Field-free observables of a wavepacket: populations, ⟨J²⟩, orientation and
//! alignment signals, their exact line spectra, and probability-density carpets.
//!
//! The field-free state is `ψ(θ,τ) = Σ_J C^J e^{−iE_J τ} Y_J^m(θ)`, so every
//! signal here is a finite Fourier sum over Bohr frequencies E_J − E_J'.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par_map;
use crate::specfun::{gauss_legendre, sph_harm_m_all};
use crate::wavepacket::{rotor_energy, Wavepacket};

/// Revival time of the free rotor.
pub const REVIVAL_TIME: f64 = PI;
/// Largest tolerated imaginary part of a real expectation value.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Orientation,
    Alignment,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::Orientation => "orientation",
            Observable::Alignment => "alignment",
        })
    }
}

/// (J, |C^J|²) for every stored J.
pub fn populations(wp: &Wavepacket) -> Vec<(u32, f64)> {
    wp.iter().map(|(j, c)| (j, c.norm_sqr())).collect()
}

/// ⟨J²⟩ = Σ J(J+1)|C^J|².
pub fn kinetic_energy(wp: &Wavepacket) -> f64 {
    wp.iter().map(|(j, c)| rotor_energy(j) * c.norm_sqr()).sum()
}

/// ⟨Y_J^0| cosθ |Y_{J+1}^0⟩
fn cos_coupling(j: u32) -> f64 {
    let j = j as f64;
    (j + 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 3.0)).sqrt()
}

/// ⟨Y_J^0| cos²θ |Y_J^0⟩
fn cos2_diagonal(j: u32) -> f64 {
    let j = j as f64;
    1.0 / 3.0 + 2.0 * j * (j + 1.0) / (3.0 * (2.0 * j - 1.0) * (2.0 * j + 3.0))
}

/// ⟨Y_J^0| cos²θ |Y_{J+2}^0⟩
fn cos2_coupling(j: u32) -> f64 {
    let j = j as f64;
    (j + 1.0) * (j + 2.0) / ((2.0 * j + 3.0) * ((2.0 * j + 1.0) * (2.0 * j + 5.0)).sqrt())
}

fn require_m_zero(wp: &Wavepacket) -> Result<()> {
    if wp.m() != 0 {
        return Err(Error::InvalidInput(format!("observable formulas need m = 0, got {}", wp.m())));
    }
    Ok(())
}

/// Coherence sum Σ_J g_J (C^{J*} C^{J+s} e^{−iωτ} + c.c.) with both halves
/// accumulated separately so a corrupted state shows up as an imaginary residue.
fn coherence_sum(coeffs: &[Complex64], shift: usize, tau: f64, coupling: fn(u32) -> f64) -> Result<f64> {
    let mut down = Complex64::new(0.0, 0.0);
    let mut up = Complex64::new(0.0, 0.0);
    for j in 0..coeffs.len().saturating_sub(shift) {
        let ju = j as u32;
        let omega = rotor_energy(ju + shift as u32) - rotor_energy(ju);
        let g = coupling(ju);
        let phase = Complex64::from_polar(1.0, -omega * tau);
        down += coeffs[j].conj() * coeffs[j + shift] * phase * g;
        up += coeffs[j + shift].conj() * coeffs[j] * phase.conj() * g;
    }
    let total = down + up;
    if !(total.im.abs() <= IMAGINARY_RESIDUE_TOLERANCE) {
        return Err(Error::Convergence(format!(
            "imaginary residue {:e} at tau = {tau} exceeds {IMAGINARY_RESIDUE_TOLERANCE:e}",
            total.im
        )));
    }
    Ok(total.re)
}

/// ⟨cosθ⟩(τ) at each sample time.
pub fn orientation_series(wp: &Wavepacket, taus: &[f64]) -> Result<Vec<f64>> {
    require_m_zero(wp)?;
    taus.iter().map(|&t| coherence_sum(wp.coeffs(), 1, t, cos_coupling)).collect()
}

/// Population part of ⟨cos²θ⟩ (time independent).
pub fn alignment_population(wp: &Wavepacket) -> Result<f64> {
    require_m_zero(wp)?;
    Ok(wp.iter().map(|(j, c)| cos2_diagonal(j) * c.norm_sqr()).sum())
}

/// Population part and coherence part of ⟨cos²θ⟩(τ); total = pop + coherent.
pub fn alignment_series(wp: &Wavepacket, taus: &[f64]) -> Result<(f64, Vec<f64>)> {
    let pop = alignment_population(wp)?;
    let coherent = taus
        .iter()
        .map(|&t| coherence_sum(wp.coeffs(), 2, t, cos2_coupling))
        .collect::<Result<Vec<_>>>()?;
    Ok((pop, coherent))
}

/// Sampled orientation and alignment signals with the static quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub taus: Vec<f64>,
    pub orientation: Vec<f64>,
    pub alignment: Vec<f64>,
    pub alignment_coherent: Vec<f64>,
    pub alignment_pop: f64,
    pub kinetic: f64,
}

impl ObservableSeries {
    pub fn compute(wp: &Wavepacket, taus: &[f64]) -> Result<Self> {
        let orientation = orientation_series(wp, taus)?;
        let (alignment_pop, alignment_coherent) = alignment_series(wp, taus)?;
        Ok(Self {
            taus: taus.to_vec(),
            orientation,
            alignment: alignment_coherent.iter().map(|c| alignment_pop + c).collect(),
            alignment_coherent,
            alignment_pop,
            kinetic: kinetic_energy(wp),
        })
    }
}

/// `n` evenly spaced times covering one revival, endpoints included.
pub fn revival_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| REVIVAL_TIME * k as f64 / (n - 1) as f64).collect(),
    }
}

/// One spectral line: a signal term `amplitude · cos(frequency·τ + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub frequency: u64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSpectrum {
    pub observable: Observable,
    pub entries: Vec<SpectralLine>,
}

impl LineSpectrum {
    pub fn amplitude_at(&self, frequency: u64) -> f64 {
        self.entries
            .iter()
            .find(|l| l.frequency == frequency)
            .map_or(0.0, |l| l.amplitude)
    }
}

/// Exact line spectrum from coefficient products, sorted by frequency.
///
/// The zero-frequency line carries the static part; every other line the
/// one-sided cosine amplitude `2|Σ g C^{J*} C^{J'}|`. Lines whose amplitude is
/// exactly zero are omitted, except the static alignment line.
pub fn line_spectrum(wp: &Wavepacket, observable: Observable) -> Result<LineSpectrum> {
    require_m_zero(wp)?;
    let c = wp.coeffs();
    let mut entries = Vec::new();
    let (shift, coupling): (usize, fn(u32) -> f64) = match observable {
        Observable::Orientation => (1, cos_coupling),
        Observable::Alignment => {
            entries.push(SpectralLine { frequency: 0, amplitude: alignment_population(wp)?.abs() });
            (2, cos2_coupling)
        }
    };
    // each frequency E_{J+s} − E_J is hit by exactly one J
    for j in 0..c.len().saturating_sub(shift) {
        let ju = j as u32;
        let amplitude = 2.0 * (c[j].conj() * c[j + shift]).norm() * coupling(ju);
        if amplitude != 0.0 {
            let frequency = (rotor_energy(ju + shift as u32) - rotor_energy(ju)) as u64;
            entries.push(SpectralLine { frequency, amplitude });
        }
    }
    Ok(LineSpectrum { observable, entries })
}

/// |ψ(θ,τ)|² per unit solid angle.
pub fn density_at(wp: &Wavepacket, theta: f64, tau: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, pi]")));
    }
    let ys = sph_harm_m_all(wp.j_max(), wp.m(), theta)?;
    let amp: Complex64 = wp.evolved(tau).iter().zip(&ys).map(|(c, y)| c * y).sum();
    Ok(amp.norm_sqr())
}

/// |ψ(θ,τ)|² tabulated on a θ×τ grid.
///
/// The θ grid is the arccosine of Gauss–Legendre nodes (ascending θ), and
/// `weights` are the matching quadrature weights, so
/// `2π Σ_i weights[i]·density[i][k]` is the norm of column k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Carpet {
    pub thetas: Vec<f64>,
    pub weights: Vec<f64>,
    pub taus: Vec<f64>,
    /// `density[i][k]` at `(thetas[i], taus[k])`
    pub density: Vec<Vec<f64>>,
}

impl Carpet {
    pub fn column_norm(&self, k: usize) -> f64 {
        2.0 * PI * self.weights.iter().zip(&self.density).map(|(w, row)| w * row[k]).sum::<f64>()
    }
}

pub fn carpet(wp: &Wavepacket, n_theta: usize, n_tau: usize) -> Result<Carpet> {
    carpet_at(wp, n_theta, &revival_grid(n_tau))
}

/// Carpet at explicit sample times.
pub fn carpet_at(wp: &Wavepacket, n_theta: usize, taus: &[f64]) -> Result<Carpet> {
    if n_theta < 2 || taus.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "carpet grids need >= 2 points, got {n_theta} x {}",
            taus.len()
        )));
    }
    let rule = gauss_legendre(n_theta)?;
    let thetas: Vec<f64> = rule.nodes().iter().rev().map(|x| x.acos()).collect();
    let weights: Vec<f64> = rule.weights().iter().rev().copied().collect();
    let harmonics = thetas
        .iter()
        .map(|&t| sph_harm_m_all(wp.j_max(), wp.m(), t))
        .collect::<Result<Vec<_>>>()?;
    let columns: Vec<Vec<f64>> = par_map(taus.len(), |k| {
        let evolved = wp.evolved(taus[k]);
        harmonics
            .iter()
            .map(|ys| evolved.iter().zip(ys).map(|(c, y)| c * y).sum::<Complex64>().norm_sqr())
            .collect()
    });
    let density = (0..thetas.len()).map(|i| columns.iter().map(|col| col[i]).collect()).collect();
    Ok(Carpet { thetas, weights, taus: taus.to_vec(), density })
}

/// Mean of ⟨cosθ⟩ over one revival, from the analytic integral of each
/// Fourier term.
pub fn time_averaged_orientation(wp: &Wavepacket) -> Result<f64> {
    require_m_zero(wp)?;
    let c = wp.coeffs();
    let mut total = 0.0;
    for j in 0..c.len().saturating_sub(1) {
        let ju = j as u32;
        let z = c[j].conj() * c[j + 1] * cos_coupling(ju);
        let omega = rotor_energy(ju + 1) - rotor_energy(ju);
        // ∫₀^π 2 Re(z e^{−iωτ}) dτ
        let phi = z.arg();
        let r = z.norm();
        total += 2.0 * r * ((omega * REVIVAL_TIME - phi).sin() + phi.sin()) / omega;
    }
    Ok(total / REVIVAL_TIME)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::sph_bessel_j;
    use crate::sudden::{kick_wavepacket_with_j_max, KickStrengths};
    use crate::wavepacket::{InitialState, Provenance};

    fn kicked(pe: f64, pz: f64) -> Wavepacket {
        kick_wavepacket_with_j_max(InitialState::GROUND, KickStrengths::new(pe, pz).unwrap(), 50).unwrap()
    }

    fn random_packet(seed: u64, j_max: usize) -> Wavepacket {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut c: Vec<Complex64> = (0..=j_max).map(|_| Complex64::new(next(), next())).collect();
        let n = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        c.iter_mut().for_each(|v| *v /= n);
        Wavepacket::new(0, c, Provenance::External).unwrap()
    }

    fn quadrature_expectation(wp: &Wavepacket, tau: f64, power: i32) -> f64 {
        let rule = gauss_legendre(256).unwrap();
        rule.nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&x, &w)| 2.0 * PI * w * x.powi(power) * density_at(wp, x.acos(), tau).unwrap())
            .sum()
    }

    #[test]
    fn basic_values() {
        let id = Wavepacket::identity(InitialState::GROUND, 5).unwrap();
        assert_eq!(populations(&id)[0], (0, 1.0));
        assert_eq!(kinetic_energy(&id), 0.0);
        assert!((alignment_population(&id).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((density_at(&id, 1.1, 0.4).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(line_spectrum(&id, Observable::Orientation).unwrap().entries.is_empty());
        let al = line_spectrum(&id, Observable::Alignment).unwrap();
        assert_eq!(al.entries.len(), 1);
        assert!((al.entries[0].amplitude - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(time_averaged_orientation(&id).unwrap(), 0.0);

        let wp = kicked(1.5, 0.0);
        let p = populations(&wp);
        assert!((p[0].1 - sph_bessel_j(0, 1.5).powi(2)).abs() < 1e-12);
        assert!((p[1].1 - 3.0 * sph_bessel_j(1, 1.5).powi(2)).abs() < 1e-12);
        assert!((kinetic_energy(&wp) - 1.5).abs() < 1e-10);
        assert!((kinetic_energy(&kicked(1.5, 1.5)) - 2.7).abs() < 1e-10);
    }

    #[test]
    fn two_state_orientation() {
        let s = 0.5f64.sqrt();
        let wp = Wavepacket::new(0, vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)], Provenance::External).unwrap();
        for tau in [0.0, 0.3, 1.1, 2.9] {
            let v = orientation_series(&wp, &[tau]).unwrap()[0];
            assert!((v - (2.0 * tau).cos() / 3f64.sqrt()).abs() < 1e-14);
            assert!((v - quadrature_expectation(&wp, tau, 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn signals_match_quadrature() {
        for seed in 0..10 {
            let wp = random_packet(seed, 12);
            for k in 0..20 {
                let tau = 0.157 * k as f64 + 0.01 * seed as f64;
                let o = orientation_series(&wp, &[tau]).unwrap()[0];
                let (pop, coh) = alignment_series(&wp, &[tau]).unwrap();
                assert!((o - quadrature_expectation(&wp, tau, 1)).abs() < 1e-9);
                assert!((pop + coh[0] - quadrature_expectation(&wp, tau, 2)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn density_population_coherence_form() {
        let wp = random_packet(99, 15);
        for k in 0..100 {
            let theta = PI * ((k as f64 * 0.618).fract());
            let tau = 3.0 * ((k as f64 * 0.414).fract());
            let ys = sph_harm_m_all(15, 0, theta).unwrap();
            let c = wp.coeffs();
            let mut v = 0.0;
            for j in 0..=15 {
                v += c[j].norm_sqr() * ys[j] * ys[j];
                for jp in 0..j {
                    let z = c[j].conj() * c[jp] * ys[j] * ys[jp];
                    let de = rotor_energy(j as u32) - rotor_energy(jp as u32);
                    v += 2.0 * (z * Complex64::from_polar(1.0, de * tau)).re;
                }
            }
            assert!((density_at(&wp, theta, tau).unwrap() - v).abs() < 1e-11);
        }
    }

    #[test]
    fn symmetries_of_kicked_packets() {
        let taus = revival_grid(41);
        for (pe, pz) in [(1.5, 0.0), (0.0, 2.8), (2.8, 2.8), (8.0, 0.0)] {
            let wp = kicked(pe, pz);
            for &tau in &taus {
                for theta in [0.2, 1.0, 2.5] {
                    let a = density_at(&wp, theta, tau).unwrap();
                    assert!((a - density_at(&wp, theta, tau + PI).unwrap()).abs() < 1e-10);
                    if pz == 0.0 {
                        assert!((a - density_at(&wp, PI - theta, PI - tau).unwrap()).abs() < 1e-10);
                    }
                }
            }
            let (_, coh) = alignment_series(&wp, &taus).unwrap();
            let (_, shifted) = alignment_series(&wp, &taus.iter().map(|t| t + PI / 2.0).collect::<Vec<_>>()).unwrap();
            for (a, b) in coh.iter().zip(&shifted) {
                assert!((a + b).abs() < 1e-10);
            }
            let (pop, c0) = alignment_series(&wp, &[0.0]).unwrap();
            assert!((pop + c0[0] - 1.0 / 3.0).abs() < 1e-10);
            assert!(orientation_series(&wp, &[0.0]).unwrap()[0].abs() < 1e-10);
            assert!(time_averaged_orientation(&wp).unwrap().abs() < 1e-12);
            if pe == 0.0 {
                assert!(orientation_series(&wp, &taus).unwrap().iter().all(|v| *v == 0.0));
            }
            if pz == 0.0 {
                for &t in &taus[..20] {
                    let o = orientation_series(&wp, &[PI / 2.0 - t, PI / 2.0 + t]).unwrap();
                    assert!((o[0] + o[1]).abs() < 1e-10);
                    let (_, c) = alignment_series(&wp, &[PI / 2.0 - t, PI / 2.0 + t]).unwrap();
                    assert!((c[0] - c[1]).abs() < 1e-10);
                }
                let (_, c) = alignment_series(&wp, &[PI / 4.0, 3.0 * PI / 4.0]).unwrap();
                assert!(c[0].abs() < 1e-10 && c[1].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spectra_selection_rules_and_parseval() {
        for (pe, pz) in [(1.5, 0.0), (0.0, 2.8), (2.8, 2.8)] {
            let wp = kicked(pe, pz);
            let o = line_spectrum(&wp, Observable::Orientation).unwrap();
            assert!(o.entries.iter().all(|l| l.frequency % 2 == 0 && l.frequency > 0));
            let a = line_spectrum(&wp, Observable::Alignment).unwrap();
            assert!(a.entries.iter().all(|l| l.frequency == 0 || (l.frequency >= 6 && (l.frequency - 6) % 4 == 0)));

            let taus: Vec<f64> = (0..4000).map(|k| PI * k as f64 / 4000.0).collect();
            let (pop, coh) = alignment_series(&wp, &taus).unwrap();
            let mean = coh.iter().sum::<f64>() / coh.len() as f64;
            let var = coh.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / coh.len() as f64;
            let lines: f64 = a.entries.iter().filter(|l| l.frequency > 0).map(|l| l.amplitude.powi(2)).sum();
            assert!((var - lines / 2.0).abs() < 1e-8);
            assert!(mean.abs() < 1e-9);
            assert!((a.amplitude_at(0) - pop).abs() < 1e-15);
        }
        let o = line_spectrum(&kicked(1.5, 0.0), Observable::Orientation).unwrap();
        let top = o.entries.iter().max_by(|a, b| a.amplitude.total_cmp(&b.amplitude)).unwrap();
        assert_eq!(top.frequency, 2);
        let a = line_spectrum(&kicked(0.0, 2.8), Observable::Alignment).unwrap();
        let top = a.entries.iter().filter(|l| l.frequency > 0).max_by(|a, b| a.amplitude.total_cmp(&b.amplitude)).unwrap();
        assert_eq!(top.frequency, 6);
    }

    #[test]
    fn carpet_normalization_and_focusing() {
        let id = Wavepacket::identity(InitialState::GROUND, 4).unwrap();
        let c = carpet(&id, 16, 5).unwrap();
        assert!(c.density.iter().flatten().all(|d| (d - 1.0 / (4.0 * PI)).abs() < 1e-14));
        assert!(carpet(&id, 1, 5).is_err());

        let wp = kicked(8.0, 0.0);
        let c = carpet(&wp, 128, 33).unwrap();
        for k in 0..c.taus.len() {
            assert!((c.column_norm(k) - 1.0).abs() < 1e-8);
        }
        let c = carpet_at(&wp, 128, &[0.0625, 0.0625 + PI]).unwrap();
        let (imax, _) = c.density.iter().enumerate().max_by(|a, b| a.1[0].total_cmp(&b.1[0])).unwrap();
        assert!(c.thetas[imax] < 0.5);
        for row in &c.density {
            assert!((row[0] - row[1]).abs() < 1e-9 * row[0].max(1.0));
        }
    }

    #[test]
    fn m_nonzero_rejected() {
        let wp = Wavepacket::identity(InitialState::new(2, 1).unwrap(), 4).unwrap();
        assert!(orientation_series(&wp, &[0.0]).is_err());
        assert!(line_spectrum(&wp, Observable::Alignment).is_err());
        assert!((density_at(&wp, 0.7, 0.0).unwrap() - crate::specfun::sph_harm_m(2, 1, 0.7).unwrap().powi(2)).abs() < 1e-14);
    }
}
