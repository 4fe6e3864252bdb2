use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par_map;
use crate::propagator::{post_pulse_energy, pulse_for_kicks};
use crate::sudden::KickStrengths;

use super::two_level::two_level_energy;

/// How the post-pulse kinetic energy is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    TwoLevel,
    Full,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::TwoLevel => "two-level",
            Engine::Full => "full",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-level" | "two_level" => Ok(Engine::TwoLevel),
            "full" => Ok(Engine::Full),
            other => Err(Error::Parse(format!("unknown engine '{other}' (two-level | full)"))),
        }
    }
}

/// Detection and refinement settings for [`resonance_scan_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Basis size of the full engine.
    pub j_max: u32,
    /// Minimum depth below the larger neighbouring maximum, in decades.
    pub min_depth_decades: f64,
    /// A minimum counts only if both neighbouring maxima reach this fraction
    /// of the scan maximum; shallower dips sit in the integration noise.
    pub noise_floor: f64,
    /// Golden-section stopping width in σ.
    pub sigma_resolution: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { j_max: 20, min_depth_decades: 2.0, noise_floor: 1e-12, sigma_resolution: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub sigma: f64,
    /// 1-based rank by ascending σ within the scan.
    pub order: usize,
    pub energy: f64,
    /// log10 of (larger neighbouring maximum / energy at the minimum)
    pub depth_decades: f64,
    /// log10 of (smaller neighbouring maximum / energy at the minimum)
    pub drop_decades: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub kick: KickStrengths,
    pub engine: Engine,
    pub sigmas: Vec<f64>,
    pub energies: Vec<f64>,
    pub resonances: Vec<Resonance>,
}

fn energy_at(kick: KickStrengths, sigma: f64, engine: Engine, opts: &ScanOptions) -> Result<f64> {
    let pulse = pulse_for_kicks(kick, sigma)?;
    match engine {
        Engine::TwoLevel => two_level_energy(&pulse),
        Engine::Full => post_pulse_energy(&pulse, opts.j_max),
    }
}

pub fn resonance_scan(kick: KickStrengths, sigma_range: (f64, f64), n: usize, engine: Engine) -> Result<ResonanceScan> {
    resonance_scan_with(kick, sigma_range, n, engine, &ScanOptions::default())
}

/// Post-pulse ⟨J²⟩ on a log-spaced σ grid, with every qualifying local
/// minimum refined by golden-section search.
pub fn resonance_scan_with(
    kick: KickStrengths,
    sigma_range: (f64, f64),
    n: usize,
    engine: Engine,
    opts: &ScanOptions,
) -> Result<ResonanceScan> {
    let (lo, hi) = sigma_range;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma range ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    if n < 50 {
        return Err(Error::InvalidInput(format!("scan needs n >= 50, got {n}")));
    }
    let ratio = (hi / lo).ln();
    let sigmas: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp()).collect();
    let energies = par_map(n, |i| energy_at(kick, sigmas[i], engine, opts)).into_iter().collect::<Result<Vec<_>>>()?;

    let scan_max = energies.iter().cloned().fold(0.0, f64::max);
    let candidates: Vec<(usize, f64, f64)> = (1..n - 1)
        .filter(|&i| energies[i] < energies[i - 1] && energies[i] < energies[i + 1])
        .filter_map(|i| {
            let (left, right) = neighbouring_maxima(&energies, i);
            let (larger, smaller) = (left.max(right), left.min(right));
            (smaller >= opts.noise_floor * scan_max).then_some((i, larger, smaller))
        })
        .collect();
    let refined = par_map(candidates.len(), |k| {
        let i = candidates[k].0;
        golden_section(|s| energy_at(kick, s, engine, opts), sigmas[i - 1], sigmas[i + 1], opts.sigma_resolution)
    });

    let mut resonances = Vec::new();
    for ((i, larger, smaller), found) in candidates.into_iter().zip(refined) {
        let (mut sigma, mut energy) = found?;
        if energies[i] < energy {
            sigma = sigmas[i];
            energy = energies[i];
        }
        let depth_decades = (larger / energy).log10();
        if depth_decades >= opts.min_depth_decades {
            let drop_decades = (smaller / energy).log10();
            resonances.push(Resonance { sigma, order: 0, energy, depth_decades, drop_decades });
        }
    }
    resonances.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    for (k, r) in resonances.iter_mut().enumerate() {
        r.order = k + 1;
    }
    Ok(ResonanceScan { kick, engine, sigmas, energies, resonances })
}

/// Values of the nearest local maxima (or scan ends) on each side of `i`.
fn neighbouring_maxima(e: &[f64], i: usize) -> (f64, f64) {
    let mut l = i;
    while l > 0 && e[l - 1] >= e[l] {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < e.len() && e[r + 1] >= e[r] {
        r += 1;
    }
    (e[l], e[r])
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// One detected resonance of a resonance map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub p_eta: f64,
    pub sigma_r: f64,
    pub order: usize,
}

/// Two-level resonance scans over a linear P_η grid (endpoints included).
pub fn resonance_map(
    p_eta_range: (f64, f64),
    n_eta: usize,
    sigma_range: (f64, f64),
    n_sigma: usize,
) -> Result<Vec<MapEntry>> {
    resonance_map_with(p_eta_range, n_eta, sigma_range, n_sigma, Engine::TwoLevel, &ScanOptions::default())
}

pub fn resonance_map_with(
    p_eta_range: (f64, f64),
    n_eta: usize,
    sigma_range: (f64, f64),
    n_sigma: usize,
    engine: Engine,
    opts: &ScanOptions,
) -> Result<Vec<MapEntry>> {
    let (lo, hi) = p_eta_range;
    if n_eta == 0 || hi < lo {
        return Ok(Vec::new());
    }
    let grid: Vec<f64> = match n_eta {
        1 => vec![lo],
        _ => (0..n_eta).map(|i| lo + (hi - lo) * i as f64 / (n_eta - 1) as f64).collect(),
    };
    let scans = par_map(grid.len(), |i| {
        let kick = KickStrengths::new(grid[i], 0.0)?;
        resonance_scan_with(kick, sigma_range, n_sigma, engine, opts)
    });
    let mut out = Vec::new();
    for (p_eta, scan) in grid.iter().zip(scans) {
        for r in scan?.resonances {
            out.push(MapEntry { p_eta: *p_eta, sigma_r: r.sigma, order: r.order });
        }
    }
    Ok(out)
}

/// Period of the first-order σ_R(P_η) sawtooth, from the mean spacing of its
/// resets (rows where σ_R jumps up and then resumes descending).
pub fn estimate_period(map: &[MapEntry]) -> Option<f64> {
    let rows: Vec<(f64, f64)> = map.iter().filter(|e| e.order == 1).map(|e| (e.p_eta, e.sigma_r)).collect();
    let peaks: Vec<f64> = (1..rows.len().saturating_sub(1))
        .filter(|&i| rows[i].1 > rows[i - 1].1 && rows[i].1 >= rows[i + 1].1)
        .map(|i| rows[i].0)
        .collect();
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}
