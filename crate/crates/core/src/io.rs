//! CSV and JSON exchange formats.
//!
//! Numbers are written in their shortest round-trip decimal form, so a file
//! reloads to bit-identical doubles and identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{Carpet, LineSpectrum, ObservableSeries};
use crate::reduced::{MapEntry, RaySet, ResonanceScan};
use crate::sudden::KickStrengths;
use crate::wavepacket::{InitialState, Provenance, Wavepacket};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal string that parses back to exactly `v`.
pub fn fmt_f64(v: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(v).to_owned()
}

/// Quotes a field when it contains a delimiter, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// In-memory CSV table with a single header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut t = Table { text: String::new(), width: header.len() };
        t.push_line(header.iter().map(|h| csv_field(h.as_ref())));
        t
    }

    fn push_line<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&line.join(","));
        self.text.push_str("\r\n");
    }

    /// Appends a row; fields must already be formatted.
    pub fn row(&mut self, fields: Vec<String>) -> Result<()> {
        if fields.len() != self.width {
            return Err(Error::DimensionMismatch { expected: self.width, got: fields.len() });
        }
        self.push_line(fields.into_iter().map(|f| csv_field(&f)));
        Ok(())
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.text)?;
        Ok(())
    }
}

/// Splits CSV text into records, honouring quoted fields.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<String>>> {
    let mut records = Vec::new();
    let mut record = Vec::new();
    let mut field = String::new();
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        if quoted {
            match ch {
                '"' if chars.peek() == Some(&'"') => {
                    field.push('"');
                    chars.next();
                }
                '"' => quoted = false,
                _ => field.push(ch),
            }
            continue;
        }
        match ch {
            '"' if field.is_empty() => quoted = true,
            ',' => record.push(std::mem::take(&mut field)),
            '\r' => {}
            '\n' => {
                record.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut record));
            }
            _ => field.push(ch),
        }
    }
    if quoted {
        return Err(Error::Parse("unterminated quoted field".into()));
    }
    if !field.is_empty() || !record.is_empty() {
        record.push(field);
        records.push(record);
    }
    Ok(records)
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} value '{s}'")))
}

/// Sidecar path for a data file: the extension replaced by `.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Metadata stored next to a wavepacket CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketInfo {
    pub m: i32,
    pub initial_state: Option<InitialState>,
    pub kick: Option<KickStrengths>,
    pub j_max: u32,
    pub norm_defect: f64,
    pub version: String,
    pub provenance: Provenance,
}

impl WavepacketInfo {
    pub fn of(wp: &Wavepacket) -> Self {
        let (initial_state, kick) = match wp.meta() {
            Provenance::Kick { init, kick, .. } => (Some(*init), Some(*kick)),
            Provenance::Pulse { init, pulse, .. } => (Some(*init), Some(crate::propagator::kick_strengths_of(pulse))),
            Provenance::Identity { init } => (Some(*init), Some(KickStrengths::ZERO)),
            Provenance::OrientingClosedForm { p_eta } => (Some(InitialState::GROUND), Some(KickStrengths { p_eta: *p_eta, p_zeta: 0.0 })),
            Provenance::AligningClosedForm { p_zeta } => (Some(InitialState::GROUND), Some(KickStrengths { p_eta: 0.0, p_zeta: *p_zeta })),
            Provenance::External => (None, None),
        };
        Self {
            m: wp.m(),
            initial_state,
            kick,
            j_max: wp.j_max(),
            norm_defect: wp.norm_defect(),
            version: VERSION.to_owned(),
            provenance: wp.meta().clone(),
        }
    }
}

pub fn wavepacket_table(wp: &Wavepacket) -> Table {
    let mut t = Table::new(&["J", "re", "im", "population"]);
    for (j, c) in wp.iter() {
        t.push_line([j.to_string(), fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm_sqr())]);
    }
    t
}

/// Parses a wavepacket CSV. The azimuthal number and provenance come from
/// `info` when given; otherwise m is taken as the first listed J.
pub fn parse_wavepacket(text: &str, info: Option<&WavepacketInfo>) -> Result<Wavepacket> {
    let records = parse_csv(text)?;
    let (header, body) = records.split_first().ok_or_else(|| Error::Parse("empty wavepacket file".into()))?;
    if header.len() < 3 || header[0] != "J" || header[1] != "re" || header[2] != "im" {
        return Err(Error::Parse(format!("unexpected wavepacket header {header:?}")));
    }
    let mut coeffs = Vec::with_capacity(body.len());
    let mut first_j = None;
    for (k, rec) in body.iter().enumerate() {
        if rec.len() < 3 {
            return Err(Error::Parse(format!("row {} has {} fields", k + 2, rec.len())));
        }
        let j: u32 = rec[0].trim().parse().map_err(|_| Error::Parse(format!("bad J '{}'", rec[0])))?;
        let j0 = *first_j.get_or_insert(j);
        if j != j0 + k as u32 {
            return Err(Error::Parse(format!("J values must be consecutive, found {j} at row {}", k + 2)));
        }
        coeffs.push(Complex64::new(parse_num(&rec[1], "re")?, parse_num(&rec[2], "im")?));
    }
    let j_min = first_j.ok_or_else(|| Error::Parse("wavepacket file has no rows".into()))?;
    let (m, meta) = match info {
        Some(i) => (i.m, i.provenance.clone()),
        None => (j_min as i32, Provenance::External),
    };
    if m.unsigned_abs() != j_min {
        return Err(Error::Parse(format!("first J {j_min} does not match |m| = {}", m.abs())));
    }
    Wavepacket::new(m, coeffs, meta)
}

/// Reads a wavepacket CSV together with its sidecar, if one exists.
pub fn read_wavepacket(path: &Path) -> Result<Wavepacket> {
    let side = sidecar_path(path);
    let info: Option<WavepacketInfo> = if side.exists() { Some(read_json(&side)?) } else { None };
    parse_wavepacket(&fs::read_to_string(path)?, info.as_ref())
}

pub fn kinetic_series_table(series: &[(f64, f64)]) -> Table {
    let mut t = Table::new(&["tau", "J2_expect"]);
    for &(tau, e) in series {
        t.push_line([fmt_f64(tau), fmt_f64(e)]);
    }
    t
}

/// First row: blank corner then τ values; first column: θ values.
pub fn carpet_table(c: &Carpet) -> Table {
    let mut header = vec!["theta\\tau".to_owned()];
    header.extend(c.taus.iter().map(|t| fmt_f64(*t)));
    let mut t = Table::new(&header);
    for (theta, row) in c.thetas.iter().zip(&c.density) {
        t.push_line(std::iter::once(fmt_f64(*theta)).chain(row.iter().map(|d| fmt_f64(*d))));
    }
    t
}

pub fn series_table(s: &ObservableSeries) -> Table {
    let mut t = Table::new(&["tau", "orientation", "alignment_total", "alignment_coherent"]);
    for k in 0..s.taus.len() {
        t.push_line([
            fmt_f64(s.taus[k]),
            fmt_f64(s.orientation[k]),
            fmt_f64(s.alignment[k]),
            fmt_f64(s.alignment_coherent[k]),
        ]);
    }
    t
}

pub fn spectrum_table(spectra: &[LineSpectrum]) -> Table {
    let mut t = Table::new(&["delta_e", "amplitude", "observable"]);
    for s in spectra {
        for l in &s.entries {
            t.push_line([l.frequency.to_string(), fmt_f64(l.amplitude), s.observable.to_string()]);
        }
    }
    t
}

pub fn scan_table(scan: &ResonanceScan) -> Table {
    let mut t = Table::new(&["sigma", "j2_post", "engine"]);
    for (s, e) in scan.sigmas.iter().zip(&scan.energies) {
        t.push_line([fmt_f64(*s), fmt_f64(*e), scan.engine.to_string()]);
    }
    t
}

pub fn resonance_list_table(entries: &[MapEntry]) -> Table {
    let mut t = Table::new(&["p_eta", "sigma_r", "order"]);
    for e in entries {
        t.push_line([fmt_f64(e.p_eta), fmt_f64(e.sigma_r), e.order.to_string()]);
    }
    t
}

/// RaySet overlay as the JSON value written to disk.
pub fn ray_json(rays: &RaySet) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(rays)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sudden::kick_wavepacket_with_j_max;

    #[test]
    fn shortest_round_trip_numbers() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 4.7e-12] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.1), "0.1");
    }

    #[test]
    fn csv_quoting_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.row(vec!["x,y".into(), "say \"hi\"".into()]).unwrap();
        assert!(t.row(vec!["1".into()]).is_err());
        let parsed = parse_csv(t.as_str()).unwrap();
        assert_eq!(parsed[1], vec!["x,y".to_owned(), "say \"hi\"".to_owned()]);
    }

    #[test]
    fn wavepacket_round_trip() {
        let wp = kick_wavepacket_with_j_max(InitialState::GROUND, KickStrengths::new(2.0, 1.0).unwrap(), 30).unwrap();
        let info = WavepacketInfo::of(&wp);
        let back = parse_wavepacket(wavepacket_table(&wp).as_str(), Some(&info)).unwrap();
        assert_eq!(back, wp);
        let bare = parse_wavepacket(wavepacket_table(&wp).as_str(), None).unwrap();
        assert_eq!(bare.coeffs(), wp.coeffs());
        assert!(parse_wavepacket("J,re,im\n0,1,0\n2,0,0\n", None).is_err());
        assert!(parse_wavepacket("x,y\n", None).is_err());
    }
}
