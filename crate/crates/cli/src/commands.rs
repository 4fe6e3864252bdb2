use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use rotorkick::io::{self, Table, WavepacketInfo};
use rotorkick::observables::{self, Observable, ObservableSeries};
use rotorkick::propagator::{self, PropagatorConfig};
use rotorkick::reduced::{self, Engine, Fraction, MapEntry, ScanOptions};
use rotorkick::sudden::{self, DEFAULT_K_MAX};
use rotorkick::wavepacket::{NORM_TOLERANCE, TAIL_THRESHOLD};
use rotorkick::{Error, InitialState, KickStrengths, Wavepacket};

use crate::config::{Grid, Resolver};
use crate::{Command, Common, InitArgs, PacketArgs};

const DEFAULT_TIE_TOLERANCE: f64 = 1e-3;

fn input(msg: String) -> anyhow::Error {
    Error::InvalidInput(msg).into()
}

/// Per-invocation state shared by every command.
struct Ctx {
    command: &'static str,
    args: Vec<String>,
    cfg: Resolver,
    start: Instant,
}

impl Ctx {
    fn new(command: &'static str, common: &Common) -> Result<Self> {
        let cfg = Resolver::load(common.config.as_deref())?;
        let mut ctx = Ctx { command, args: std::env::args().collect(), cfg, start: Instant::now() };
        if let Some(w) = ctx.cfg.get_opt::<usize>("workers", common.workers)? {
            if w == 0 {
                return Err(input("--workers must be >= 1".into()));
            }
            // a second build in the same process (tests) keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
        }
        Ok(ctx)
    }

    fn out(&mut self, common: &Common) -> Result<PathBuf> {
        let default = PathBuf::from(format!("{}.csv", self.command));
        let path = self.cfg.get("out", common.out.clone(), default)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(path)
    }

    fn run_record(&self) -> Value {
        json!({
            "command": self.command,
            "args": self.args,
            "resolved": self.cfg.resolved(),
            "version": rotorkick::VERSION,
            "wall_time_s": self.start.elapsed().as_secs_f64(),
        })
    }

    /// Writes a table and its JSON sidecar; `extra` is merged into the sidecar.
    fn emit(&self, path: &Path, table: &Table, extra: Value) -> Result<()> {
        table.write(path).with_context(|| format!("writing {}", path.display()))?;
        let mut side = match extra {
            Value::Object(m) => m,
            Value::Null => serde_json::Map::new(),
            other => {
                let mut m = serde_json::Map::new();
                m.insert("data".into(), other);
                m
            }
        };
        side.insert("run".into(), self.run_record());
        side.insert("data_file".into(), json!(path.file_name().map(|f| f.to_string_lossy())));
        io::write_json(&io::sidecar_path(path), &Value::Object(side))?;
        Ok(())
    }

    fn kick(&mut self, common: &Common) -> Result<KickStrengths> {
        let pe = self.cfg.get("p-eta", common.p_eta, Grid::point(0.0))?.scalar("p-eta")?;
        let pz = self.cfg.get("p-zeta", common.p_zeta, Grid::point(0.0))?.scalar("p-zeta")?;
        Ok(KickStrengths::new(pe, pz)?)
    }

    fn init(&mut self, init: &InitArgs) -> Result<InitialState> {
        let j0 = self.cfg.get("j0", init.j0, 0)?;
        let m0 = self.cfg.get("m0", init.m0, 0)?;
        Ok(InitialState::new(j0, m0)?)
    }

    fn sigma(&mut self, common: &Common) -> Result<Option<f64>> {
        let s = self.cfg.get_opt("sigma", common.sigma)?;
        if let Some(v) = s {
            if !(v > 0.0 && v.is_finite()) {
                return Err(input(format!("--sigma must be > 0, got {v}")));
            }
        }
        Ok(s)
    }

    fn j_max(&mut self, common: &Common) -> Result<Option<u32>> {
        self.cfg.get_opt("j-max", common.j_max)
    }
}

/// Packet after the interaction: exact δ-kick, or propagated when σ is given.
fn packet(init: InitialState, kick: KickStrengths, sigma: Option<f64>, j_max: Option<u32>) -> Result<Wavepacket> {
    match sigma {
        None => Ok(match j_max {
            Some(j) => sudden::kick_wavepacket_with_j_max(init, kick, j)?,
            None => sudden::kick_wavepacket_auto(init, kick)?,
        }),
        Some(s) => {
            let j = propagation_j_max(init, kick, j_max)?;
            let pulse = propagator::pulse_for_kicks(kick, s)?;
            let cfg = PropagatorConfig::for_pulse(&pulse, j)?;
            Ok(propagator::propagate(init, &pulse, &cfg)?.final_state)
        }
    }
}

/// Basis for propagation: as requested, else the size the sudden limit needs.
fn propagation_j_max(init: InitialState, kick: KickStrengths, j_max: Option<u32>) -> Result<u32> {
    Ok(match j_max {
        Some(j) => j,
        None => sudden::kick_wavepacket_auto(init, kick)?.j_max(),
    })
}

fn packet_from_args(ctx: &mut Ctx, args: &PacketArgs) -> Result<(Wavepacket, KickStrengths)> {
    let kick = ctx.kick(&args.common)?;
    let init = ctx.init(&args.init)?;
    let sigma = ctx.sigma(&args.common)?;
    let j_max = ctx.j_max(&args.common)?;
    Ok((packet(init, kick, sigma, j_max)?, kick))
}

fn packet_info(wp: &Wavepacket) -> Result<Value> {
    let mut v = serde_json::to_value(WavepacketInfo::of(wp))?;
    v["tail_population"] = json!(wp.tail_population());
    Ok(v)
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Kick(a) => {
            let mut ctx = Ctx::new("kick", &a.packet.common)?;
            let kick = ctx.kick(&a.packet.common)?;
            let init = ctx.init(&a.packet.init)?;
            let j_max = ctx.j_max(&a.packet.common)?;
            let method = ctx.cfg.get("method", a.method.clone(), "quadrature".to_owned())?;
            let wp = match method.as_str() {
                "quadrature" => packet(init, kick, None, j_max)?,
                "series" => {
                    let k_max = ctx.cfg.get("k-max", a.k_max, DEFAULT_K_MAX)?;
                    let j = match j_max {
                        Some(j) => j,
                        None => sudden::kick_wavepacket_auto(init, kick)?.j_max(),
                    };
                    let phase = sudden::phase_coeffs_series(kick, (j + init.j0()) as usize, k_max)?;
                    sudden::kick_wavepacket(init, &phase, j)?
                }
                other => return Err(input(format!("unknown method '{other}' (quadrature | series)"))),
            };
            wp.certify(NORM_TOLERANCE, TAIL_THRESHOLD)?;
            let out = ctx.out(&a.packet.common)?;
            ctx.emit(&out, &io::wavepacket_table(&wp), packet_info(&wp)?)
        }
        Command::Propagate(a) => {
            let common = &a.packet.common;
            let mut ctx = Ctx::new("propagate", common)?;
            let kick = ctx.kick(common)?;
            let init = ctx.init(&a.packet.init)?;
            let sigma = ctx.sigma(common)?.ok_or_else(|| input("propagate needs --sigma".into()))?;
            let j = propagation_j_max(init, kick, ctx.j_max(common)?)?;
            let pulse = propagator::pulse_for_kicks(kick, sigma)?;
            let mut cfg = PropagatorConfig::for_pulse(&pulse, j)?;
            cfg.dt = ctx.cfg.get("dt", a.dt, cfg.dt)?;
            cfg.record_stride = ctx.cfg.get("stride", a.stride, cfg.record_stride)?;
            let cfg = PropagatorConfig::new(cfg.j_max, cfg.dt, cfg.rule, cfg.record_stride)?;
            let res = propagator::propagate(init, &pulse, &cfg)?;
            let out = ctx.out(common)?;
            let mut info = packet_info(&res.final_state)?;
            info["pulse"] = serde_json::to_value(pulse)?;
            info["norm_defect_max"] = json!(res.norm_defect_max);
            ctx.emit(&out, &io::wavepacket_table(&res.final_state), info)?;
            let series_path = out.with_extension("kinetic.csv");
            ctx.emit(
                &series_path,
                &io::kinetic_series_table(&res.kinetic_series),
                json!({ "pulse": pulse, "j_max": j, "dt": cfg.dt, "record_stride": cfg.record_stride }),
            )
        }
        Command::Quilt(a) => quilt(a),
        Command::Carpet(a) => {
            let mut ctx = Ctx::new("carpet", &a.packet.common)?;
            let (wp, kick) = packet_from_args(&mut ctx, &a.packet)?;
            let n_theta = ctx.cfg.get("n-theta", a.n_theta, 128usize)?;
            let n_tau = ctx.cfg.get("n-tau", a.n_tau, 501usize)?;
            let beta_max = ctx.cfg.get_opt("beta-max", a.beta_max)?;
            let fractions = ctx.cfg.get("fractions", a.fractions.clone(), String::new())?;
            let carpet = observables::carpet(&wp, n_theta, n_tau)?;
            let out = ctx.out(&a.packet.common)?;
            let mut info = json!({ "wavepacket": packet_info(&wp)?, "weights": carpet.weights });
            if let Some(beta_max) = beta_max {
                let fractions = parse_fractions(&fractions)?;
                let rays = reduced::ray_set(&wp, kick, beta_max, &fractions)?;
                let ray_path = out.with_extension("rays.json");
                io::write_json(&ray_path, &json!({ "run": ctx.run_record(), "rays": rays }))?;
                info["rays_file"] = json!(ray_path.file_name().map(|f| f.to_string_lossy()));
            }
            ctx.emit(&out, &io::carpet_table(&carpet), info)
        }
        Command::Series(a) => {
            let mut ctx = Ctx::new("series", &a.packet.common)?;
            let (wp, _) = packet_from_args(&mut ctx, &a.packet)?;
            let n_tau = ctx.cfg.get("n-tau", a.n_tau, 1001usize)?;
            if n_tau == 0 {
                return Err(input("--n-tau must be >= 1".into()));
            }
            let series = ObservableSeries::compute(&wp, &observables::revival_grid(n_tau))?;
            let out = ctx.out(&a.packet.common)?;
            let info = json!({
                "wavepacket": packet_info(&wp)?,
                "alignment_pop": series.alignment_pop,
                "kinetic": series.kinetic,
                "time_averaged_orientation": observables::time_averaged_orientation(&wp)?,
            });
            ctx.emit(&out, &io::series_table(&series), info)
        }
        Command::Spectrum(a) => {
            let mut ctx = Ctx::new("spectrum", &a.common)?;
            let (wp, _) = packet_from_args(&mut ctx, &a)?;
            let spectra = [
                observables::line_spectrum(&wp, Observable::Orientation)?,
                observables::line_spectrum(&wp, Observable::Alignment)?,
            ];
            let out = ctx.out(&a.common)?;
            ctx.emit(&out, &io::spectrum_table(&spectra), json!({ "wavepacket": packet_info(&wp)? }))
        }
        Command::Resonance(a) => {
            let mut ctx = Ctx::new("resonance", &a.common)?;
            let kick = ctx.kick(&a.common)?;
            let (range, n, engine, opts) = scan_settings(&mut ctx, &a)?;
            let scan = reduced::resonance_scan_with(kick, range, n, engine, &opts)?;
            let out = ctx.out(&a.common)?;
            let list: Vec<MapEntry> = scan
                .resonances
                .iter()
                .map(|r| MapEntry { p_eta: kick.p_eta, sigma_r: r.sigma, order: r.order })
                .collect();
            ctx.emit(&out, &io::scan_table(&scan), json!({ "kick": kick, "options": opts }))?;
            ctx.emit(
                &out.with_extension("resonances.csv"),
                &io::resonance_list_table(&list),
                json!({ "kick": kick, "resonances": scan.resonances }),
            )
        }
        Command::ResonanceMap(a) => {
            let mut ctx = Ctx::new("resonance-map", &a.common)?;
            let grid = ctx.cfg.get("p-eta", a.common.p_eta, Grid { lo: 0.5, hi: 12.0, n: 47 })?;
            let (range, n, engine, opts) = scan_settings(&mut ctx, &a)?;
            let map = reduced::resonance_map_with((grid.lo, grid.hi), grid.n, range, n, engine, &opts)?;
            let out = ctx.out(&a.common)?;
            let info = json!({ "options": opts, "estimated_period": reduced::estimate_period(&map) });
            ctx.emit(&out, &io::resonance_list_table(&map), info)
        }
    }
}

fn scan_settings(ctx: &mut Ctx, a: &crate::ResonanceArgs) -> Result<((f64, f64), usize, Engine, ScanOptions)> {
    let lo = ctx.cfg.get("sigma-min", a.sigma_min, 0.1)?;
    let hi = ctx.cfg.get("sigma-max", a.sigma_max, 10.0)?;
    let n = ctx.cfg.get("n", a.n, 100usize)?;
    let engine: Engine = ctx.cfg.get("engine", a.engine.clone(), "two-level".to_owned())?.parse()?;
    let mut opts = ScanOptions::default();
    opts.j_max = ctx.cfg.get("j-max", a.common.j_max, opts.j_max)?;
    Ok(((lo, hi), n, engine, opts))
}

fn parse_fractions(s: &str) -> Result<Vec<Fraction>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (num, den) = t.split_once('/').unwrap_or((t, "1"));
            match (num.trim().parse(), den.trim().parse()) {
                (Ok(n), Ok(d)) => Ok(Fraction::new(n, d)?),
                _ => Err(input(format!("bad fraction '{t}'"))),
            }
        })
        .collect()
}

/// Dominant-state summary of one quilt cell.
struct Cell {
    dominant_j: u32,
    dominant_pop: f64,
    j2: f64,
    tie: bool,
    top3: Vec<(u32, f64)>,
}

fn quilt_cell(kick: KickStrengths, sigma: Option<f64>, j_max: Option<u32>, tie_tol: f64) -> Result<Cell> {
    let wp = packet(InitialState::GROUND, kick, sigma, j_max)?;
    let mut pops = observables::populations(&wp);
    // descending population, smaller J first on exact ties
    pops.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let (dominant_j, dominant_pop) = pops[0];
    let tie = pops.get(1).is_some_and(|r| dominant_pop - r.1 <= tie_tol);
    Ok(Cell { dominant_j, dominant_pop, j2: observables::kinetic_energy(&wp), tie, top3: pops.into_iter().take(3).collect() })
}

fn quilt(a: crate::QuiltArgs) -> Result<()> {
    let mut ctx = Ctx::new("quilt", &a.common)?;
    let pe = ctx.cfg.get("p-eta", a.common.p_eta, Grid::point(0.0))?;
    let pz = ctx.cfg.get("p-zeta", a.common.p_zeta, Grid::point(0.0))?;
    let sigma = ctx.sigma(&a.common)?;
    let j_max = ctx.j_max(&a.common)?;
    let tie_tol = ctx.cfg.get("tie-tol", a.tie_tol, DEFAULT_TIE_TOLERANCE)?;
    let points: Vec<(f64, f64)> = pe.values().into_iter().flat_map(|x| pz.values().into_iter().map(move |y| (x, y))).collect();
    let cells: Vec<Result<Cell>> = points
        .par_iter()
        .map(|&(x, y)| quilt_cell(KickStrengths::new(x, y)?, sigma, j_max, tie_tol))
        .collect();

    let mut header = vec!["p_eta", "p_zeta", "dominant_j", "dominant_pop", "j2", "tie_flag"];
    header.extend(["top1_j", "top1_pop", "top2_j", "top2_pop", "top3_j", "top3_pop", "errors"]);
    let mut table = Table::new(&header);
    let mut failures = 0;
    let mut first_failure = None;
    for (&(x, y), cell) in points.iter().zip(cells) {
        let mut row = vec![io::fmt_f64(x), io::fmt_f64(y)];
        match cell {
            Ok(c) => {
                row.extend([c.dominant_j.to_string(), io::fmt_f64(c.dominant_pop), io::fmt_f64(c.j2)]);
                row.push(u8::from(c.tie).to_string());
                for k in 0..3 {
                    match c.top3.get(k) {
                        Some((j, p)) => row.extend([j.to_string(), io::fmt_f64(*p)]),
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                row.push(String::new());
            }
            Err(e) => {
                failures += 1;
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(format!("{e:#}"));
                first_failure.get_or_insert(e);
            }
        }
        table.row(row)?;
    }
    let out = ctx.out(&a.common)?;
    ctx.emit(&out, &table, json!({ "cells": points.len(), "failed_cells": failures, "tie_tolerance": tie_tol }))?;
    if failures == points.len() {
        let e = first_failure.expect("at least one cell");
        bail!(e.context("every quilt cell failed"));
    }
    Ok(())
}
