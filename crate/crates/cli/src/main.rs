mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Grid;

#[derive(Parser, Debug)]
#[command(name = "rotorkick", version, about = "Rigid-rotor dynamics under unipolar pulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact post-kick wavepacket (CSV `J,re,im,population`)
    Kick(KickArgs),
    /// Propagate through a Gaussian pulse; final packet plus `tau,J2_expect` series
    Propagate(PropagateArgs),
    /// Dominant-state map over a (P_eta, P_zeta) grid
    Quilt(QuiltArgs),
    /// Probability density |psi(theta, tau)|^2 over one revival
    Carpet(CarpetArgs),
    /// Orientation and alignment signals over one revival
    Series(SeriesArgs),
    /// Exact orientation and alignment line spectra
    Spectrum(PacketArgs),
    /// Post-pulse kinetic energy against pulse width, with detected resonances
    Resonance(ResonanceArgs),
    /// Resonance positions over a P_eta grid
    #[command(name = "resonance-map")]
    ResonanceMap(ResonanceArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Orienting kick strength (VALUE or LO:HI:N on grid commands)
    #[arg(long, value_name = "P")]
    pub p_eta: Option<Grid>,
    /// Aligning kick strength (VALUE or LO:HI:N on grid commands)
    #[arg(long, value_name = "P")]
    pub p_zeta: Option<Grid>,
    /// Pulse width; absent means the sudden (delta-kick) limit
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Largest rotational quantum number kept (default: chosen automatically)
    #[arg(long)]
    pub j_max: Option<u32>,
    /// Output file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Flat TOML file with defaults keyed by flag name
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct InitArgs {
    /// Initial rotational quantum number
    #[arg(long)]
    pub j0: Option<u32>,
    /// Initial azimuthal quantum number
    #[arg(long, allow_hyphen_values = true)]
    pub m0: Option<i32>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PacketArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub init: InitArgs,
}

#[derive(Args, Debug, Clone)]
pub struct KickArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Phase-factor expansion: quadrature or series
    #[arg(long)]
    pub method: Option<String>,
    /// k-shells kept by the series method
    #[arg(long)]
    pub k_max: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Time step (default: min(sigma/100, 0.25/E_jmax))
    #[arg(long)]
    pub dt: Option<f64>,
    /// Record every n-th step in the kinetic series
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct QuiltArgs {
    #[command(flatten)]
    pub common: Common,
    /// Runner-up populations within this of the dominant one set the tie flag
    #[arg(long)]
    pub tie_tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct CarpetArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Polar-angle samples (Gauss-Legendre nodes)
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Time samples over [0, pi]
    #[arg(long)]
    pub n_tau: Option<usize>,
    /// Emit the characteristic-ray overlay with reflection indices 0..=BETA_MAX
    #[arg(long)]
    pub beta_max: Option<u32>,
    /// Fractional-revival loci for the overlay, e.g. "1/2,1/4"
    #[arg(long)]
    pub fractions: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub packet: PacketArgs,
    /// Time samples over [0, pi]
    #[arg(long)]
    pub n_tau: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ResonanceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    /// Log-spaced pulse widths per scan (>= 50)
    #[arg(long)]
    pub n: Option<usize>,
    /// two-level or full
    #[arg(long)]
    pub engine: Option<String>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|c| c.downcast_ref::<rotorkick::Error>())
        .map_or(1, |e| if e.is_numerical() { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
