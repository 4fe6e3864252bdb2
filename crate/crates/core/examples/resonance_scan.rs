//! Post-pulse kinetic energy against pulse width for a moderate orienting kick.

use rotorkick::reduced::{resonance_scan, Engine};
use rotorkick::KickStrengths;

fn main() -> rotorkick::Result<()> {
    let kick = KickStrengths::new(1.5, 0.0)?;
    let scan = resonance_scan(kick, (0.1, 10.0), 100, Engine::Full)?;
    for (sigma, energy) in scan.sigmas.iter().zip(&scan.energies) {
        println!("{sigma:>10.5} {energy:.3e}");
    }
    for r in &scan.resonances {
        println!("resonance: sigma = {:.4}, order {}, {:.1} decades deep", r.sigma, r.order, r.depth_decades);
    }
    Ok(())
}
