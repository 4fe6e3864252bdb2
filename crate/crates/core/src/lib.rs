//! Quantum dynamics of a polar, polarizable rigid rotor driven by unipolar
//! pulses: exact δ-kick wavepackets, split-operator propagation for Gaussian
//! pulses, field-free observables, and reduced models.

pub mod error;
pub mod io;
pub mod observables;
pub mod propagator;
pub mod reduced;
pub mod specfun;
pub mod sudden;
pub mod wavepacket;

pub use error::{Error, Result};
pub use io::VERSION;
pub use observables::{Carpet, LineSpectrum, Observable, ObservableSeries};
pub use propagator::{GaussianPulse, PropagationResult, PropagatorConfig};
pub use reduced::{Engine, RaySet, ResonanceScan};
pub use sudden::{KickStrengths, PhaseExpansion};
pub use wavepacket::{InitialState, Wavepacket};

/// `(0..n).map(f)` evaluated on the worker pool when available; the output
/// order always follows the index.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
