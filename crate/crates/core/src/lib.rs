//! Mean-field dynamics, exact diagonalization and quantum indicators for a
//! bosonic Josephson junction in a driven optical cavity.
//!
//! Units: `ħ = 1`, energies in the same unit as the bare tunneling `J`.

pub mod error;
pub mod export;
pub mod indicators;
pub mod model;
pub mod semiclassics;
pub mod spectra;

pub use error::{Error, ErrorKind, Result};
pub use indicators::{
    entropy, fisher, locate_crossover, sweep_indicators, visibility, write_records_csv,
    IndicatorRecord,
};
pub use model::{
    assisted_tunneling, effective_detuning, lambda_param, steady_photon_amplitude, PhotonMode,
    PhotonState, SemiclassicalState, SystemParams,
};
pub use semiclassics::{
    classify_regime, integrate, phase_diagram, self_trapping_criterion,
    small_oscillation_frequency, ModelKind, OutputGrid, PhaseAxis, PhaseDiagram, Regime,
    RegimeReport, Tolerances, Trajectory,
};
pub use spectra::{
    build_hamiltonian, coherence_expectation, ground_state, self_consistent_alpha, GroundState,
    SelfConsistentState, TwoModeHamiltonian,
};

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                .collect()
        }
    }
}
