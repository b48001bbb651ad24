//! Exact diagonalization of the photon-dressed two-mode Hamiltonian in the
//! Fock basis `|n⟩ = |N−n, n⟩` (`n` atoms in the right well), and the
//! self-consistent cavity amplitude.

pub mod tridiag;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::num;
use crate::model::{assisted_tunneling, SystemParams};
use tridiag::{normalize, SymTridiagonal};

/// Residual bound of the returned eigenpair, relative to `‖H‖∞`.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Real symmetric tridiagonal Hamiltonian at fixed atom and photon number.
///
/// The constant `(ε + W₀|α|²)N` and the pure photon energy are left out;
/// they shift the spectrum without touching the eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModeHamiltonian {
    pub n_atoms: usize,
    pub u: f64,
    pub jtilde: f64,
    pub photon_number: f64,
    /// `(U/2)[(N−n)(N−n−1) + n(n−1)]`.
    pub diagonal: Vec<f64>,
    /// `−J̃√((N−n)(n+1))`, coupling `|n⟩ ↔ |n+1⟩`.
    pub offdiagonal: Vec<f64>,
    pub params: Option<SystemParams>,
}

impl TwoModeHamiltonian {
    pub fn new(n_atoms: usize, u: f64, jtilde: f64) -> Self {
        assert!(n_atoms >= 1, "need at least one atom");
        let n = n_atoms as f64;
        let diagonal = (0..=n_atoms)
            .map(|k| {
                let k = k as f64;
                0.5 * u * ((n - k) * (n - k - 1.0) + k * (k - 1.0))
            })
            .collect();
        let offdiagonal = (0..n_atoms)
            .map(|k| {
                let k = k as f64;
                -jtilde * ((n - k) * (k + 1.0)).sqrt()
            })
            .collect();
        TwoModeHamiltonian {
            n_atoms,
            u,
            jtilde,
            photon_number: 0.0,
            diagonal,
            offdiagonal,
            params: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn as_tridiagonal(&self) -> SymTridiagonal {
        SymTridiagonal::new(self.diagonal.clone(), self.offdiagonal.clone())
    }

    /// Restriction to parity-even vectors (`c_n = c_{N−n}`) of the gauge
    /// transformed matrix with non-positive couplings. Still tridiagonal.
    fn even_sector(&self) -> SymTridiagonal {
        let n = self.n_atoms;
        let d = &self.diagonal;
        let o: Vec<f64> = self.offdiagonal.iter().map(|v| -v.abs()).collect();
        let m = n / 2;
        if n % 2 == 0 {
            // basis (e_k + e_{N-k})/√2 for k < m, and e_m
            let diag = d[..=m].to_vec();
            let mut off = o[..m].to_vec();
            off[m - 1] *= std::f64::consts::SQRT_2;
            SymTridiagonal::new(diag, off)
        } else {
            // basis (e_k + e_{N-k})/√2 for k ≤ m; the last pair is adjacent
            let mut diag = d[..=m].to_vec();
            diag[m] += o[m];
            SymTridiagonal::new(diag, o[..m].to_vec())
        }
    }
}

/// `J̃`-dressed Hamiltonian at photon number `|α|²`.
pub fn build_hamiltonian(params: &SystemParams, photon_number: f64) -> TwoModeHamiltonian {
    let mut h = TwoModeHamiltonian::new(
        params.n_atoms,
        params.u,
        assisted_tunneling(params, photon_number),
    );
    h.photon_number = photon_number;
    h.params = Some(params.clone());
    h
}

/// Ground state `Σ c_n |n⟩`, real and normalized, with the largest-magnitude
/// coefficient positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub coeffs: Vec<f64>,
    pub energy: f64,
    pub u: f64,
    pub jtilde: f64,
    pub photon_number: f64,
    pub params: Option<SystemParams>,
}

impl GroundState {
    pub fn n_atoms(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c * c).collect()
    }

    /// CSV with header `n,c_n,abs_c_n_sq`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,c_n,abs_c_n_sq")?;
        for (n, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{},{},{}", n, num(*c), num(c * c))?;
        }
        Ok(())
    }

    /// Metadata block written next to the coefficient table.
    pub fn metadata(&self) -> GroundStateMetadata {
        GroundStateMetadata {
            params: self.params.clone(),
            n_atoms: self.n_atoms(),
            u: self.u,
            jtilde: self.jtilde,
            photon_number: self.photon_number,
            energy: self.energy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateMetadata {
    pub params: Option<SystemParams>,
    #[serde(rename = "N")]
    pub n_atoms: usize,
    #[serde(rename = "U")]
    pub u: f64,
    pub jtilde: f64,
    pub photon_number: f64,
    pub energy: f64,
}

/// Lowest eigenpair of the two-mode Hamiltonian.
///
/// The ground state is parity even after the gauge map `c_n → (−1)ⁿ c_n`
/// that flips the sign of `J̃`. Solving in that sector picks the symmetric
/// cat deterministically even when the lowest doublet is numerically
/// degenerate.
pub fn ground_state(h: &TwoModeHamiltonian) -> Result<GroundState> {
    let n = h.n_atoms;
    let sector = h.even_sector();
    let lambda = sector.lowest_eigenvalue();
    let seed = vec![1.0; sector.dim()];
    let half = sector.inverse_iteration(lambda, &seed, RESIDUAL_TOL)?;

    let mut coeffs = vec![0.0; n + 1];
    let m = n / 2;
    for (k, r) in half.iter().enumerate() {
        if n % 2 == 0 && k == m {
            coeffs[m] = *r;
        } else {
            let v = r * std::f64::consts::FRAC_1_SQRT_2;
            coeffs[k] = v;
            coeffs[n - k] = v;
        }
    }
    if h.jtilde < 0.0 {
        for c in coeffs.iter_mut().skip(1).step_by(2) {
            *c = -*c;
        }
    }
    normalize(&mut coeffs);
    let lead = coeffs
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, c)| if c.abs() > bv { (i, c.abs()) } else { (bi, bv) })
        .0;
    if coeffs[lead] < 0.0 {
        coeffs.iter_mut().for_each(|c| *c = -*c);
    }

    let full = h.as_tridiagonal();
    let residual = full.residual(lambda, &coeffs);
    if residual > 1e-10 * full.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::EigenConvergence {
            residual,
            iterations: 0,
        });
    }

    Ok(GroundState {
        coeffs,
        energy: lambda,
        u: h.u,
        jtilde: h.jtilde,
        photon_number: h.photon_number,
        params: h.params.clone(),
    })
}

/// `⟨b₁†b₂⟩ = Σ_{n≥1} c_{n−1} c_n √((N−n+1) n)`.
pub fn coherence_expectation(gs: &GroundState) -> f64 {
    let n = gs.n_atoms() as f64;
    gs.coeffs
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let k = (i + 1) as f64;
            w[0] * w[1] * ((n - k + 1.0) * k).sqrt()
        })
        .sum()
}

/// Damping applied to every update after the first.
pub const SELF_CONSISTENCY_DAMPING: f64 = 0.5;
pub const SELF_CONSISTENCY_RTOL: f64 = 1e-10;
pub const SELF_CONSISTENCY_MAX_ITER: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfConsistentState {
    pub photon_number: f64,
    pub ground_state: GroundState,
    pub iterations: usize,
}

/// `ħδ̃_C = ħΔ_C − W₀N − 2W₁₂⟨b₁†b₂⟩` on a given ground state.
pub fn dressed_detuning(params: &SystemParams, gs: &GroundState) -> f64 {
    params.delta_c - params.w0 * params.n() - 2.0 * params.w12 * coherence_expectation(gs)
}

/// Fixed point of `|α|² = η²/δ̃_C²`, where `δ̃_C` is evaluated on the ground
/// state of the Hamiltonian built at the current `|α|²`.
///
/// The first update is taken in full, later ones are damped. Convergence is
/// declared once the map leaves `|α|²` unchanged to `SELF_CONSISTENCY_RTOL`.
pub fn self_consistent_alpha(
    params: &SystemParams,
    initial_photon_number: f64,
) -> Result<SelfConsistentState> {
    if params.delta_c == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    if !(initial_photon_number.is_finite() && initial_photon_number >= 0.0) {
        return Err(Error::InvalidState(format!(
            "initial photon number must be non-negative, got {initial_photon_number}"
        )));
    }
    let map = |x: f64| -> Result<(f64, GroundState)> {
        let gs = ground_state(&build_hamiltonian(params, x))?;
        let delta = dressed_detuning(params, &gs);
        if delta == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok((params.eta * params.eta / (delta * delta), gs))
    };

    let mut x = initial_photon_number;
    let mut previous = x;
    for iterations in 0..=SELF_CONSISTENCY_MAX_ITER {
        let (target, gs) = map(x)?;
        let change = (target - x).abs();
        if change <= SELF_CONSISTENCY_RTOL * x.abs().max(target.abs()) {
            return Ok(SelfConsistentState {
                photon_number: x,
                ground_state: gs,
                iterations,
            });
        }
        previous = x;
        x = if iterations == 0 {
            target
        } else {
            SELF_CONSISTENCY_DAMPING * x + (1.0 - SELF_CONSISTENCY_DAMPING) * target
        };
    }
    Err(Error::SelfConsistency {
        last: x,
        previous,
        iterations: SELF_CONSISTENCY_MAX_ITER,
    })
}
