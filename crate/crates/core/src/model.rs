//! Model constants and the photon-dressed effective quantities derived from them.
//!
//! Energies are measured in units of the bare tunneling `J`, times in `ħ/J`
//! and frequencies in `J/ħ`; `ħ = 1` throughout, so the cavity detuning and
//! pump strength are stored directly as the energies `ħΔ_C` and `ħη`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All model constants of the two-mode junction coupled to a pumped cavity.
///
/// Construct with a struct literal and call [`SystemParams::validate`], or
/// deserialize (which validates).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsDocument", into = "ParamsDocument")]
pub struct SystemParams {
    /// Bare tunneling amplitude, positive.
    pub j: f64,
    /// On-site interaction.
    pub u: f64,
    /// Total number of atoms.
    pub n_atoms: usize,
    /// Symmetric AC-Stark shift per photon.
    pub w0: f64,
    /// Cavity-assisted tunneling per photon.
    pub w12: f64,
    /// Cavity detuning `ħΔ_C`.
    pub delta_c: f64,
    /// Pump amplitude `ħη`.
    pub eta: f64,
    /// Single-well on-site energy. Only shifts the energy by `ε·N`.
    pub epsilon: f64,
}

/// Flat JSON form of [`SystemParams`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDocument {
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "U")]
    u: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "W0", default)]
    w0: f64,
    #[serde(rename = "W12", default)]
    w12: f64,
    #[serde(rename = "hbar_DeltaC", default)]
    hbar_delta_c: f64,
    #[serde(rename = "hbar_eta", default)]
    hbar_eta: f64,
    #[serde(default)]
    epsilon: f64,
}

impl TryFrom<ParamsDocument> for SystemParams {
    type Error = Error;

    fn try_from(doc: ParamsDocument) -> Result<Self> {
        let params = SystemParams {
            j: doc.j,
            u: doc.u,
            n_atoms: doc.n,
            w0: doc.w0,
            w12: doc.w12,
            delta_c: doc.hbar_delta_c,
            eta: doc.hbar_eta,
            epsilon: doc.epsilon,
        };
        params.validate()?;
        Ok(params)
    }
}

impl From<SystemParams> for ParamsDocument {
    fn from(p: SystemParams) -> Self {
        ParamsDocument {
            j: p.j,
            u: p.u,
            n: p.n_atoms,
            w0: p.w0,
            w12: p.w12,
            hbar_delta_c: p.delta_c,
            hbar_eta: p.eta,
            epsilon: p.epsilon,
        }
    }
}

impl SystemParams {
    /// A junction without cavity: all photon couplings, detuning and pump are zero.
    pub fn bare(j: f64, u: f64, n_atoms: usize) -> Self {
        SystemParams {
            j,
            u,
            n_atoms,
            w0: 0.0,
            w12: 0.0,
            delta_c: 0.0,
            eta: 0.0,
            epsilon: 0.0,
        }
    }

    /// Checks the hard invariants. A sign mismatch between `W0` and `W12` is
    /// only logged, since both follow the sign of the atomic detuning but
    /// nothing numerical depends on it.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("J", self.j),
            ("U", self.u),
            ("W0", self.w0),
            ("W12", self.w12),
            ("hbar_DeltaC", self.delta_c),
            ("hbar_eta", self.eta),
            ("epsilon", self.epsilon),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParams {
                    field,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        if self.j <= 0.0 {
            return Err(Error::InvalidParams {
                field: "J",
                reason: format!("bare tunneling must be positive, got {}", self.j),
            });
        }
        if self.n_atoms < 1 {
            return Err(Error::InvalidParams {
                field: "N",
                reason: "need at least one atom".into(),
            });
        }
        if self.w0 * self.w12 < 0.0 {
            log::warn!(
                "W0 = {} and W12 = {} have opposite signs; both should follow the atomic detuning",
                self.w0,
                self.w12
            );
        }
        Ok(())
    }

    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    /// Interaction scale `UN`.
    pub fn un(&self) -> f64 {
        self.u * self.n()
    }

    /// Copy with a different on-site interaction.
    pub fn with_u(&self, u: f64) -> Self {
        SystemParams { u, ..self.clone() }
    }

    /// The constant `ε·N` dropped from every computation.
    pub fn onsite_shift(&self) -> f64 {
        self.epsilon * self.n()
    }
}

/// Coherent-state amplitude of the cavity field, `α = ξ e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonState {
    pub xi: f64,
    pub phi: f64,
}

impl PhotonState {
    pub fn new(xi: f64, phi: f64) -> Self {
        PhotonState {
            xi,
            phi: wrap_phase(phi),
        }
    }

    /// Mean photon number `ξ²`.
    pub fn number(&self) -> f64 {
        self.xi * self.xi
    }
}

/// Mean-field state: imbalance `z = (N₁−N₂)/N`, relative phase `θ = θ₂−θ₁`
/// and, for the full model, the cavity field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalState {
    pub z: f64,
    pub theta: f64,
    pub photons: Option<PhotonState>,
}

impl SemiclassicalState {
    pub fn atoms(z: f64, theta: f64) -> Self {
        SemiclassicalState {
            z,
            theta: wrap_phase(theta),
            photons: None,
        }
    }

    pub fn with_photons(z: f64, theta: f64, photons: PhotonState) -> Self {
        SemiclassicalState {
            z,
            theta: wrap_phase(theta),
            photons: Some(photons),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z.is_finite() && self.theta.is_finite()) {
            return Err(Error::InvalidState(format!(
                "non-finite z = {} or theta = {}",
                self.z, self.theta
            )));
        }
        if self.z.abs() > 1.0 {
            return Err(Error::InvalidState(format!("|z| = {} exceeds 1", self.z.abs())));
        }
        if let Some(p) = self.photons {
            if !(p.xi.is_finite() && p.phi.is_finite()) || p.xi < 0.0 {
                return Err(Error::InvalidState(format!(
                    "photon amplitude must be finite and non-negative, got xi = {}, phi = {}",
                    p.xi, p.phi
                )));
            }
        }
        Ok(())
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `J̃ = J − W₁₂·ξ²`.
pub fn assisted_tunneling(params: &SystemParams, photon_number: f64) -> f64 {
    params.j - params.w12 * photon_number
}

/// `Λ = UN / 2J̃`.
pub fn lambda_param(params: &SystemParams, photon_number: f64) -> Result<f64> {
    let jt = assisted_tunneling(params, photon_number);
    if jt == 0.0 {
        return Err(Error::ZeroTunneling);
    }
    Ok(params.un() / (2.0 * jt))
}

/// `ħδ_C = ħΔ_C − N(W₀ + W₁₂√(1−z²)cosθ)`.
pub fn effective_detuning(params: &SystemParams, z: f64, theta: f64) -> f64 {
    let overlap = (1.0 - z * z).max(0.0).sqrt() * theta.cos();
    params.delta_c - params.n() * (params.w0 + params.w12 * overlap)
}

/// Which detuning sets the steady-state photon amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonMode {
    /// Bare detuning, valid deep in the dispersive limit.
    Coarse,
    /// Atom-shifted detuning evaluated at the current atomic state.
    Refined,
}

/// Fixed point of `α̇ = iδα + η`, i.e. `α = iη/δ`, in polar form.
fn photon_fixed_point(eta: f64, detuning: f64) -> Result<PhotonState> {
    if detuning == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let xi = eta.abs() / detuning.abs();
    let sign = if eta < 0.0 { -detuning.signum() } else { detuning.signum() };
    Ok(PhotonState::new(xi, sign * FRAC_PI_2))
}

/// Steady cavity field for the given atomic state.
pub fn steady_photon_amplitude(
    params: &SystemParams,
    z: f64,
    theta: f64,
    mode: PhotonMode,
) -> Result<PhotonState> {
    let detuning = match mode {
        PhotonMode::Coarse => params.delta_c,
        PhotonMode::Refined => effective_detuning(params, z, theta),
    };
    photon_fixed_point(params.eta, detuning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Right panel of the self-trapping figure: ħΔ_C=300, NW0=4, NW12=3, UN=12, N=1000, ħη=3000.
    fn cavity_params() -> SystemParams {
        SystemParams {
            j: 1.0,
            u: 0.012,
            n_atoms: 1000,
            w0: 0.004,
            w12: 0.003,
            delta_c: 300.0,
            eta: 3000.0,
            epsilon: 0.0,
        }
    }

    #[test]
    fn assisted_tunneling_values() {
        let mut p = SystemParams::bare(1.0, 0.0, 1000);
        p.w12 = 0.03;
        assert_abs_diff_eq!(assisted_tunneling(&p, 25.0), 0.25, epsilon = 1e-12);
        assert_eq!(assisted_tunneling(&p, 0.0), 1.0);
        p.w12 = 0.003;
        // 1 - 0.003 * 103.43 = 0.68971
        assert_abs_diff_eq!(assisted_tunneling(&p, 103.43), 0.68971, epsilon = 1e-12);
    }

    #[test]
    fn lambda_values() {
        let p = cavity_params();
        assert_abs_diff_eq!(lambda_param(&p, 0.0).unwrap(), 6.0, epsilon = 1e-12);
        // 12 / (2 * 0.68971) = 8.69930...
        assert_abs_diff_eq!(lambda_param(&p, 103.43).unwrap(), 8.6993, epsilon = 1e-4);
        assert_eq!(lambda_param(&p.with_u(0.0), 0.0).unwrap(), 0.0);
        let mut q = p.clone();
        q.w12 = 0.01;
        assert!(matches!(lambda_param(&q, 100.0), Err(Error::ZeroTunneling)));
    }

    #[test]
    fn detuning_values() {
        let p = cavity_params();
        // 300 - 4 - 3 * sqrt(0.51)
        assert_abs_diff_eq!(effective_detuning(&p, 0.7, 0.0), 293.857571, epsilon = 1e-6);
        let mut empty = p.clone();
        empty.w0 = 0.0;
        empty.w12 = 0.0;
        assert_eq!(effective_detuning(&empty, 0.3, 1.1), 300.0);
        assert_abs_diff_eq!(effective_detuning(&p, 1.0, 2.0), 296.0, epsilon = 1e-12);
    }

    #[test]
    fn photon_amplitudes() {
        let p = cavity_params();
        let coarse = steady_photon_amplitude(&p, 0.7, 0.0, PhotonMode::Coarse).unwrap();
        assert_abs_diff_eq!(coarse.xi, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coarse.phi, FRAC_PI_2, epsilon = 1e-15);
        let refined = steady_photon_amplitude(&p, 0.7, 0.0, PhotonMode::Refined).unwrap();
        // 3000 / 293.857571
        assert_abs_diff_eq!(refined.xi, 10.209027, epsilon = 1e-6);
        let mut dark = p.clone();
        dark.eta = 0.0;
        let s = steady_photon_amplitude(&dark, 0.7, 0.0, PhotonMode::Refined).unwrap();
        assert_eq!(s.xi, 0.0);
        let mut red = p.clone();
        red.delta_c = -300.0;
        let s = steady_photon_amplitude(&red, 0.0, 0.0, PhotonMode::Coarse).unwrap();
        assert_abs_diff_eq!(s.phi, -FRAC_PI_2, epsilon = 1e-15);
        red.delta_c = 0.0;
        assert!(matches!(
            steady_photon_amplitude(&red, 0.0, 0.0, PhotonMode::Coarse),
            Err(Error::ZeroDetuning)
        ));
    }

    #[test]
    fn json_keys_are_exact() {
        let text = r#"{"J":1,"U":0.012,"N":1000,"W0":0.004,"W12":0.003,"hbar_DeltaC":300,"hbar_eta":3000,"epsilon":0.5}"#;
        let p: SystemParams = serde_json::from_str(text).unwrap();
        assert_eq!(p.n_atoms, 1000);
        assert_eq!(p.delta_c, 300.0);
        let back: SystemParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);

        let unknown = r#"{"J":1,"U":0,"N":10,"Delta":3}"#;
        assert!(serde_json::from_str::<SystemParams>(unknown).is_err());
        let bad_j = r#"{"J":-1,"U":0,"N":10}"#;
        assert!(serde_json::from_str::<SystemParams>(bad_j).is_err());
        let no_atoms = r#"{"J":1,"U":0,"N":0}"#;
        assert!(serde_json::from_str::<SystemParams>(no_atoms).is_err());
    }

    #[test]
    fn mixed_signs_only_warn() {
        let mut p = cavity_params();
        p.w0 = -0.004;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn phase_wrapping() {
        assert_eq!(wrap_phase(PI), PI);
        assert_abs_diff_eq!(wrap_phase(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(-1e-20), 0.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn tunneling_is_linear(w12 in -1.0f64..1.0, a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let mut p = SystemParams::bare(1.0, 0.0, 100);
            p.w12 = w12;
            let lhs = assisted_tunneling(&p, a + b) - p.j;
            let rhs = (assisted_tunneling(&p, a) - p.j) + (assisted_tunneling(&p, b) - p.j);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn detuning_even_in_z_and_theta(z in -1.0f64..1.0, theta in -PI..PI) {
            let p = cavity_params();
            let d = effective_detuning(&p, z, theta);
            prop_assert_eq!(d, effective_detuning(&p, -z, theta));
            prop_assert_eq!(d, effective_detuning(&p, z, -theta));
        }

        #[test]
        fn refined_approaches_coarse(delta in 20.0f64..1e5, z in -1.0f64..1.0, theta in -PI..PI) {
            let mut p = cavity_params();
            p.delta_c = delta;
            let coarse = steady_photon_amplitude(&p, z, theta, PhotonMode::Coarse).unwrap().xi;
            let refined = steady_photon_amplitude(&p, z, theta, PhotonMode::Refined).unwrap().xi;
            let shift = p.n() * (p.w0.abs() + p.w12.abs());
            let bound = shift / (delta - shift);
            prop_assert!((refined - coarse).abs() / coarse <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn wrapped_phase_in_range(x in -100.0f64..100.0) {
            let w = wrap_phase(x);
            prop_assert!(w > -PI && w <= PI);
            prop_assert!(((x - w) / TAU - ((x - w) / TAU).round()).abs() < 1e-9);
        }
    }
}
