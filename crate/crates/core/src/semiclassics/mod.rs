//! Mean-field dynamics of the junction: the two-variable pendulum equations
//! with a frozen photon number, the four-variable system with a dynamical
//! cavity field, and the analytic self-trapping criterion.

mod dynamics;
pub mod integrator;
mod phase;
mod regime;

pub use dynamics::{integrate, z_difference, ModelKind, OutputGrid, Trajectory};
pub use integrator::{Dopri5, IntegratorStats, OdeSystem, Tolerances};
pub use phase::{phase_diagram, PhaseAxis, PhaseDiagram};
pub use regime::{classify_regime, measured_angular_frequency, Regime, RegimeReport};

use crate::error::{Error, Result};
use crate::model::{assisted_tunneling, effective_detuning, SystemParams};

/// Time derivatives `(ż, θ̇)` of the pendulum equations at a fixed photon number.
///
/// `ż = −2J̃√(1−z²) sinθ`, `θ̇ = (UN + 2J̃ cosθ/√(1−z²)) z`.
pub fn reduced_rhs(z: f64, theta: f64, params: &SystemParams, photon_number: f64) -> Result<(f64, f64)> {
    pendulum(z, theta, params.un(), assisted_tunneling(params, photon_number), 0.0)
}

fn pendulum(z: f64, theta: f64, un: f64, jt: f64, xi: f64) -> Result<(f64, f64)> {
    let r2 = 1.0 - z * z;
    if r2 <= 0.0 {
        return Err(Error::Pole {
            what: "|z| = 1",
            z,
            xi,
        });
    }
    let root = r2.sqrt();
    let (s, c) = theta.sin_cos();
    Ok((-2.0 * jt * root * s, (un + 2.0 * jt * c / root) * z))
}

/// Time derivatives `(ż, θ̇, ξ̇, φ̇)` of the atom–cavity system.
///
/// The atomic part uses the instantaneous `ξ²`; the field obeys
/// `α̇ = iδ_C(z, θ) α + η` written in polar form.
pub fn full_rhs(
    z: f64,
    theta: f64,
    xi: f64,
    phi: f64,
    params: &SystemParams,
) -> Result<(f64, f64, f64, f64)> {
    let (dz, dtheta) = pendulum(z, theta, params.un(), assisted_tunneling(params, xi * xi), xi)?;
    let (s, c) = phi.sin_cos();
    let dxi = params.eta * c;
    let dphi = if params.eta == 0.0 {
        effective_detuning(params, z, theta)
    } else if xi <= 0.0 {
        return Err(Error::Pole {
            what: "xi = 0 with pump on",
            z,
            xi,
        });
    } else {
        effective_detuning(params, z, theta) - params.eta / xi * s
    };
    Ok((dz, dtheta, dxi, dphi))
}

/// Left-hand side of the self-trapping inequality and its verdict:
/// trapped when `(Λ/2) z₀² − √(1−z₀²) cos θ₀ > 1`.
pub fn self_trapping_criterion(z0: f64, theta0: f64, lambda: f64) -> (f64, bool) {
    let lhs = classical_energy(z0, theta0, lambda);
    (lhs, lhs > 1.0)
}

/// Conserved energy of the pendulum equations in units of `2J̃`:
/// `H = (Λ/2) z² − √(1−z²) cos θ`. The level `H = 1` is the separatrix.
pub fn classical_energy(z: f64, theta: f64, lambda: f64) -> f64 {
    0.5 * lambda * z * z - (1.0 - z * z).max(0.0).sqrt() * theta.cos()
}

/// Angular frequency of small oscillations about `(z, θ) = (0, 0)`:
/// `ω = √(2J̃(2J̃ + UN))`.
pub fn small_oscillation_frequency(params: &SystemParams, photon_number: f64) -> Result<f64> {
    let jt = assisted_tunneling(params, photon_number);
    let radicand = 2.0 * jt * (2.0 * jt + params.un());
    if radicand > 0.0 {
        Ok(radicand.sqrt())
    } else {
        Err(Error::NoSmallOscillations { radicand })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn fig3() -> SystemParams {
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
    fn reduced_rhs_values() {
        let p = fig3();
        assert_eq!(reduced_rhs(0.0, 0.0, &p, 0.0).unwrap(), (0.0, 0.0));
        let (dz, dth) = reduced_rhs(0.0, PI, &p, 0.0).unwrap();
        assert_abs_diff_eq!(dz, 0.0, epsilon = 1e-15);
        assert_eq!(dth, 0.0);
        let (dz, dth) = reduced_rhs(0.7, 0.0, &p, 0.0).unwrap();
        assert_eq!(dz, 0.0);
        // (12 + 2/sqrt(0.51)) * 0.7
        assert_abs_diff_eq!(dth, (12.0 + 2.0 / 0.51f64.sqrt()) * 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(dth, 10.36, epsilon = 5e-3);
        assert!(matches!(reduced_rhs(1.0, 0.3, &p, 0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn full_rhs_fixed_point() {
        let p = fig3();
        let delta = effective_detuning(&p, 0.0, 0.0);
        let xi = p.eta / delta;
        let (dz, dth, dxi, dphi) = full_rhs(0.0, 0.0, xi, FRAC_PI_2, &p).unwrap();
        assert_eq!((dz, dth), (0.0, 0.0));
        assert_abs_diff_eq!(dxi, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dphi, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn full_rhs_empty_cavity_rotates() {
        let mut p = fig3();
        p.eta = 0.0;
        p.w0 = 0.0;
        p.w12 = 0.0;
        let (_, _, dxi, dphi) = full_rhs(0.2, 0.4, 3.0, 0.0, &p).unwrap();
        assert_eq!(dxi, 0.0);
        assert_eq!(dphi, 300.0);
    }

    #[test]
    fn full_rhs_poles() {
        let p = fig3();
        assert!(matches!(full_rhs(0.1, 0.0, 0.0, 0.0, &p), Err(Error::Pole { .. })));
        assert!(matches!(full_rhs(-1.0, 0.0, 1.0, 0.0, &p), Err(Error::Pole { .. })));
    }

    #[test]
    fn criterion_values() {
        let (lhs, trapped) = self_trapping_criterion(0.7, 0.0, 6.0);
        // 3 * 0.49 - sqrt(0.51)
        assert_abs_diff_eq!(lhs, 0.755857, epsilon = 1e-6);
        assert!(!trapped);
        let (lhs, trapped) = self_trapping_criterion(0.7, 0.0, 8.70);
        assert_abs_diff_eq!(lhs, 1.417, epsilon = 1e-3);
        assert!(trapped);
        assert_eq!(self_trapping_criterion(0.0, 0.0, 17.0), (-1.0, false));
    }

    #[test]
    fn energy_values() {
        assert_eq!(classical_energy(0.0, 0.0, 3.0), -1.0);
        assert_abs_diff_eq!(classical_energy(0.7, 0.0, 6.0), 0.755857, epsilon = 1e-6);
        assert_abs_diff_eq!(classical_energy(0.0, PI, 6.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn small_oscillations() {
        let bare = SystemParams::bare(1.0, 0.0, 1000);
        assert_abs_diff_eq!(small_oscillation_frequency(&bare, 0.0).unwrap(), 2.0, epsilon = 1e-15);
        let mut inset = SystemParams::bare(1.0, 0.012e-3, 1000);
        inset.w12 = 0.03e-3;
        // sqrt(2 * (2 + 0.012))
        assert_abs_diff_eq!(
            small_oscillation_frequency(&inset, 0.0).unwrap(),
            4.024f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(small_oscillation_frequency(&inset, 0.0).unwrap(), 2.006, epsilon = 1e-3);
        // J~ -> 0+ at xi^2 = 1/W12
        let edge = 1.0 / inset.w12;
        let near = small_oscillation_frequency(&inset, edge * (1.0 - 1e-9)).unwrap();
        assert!(near < 1e-3);
        assert!(matches!(
            small_oscillation_frequency(&inset, edge),
            Err(Error::NoSmallOscillations { .. })
        ));
    }
}
