use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::integrator::{Dopri5, IntegratorStats, OdeSystem, Tolerances};
use super::{classical_energy, full_rhs, pendulum};
use crate::error::{Error, Result};
use crate::export::num;
use crate::model::{
    assisted_tunneling, lambda_param, wrap_phase, PhotonState, SemiclassicalState, SystemParams,
};

/// Which equations of motion to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Photon field adiabatically eliminated; `ξ²` stays at `photon_number`.
    Reduced { photon_number: f64 },
    /// Cavity amplitude and phase evolve with the atoms.
    Full,
}

/// Where the trajectory is sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputGrid {
    /// `0, dt, 2dt, …` up to and including `t_end`.
    Uniform { dt: f64 },
    /// Explicit, strictly increasing sample times in `[0, t_end]`.
    Times(Vec<f64>),
}

impl OutputGrid {
    pub fn times(&self, t_end: f64) -> Result<Vec<f64>> {
        let bad = |reason: String| Error::InvalidGrid {
            name: "output_grid",
            reason,
        };
        match self {
            OutputGrid::Uniform { dt } => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(bad(format!("dt must be positive, got {dt}")));
                }
                let steps = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
                let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
                match times.last_mut() {
                    Some(last) if (t_end - *last).abs() <= 1e-9 * dt => *last = t_end,
                    _ => times.push(t_end),
                }
                Ok(times)
            }
            OutputGrid::Times(times) => {
                if times.is_empty() {
                    return Err(bad("no sample times".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(bad("sample times must be strictly increasing".into()));
                }
                if times[0] < 0.0 || times[times.len() - 1] > t_end {
                    return Err(bad(format!("sample times must lie in [0, {t_end}]")));
                }
                Ok(times.clone())
            }
        }
    }
}

/// Sampled solution of the mean-field equations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SemiclassicalState>,
    pub model: ModelKind,
    pub params: SystemParams,
    pub stats: IntegratorStats,
    /// For the reduced model, `max_t |H(t) − H(0)|` of the pendulum energy.
    pub energy_drift: Option<f64>,
}

impl Trajectory {
    pub fn z(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.z)
    }

    pub fn initial(&self) -> &SemiclassicalState {
        &self.states[0]
    }

    /// Photon number the atomic dynamics started with.
    pub fn initial_photon_number(&self) -> f64 {
        match self.model {
            ModelKind::Reduced { photon_number } => photon_number,
            ModelKind::Full => self.states[0].photons.map_or(0.0, |p| p.number()),
        }
    }

    /// Pendulum energy at every sample, when `Λ` is defined.
    pub fn energies(&self) -> Option<Vec<f64>> {
        let ModelKind::Reduced { photon_number } = self.model else {
            return None;
        };
        let lambda = lambda_param(&self.params, photon_number).ok()?;
        Some(
            self.states
                .iter()
                .map(|s| classical_energy(s.z, s.theta, lambda))
                .collect(),
        )
    }

    /// CSV with header `t,z,theta,xi,phi`; photon columns are empty for the reduced model.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,z,theta,xi,phi")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            match s.photons {
                Some(p) => writeln!(
                    w,
                    "{},{},{},{},{}",
                    num(*t),
                    num(s.z),
                    num(s.theta),
                    num(p.xi),
                    num(p.phi)
                )?,
                None => writeln!(w, "{},{},{},,", num(*t), num(s.z), num(s.theta))?,
            }
        }
        Ok(())
    }
}

/// Pointwise `|z_a(t) − z_b(t)|` of two trajectories on the same grid.
pub fn z_difference(a: &Trajectory, b: &Trajectory) -> Result<Vec<(f64, f64)>> {
    if a.times != b.times {
        return Err(Error::InvalidGrid {
            name: "output_grid",
            reason: "trajectories are sampled on different grids".into(),
        });
    }
    Ok(a
        .times
        .iter()
        .zip(a.z().zip(b.z()))
        .map(|(t, (za, zb))| (*t, (za - zb).abs()))
        .collect())
}

struct Reduced {
    un: f64,
    jt: f64,
}

impl OdeSystem<2> for Reduced {
    fn rhs(&self, _t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        let (dz, dtheta) = pendulum(y[0], y[1], self.un, self.jt, 0.0)?;
        Ok([dz, dtheta])
    }

    fn admissible(&self, y: &[f64; 2]) -> bool {
        y[0].abs() < 1.0
    }

    fn magnitude(&self, i: usize, v: f64) -> f64 {
        angle_magnitude(i == 1, v)
    }
}

struct Full<'a> {
    params: &'a SystemParams,
}

impl OdeSystem<4> for Full<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let (a, b, c, d) = full_rhs(y[0], y[1], y[2], y[3], self.params)?;
        Ok([a, b, c, d])
    }

    fn admissible(&self, y: &[f64; 4]) -> bool {
        y[0].abs() < 1.0 && y[2] >= 0.0
    }

    fn magnitude(&self, i: usize, v: f64) -> f64 {
        angle_magnitude(i == 1 || i == 3, v)
    }
}

/// Phases are unbounded while running but only matter modulo 2π.
fn angle_magnitude(is_angle: bool, v: f64) -> f64 {
    if is_angle {
        v.abs().min(PI)
    } else {
        v.abs()
    }
}

/// Largest accepted `|H(t) − H(0)|` along a reduced trajectory.
pub const ENERGY_TOLERANCE: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 3;

/// Integrates the chosen equations of motion from `t = 0` to `t_end`.
///
/// Reduced runs whose pendulum energy drifts by more than
/// `ENERGY_TOLERANCE` are repeated with both tolerances divided by ten, at
/// most `MAX_REFINEMENTS` times; `stats.tolerances` records the final pair.
pub fn integrate(
    initial: &SemiclassicalState,
    params: &SystemParams,
    model: ModelKind,
    t_end: f64,
    grid: &OutputGrid,
    tol: Tolerances,
) -> Result<Trajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidGrid {
            name: "t_end",
            reason: format!("must be positive, got {t_end}"),
        });
    }
    if !(tol.rtol > 0.0 && tol.atol > 0.0) {
        return Err(Error::InvalidGrid {
            name: "tolerances",
            reason: "rtol and atol must be positive".into(),
        });
    }
    initial.validate()?;
    let times = grid.times(t_end)?;
    let solver = Dopri5::new(tol);

    let (states, stats) = match model {
        ModelKind::Reduced { photon_number } => {
            if !(photon_number.is_finite() && photon_number >= 0.0) {
                return Err(Error::InvalidState(format!(
                    "photon number must be non-negative, got {photon_number}"
                )));
            }
            let sys = Reduced {
                un: params.un(),
                jt: assisted_tunneling(params, photon_number),
            };
            let lambda = lambda_param(params, photon_number).ok();
            let mut solver = solver;
            let mut refinements = 0;
            loop {
                let (ys, stats) = solver.solve(&sys, 0.0, [initial.z, initial.theta], &times)?;
                let drift = lambda.map_or(0.0, |l| {
                    let e0 = classical_energy(ys[0][0], ys[0][1], l);
                    ys.iter()
                        .map(|y| (classical_energy(y[0], y[1], l) - e0).abs())
                        .fold(0.0, f64::max)
                });
                if drift <= ENERGY_TOLERANCE || refinements == MAX_REFINEMENTS {
                    if drift > ENERGY_TOLERANCE {
                        log::warn!("energy drift {drift:e} after {refinements} tolerance refinements");
                    }
                    let states = ys
                        .into_iter()
                        .map(|y| SemiclassicalState::atoms(y[0], y[1]))
                        .collect::<Vec<_>>();
                    break (states, stats);
                }
                refinements += 1;
                solver.tol.rtol *= 0.1;
                solver.tol.atol *= 0.1;
                log::debug!("energy drift {drift:e}, tightening to rtol {:e}", solver.tol.rtol);
            }
        }
        ModelKind::Full => {
            let photons = initial.photons.ok_or_else(|| {
                Error::InvalidState("full model needs an initial photon amplitude".into())
            })?;
            let sys = Full { params };
            let y0 = [initial.z, initial.theta, photons.xi, photons.phi];
            let (ys, stats) = solver.solve(&sys, 0.0, y0, &times)?;
            let states = ys
                .into_iter()
                .map(|y| SemiclassicalState {
                    z: y[0],
                    theta: wrap_phase(y[1]),
                    photons: Some(PhotonState::new(y[2], y[3])),
                })
                .collect::<Vec<_>>();
            (states, stats)
        }
    };

    let mut traj = Trajectory {
        times,
        states,
        model,
        params: params.clone(),
        stats,
        energy_drift: None,
    };
    traj.energy_drift = traj.energies().map(|e| {
        let e0 = e[0];
        e.iter().fold(0.0f64, |m, x| m.max((x - e0).abs()))
    });
    Ok(traj)
}
