use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::self_trapping_criterion;
use crate::error::{Error, Result};
use crate::export::num;
use crate::model::{lambda_param, SystemParams};

/// Second axis of a self-trapping map; the first axis is always `z₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseAxis {
    /// On-site interaction values, with `θ₀` held at the fixed coordinate.
    U(Vec<f64>),
    /// Initial phases, with `U` held at the fixed coordinate.
    Theta(Vec<f64>),
}

impl PhaseAxis {
    pub fn values(&self) -> &[f64] {
        match self {
            PhaseAxis::U(v) | PhaseAxis::Theta(v) => v,
        }
    }
}

/// Criterion evaluated on a `z₀ × axis2` grid, stored row-major by `z₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub axis1: Vec<f64>,
    pub axis2: PhaseAxis,
    pub fixed: f64,
    pub photon_number: f64,
    pub lhs: Vec<f64>,
    pub trapped: Vec<bool>,
}

impl PhaseDiagram {
    pub fn get(&self, i1: usize, i2: usize) -> (f64, bool) {
        let k = i1 * self.axis2.values().len() + i2;
        (self.lhs[k], self.trapped[k])
    }

    pub fn trapped_fraction(&self) -> f64 {
        self.trapped.iter().filter(|t| **t).count() as f64 / self.trapped.len() as f64
    }

    /// CSV with header `axis1,axis2,lhs,trapped`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "axis1,axis2,lhs,trapped")?;
        let a2 = self.axis2.values();
        for (i, z0) in self.axis1.iter().enumerate() {
            for (j, v) in a2.iter().enumerate() {
                let (lhs, trapped) = self.get(i, j);
                writeln!(w, "{},{},{},{}", num(*z0), num(*v), num(lhs), trapped)?;
            }
        }
        Ok(())
    }
}

fn check_grid(name: &'static str, values: &[f64], bound: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid {
            name,
            reason: "empty".into(),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > bound) {
        return Err(Error::InvalidGrid {
            name,
            reason: format!("value {v} outside [-{bound}, {bound}]"),
        });
    }
    Ok(())
}

/// Evaluates the self-trapping criterion over a `(z₀, U)` or `(z₀, θ₀)` grid
/// at fixed photon number.
pub fn phase_diagram(
    params: &SystemParams,
    photon_number: f64,
    z_grid: &[f64],
    axis2: PhaseAxis,
    fixed: f64,
) -> Result<PhaseDiagram> {
    check_grid("axis1", z_grid, 1.0)?;
    match &axis2 {
        PhaseAxis::U(u) => {
            check_grid("axis2", u, f64::MAX)?;
            check_grid("fixed", &[fixed], PI)?;
        }
        PhaseAxis::Theta(th) => {
            check_grid("axis2", th, PI)?;
            check_grid("fixed", &[fixed], f64::MAX)?;
        }
    }

    let rows: Vec<Vec<(f64, bool)>> = z_grid
        .par_iter()
        .map(|&z0| {
            axis2
                .values()
                .iter()
                .map(|&v| {
                    let (u, theta0) = match axis2 {
                        PhaseAxis::U(_) => (v, fixed),
                        PhaseAxis::Theta(_) => (fixed, v),
                    };
                    let lambda = lambda_param(&params.with_u(u), photon_number)?;
                    Ok(self_trapping_criterion(z0, theta0, lambda))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let (lhs, trapped) = rows.into_iter().flatten().unzip();
    Ok(PhaseDiagram {
        axis1: z_grid.to_vec(),
        axis2,
        fixed,
        photon_number,
        lhs,
        trapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linspace;
    use proptest::prelude::*;

    fn fig2(w12n: f64) -> SystemParams {
        let mut p = SystemParams::bare(1.0, 0.0, 1000);
        p.w12 = w12n / 1000.0;
        p
    }

    #[test]
    fn bare_boundary_matches_closed_form() {
        let p = fig2(30.0);
        let z = linspace(0.0, 1.0, 41);
        let u = linspace(0.0, 0.02, 41);
        let d = phase_diagram(&p, 0.0, &z, PhaseAxis::U(u.clone()), 0.0).unwrap();
        for (i, z0) in z.iter().enumerate() {
            for (j, uu) in u.iter().enumerate() {
                let lhs = uu * 1000.0 * z0 * z0 / 4.0;
                let rhs = 1.0 + (1.0 - z0 * z0).sqrt();
                if (lhs - rhs).abs() > 1e-9 {
                    assert_eq!(d.get(i, j).1, lhs > rhs, "z0={z0} U={uu}");
                }
            }
        }
    }

    #[test]
    fn photons_widen_region() {
        let p = fig2(30.0);
        let z = linspace(0.0, 1.0, 50);
        let u = linspace(0.0, 0.02, 50);
        let bare = phase_diagram(&p, 0.0, &z, PhaseAxis::U(u.clone()), 0.0).unwrap();
        let dressed = phase_diagram(&p, 25.0, &z, PhaseAxis::U(u), 0.0).unwrap();
        assert!(dressed.trapped_fraction() > bare.trapped_fraction());
        for (a, b) in bare.trapped.iter().zip(&dressed.trapped) {
            assert!(!a || *b);
        }
    }

    #[test]
    fn no_interaction_no_trapping() {
        let p = fig2(30.0);
        let z = linspace(-1.0, 1.0, 21);
        let d = phase_diagram(&p, 0.0, &z, PhaseAxis::U(vec![0.0]), 0.0).unwrap();
        assert!(d.trapped.iter().all(|t| !t));
    }

    #[test]
    fn theta_axis_and_validation() {
        let p = fig2(30.0);
        let th = linspace(-PI, PI, 9);
        let d = phase_diagram(&p, 0.0, &[0.7], PhaseAxis::Theta(th), 0.012).unwrap();
        // theta0 = pi: 3 * 0.49 + sqrt(0.51) > 1
        assert!(d.get(0, 8).1);
        assert!(!d.get(0, 4).1);
        assert!(phase_diagram(&p, 0.0, &[1.5], PhaseAxis::U(vec![0.0]), 0.0).is_err());
        assert!(phase_diagram(&p, 0.0, &[], PhaseAxis::U(vec![0.0]), 0.0).is_err());
        assert!(phase_diagram(&p, 0.0, &[0.5], PhaseAxis::Theta(vec![4.0]), 0.0).is_err());
        let mut q = p.clone();
        q.w12 = 0.5;
        assert!(matches!(
            phase_diagram(&q, 2.0, &[0.5], PhaseAxis::U(vec![0.01]), 0.0),
            Err(Error::ZeroTunneling)
        ));
    }

    proptest! {
        #[test]
        fn trapping_is_monotone_in_interaction(
            z0 in -1.0f64..1.0,
            theta0 in -PI..PI,
            u1 in 0.0f64..0.05,
            du in 0.0f64..0.05,
        ) {
            let p = fig2(30.0);
            let d = phase_diagram(&p, 4.0, &[z0], PhaseAxis::U(vec![u1, u1 + du]), theta0).unwrap();
            prop_assert!(!d.get(0, 0).1 || d.get(0, 1).1);
        }
    }
}
