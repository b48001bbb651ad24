//! Fisher information, coherence visibility and entanglement entropy of a
//! two-mode ground state, and the entropy-peak crossover marker.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::num;
use crate::model::{assisted_tunneling, SystemParams};
use crate::spectra::{build_hamiltonian, coherence_expectation, ground_state, GroundState};

/// `(4/N²) Var(Ĵ_z)` with `Ĵ_z|n⟩ = (N−2n)/2 |n⟩`.
pub fn fisher(gs: &GroundState) -> f64 {
    let n = gs.n_atoms() as f64;
    let (m1, m2) = gs.coeffs.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (k, c)| {
        let jz = 0.5 * (n - 2.0 * k as f64);
        let p = c * c;
        (m1 + p * jz, m2 + p * jz * jz)
    });
    (4.0 / (n * n)) * (m2 - m1 * m1).max(0.0)
}

/// `(2/N) |⟨b₁†b₂⟩|`.
pub fn visibility(gs: &GroundState) -> f64 {
    2.0 * coherence_expectation(gs).abs() / gs.n_atoms() as f64
}

/// Shannon entropy of `|c_n|²` in bits.
pub fn entropy(gs: &GroundState) -> f64 {
    gs.coeffs
        .iter()
        .map(|c| c * c)
        .filter(|p| *p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRecord {
    #[serde(rename = "U")]
    pub u: f64,
    pub photon_number: f64,
    pub jtilde: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub alpha_v: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

impl IndicatorRecord {
    pub fn from_ground_state(gs: &GroundState) -> Self {
        IndicatorRecord {
            u: gs.u,
            photon_number: gs.photon_number,
            jtilde: gs.jtilde,
            f: fisher(gs),
            alpha_v: visibility(gs),
            s: entropy(gs),
        }
    }
}

/// CSV with header `U,photon_number,jtilde,F,alpha_v,S`.
pub fn write_records_csv<W: Write>(records: &[IndicatorRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "U,photon_number,jtilde,F,alpha_v,S")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(r.u),
            num(r.photon_number),
            num(r.jtilde),
            num(r.f),
            num(r.alpha_v),
            num(r.s)
        )?;
    }
    Ok(())
}

/// Indicators along a sorted `U` grid at fixed photon number, so `J̃` is the
/// same at every point.
pub fn sweep_indicators(
    params: &SystemParams,
    photon_number: f64,
    u_grid: &[f64],
) -> Result<Vec<IndicatorRecord>> {
    if u_grid.is_empty() {
        return Err(Error::InvalidGrid {
            name: "U",
            reason: "empty".into(),
        });
    }
    if u_grid.iter().any(|u| !u.is_finite()) || u_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid {
            name: "U",
            reason: "must be finite and sorted ascending".into(),
        });
    }
    if assisted_tunneling(params, photon_number) == 0.0 {
        return Err(Error::ZeroTunneling);
    }
    u_grid
        .par_iter()
        .map(|&u| {
            let p = params.with_u(u);
            ground_state(&build_hamiltonian(&p, photon_number))
                .map(|gs| IndicatorRecord::from_ground_state(&gs))
                .map_err(|e| Error::AtInteraction {
                    u,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Interaction strength at the entropy maximum, refined by a parabola
/// through the discrete maximum and its two neighbours.
pub fn locate_crossover(records: &[IndicatorRecord]) -> Result<f64> {
    let len = records.len();
    if len == 0 {
        return Err(Error::TooFewRecords { got: 0, required: 5 });
    }
    let k = (0..len)
        .max_by(|&a, &b| records[a].s.total_cmp(&records[b].s).then(b.cmp(&a)))
        .unwrap();
    if k == 0 || k == len - 1 {
        return Err(Error::MaximumAtBoundary { index: k, len });
    }
    if len < 5 {
        return Err(Error::TooFewRecords { got: len, required: 5 });
    }
    let u: Vec<f64> = records.iter().map(|r| r.u).collect();
    if u.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid {
            name: "U",
            reason: "records must be strictly increasing in U".into(),
        });
    }
    if u[0] < 0.0 && u[len - 1] > 0.0 {
        return Err(Error::InvalidGrid {
            name: "U",
            reason: "grid must not change sign".into(),
        });
    }

    let (x0, x1, x2) = (u[k - 1], u[k], u[k + 1]);
    let (y0, y1, y2) = (records[k - 1].s, records[k].s, records[k + 1].s);
    // y = A x^2 + B x + C through the three points
    let a = ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0);
    if !(a < 0.0) {
        return Ok(x1);
    }
    let b = (y1 - y0) / (x1 - x0) - a * (x0 + x1);
    Ok((-b / (2.0 * a)).clamp(x0, x2))
}
