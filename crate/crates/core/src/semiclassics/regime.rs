use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::dynamics::Trajectory;
use super::self_trapping_criterion;
use crate::error::{Error, Result};
use crate::model::{assisted_tunneling, lambda_param};

/// Full oscillation periods a trajectory must span before it is classified.
pub const MIN_PERIODS: usize = 5;
/// `|⟨z⟩|` above this fraction of the amplitude means self-trapping.
pub const TRAPPED_FRACTION: f64 = 0.1;
/// `|⟨z⟩|` below this fraction of the amplitude means Josephson oscillation.
pub const JOSEPHSON_FRACTION: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Josephson,
    SelfTrapped,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub time_average_z: f64,
    pub classification: Regime,
    /// `(Λ/2) z₀² − √(1−z₀²) cos θ₀` at the initial state.
    pub criterion_lhs: f64,
    pub criterion_prediction: bool,
    /// The criterion is only established for `U > 0` and `J̃ > 0`.
    pub within_validity: bool,
    /// Complete oscillation periods used for the average; `None` for a rest point.
    pub periods: Option<usize>,
    /// `max_t |z(t)|`, the scale the thresholds are applied to.
    pub amplitude: f64,
}

/// Time-averages `z` over whole oscillation periods and compares the outcome
/// with the analytic criterion evaluated at the initial state.
pub fn classify_regime(traj: &Trajectory) -> Result<RegimeReport> {
    let params = &traj.params;
    let photon_number = traj.initial_photon_number();
    let start = traj.initial();
    let lambda = lambda_param(params, photon_number)?;
    let (criterion_lhs, criterion_prediction) =
        self_trapping_criterion(start.z, start.theta, lambda);
    let within_validity = params.u > 0.0 && assisted_tunneling(params, photon_number) > 0.0;
    if !within_validity {
        log::warn!("self-trapping criterion evaluated outside U > 0, J~ > 0");
    }

    let z: Vec<f64> = traj.z().collect();
    let amplitude = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (lo, hi) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));

    let (time_average_z, periods) = if hi - lo <= 1e-12 {
        (z.iter().sum::<f64>() / z.len() as f64, None)
    } else {
        // sign of dz/dt = -2 J~ sqrt(1-z^2) sin(theta)
        let slope: Vec<f64> = traj
            .states
            .iter()
            .map(|s| {
                let n_ph = s.photons.map_or(photon_number, |p| p.number());
                -assisted_tunneling(params, n_ph) * s.theta.sin()
            })
            .collect();
        let maxima = downward_crossings(&traj.times, &slope);
        if maxima.len() < MIN_PERIODS + 1 {
            return Err(Error::TooShortTrajectory {
                periods: maxima.len().saturating_sub(1),
                required: MIN_PERIODS,
            });
        }
        let (a, b) = (maxima[0], maxima[maxima.len() - 1]);
        (
            window_mean(&traj.times, &z, a, b),
            Some(maxima.len() - 1),
        )
    };

    let mean = time_average_z.abs();
    let classification = if mean > TRAPPED_FRACTION * amplitude {
        Regime::SelfTrapped
    } else if mean < JOSEPHSON_FRACTION * amplitude || amplitude == 0.0 {
        Regime::Josephson
    } else {
        Regime::Boundary
    };

    Ok(RegimeReport {
        time_average_z,
        classification,
        criterion_lhs,
        criterion_prediction,
        within_validity,
        periods,
        amplitude,
    })
}

/// Interpolated times where `f` changes sign from positive to non-positive.
fn downward_crossings(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..f.len().saturating_sub(1) {
        if f[i] > 0.0 && f[i + 1] <= 0.0 {
            let frac = f[i] / (f[i] - f[i + 1]);
            out.push(t[i] + frac * (t[i + 1] - t[i]));
        }
    }
    out
}

/// Trapezoidal mean of the piecewise-linear interpolant of `y` over `[a, b]`.
fn window_mean(t: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let interp = |x: f64| {
        let i = t.partition_point(|&ti| ti <= x).clamp(1, t.len() - 1);
        let w = (x - t[i - 1]) / (t[i] - t[i - 1]);
        y[i - 1] + w * (y[i] - y[i - 1])
    };
    let mut knots = vec![(a, interp(a))];
    knots.extend(
        t.iter()
            .zip(y)
            .filter(|(ti, _)| **ti > a && **ti < b)
            .map(|(ti, yi)| (*ti, *yi)),
    );
    knots.push((b, interp(b)));
    let area: f64 = knots
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    area / (b - a)
}

/// Dominant angular frequency of a uniformly sampled signal, from the peak
/// of its Hann-windowed spectrum refined by a log-parabolic fit.
pub fn measured_angular_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 8 || times.len() != n {
        return Err(Error::InvalidGrid {
            name: "samples",
            reason: format!("need at least 8 matching samples, got {n}"),
        });
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return Err(Error::InvalidGrid {
            name: "samples",
            reason: "spectral analysis needs uniform sampling".into(),
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (TAU * i as f64 / (n - 1) as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mag.len())
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .expect("spectrum has at least three bins");
    let offset = if k + 1 < mag.len() && mag[k - 1] > 0.0 && mag[k + 1] > 0.0 {
        let (l, c, r) = (mag[k - 1].ln(), mag[k].ln(), mag[k + 1].ln());
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            0.5 * (l - r) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(TAU * (k as f64 + offset) / (n as f64 * dt))
}
