//! Dormand–Prince 5(4) with step-size control and the standard fourth-order
//! continuous extension, on fixed-size state arrays.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem<const D: usize> {
    /// Right-hand side. An `Err` marks the point as outside the domain of the
    /// equations; the integrator rejects the step and retries with a smaller one.
    fn rhs(&self, t: f64, y: &[f64; D]) -> Result<[f64; D]>;

    /// Whether an accepted step may end at `y`.
    fn admissible(&self, _y: &[f64; D]) -> bool {
        true
    }

    /// Magnitude of component `i` that the relative tolerance is applied to.
    fn magnitude(&self, _i: usize, v: f64) -> f64 {
        v.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// Counters gathered over one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest scaled error norm among accepted steps (≤ 1 by construction).
    pub max_error_estimate: f64,
    pub tolerances: Tolerances,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub tol: Tolerances,
    /// Steps shorter than this abort the integration.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5::new(Tolerances::default())
    }
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (coef, k) in terms {
        if *coef != 0.0 {
            for i in 0..D {
                out[i] += h * coef * k[i];
            }
        }
    }
    out
}

/// Continuous extension over one accepted step.
struct Dense<const D: usize> {
    t0: f64,
    h: f64,
    r: [[f64; D]; 5],
}

impl<const D: usize> Dense<D> {
    fn eval(&self, t: f64) -> [f64; D] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut y = [0.0; D];
        for i in 0..D {
            let r = &self.r;
            y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        y
    }
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Dopri5 {
            tol,
            h_min: 1e-12,
            max_steps: 50_000_000,
        }
    }

    fn error_norm<const D: usize, S: OdeSystem<D>>(
        &self,
        sys: &S,
        y0: &[f64; D],
        y1: &[f64; D],
        err: &[f64; D],
    ) -> f64 {
        let mut acc = 0.0;
        for i in 0..D {
            let m = sys.magnitude(i, y0[i]).max(sys.magnitude(i, y1[i]));
            let sc = self.tol.atol + self.tol.rtol * m;
            acc += (err[i] / sc).powi(2);
        }
        (acc / D as f64).sqrt()
    }

    fn initial_step<const D: usize, S: OdeSystem<D>>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64; D],
        f0: &[f64; D],
        span: f64,
        stats: &mut IntegratorStats,
    ) -> f64 {
        let scale = |v: &[f64; D]| {
            let mut acc = 0.0;
            for i in 0..D {
                let sc = self.tol.atol + self.tol.rtol * y0[i].abs();
                acc += (v[i] / sc).powi(2);
            }
            (acc / D as f64).sqrt()
        };
        let d0 = scale(y0);
        let d1 = scale(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = axpy(y0, h0, &[(1.0, f0)]);
        stats.rhs_evaluations += 1;
        let Ok(f1) = sys.rhs(t0 + h0, &y1) else {
            return h0 * 0.1;
        };
        let mut diff = [0.0; D];
        for i in 0..D {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = scale(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Integrates from `(t0, y0)` and returns the solution at each of
    /// `outputs`, which must be non-decreasing and not before `t0`.
    pub fn solve<const D: usize, S: OdeSystem<D>>(
        &self,
        sys: &S,
        t0: f64,
        y0: [f64; D],
        outputs: &[f64],
    ) -> Result<(Vec<[f64; D]>, IntegratorStats)> {
        let mut stats = IntegratorStats {
            tolerances: self.tol,
            ..Default::default()
        };
        let mut samples = Vec::with_capacity(outputs.len());
        let Some(&t_end) = outputs.last() else {
            return Ok((samples, stats));
        };
        let mut next = 0;
        while next < outputs.len() && outputs[next] <= t0 {
            samples.push(y0);
            next += 1;
        }
        if next == outputs.len() {
            return Ok((samples, stats));
        }

        let mut t = t0;
        let mut y = y0;
        let mut k1 = sys.rhs(t, &y)?;
        stats.rhs_evaluations += 1;
        let mut h = self.initial_step(sys, t, &y, &k1, t_end - t0, &mut stats);
        let mut last_rejected = false;

        while next < outputs.len() {
            if stats.accepted_steps + stats.rejected_steps >= self.max_steps {
                return Err(Error::TooManySteps {
                    t,
                    max_steps: self.max_steps,
                });
            }
            if h < self.h_min {
                return Err(Error::StepUnderflow {
                    t,
                    h,
                    h_min: self.h_min,
                });
            }
            let h_step = h.min(t_end - t);
            match self.attempt(sys, t, &y, &k1, h_step, &mut stats) {
                Ok(step) if step.err <= 1.0 && sys.admissible(&step.y_new) => {
                    let dense = step.dense(t, h_step, &y, &k1);
                    let (y_new, k7, err) = (step.y_new, step.k7, step.err);
                    let t_new = if h_step == t_end - t { t_end } else { t + h_step };
                    while next < outputs.len() && outputs[next] <= t_new {
                        let ts = outputs[next];
                        samples.push(if ts == t_new { y_new } else { dense.eval(ts) });
                        next += 1;
                    }
                    stats.accepted_steps += 1;
                    stats.max_error_estimate = stats.max_error_estimate.max(err);
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    let mut fac = SAFETY * err.max(1e-10).powf(-0.2);
                    fac = fac.clamp(FAC_MIN, FAC_MAX);
                    if last_rejected {
                        fac = fac.min(1.0);
                    }
                    h = h_step * fac;
                    last_rejected = false;
                }
                Ok(step) => {
                    stats.rejected_steps += 1;
                    let fac = if step.err.is_finite() && step.err > 1.0 {
                        (SAFETY * step.err.powf(-0.2)).max(FAC_MIN)
                    } else {
                        0.25
                    };
                    h = h_step * fac;
                    last_rejected = true;
                }
                Err(Error::Pole { .. }) => {
                    stats.rejected_steps += 1;
                    h = h_step * 0.25;
                    last_rejected = true;
                }
                Err(e) => return Err(e),
            }
        }
        Ok((samples, stats))
    }

    fn attempt<const D: usize, S: OdeSystem<D>>(
        &self,
        sys: &S,
        t: f64,
        y: &[f64; D],
        k1: &[f64; D],
        h: f64,
        stats: &mut IntegratorStats,
    ) -> Result<Step<D>> {
        stats.rhs_evaluations += 6;
        let k2 = sys.rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
        let k3 = sys.rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
        let k4 = sys.rhs(
            t + C4 * h,
            &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = sys.rhs(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = sys.rhs(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(t + h, &y_new)?;
        let mut err = [0.0; D];
        for i in 0..D {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let norm = self.error_norm(sys, y, &y_new, &err);
        Ok(Step {
            y_new,
            k3,
            k4,
            k5,
            k6,
            k7,
            err: if norm.is_nan() { f64::INFINITY } else { norm },
        })
    }
}

/// Result of one trial step.
struct Step<const D: usize> {
    y_new: [f64; D],
    k3: [f64; D],
    k4: [f64; D],
    k5: [f64; D],
    k6: [f64; D],
    k7: [f64; D],
    err: f64,
}

impl<const D: usize> Step<D> {
    fn dense(&self, t0: f64, h: f64, y0: &[f64; D], k1: &[f64; D]) -> Dense<D> {
        let mut r = [[0.0; D]; 5];
        for i in 0..D {
            let ydiff = self.y_new[i] - y0[i];
            let bspl = h * k1[i] - ydiff;
            r[0][i] = y0[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * self.k7[i] - bspl;
            r[4][i] = h
                * (D1 * k1[i]
                    + D3 * self.k3[i]
                    + D4 * self.k4[i]
                    + D5 * self.k5[i]
                    + D6 * self.k6[i]
                    + D7 * self.k7[i]);
        }
        Dense { t0, h, r }
    }
}
