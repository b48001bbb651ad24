//! Lowest eigenpair of a real symmetric tridiagonal matrix: Sturm-sequence
//! bisection for the eigenvalue, inverse iteration for the eigenvector.
//! Memory and time per sweep are linear in the dimension.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;
const MAX_INVERSE_ITERATIONS: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm.
    pub fn norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.off[i].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(0.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax.max(1.0)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Smallest eigenvalue to roughly machine precision relative to the norm.
    pub fn lowest_eigenvalue(&self) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = self.norm().max(f64::MIN_POSITIVE);
        let tol = 2.0 * f64::EPSILON * scale;
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `‖Tx − λx‖₂`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        self.matvec(x)
            .iter()
            .zip(x)
            .map(|(tx, xi)| (tx - lambda * xi).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Solves `(T − σI) x = b` in place by Gaussian elimination with partial
    /// pivoting. Exactly zero pivots are replaced by `tiny`.
    fn shifted_solve(&self, shift: f64, b: &mut [f64], tiny: f64) {
        let n = self.dim();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        if n == 1 {
            if d[0] == 0.0 {
                d[0] = tiny;
            }
            b[0] /= d[0];
            return;
        }
        let mut dl = self.off.clone();
        let mut du = self.off.clone();
        // second superdiagonal fill-in from row swaps
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                du[i] = temp;
                let tb = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tb - fact * b[i + 1];
            }
            dl[i] = 0.0;
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
    }

    /// Eigenvector for the eigenvalue estimate `lambda`, started from `seed`.
    /// Returns a unit vector with residual at most `tol · ‖T‖`.
    pub fn inverse_iteration(&self, lambda: f64, seed: &[f64], tol: f64) -> Result<Vec<f64>> {
        let norm = self.norm().max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * norm;
        let mut x = seed.to_vec();
        normalize(&mut x);
        let mut residual = f64::INFINITY;
        for it in 0..MAX_INVERSE_ITERATIONS {
            self.shifted_solve(lambda, &mut x, tiny);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::EigenConvergence {
                    residual: f64::NAN,
                    iterations: it + 1,
                });
            }
            normalize(&mut x);
            residual = self.residual(lambda, &x);
            if residual <= tol * norm && it >= 1 {
                return Ok(x);
            }
        }
        if residual <= tol * norm {
            Ok(x)
        } else {
            Err(Error::EigenConvergence {
                residual,
                iterations: MAX_INVERSE_ITERATIONS,
            })
        }
    }
}

pub(crate) fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}
