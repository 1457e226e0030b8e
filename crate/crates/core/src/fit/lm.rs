//! Bounded Levenberg–Marquardt on weighted residuals.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// A parametric curve `y = f(x; p)`.
pub(crate) trait Model: Sync {
    fn eval(&self, x: f64, p: &[f64]) -> f64;
}

impl<F: Fn(f64, &[f64]) -> f64 + Sync> Model for F {
    fn eval(&self, x: f64, p: &[f64]) -> f64 {
        self(x, p)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Problem<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    /// Inverse variances.
    pub w: &'a [f64],
    /// Typical magnitude of each parameter; sets finite-difference steps.
    pub scale: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub params: Vec<f64>,
    pub chi2: f64,
    pub iterations: usize,
    /// J^T W J at the solution.
    pub normal: DMatrix<f64>,
}

pub(crate) const MAX_ITERATIONS: usize = 400;

impl Problem<'_> {
    fn clamp(&self, p: &mut [f64]) {
        for (j, v) in p.iter_mut().enumerate() {
            *v = v.clamp(self.lower[j], self.upper[j]);
        }
    }

    fn residuals(&self, m: &dyn Model, p: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .zip(self.w)
                .map(|((&x, &y), &w)| w.sqrt() * (y - m.eval(x, p))),
        )
    }

    /// Jacobian of the model (not the residual), weighted; central differences
    /// that step inward at a bound.
    fn jacobian(&self, m: &dyn Model, p: &[f64]) -> DMatrix<f64> {
        let n = self.x.len();
        let mut jac = DMatrix::zeros(n, p.len());
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = 1e-7 * p[j].abs().max(self.scale[j]);
            let hi = (p[j] + h).min(self.upper[j]);
            let lo = (p[j] - h).max(self.lower[j]);
            if hi <= lo {
                continue;
            }
            for i in 0..n {
                q[j] = hi;
                let a = m.eval(self.x[i], &q);
                q[j] = lo;
                let b = m.eval(self.x[i], &q);
                jac[(i, j)] = self.w[i].sqrt() * (a - b) / (hi - lo);
            }
            q[j] = p[j];
        }
        jac
    }

    pub fn solve(&self, m: &dyn Model, start: &[f64]) -> Result<Solution> {
        let mut p = start.to_vec();
        self.clamp(&mut p);
        let mut r = self.residuals(m, &p);
        let mut chi2 = r.norm_squared();
        if !chi2.is_finite() {
            return Err(Error::FitNonConvergence {
                iterations: 0,
                diagnostics: format!("non-finite residuals at start {p:?}"),
            });
        }
        let mut lambda = 1e-3;
        let mut quiet = 0;
        for it in 1..=MAX_ITERATIONS {
            let jac = self.jacobian(m, &p);
            let jtj = jac.transpose() * &jac;
            let mut g = jac.transpose() * &r;
            // Parameters pinned at a bound with the descent direction pointing
            // outward stay put for this step.
            let pinned: Vec<bool> = (0..p.len())
                .map(|j| {
                    (p[j] >= self.upper[j] && g[j] > 0.0) || (p[j] <= self.lower[j] && g[j] < 0.0)
                })
                .collect();
            for j in 0..p.len() {
                if pinned[j] {
                    g[j] = 0.0;
                }
            }
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj.clone();
                for j in 0..p.len() {
                    if pinned[j] {
                        a.row_mut(j).fill(0.0);
                        a.column_mut(j).fill(0.0);
                        a[(j, j)] = 1.0;
                    } else {
                        a[(j, j)] += lambda * jtj[(j, j)].max(1e-300);
                    }
                }
                let Some(step) = a.clone().cholesky().map(|c| c.solve(&g)) else {
                    lambda *= 10.0;
                    continue;
                };
                let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                self.clamp(&mut trial);
                let tr = self.residuals(m, &trial);
                let tchi2 = tr.norm_squared();
                if tchi2.is_finite() && tchi2 <= chi2 {
                    let moved = trial
                        .iter()
                        .zip(&p)
                        .enumerate()
                        .all(|(j, (a, b))| (a - b).abs() <= 1e-10 * (b.abs() + self.scale[j]));
                    let gain = chi2 - tchi2;
                    p = trial;
                    r = tr;
                    chi2 = tchi2;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if moved || gain <= 1e-10 * chi2 {
                        quiet += 1;
                    } else {
                        quiet = 0;
                    }
                    break;
                }
                lambda *= 4.0;
            }
            // No downhill step exists at any damping: a (local) minimum.
            if !accepted || quiet >= 3 || chi2 == 0.0 {
                let jac = self.jacobian(m, &p);
                return Ok(Solution {
                    params: p,
                    chi2,
                    iterations: it,
                    normal: jac.transpose() * jac,
                });
            }
        }
        Err(Error::FitNonConvergence {
            iterations: MAX_ITERATIONS,
            diagnostics: format!("chi2 = {chi2:.6e}, lambda = {lambda:.1e}, params = {p:?}"),
        })
    }
}

/// Covariance from the normal matrix by pseudo-inverse. Parameters with any
/// weight on a null direction get infinite variance.
pub(crate) fn covariance(normal: &DMatrix<f64>, factor: f64) -> (DMatrix<f64>, f64) {
    let n = normal.nrows();
    // Equilibrate so the condition number reflects shape, not units.
    let d: Vec<f64> = (0..n)
        .map(|j| {
            let v = normal[(j, j)];
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| normal[(i, j)] * d[i] * d[j]);
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let u = svd.u.expect("requested");
    let cut = smax * 1e-14;
    let mut cov = DMatrix::zeros(n, n);
    let mut null = vec![0.0; n];
    for k in 0..n {
        let s = svd.singular_values[k];
        if s > cut {
            let col = u.column(k);
            cov += (col * col.transpose()) / s;
        } else {
            for j in 0..n {
                null[j] += u[(j, k)].powi(2);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            cov[(i, j)] *= d[i] * d[j] * factor;
        }
        if null[i] > 1e-6 || normal[(i, i)] <= 0.0 {
            cov[(i, i)] = f64::INFINITY;
        }
    }
    (cov, condition)
}
