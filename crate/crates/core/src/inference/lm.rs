//! Levenberg–Marquardt weighted least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative step of the central-difference Jacobian.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub ftol: f64,
    /// Stop when the relative step length falls below this.
    pub xtol: f64,
    /// Stop when the scaled gradient falls below this.
    pub gtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, ftol: 1e-15, xtol: 1e-12, gtol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Σ r².
    pub cost: f64,
    pub iterations: usize,
    /// Jacobian of the residuals at the optimum.
    pub jacobian: DMatrix<f64>,
}

impl LmResult {
    pub fn dof(&self) -> usize {
        self.residuals.len().saturating_sub(self.params.len())
    }

    /// χ²/(N − M); zero when there are no degrees of freedom.
    pub fn chi2_red(&self) -> f64 {
        match self.dof() {
            0 => 0.0,
            k => self.cost / k as f64,
        }
    }

    /// (JᵀJ)⁻¹ scaled by χ²_red.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let jtj = self.jacobian.transpose() * &self.jacobian;
        let inv = jtj.clone().cholesky().map(|c| c.inverse()).or_else(|| jtj.pseudo_inverse(1e-14).ok()).ok_or_else(
            || Error::Fit { iterations: self.iterations, reason: "singular normal matrix at optimum".into() },
        )?;
        Ok(inv * self.chi2_red())
    }
}

/// Central-difference Jacobian of `f` at `p`.
pub fn numeric_jacobian<F: Fn(&[f64]) -> DVector<f64>>(f: &F, p: &[f64]) -> DMatrix<f64> {
    let n = f(p).len();
    let mut jac = DMatrix::zeros(n, p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = FD_STEP * p[j].abs().max(FD_STEP);
        q[j] = p[j] + h;
        let fp = f(&q);
        q[j] = p[j] - h;
        let fm = f(&q);
        q[j] = p[j];
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    jac
}

fn cost_of(r: &DVector<f64>) -> f64 {
    if r.iter().all(|v| v.is_finite()) {
        r.norm_squared()
    } else {
        f64::INFINITY
    }
}

/// Minimise Σ r(p)² starting at `p0`. `jacobian` may be `None`, in which
/// case central differences are used. Steps that produce non-finite
/// residuals are rejected, which lets residual functions encode bounds.
pub fn minimize<R, J>(residuals: R, jacobian: Option<J>, p0: &[f64], opts: &LmOptions) -> Result<LmResult>
where
    R: Fn(&[f64]) -> DVector<f64>,
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    let jac = |p: &[f64]| match &jacobian {
        Some(j) => j(p),
        None => numeric_jacobian(&residuals, p),
    };
    let m = p0.len();
    let mut p = DVector::from_column_slice(p0);
    let mut r = residuals(p.as_slice());
    let mut cost = cost_of(&r);
    if !cost.is_finite() {
        return Err(Error::Fit { iterations: 0, reason: "non-finite residuals at the starting point".into() });
    }
    let mut lambda = 1e-3;
    let mut j = jac(p.as_slice());
    let finish = |p: DVector<f64>, r: DVector<f64>, cost: f64, iterations: usize, jacobian: DMatrix<f64>| LmResult {
        params: p.as_slice().to_vec(),
        residuals: r.as_slice().to_vec(),
        cost,
        iterations,
        jacobian,
    };
    for iteration in 1..=opts.max_iterations {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let scale: Vec<f64> = (0..m).map(|k| jtj[(k, k)].max(1e-300)).collect();
        let gmax = (0..m).map(|k| g[k].abs() / scale[k].sqrt()).fold(0.0, f64::max);
        if gmax <= opts.gtol * cost.sqrt().max(f64::MIN_POSITIVE) || cost == 0.0 {
            return Ok(finish(p, r, cost, iteration, j));
        }
        loop {
            let mut a = jtj.clone();
            for k in 0..m {
                a[(k, k)] += lambda * scale[k];
            }
            let step = a.cholesky().map(|c| c.solve(&(-&g)));
            if let Some(delta) = step {
                let p_new = &p + &delta;
                let r_new = residuals(p_new.as_slice());
                let cost_new = cost_of(&r_new);
                if cost_new < cost {
                    let reduction = (cost - cost_new) / cost;
                    let small_step = delta.norm() <= opts.xtol * (p.norm() + opts.xtol);
                    p = p_new;
                    r = r_new;
                    cost = cost_new;
                    j = jac(p.as_slice());
                    lambda = (lambda / 10.0).max(1e-15);
                    if reduction <= opts.ftol || small_step {
                        return Ok(finish(p, r, cost, iteration, j));
                    }
                    break;
                }
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                // no descent direction left at working precision
                return Ok(finish(p, r, cost, iteration, j));
            }
        }
    }
    Err(Error::Fit {
        iterations: opts.max_iterations,
        reason: format!("no convergence; cost {cost:e} at {:?}", p.as_slice()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fits_exponential_decay() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-0.7 * x).exp()).collect();
        let res =
            |p: &[f64]| DVector::from_iterator(xs.len(), xs.iter().zip(&ys).map(|(x, y)| y - p[0] * (-p[1] * x).exp()));
        let r = minimize(res, None::<fn(&[f64]) -> DMatrix<f64>>, &[1.0, 0.1], &LmOptions::default()).unwrap();
        assert_relative_eq!(r.params[0], 2.5, max_relative = 1e-9);
        assert_relative_eq!(r.params[1], 0.7, max_relative = 1e-9);
        assert!(r.cost < 1e-20);
    }

    #[test]
    fn rosenbrock_valley() {
        let res = |p: &[f64]| DVector::from_vec(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]);
        let r = minimize(res, None::<fn(&[f64]) -> DMatrix<f64>>, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        assert_relative_eq!(r.params[0], 1.0, max_relative = 1e-8);
        assert_relative_eq!(r.params[1], 1.0, max_relative = 1e-8);
    }

    #[test]
    fn numeric_jacobian_matches_analytic() {
        let f = |p: &[f64]| DVector::from_vec(vec![p[0] * p[1], p[0].sin(), p[1].exp()]);
        let j = numeric_jacobian(&f, &[0.3, -1.2]);
        assert_relative_eq!(j[(0, 0)], -1.2, max_relative = 1e-8);
        assert_relative_eq!(j[(0, 1)], 0.3, max_relative = 1e-8);
        assert_relative_eq!(j[(1, 0)], 0.3f64.cos(), max_relative = 1e-8);
        assert_relative_eq!(j[(2, 1)], (-1.2f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn reports_bad_start() {
        let res = |_: &[f64]| DVector::from_vec(vec![f64::NAN]);
        assert!(minimize(res, None::<fn(&[f64]) -> DMatrix<f64>>, &[0.0], &LmOptions::default()).is_err());
    }

    #[test]
    fn covariance_of_linear_fit() {
        // y = a + b x with unit weights: cov = s²·(XᵀX)⁻¹
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.1, 0.9, 2.2, 2.9];
        let res = |p: &[f64]| DVector::from_iterator(4, xs.iter().zip(&ys).map(|(x, y)| y - p[0] - p[1] * x));
        let r = minimize(res, None::<fn(&[f64]) -> DMatrix<f64>>, &[0.0, 0.0], &LmOptions::default()).unwrap();
        let cov = r.covariance().unwrap();
        let s2 = r.cost / 2.0;
        // (XᵀX)⁻¹ = [[0.7, -0.3], [-0.3, 0.2]]
        assert_relative_eq!(cov[(0, 0)], 0.7 * s2, max_relative = 1e-6);
        assert_relative_eq!(cov[(0, 1)], -0.3 * s2, max_relative = 1e-6);
        assert_relative_eq!(cov[(1, 1)], 0.2 * s2, max_relative = 1e-6);
    }
}
