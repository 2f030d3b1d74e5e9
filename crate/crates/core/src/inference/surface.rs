//! Temperature dependence of the surface noise S_E(T):
//! power law S0·(1 + T/T0)^β and Arrhenius S0 + S_T·exp(−T0/T).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

use super::dataset::NoisePoint;
use super::lm::{minimize, LmOptions, LmResult};
use super::matrix_rows;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SurfaceModel {
    PowerLaw { s_e0: f64, beta: f64, t0: f64 },
    Arrhenius { s_e0: f64, s_et: f64, t0: f64 },
}

impl SurfaceModel {
    pub fn evaluate(&self, t: f64) -> f64 {
        match *self {
            Self::PowerLaw { s_e0, beta, t0 } => s_e0 * (1.0 + t / t0).powf(beta),
            Self::Arrhenius { s_e0, s_et, t0 } => s_e0 + s_et * (-t0 / t).exp(),
        }
    }

    pub fn param_names(&self) -> [&'static str; 3] {
        match self {
            Self::PowerLaw { .. } => ["S_E0", "beta", "T0"],
            Self::Arrhenius { .. } => ["S_E0", "S_ET", "T0"],
        }
    }

    pub fn params(&self) -> [f64; 3] {
        match *self {
            Self::PowerLaw { s_e0, beta, t0 } => [s_e0, beta, t0],
            Self::Arrhenius { s_e0, s_et, t0 } => [s_e0, s_et, t0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFit {
    pub model: SurfaceModel,
    pub std_errors: [f64; 3],
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub chi2_red: f64,
    pub dof: usize,
    pub p_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFitParams {
    pub power_law: SurfaceFit,
    pub arrhenius: SurfaceFit,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    PowerLaw,
    Arrhenius,
}

/// Data with S_E divided by `scale` so amplitudes are of order one.
struct Scaled {
    t: Vec<f64>,
    s: Vec<f64>,
    sigma: Vec<f64>,
    scale: f64,
}

impl Scaled {
    fn model(&self, kind: Kind, p: &[f64], t: f64) -> f64 {
        match kind {
            Kind::PowerLaw => p[0] * (1.0 + t / p[2]).powf(p[1]),
            Kind::Arrhenius => p[0] + p[1] * (-p[2] / t).exp(),
        }
    }

    fn residuals(&self, kind: Kind, p: &[f64]) -> DVector<f64> {
        let bad = kind == Kind::PowerLaw && !(p[2] > 0.0);
        DVector::from_iterator(
            self.t.len(),
            (0..self.t.len()).map(|i| {
                if bad {
                    f64::NAN
                } else {
                    (self.s[i] - self.model(kind, p, self.t[i])) / self.sigma[i]
                }
            }),
        )
    }

    fn jacobian(&self, kind: Kind, p: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.t.len(), 3);
        for (i, &t) in self.t.iter().enumerate() {
            let w = -1.0 / self.sigma[i];
            match kind {
                Kind::PowerLaw => {
                    let base = 1.0 + t / p[2];
                    let pow = base.powf(p[1]);
                    j[(i, 0)] = w * pow;
                    j[(i, 1)] = w * p[0] * pow * base.ln();
                    j[(i, 2)] = w * p[0] * p[1] * pow / base * (-t / (p[2] * p[2]));
                }
                Kind::Arrhenius => {
                    let e = (-p[2] / t).exp();
                    j[(i, 0)] = w;
                    j[(i, 1)] = w * e;
                    j[(i, 2)] = w * p[1] * e * (-1.0 / t);
                }
            }
        }
        j
    }

    fn fit(&self, kind: Kind, start: &[f64]) -> Result<LmResult> {
        minimize(
            |p: &[f64]| self.residuals(kind, p),
            Some(|p: &[f64]| self.jacobian(kind, p)),
            start,
            &LmOptions::default(),
        )
    }

    /// Starting point for a fixed T0: the power law takes (S0, β) from a
    /// log-log regression and the Arrhenius model solves the linear problem
    /// in (S0, S_T).
    fn start(&self, kind: Kind, t0: f64) -> Option<Vec<f64>> {
        match kind {
            Kind::PowerLaw => {
                let (x, y, w): (Vec<f64>, Vec<f64>, Vec<f64>) = (0..self.t.len())
                    .filter(|&i| self.s[i] > 0.0)
                    .map(|i| ((1.0 + self.t[i] / t0).ln(), self.s[i].ln(), (self.s[i] / self.sigma[i]).powi(2)))
                    .fold((vec![], vec![], vec![]), |(mut a, mut b, mut c), (x, y, w)| {
                        a.push(x);
                        b.push(y);
                        c.push(w);
                        (a, b, c)
                    });
                if x.len() < 2 {
                    return None;
                }
                let (beta, ln_s0) = super::linear_regression(&x, &y, &w);
                Some(vec![ln_s0.exp(), beta, t0])
            }
            Kind::Arrhenius => {
                let mut a = DMatrix::zeros(self.t.len(), 2);
                let mut b = DVector::zeros(self.t.len());
                for i in 0..self.t.len() {
                    a[(i, 0)] = 1.0 / self.sigma[i];
                    a[(i, 1)] = (-t0 / self.t[i]).exp() / self.sigma[i];
                    b[i] = self.s[i] / self.sigma[i];
                }
                let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
                Some(vec![sol[0], sol[1], t0])
            }
        }
    }

    fn best(&self, kind: Kind, multipliers: &[f64]) -> Result<LmResult> {
        let t_mid = self.t[self.t.len() / 2];
        let results: Vec<Result<LmResult>> = multipliers
            .par_iter()
            .map(|m| {
                let start = self.start(kind, m * t_mid).ok_or_else(|| Error::invalid("no usable starting point"))?;
                self.fit(kind, &start)
            })
            .collect();
        let mut best: Option<LmResult> = None;
        let mut err = None;
        for r in results {
            match r {
                Ok(fit) if best.as_ref().is_none_or(|b| fit.cost < b.cost) => best = Some(fit),
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        }
        best.ok_or_else(|| err.expect("at least one start"))
    }

    fn finish(&self, kind: Kind, lm: LmResult) -> Result<SurfaceFit> {
        let mut cov = lm.covariance()?;
        // undo the amplitude scaling
        let amplitude: &[usize] = match kind {
            Kind::PowerLaw => &[0],
            Kind::Arrhenius => &[0, 1],
        };
        for &i in amplitude {
            cov.row_mut(i).scale_mut(self.scale);
            cov.column_mut(i).scale_mut(self.scale);
        }
        let p = &lm.params;
        let model = match kind {
            Kind::PowerLaw => SurfaceModel::PowerLaw { s_e0: p[0] * self.scale, beta: p[1], t0: p[2] },
            Kind::Arrhenius => SurfaceModel::Arrhenius { s_e0: p[0] * self.scale, s_et: p[1] * self.scale, t0: p[2] },
        };
        let dof = lm.dof();
        let p_value = if lm.cost == 0.0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).map_err(|e| Error::invalid(format!("χ² distribution: {e}")))?.sf(lm.cost)
        };
        Ok(SurfaceFit {
            model,
            std_errors: [0, 1, 2].map(|i| cov[(i, i)].max(0.0).sqrt()),
            covariance: matrix_rows(&cov),
            chi2: lm.cost,
            chi2_red: lm.chi2_red(),
            dof,
            p_value,
            iterations: lm.iterations,
        })
    }
}

/// Fit both surface-noise models with a few starts in T0 each.
pub fn fit_surface_models(curve: &[NoisePoint]) -> Result<SurfaceFitParams> {
    if curve.len() < 5 {
        return Err(Error::invalid(format!("surface fits need at least 5 points, got {}", curve.len())));
    }
    let mut pts = curve.to_vec();
    pts.sort_by(|a, b| {
        a.temperature.total_cmp(&b.temperature).then(a.s_e.total_cmp(&b.s_e)).then(a.sigma.total_cmp(&b.sigma))
    });
    for p in &pts {
        if !(p.temperature > 0.0 && p.sigma > 0.0 && p.s_e.is_finite()) {
            return Err(Error::domain(format!("invalid noise point {p:?}")));
        }
    }
    let scale = pts.iter().map(|p| p.s_e.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::invalid("all noise values are zero"));
    }
    let data = Scaled {
        t: pts.iter().map(|p| p.temperature).collect(),
        s: pts.iter().map(|p| p.s_e / scale).collect(),
        sigma: pts.iter().map(|p| p.sigma / scale).collect(),
        scale,
    };
    let multipliers = [0.1, 0.3, 1.0, 3.0];
    let power_law = data.finish(Kind::PowerLaw, data.best(Kind::PowerLaw, &multipliers)?)?;
    let arrhenius = data.finish(Kind::Arrhenius, data.best(Kind::Arrhenius, &multipliers)?)?;
    Ok(SurfaceFitParams { power_law, arrhenius })
}
