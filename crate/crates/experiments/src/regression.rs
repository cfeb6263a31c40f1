//! Monte Carlo risk of least squares with and without symmetrization.
//!
//! The domain is the carrier `X = {0..m-1}` of a permutation representation
//! with the uniform measure and orthonormal basis `φ_j = sqrt(m) 1{x = j}`.
//! The target is the constant function of unit norm, which is invariant.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use symavg_core::averaging::{
    apply_scheme, certify_weak, minimize_scheme, mix_seed, Certifier, MinimizeOptions,
};
use symavg_core::{AveragingScheme, Error, Group, Representation, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepChoice {
    Regular,
    Permutation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub group: String,
    pub rep: RepChoice,
    pub sigma: f64,
    pub n: usize,
    pub trials: usize,
    /// Target precision of the weak scheme; `None` uses the uniform scheme.
    pub eps: Option<f64>,
    pub seed: u64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            group: "signflip:2".into(),
            rep: RepChoice::Regular,
            sigma: 1.0,
            n: 400,
            trials: 2000,
            eps: Some(0.05),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RiskRow {
    pub estimator: &'static str,
    pub risk: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegressionReport {
    pub rows: Vec<RiskRow>,
    pub m: usize,
    pub m_triv: usize,
    pub n: usize,
    pub sigma: f64,
    /// Certified weak precision of the scheme actually used.
    pub eps: f64,
    pub scheme_size: usize,
    /// Trials redrawn because some domain point was never sampled.
    pub redraws: usize,
}

impl RegressionReport {
    pub fn risk(&self, estimator: &str) -> f64 {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator)
            .map(|r| r.risk)
            .unwrap_or(f64::NAN)
    }

    /// `estimator,risk,stderr,m,m_triv,n,sigma,eps` rows.
    pub fn csv(&self) -> String {
        let mut out = String::from("estimator,risk,stderr,m,m_triv,n,sigma,eps\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e}\n",
                r.estimator, r.risk, r.stderr, self.m, self.m_triv, self.n, self.sigma, self.eps
            ));
        }
        out
    }
}

fn build_rep(cfg: &RegressionConfig) -> Result<Representation> {
    let group = Arc::new(Group::from_spec(&cfg.group)?);
    match cfg.rep {
        RepChoice::Regular => Representation::regular(group),
        RepChoice::Permutation => Representation::permutation(group),
    }
}

/// Real part of a matrix whose imaginary part vanishes for permutation reps.
fn real(m: &symavg_core::linalg::CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// OLS coefficients from the normal equations, `None` if the design is
/// rank deficient.
fn ols(xs: &[usize], ys: &[f64], m: usize) -> Option<DVector<f64>> {
    let scale = (m as f64).sqrt();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (&x, &y) in xs.iter().zip(ys) {
        gram[(x, x)] += scale * scale;
        rhs[x] += scale * y;
    }
    gram.cholesky().map(|c| c.solve(&rhs))
}

pub fn regression_risk(cfg: &RegressionConfig) -> Result<RegressionReport> {
    if cfg.trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    if !(cfg.sigma >= 0.0) {
        return Err(Error::Usage("noise level must be nonnegative".into()));
    }
    let rho = build_rep(cfg)?;
    let m = rho.dim();
    if cfg.n < m {
        return Err(Error::Usage(format!(
            "n = {} is below the dimension {m}",
            cfg.n
        )));
    }
    let m_triv = rho.invariant_dimension()?;
    let group = rho.group().clone();
    let scheme = match cfg.eps {
        None => AveragingScheme::uniform(group.clone()),
        Some(eps) => {
            let opts = MinimizeOptions {
                seed: cfg.seed,
                ..MinimizeOptions::default()
            };
            minimize_scheme(&Certifier::Projector(&rho), eps, &opts)?.scheme
        }
    };
    let eps = certify_weak(&scheme, &rho)?;
    let projector = real(&rho.invariant_projector());
    let averaging = real(&apply_scheme(&scheme, &rho)?);
    let theta_star = DVector::from_element(m, 1.0 / (m as f64).sqrt());
    let noise = Normal::new(0.0, cfg.sigma).map_err(|e| Error::Usage(e.to_string()))?;

    let per_trial: Vec<([f64; 3], usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, t as u64, 0x7e9));
            let mut redraws = 0;
            loop {
                let xs: Vec<usize> = (0..cfg.n).map(|_| rng.random_range(0..m)).collect();
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|_| theta_star[0] * (m as f64).sqrt() + noise.sample(&mut rng))
                    .collect();
                let Some(theta) = ols(&xs, &ys, m) else {
                    redraws += 1;
                    continue;
                };
                let risk = |v: &DVector<f64>| (v - &theta_star).norm_squared();
                let exact = &projector * &theta;
                let weak = &averaging * &theta;
                return ([risk(&theta), risk(&exact), risk(&weak)], redraws);
            }
        })
        .collect();

    let stats = |k: usize| -> (f64, f64) {
        let vals: Vec<f64> = per_trial.iter().map(|(r, _)| r[k]).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = if vals.len() > 1 {
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean, (var / n).sqrt())
    };
    let rows = ["erm", "exact", "weak"]
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let (risk, stderr) = stats(k);
            RiskRow {
                estimator: name,
                risk,
                stderr,
            }
        })
        .collect();
    Ok(RegressionReport {
        rows,
        m,
        m_triv,
        n: cfg.n,
        sigma: cfg.sigma,
        eps,
        scheme_size: scheme.size(),
        redraws: per_trial.iter().map(|(_, r)| r).sum(),
    })
}
