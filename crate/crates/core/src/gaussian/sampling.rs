use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{psd_sqrt, GaussianMeasure, GaussianSpace};
use crate::error::{Error, Result};
use crate::harness::random::rng_for;

/// Sample mean and covariance (divisor `N − 1`).
#[derive(Clone, Debug)]
pub struct EmpiricalMoments {
    pub samples: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl EmpiricalMoments {
    /// Largest deviation from `target` in units of the standard error of each
    /// moment under `target` (`√(σ_ii/N)` for means, `√((σ_ii σ_jj + σ_ij²)/N)` for covariances).
    /// Entries with zero standard error must match to `1e-9`.
    pub fn max_standard_errors(&self, target: &GaussianMeasure) -> f64 {
        let n = self.samples as f64;
        let s = &target.cov;
        let mut worst: f64 = 0.0;
        let mut score = |diff: f64, se: f64| {
            let z = if se > 0.0 {
                diff.abs() / se
            } else if diff.abs() <= 1e-9 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        };
        for i in 0..self.mean.len() {
            score(self.mean[i] - target.mean[i], (s[(i, i)] / n).sqrt());
            for j in 0..self.mean.len() {
                let se = ((s[(i, i)] * s[(j, j)] + s[(i, j)].powi(2)) / n).sqrt();
                score(self.cov[(i, j)] - s[(i, j)], se);
            }
        }
        worst
    }
}

fn standard_normal<R: Rng>(rng: &mut R, k: usize) -> DVector<f64> {
    DVector::from_fn(k, |_, _| rng.sample(StandardNormal))
}

/// Draws from a Gaussian measure via its symmetric square root.
pub fn sample_measure<R: Rng>(rng: &mut R, m: &GaussianMeasure, root: &DMatrix<f64>) -> DVector<f64> {
    &m.mean + root * standard_normal(rng, m.mean.len())
}

/// Two-stage sampling of `ℙ^{do(U,q)}`: `x_U ∼ q`, then a draw from `K_U(x_U, ·)`.
pub fn monte_carlo_intervention(gs: &GaussianSpace, q: &GaussianMeasure, samples: usize, seed: u64) -> Result<EmpiricalMoments> {
    if samples < 2 {
        return Err(Error::Domain("at least two samples are required".into()));
    }
    let k = gs.kernel(&q.coords)?;
    let n = gs.n();
    let q_root = psd_sqrt(&q.cov);
    let k_root = psd_sqrt(&k.noise_cov);
    let mut rng = rng_for(seed);
    let mut sum = DVector::zeros(n);
    let mut cross = DMatrix::zeros(n, n);
    for _ in 0..samples {
        let xu = sample_measure(&mut rng, q, &q_root);
        let x = &k.coeff * xu + &k.offset + &k_root * standard_normal(&mut rng, n);
        sum += &x;
        cross.syger(1.0, &x, &x, 1.0);
    }
    // fill the upper triangle left untouched by the symmetric rank-one updates
    cross.fill_upper_triangle_with_lower_triangle();
    let m = samples as f64;
    let mean = sum / m;
    let cov = (cross - &mean * mean.transpose() * m) / (m - 1.0);
    Ok(EmpiricalMoments { samples, mean, cov })
}
