use std::collections::BTreeMap;

use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use serde::Serialize;

use super::{g_condition, g_intervene, GaussianKernel, GaussianMeasure, GaussianMechanism, GaussianSpace};
use crate::error::{Error, Result};

/// Kernel on two coordinates that fixes `from` and draws the other as
/// `N(intercept + slope · x, var)`.
fn two_coordinate_kernel(from: usize, intercept: f64, slope: f64, var: f64) -> GaussianKernel {
    let other = 1 - from;
    let mut coeff = DMatrix::zeros(2, 1);
    coeff[(from, 0)] = 1.0;
    coeff[(other, 0)] = slope;
    let mut offset = DVector::zeros(2);
    offset[other] = intercept;
    let mut noise_cov = DMatrix::zeros(2, 2);
    noise_cov[(other, other)] = var;
    GaussianKernel { from: vec![from], coeff, offset, noise_cov }
}

fn identity_kernel(n: usize) -> GaussianKernel {
    GaussianKernel {
        from: (0..n).collect(),
        coeff: DMatrix::identity(n, n),
        offset: DVector::zeros(n),
        noise_cov: DMatrix::zeros(n, n),
    }
}

fn pair_space(
    names: [&str; 2],
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    k0: GaussianKernel,
    k1: GaussianKernel,
) -> Result<GaussianSpace> {
    let mut table = BTreeMap::new();
    table.insert(vec![], GaussianKernel::conditional(&mean, &cov, &[])?);
    table.insert(vec![0], k0);
    table.insert(vec![1], k1);
    table.insert(vec![0, 1], identity_kernel(2));
    let gs = GaussianSpace::new(
        names.iter().map(|s| s.to_string()).collect(),
        mean,
        cov,
        GaussianMechanism::Table(table),
    )?;
    gs.validate()?;
    Ok(gs)
}

/// Altitude (metres) and mean daily temperature (°C).
///
/// Altitude drives temperature through its conditional; intervening on
/// temperature leaves altitude at its observational law.
pub fn altitude_temperature() -> Result<GaussianSpace> {
    let mean = dvector![1000.0, 10.0];
    let cov = dmatrix![300.0, -15.0; -15.0, 1.0];
    let k_altitude = GaussianKernel::conditional(&mean, &cov, &[0])?;
    let k_temperature = two_coordinate_kernel(1, 1000.0, 0.0, 300.0);
    pair_space(["altitude", "temperature"], mean, cov, k_altitude, k_temperature)
}

/// Amount of rice and its price, each driving the other.
///
/// `price | amount = a ∼ N(6 − a/2, 1/4)` and `amount | price = p ∼ N(1 + p/2, 1/4)`.
/// The observational law is a negatively correlated Gaussian that no kernel is
/// derived from.
pub fn rice_market() -> Result<GaussianSpace> {
    let mean = dvector![3.5, 5.0];
    let cov = dmatrix![0.25, -0.2; -0.2, 0.25];
    let k_amount = two_coordinate_kernel(0, 6.0, -0.5, 0.25);
    let k_price = two_coordinate_kernel(1, 1.0, 0.5, 0.25);
    pair_space(["amount", "price"], mean, cov, k_amount, k_price)
}

/// Standard Brownian motion on the grid `t_i = horizon · i / steps`, `i = 1..=steps`.
pub fn brownian_grid(steps: usize, horizon: f64) -> Result<GaussianSpace> {
    if steps < 2 {
        return Err(Error::Domain(format!("a Brownian grid needs at least 2 steps, got {steps}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let times: Vec<f64> = (1..=steps).map(|i| horizon * i as f64 / steps as f64).collect();
    let cov = DMatrix::from_fn(steps, steps, |i, j| times[i].min(times[j]));
    GaussianSpace::new(
        times.iter().map(|t| format!("W({t})")).collect(),
        DVector::zeros(steps),
        cov,
        GaussianMechanism::BrownianMarkov { times },
    )
}

/// One grid time of the intervene-versus-condition comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrownianComparison {
    pub time: f64,
    pub mean_intervened: f64,
    pub var_intervened: f64,
    pub mean_conditioned: f64,
    pub var_conditioned: f64,
}

/// Moments along the grid after setting `W(at) = value` by intervention and by conditioning.
pub fn brownian_comparison(steps: usize, horizon: f64, at: f64, value: f64) -> Result<Vec<BrownianComparison>> {
    let gs = brownian_grid(steps, horizon)?;
    let GaussianMechanism::BrownianMarkov { times } = &gs.mechanism else {
        unreachable!("brownian_grid builds a Markov mechanism");
    };
    let tol = 1e-9 * horizon;
    let idx = times
        .iter()
        .position(|t| (t - at).abs() <= tol)
        .ok_or_else(|| Error::Domain(format!("time {at} is not on the grid of step {}", horizon / steps as f64)))?;
    let q = GaussianMeasure::dirac(vec![idx], dvector![value])?;
    let done = g_intervene(&gs, &q)?;
    let cond = g_condition(&gs, &[idx], &dvector![value])?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(i, &time)| BrownianComparison {
            time,
            mean_intervened: done.mean[i],
            var_intervened: done.cov[(i, i)],
            mean_conditioned: cond.mean[i],
            var_conditioned: cond.cov[(i, i)],
        })
        .collect())
}

pub const BROWNIAN_CSV_HEADER: &str = "time,mean_intervened,var_intervened,mean_conditioned,var_conditioned";

/// [`brownian_comparison`] as CSV with a header row; floats in shortest round-trip form.
pub fn brownian_csv(steps: usize, horizon: f64, at: f64, value: f64) -> Result<String> {
    let mut csv = format!("{BROWNIAN_CSV_HEADER}\n");
    for r in brownian_comparison(steps, horizon, at, value)? {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.time, r.mean_intervened, r.var_intervened, r.mean_conditioned, r.var_conditioned
        ));
    }
    Ok(csv)
}
