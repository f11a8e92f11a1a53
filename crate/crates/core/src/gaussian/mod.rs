//! Linear-Gaussian causal spaces.
//!
//! A kernel `K_S` maps an input `x_S` to `N(A_S x_S + b_S, Σ_S)` on all
//! coordinates. Interventions and conditionals then have closed forms.

mod fixtures;
mod sampling;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub use fixtures::{
    altitude_temperature, brownian_comparison, brownian_csv, brownian_grid, rice_market, BrownianComparison, BROWNIAN_CSV_HEADER,
};
pub use sampling::{monte_carlo_intervention, sample_measure, EmpiricalMoments};

/// Symmetry tolerance for covariance matrices.
pub const SYMMETRY_EPS: f64 = 1e-12;
/// Eigenvalues down to `-PSD_EPS` are accepted as rounding and clamped.
pub const PSD_EPS: f64 = 1e-10;
/// Eigenvalue cutoff below which a conditioning block counts as singular.
pub const SINGULAR_EPS: f64 = 1e-10;
/// Moment tolerance for structural checks.
pub const MOMENT_EPS: f64 = 1e-9;

/// Sorted, duplicate-free coordinate indices.
pub type Coords = Vec<usize>;

fn check_coords(n: usize, s: &[usize]) -> Result<()> {
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!("coordinates {s:?} must be strictly increasing")));
    }
    if let Some(&last) = s.last() {
        if last >= n {
            return Err(Error::Domain(format!("coordinate {last} out of range for {n} coordinates")));
        }
    }
    Ok(())
}

/// A Gaussian law, possibly degenerate, on a list of coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMeasure {
    pub coords: Coords,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianMeasure {
    pub fn new(coords: Coords, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let k = coords.len();
        if mean.len() != k || cov.nrows() != k || cov.ncols() != k {
            return Err(Error::Dimension(format!(
                "{k} coordinates but mean of length {} and a {}x{} covariance",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!("coordinates {coords:?} must be strictly increasing")));
        }
        check_psd(&cov)?;
        Ok(GaussianMeasure { coords, mean, cov })
    }

    pub fn dirac(coords: Coords, value: DVector<f64>) -> Result<Self> {
        let k = coords.len();
        Self::new(coords, value, DMatrix::zeros(k, k))
    }

    pub fn is_dirac(&self) -> bool {
        self.cov.iter().all(|&x| x == 0.0)
    }

    fn position(&self, t: usize) -> Result<usize> {
        self.coords
            .binary_search(&t)
            .map_err(|_| Error::Domain(format!("coordinate {t} is not in {:?}", self.coords)))
    }

    /// Mean and variance of one coordinate.
    pub fn moments(&self, t: usize) -> Result<(f64, f64)> {
        let i = self.position(t)?;
        Ok((self.mean[i], self.cov[(i, i)]))
    }

    pub fn marginal(&self, s: &[usize]) -> Result<GaussianMeasure> {
        let idx = s.iter().map(|&t| self.position(t)).collect::<Result<Vec<_>>>()?;
        Ok(GaussianMeasure {
            coords: s.to_vec(),
            mean: self.mean.select_rows(&idx),
            cov: self.cov.select_rows(&idx).select_columns(&idx),
        })
    }

    pub fn max_moment_diff(&self, other: &GaussianMeasure) -> f64 {
        if self.coords != other.coords {
            return f64::INFINITY;
        }
        let dm = (&self.mean - &other.mean).amax();
        let dc = (&self.cov - &other.cov).amax();
        dm.max(dc)
    }
}

fn check_psd(cov: &DMatrix<f64>) -> Result<()> {
    let asym = (cov - cov.transpose()).amax();
    if asym > SYMMETRY_EPS * cov.amax().max(1.0) {
        return Err(Error::InvalidDistribution(format!("covariance is not symmetric (gap {asym:e})")));
    }
    if cov.nrows() > 0 {
        let min = SymmetricEigen::new(cov.clone()).eigenvalues.min();
        if min < -PSD_EPS * cov.amax().max(1.0) {
            return Err(Error::InvalidDistribution(format!(
                "covariance is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
    }
    Ok(())
}

/// Symmetric square root of a PSD matrix, negative rounding clamped to zero.
pub(crate) fn psd_sqrt(cov: &DMatrix<f64>) -> DMatrix<f64> {
    if cov.nrows() == 0 {
        return cov.clone();
    }
    let eig = SymmetricEigen::new(cov.clone());
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// `K_S(x_S, ·) = N(coeff · x_S + offset, noise_cov)` on all `n` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel {
    pub from: Coords,
    /// `n × |S|`.
    pub coeff: DMatrix<f64>,
    pub offset: DVector<f64>,
    /// `n × n`, positive semidefinite.
    pub noise_cov: DMatrix<f64>,
}

impl GaussianKernel {
    pub fn n(&self) -> usize {
        self.offset.len()
    }

    /// The row at input `x`.
    pub fn row(&self, x: &DVector<f64>) -> Result<GaussianMeasure> {
        if x.len() != self.from.len() {
            return Err(Error::Dimension(format!("kernel input has {} coordinates, got {}", self.from.len(), x.len())));
        }
        Ok(GaussianMeasure {
            coords: (0..self.n()).collect(),
            mean: &self.coeff * x + &self.offset,
            cov: self.noise_cov.clone(),
        })
    }

    /// Largest deviation from exact pass-through of the input coordinates.
    pub fn determinism_gap(&self) -> f64 {
        let mut gap: f64 = 0.0;
        for (k, &s) in self.from.iter().enumerate() {
            for j in 0..self.from.len() {
                let want = if j == k { 1.0 } else { 0.0 };
                gap = gap.max((self.coeff[(s, j)] - want).abs());
            }
            gap = gap.max(self.offset[s].abs());
            for i in 0..self.n() {
                gap = gap.max(self.noise_cov[(s, i)].abs()).max(self.noise_cov[(i, s)].abs());
            }
        }
        gap
    }

    /// The kernel `x_S ↦ ℙ(· | x_S)` of a Gaussian law on all coordinates.
    pub fn conditional(mean: &DVector<f64>, cov: &DMatrix<f64>, from: &[usize]) -> Result<Self> {
        let n = mean.len();
        check_coords(n, from)?;
        let rest: Vec<usize> = (0..n).filter(|t| from.binary_search(t).is_err()).collect();
        let k = from.len();
        let mut coeff = DMatrix::zeros(n, k);
        let mut offset = DVector::zeros(n);
        let mut noise_cov = DMatrix::zeros(n, n);
        for (j, &s) in from.iter().enumerate() {
            coeff[(s, j)] = 1.0;
        }
        let s_ss = cov.select_rows(from).select_columns(from);
        let gain = if k == 0 {
            DMatrix::zeros(rest.len(), 0)
        } else {
            let pinv = s_ss
                .clone()
                .pseudo_inverse(SINGULAR_EPS)
                .map_err(|e| Error::Internal(e.to_string()))?;
            cov.select_rows(&rest).select_columns(from) * pinv
        };
        let mu_s = mean.select_rows(from);
        let schur = cov.select_rows(&rest).select_columns(&rest) - &gain * cov.select_rows(from).select_columns(&rest);
        for (a, &r) in rest.iter().enumerate() {
            for j in 0..k {
                coeff[(r, j)] = gain[(a, j)];
            }
            offset[r] = mean[r] - (gain.row(a) * &mu_s)[0];
            for (b, &r2) in rest.iter().enumerate() {
                noise_cov[(r, r2)] = schur[(a, b)];
            }
        }
        symmetrize(&mut noise_cov);
        Ok(GaussianKernel { from: from.to_vec(), coeff, offset, noise_cov })
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m = (&*m + t) * 0.5;
}

/// How the kernels of a Gaussian space are produced.
#[derive(Clone, Debug)]
pub enum GaussianMechanism {
    /// One kernel per subset, keyed by its sorted coordinates.
    Table(BTreeMap<Coords, GaussianKernel>),
    /// Brownian motion observed at increasing `times`: the past before the
    /// earliest intervened time keeps its law; after each intervened time the
    /// path restarts from the intervened value.
    BrownianMarkov { times: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct GaussianSpace {
    pub names: Vec<String>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub mechanism: GaussianMechanism,
}

impl GaussianSpace {
    pub fn new(names: Vec<String>, mean: DVector<f64>, cov: DMatrix<f64>, mechanism: GaussianMechanism) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidSpace("a Gaussian space needs at least one coordinate".into()));
        }
        if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
            return Err(Error::Dimension(format!("{n} names, mean of length {}, {}x{} covariance", mean.len(), cov.nrows(), cov.ncols())));
        }
        check_psd(&cov)?;
        match &mechanism {
            GaussianMechanism::Table(t) => {
                for (s, k) in t {
                    check_coords(n, s)?;
                    if &k.from != s || k.n() != n || k.coeff.shape() != (n, s.len()) || k.noise_cov.shape() != (n, n) {
                        return Err(Error::Dimension(format!("kernel for {s:?} has the wrong shape")));
                    }
                }
            }
            GaussianMechanism::BrownianMarkov { times } => {
                if times.len() != n || times.windows(2).any(|w| w[0] >= w[1]) || times[0] <= 0.0 {
                    return Err(Error::InvalidSpace("Brownian times must be positive and increasing".into()));
                }
            }
        }
        Ok(GaussianSpace { names, mean, cov, mechanism })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|x| x == name)
    }

    pub fn p(&self) -> GaussianMeasure {
        GaussianMeasure {
            coords: (0..self.n()).collect(),
            mean: self.mean.clone(),
            cov: self.cov.clone(),
        }
    }

    pub fn kernel(&self, s: &[usize]) -> Result<GaussianKernel> {
        check_coords(self.n(), s)?;
        match &self.mechanism {
            GaussianMechanism::Table(t) => t
                .get(s)
                .cloned()
                .ok_or_else(|| Error::Domain(format!("no kernel stored for coordinates {s:?}"))),
            GaussianMechanism::BrownianMarkov { times } => Ok(brownian_kernel(times, s)),
        }
    }

    /// Checks `K_∅ = ℙ` and exact pass-through for every stored kernel (all
    /// singletons and the full set for a Markov mechanism).
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let subsets: Vec<Coords> = match &self.mechanism {
            GaussianMechanism::Table(t) => t.keys().cloned().collect(),
            GaussianMechanism::BrownianMarkov { .. } => std::iter::once(Vec::new())
                .chain((0..n).map(|t| vec![t]))
                .chain(std::iter::once((0..n).collect()))
                .collect(),
        };
        if !subsets.iter().any(Vec::is_empty) {
            return Err(Error::InvalidSpace("no kernel for the empty set".into()));
        }
        for s in subsets {
            let k = self.kernel(&s)?;
            check_psd(&k.noise_cov)?;
            let gap = k.determinism_gap();
            if gap > MOMENT_EPS {
                return Err(Error::InvalidSpace(format!("kernel {s:?} does not pass its inputs through (gap {gap:e})")));
            }
            if s.is_empty() {
                let gap = (&k.offset - &self.mean).amax().max((&k.noise_cov - &self.cov).amax());
                if gap > MOMENT_EPS {
                    return Err(Error::InvalidSpace(format!("K_∅ differs from ℙ (gap {gap:e})")));
                }
            }
        }
        Ok(())
    }
}

fn brownian_kernel(times: &[f64], s: &[usize]) -> GaussianKernel {
    let n = times.len();
    let mut coeff = DMatrix::zeros(n, s.len());
    let mut offset = DVector::zeros(n);
    let mut noise_cov = DMatrix::zeros(n, n);
    // anchor[i]: position in `s` of the latest intervened time at or before t_i
    let anchor: Vec<Option<usize>> = (0..n)
        .map(|i| s.iter().rposition(|&j| j <= i))
        .collect();
    for i in 0..n {
        match anchor[i] {
            Some(a) => coeff[(i, a)] = 1.0,
            None => offset[i] = 0.0,
        }
    }
    for i in 0..n {
        for k in 0..n {
            if anchor[i] != anchor[k] {
                continue;
            }
            let base = anchor[i].map_or(0.0, |a| times[s[a]]);
            noise_cov[(i, k)] = times[i].min(times[k]) - base;
        }
    }
    GaussianKernel { from: s.to_vec(), coeff, offset, noise_cov }
}

/// `ℙ^{do(U,q)}`: mean `A_U μ_q + b_U`, covariance `A_U Σ_q A_Uᵀ + Σ_U`.
pub fn g_intervene(gs: &GaussianSpace, q: &GaussianMeasure) -> Result<GaussianMeasure> {
    let k = gs.kernel(&q.coords)?;
    let mean = &k.coeff * &q.mean + &k.offset;
    let mut cov = &k.coeff * &q.cov * k.coeff.transpose() + &k.noise_cov;
    symmetrize(&mut cov);
    Ok(GaussianMeasure { coords: (0..gs.n()).collect(), mean, cov })
}

/// `ℙ(· | x_U = value)` by the Schur complement; the conditioned block must be
/// nonsingular.
pub fn g_condition(gs: &GaussianSpace, u: &[usize], value: &DVector<f64>) -> Result<GaussianMeasure> {
    check_coords(gs.n(), u)?;
    if value.len() != u.len() {
        return Err(Error::Dimension(format!("{} conditioning values for {} coordinates", value.len(), u.len())));
    }
    if !u.is_empty() {
        let block = gs.cov.select_rows(u).select_columns(u);
        let min = SymmetricEigen::new(block).eigenvalues.min();
        if min <= SINGULAR_EPS {
            return Err(Error::Singular(min));
        }
    }
    let k = GaussianKernel::conditional(&gs.mean, &gs.cov, u)?;
    k.row(value)
}
