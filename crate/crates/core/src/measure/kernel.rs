use std::sync::Arc;

use crate::error::{Error, Result};

use super::dist::{normalize_weights, Dist, Event};
use super::space::{AtomIndex, FiniteProductSpace, SubsetMask};

/// A transition kernel from `(Ω, ℋ_from)` into `(Ω_target, ℋ_target)`: one
/// probability row over `Ω_target` per atom of `Ω_from`.
///
/// Causal kernels have `target = T`; the kernels of an internal mechanism
/// used in an intervention on `U` have `target = U`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    space: Arc<FiniteProductSpace>,
    from: SubsetMask,
    target: SubsetMask,
    row_len: usize,
    data: Vec<f64>,
}

/// A row whose `from`-marginal is not the Dirac measure at the row's own atom.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminismBreach {
    pub row: usize,
    /// The `from`-atom carrying the largest deviation from `δ_row`.
    pub atom: usize,
    pub deviation: f64,
}

impl Kernel {
    pub fn new(
        space: Arc<FiniteProductSpace>,
        from: SubsetMask,
        target: SubsetMask,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        space.check_mask(target)?;
        if !from.is_subset_of(target) {
            return Err(Error::Domain(format!(
                "kernel source {{{from}}} is not contained in its target {{{target}}}"
            )));
        }
        let n_rows = space.atoms(from);
        let row_len = space.atoms(target);
        if rows.len() != n_rows {
            return Err(Error::Dimension(format!(
                "kernel from {{{from}}} needs {n_rows} rows, got {}",
                rows.len()
            )));
        }
        let mut data = Vec::with_capacity(n_rows * row_len);
        for (i, mut row) in rows.into_iter().enumerate() {
            if row.len() != row_len {
                return Err(Error::Dimension(format!(
                    "kernel row {i} has {} entries, expected {row_len}",
                    row.len()
                )));
            }
            normalize_weights(&mut row)
                .map_err(|e| Error::InvalidDistribution(format!("kernel from {{{from}}}, row {i}: {e}")))?;
            data.extend(row);
        }
        Ok(Kernel { space, from, target, row_len, data })
    }

    /// Builds a kernel from one distribution per source atom.
    pub fn from_dists(space: Arc<FiniteProductSpace>, from: SubsetMask, target: SubsetMask, rows: Vec<Dist>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|d| d.domain() != target) {
            return Err(Error::Domain(format!(
                "kernel row on {{{}}} but target is {{{target}}}",
                bad.domain()
            )));
        }
        Kernel::new(space, from, target, rows.into_iter().map(Dist::into_weights).collect())
    }

    pub(crate) fn from_data(
        space: Arc<FiniteProductSpace>,
        from: SubsetMask,
        target: SubsetMask,
        data: Vec<f64>,
    ) -> Self {
        let row_len = space.atoms(target);
        debug_assert_eq!(data.len(), space.atoms(from) * row_len);
        Kernel { space, from, target, row_len, data }
    }

    /// The kernel every row of which equals `d`.
    pub fn constant(from: SubsetMask, d: &Dist) -> Result<Self> {
        let space = d.space().clone();
        let n = space.atoms(from);
        Kernel::new(space, from, d.domain(), vec![d.weights().to_vec(); n])
    }

    /// `ω_S ↦ d(· | ω_S)`: the conditional kernel of a full-support distribution.
    pub fn conditional(d: &Dist, from: SubsetMask) -> Result<Self> {
        let space = d.space().clone();
        let rows = (0..space.atoms(from))
            .map(|i| {
                let atom = AtomIndex::from_flat(&space, from, i)?;
                d.condition(&atom).map(Dist::into_weights)
            })
            .collect::<Result<Vec<_>>>()?;
        Kernel::new(space, from, d.domain(), rows)
    }

    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn from(&self) -> SubsetMask {
        self.from
    }

    pub fn target(&self) -> SubsetMask {
        self.target
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.row_len
    }

    pub fn row_len(&self) -> usize {
        self.row_len
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.row_len..(i + 1) * self.row_len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.row_len)
    }

    pub fn row_dist(&self, i: usize) -> Dist {
        Dist::from_parts(self.space.clone(), self.target, self.row(i).to_vec())
    }

    /// `K(ω_from, A)`.
    pub fn prob(&self, row: usize, event: &Event) -> Result<f64> {
        let ind = event.indicator_on(self.target)?;
        Ok(self.row(row).iter().zip(&ind).filter(|(_, &b)| b).map(|(w, _)| w).sum())
    }

    /// `ω_from ↦ K(ω_from, A)` for every source atom.
    pub fn event_column(&self, event: &Event) -> Result<Vec<f64>> {
        let ind = event.indicator_on(self.target)?;
        Ok(self
            .rows()
            .map(|r| r.iter().zip(&ind).filter(|(_, &b)| b).map(|(w, _)| w).sum())
            .collect())
    }

    /// Rows whose `from`-marginal deviates from `δ_row` by more than `eps`.
    pub fn determinism_breaches(&self, eps: f64) -> Vec<DeterminismBreach> {
        let proj = match self.space.projection(self.target, self.from) {
            Ok(p) => p,
            Err(_) => return Vec::new(),
        };
        let n_from = self.n_rows();
        let mut out = Vec::new();
        let mut marg = vec![0.0; n_from];
        for (i, row) in self.rows().enumerate() {
            marg.iter_mut().for_each(|m| *m = 0.0);
            for (w, &j) in row.iter().zip(&proj) {
                marg[j] += w;
            }
            let (atom, deviation) = marg
                .iter()
                .enumerate()
                .map(|(j, &m)| (j, (m - if j == i { 1.0 } else { 0.0 }).abs()))
                .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if deviation > eps {
                out.push(DeterminismBreach { row: i, atom, deviation });
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Kernel) -> f64 {
        if self.from != other.from || self.target != other.target {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Kernel, eps: f64) -> bool {
        self.max_abs_diff(other) <= eps
    }
}

/// `A ↦ Σ_{ω_U} q(ω_U) K(ω_U, A)`, the finite form of `∫ q(dω) K(ω, A)`.
pub fn bind(q: &Dist, k: &Kernel) -> Result<Dist> {
    if q.domain() != k.from() {
        return Err(Error::Domain(format!(
            "cannot bind a distribution on {{{}}} to a kernel from {{{}}}",
            q.domain(),
            k.from()
        )));
    }
    let mut out = vec![0.0; k.row_len()];
    for (i, &w) in q.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, r) in out.iter_mut().zip(k.row(i)) {
            *o += w * r;
        }
    }
    Ok(Dist::from_parts(k.space().clone(), k.target(), out))
}
