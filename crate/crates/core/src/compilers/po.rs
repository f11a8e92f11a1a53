use serde::{Deserialize, Serialize};

use crate::causal::{CausalMechanism, CausalSpace};
use crate::error::{Error, Result};
use crate::measure::{normalize_weights, Component, Dist, FiniteProductSpace, Kernel, SubsetMask, EPS_NORM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoVariable {
    pub name: String,
    pub domain: Vec<String>,
}

impl PoVariable {
    pub fn new(name: &str, domain: &[&str]) -> Self {
        PoVariable {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A joint law `ℙ̃` of treatment `Z`, covariate `X` and one potential outcome
/// `Y_z` per treatment level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoSpec {
    pub treatment: PoVariable,
    pub outcome: PoVariable,
    #[serde(default)]
    pub covariate: Option<PoVariable>,
    /// Row-major over `(z, x, y_{z_0}, …, y_{z_{k-1}})`; `x` is absent without a covariate.
    pub joint: Vec<f64>,
    /// Real scores of the outcome levels; defaults to parsing the labels.
    #[serde(default)]
    pub outcome_scores: Option<Vec<f64>>,
}

/// Component indices of the compiled space.
pub const PO_TREATMENT: usize = 0;
pub const PO_OUTCOME: usize = 1;
pub const PO_COVARIATE: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `K_∅ = ℙ`.
    Observational,
    /// Entries fixed by the potential-outcome law; see the entry note for which events.
    Mandated,
    /// Completed from observational conditionals; any valid completion would do.
    Filled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskEntry {
    pub subset: String,
    pub provenance: Provenance,
    pub note: String,
}

/// Which kernels of a compiled potential-outcome space are determined by the
/// specification and which were filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecificationMask {
    pub entries: Vec<MaskEntry>,
}

impl SpecificationMask {
    pub fn provenance(&self, subset: SubsetMask) -> Option<Provenance> {
        let key = subset.to_string();
        self.entries.iter().find(|e| e.subset == key).map(|e| e.provenance)
    }
}

struct Shape {
    nz: usize,
    ny: usize,
    nx: usize,
}

impl PoSpec {
    fn shape(&self) -> Result<Shape> {
        let nz = self.treatment.domain.len();
        let ny = self.outcome.domain.len();
        let nx = self.covariate.as_ref().map_or(1, |c| c.domain.len());
        if nz == 0 || ny == 0 || nx == 0 {
            return Err(Error::Domain("potential-outcome domains must be non-empty".into()));
        }
        let expected = nz * nx * ny.pow(nz as u32);
        if self.joint.len() != expected {
            return Err(Error::Dimension(format!(
                "joint over (Z, X, Y_z…) needs {expected} weights, got {}",
                self.joint.len()
            )));
        }
        Ok(Shape { nz, ny, nx })
    }

    fn normalized_joint(&self) -> Result<Vec<f64>> {
        let mut w = self.joint.clone();
        normalize_weights(&mut w)?;
        Ok(w)
    }

    /// Calls `f(z, x, ys, weight)` for every cell of the joint.
    fn for_each_cell<F: FnMut(usize, usize, &[usize], f64)>(&self, mut f: F) -> Result<()> {
        let sh = self.shape()?;
        let joint = self.normalized_joint()?;
        let mut ys = vec![0; sh.nz];
        for (i, &w) in joint.iter().enumerate() {
            let mut rest = i;
            for slot in (0..sh.nz).rev() {
                ys[slot] = rest % sh.ny;
                rest /= sh.ny;
            }
            let x = rest % sh.nx;
            let z = rest / sh.nx;
            f(z, x, &ys, w);
        }
        Ok(())
    }

    /// `ℙ̃(Y_z = y)` as `[z][y]`.
    pub fn potential_marginals(&self) -> Result<Vec<Vec<f64>>> {
        let sh = self.shape()?;
        let mut out = vec![vec![0.0; sh.ny]; sh.nz];
        self.for_each_cell(|_, _, ys, w| {
            for (z, &y) in ys.iter().enumerate() {
                out[z][y] += w;
            }
        })?;
        Ok(out)
    }

    pub fn scores(&self) -> Result<Vec<f64>> {
        if let Some(s) = &self.outcome_scores {
            if s.len() != self.outcome.domain.len() {
                return Err(Error::Dimension(format!(
                    "{} outcome scores for {} outcome levels",
                    s.len(),
                    self.outcome.domain.len()
                )));
            }
            return Ok(s.clone());
        }
        self.outcome
            .domain
            .iter()
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::Domain(format!("outcome level `{l}` is not numeric; supply outcome_scores")))
            })
            .collect()
    }
}

/// Average treatment effect `𝔼[Y_{z₁} − Y_{z₂}]` under the outcome scores.
pub fn ate(spec: &PoSpec, z1: usize, z2: usize) -> Result<f64> {
    let nz = spec.treatment.domain.len();
    if z1 >= nz || z2 >= nz {
        return Err(Error::Domain(format!("treatment level out of range (levels: {nz})")));
    }
    let scores = spec.scores()?;
    let m = spec.potential_marginals()?;
    Ok(scores
        .iter()
        .enumerate()
        .map(|(y, s)| s * (m[z1][y] - m[z2][y]))
        .sum())
}

/// Embeds a potential-outcome law as a causal space on `Ω = 𝒵 × 𝒴 × 𝒳`.
///
/// `ℙ` is the law of `(Z, Y_Z, X)`. Row `z` of `K_{Z}` is
/// `δ_z ⊗ ℙ̃(Y_z ∈ ·) ⊗ ℙ(X ∈ · | Z = z)`, with the `X`-marginal used when `Z = z`
/// is null. Every other kernel is the observational conditional, or
/// `δ ⊗ ℙ`-marginal on null atoms.
pub fn compile_po(spec: &PoSpec) -> Result<(CausalSpace, SpecificationMask)> {
    let sh = spec.shape()?;
    let mut components = vec![
        Component {
            name: spec.treatment.name.clone(),
            outcomes: spec.treatment.domain.clone(),
        },
        Component {
            name: spec.outcome.name.clone(),
            outcomes: spec.outcome.domain.clone(),
        },
    ];
    if let Some(c) = &spec.covariate {
        components.push(Component {
            name: c.name.clone(),
            outcomes: c.domain.clone(),
        });
    }
    let space = FiniteProductSpace::new(components)?;
    let full = space.full();
    let has_x = spec.covariate.is_some();
    let z_set = SubsetMask::singleton(PO_TREATMENT);
    let cell = |z: usize, y: usize, x: usize| {
        if has_x {
            space.encode(full, &[z, y, x])
        } else {
            space.encode(full, &[z, y])
        }
    };

    let mut pw = vec![0.0; space.atoms(full)];
    spec.for_each_cell(|z, x, ys, w| pw[cell(z, ys[z], x)] += w)?;
    let p = Dist::new(space.clone(), full, pw)?;

    let potentials = spec.potential_marginals()?;
    let mut pzx = vec![vec![0.0; sh.nx]; sh.nz];
    let mut px = vec![0.0; sh.nx];
    spec.for_each_cell(|z, x, _, w| {
        pzx[z][x] += w;
        px[x] += w;
    })?;

    let mech = CausalMechanism::from_fn(space.clone(), full, |s| {
        if s.is_empty() {
            return Kernel::constant(s, &p);
        }
        if s == z_set {
            let rows = (0..sh.nz)
                .map(|z| {
                    let pz: f64 = pzx[z].iter().sum();
                    let x_law: Vec<f64> = if pz > EPS_NORM {
                        pzx[z].iter().map(|w| w / pz).collect()
                    } else {
                        px.clone()
                    };
                    let mut row = vec![0.0; space.atoms(full)];
                    for (y, py) in potentials[z].iter().enumerate() {
                        for (x, pxv) in x_law.iter().enumerate() {
                            row[cell(z, y, x)] = py * pxv;
                        }
                    }
                    row
                })
                .collect();
            return Kernel::new(space.clone(), s, full, rows);
        }
        conditional_or_marginal(&p, s)
    })?;

    let mut entries = Vec::new();
    for s in full.subsets() {
        let (provenance, note) = if s.is_empty() {
            (Provenance::Observational, "law of (Z, Y_Z, X)".to_string())
        } else if s == z_set {
            (
                Provenance::Mandated,
                format!(
                    "{}-events: law of the potential outcome at each treatment level; other factors filled",
                    spec.outcome.name
                ),
            )
        } else {
            (Provenance::Filled, "observational conditional".to_string())
        };
        entries.push(MaskEntry {
            subset: s.to_string(),
            provenance,
            note,
        });
    }
    Ok((CausalSpace::new(p, mech)?, SpecificationMask { entries }))
}

/// `ℙ(· | ω_S)` on positive-mass atoms, `δ_{ω_S} ⊗ ℙ|_{T∖S}` on null ones.
pub(crate) fn conditional_or_marginal(p: &Dist, s: SubsetMask) -> Result<Kernel> {
    let space = p.space().clone();
    let full = space.full();
    let marg = p.marginal(s)?;
    let rest = p.marginal(full.difference(s))?;
    let proj = space.projection(full, s)?;
    let rows = (0..space.atoms(s))
        .map(|r| {
            let m = marg.weight(r);
            if m > EPS_NORM {
                Ok(p.weights()
                    .iter()
                    .zip(&proj)
                    .map(|(&w, &j)| if j == r { w / m } else { 0.0 })
                    .collect())
            } else {
                Ok(Dist::dirac_flat(space.clone(), s, r)?.outer(&rest)?.into_weights())
            }
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Kernel::new(space, s, full, rows)
}
