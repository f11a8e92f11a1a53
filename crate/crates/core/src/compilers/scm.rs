use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::causal::{CausalMechanism, CausalSpace};
use crate::error::{Error, Result};
use crate::measure::{normalize_weights, Component, Dist, FiniteProductSpace, Kernel, SubsetMask};

/// One structural assignment `X_j := f_j(PA_j, N_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScmVariable {
    pub name: String,
    pub domain: Vec<String>,
    /// Names of earlier variables.
    #[serde(default)]
    pub parents: Vec<String>,
    /// Law of `N_j`; a single point makes `X_j` a deterministic function of its parents.
    #[serde(default = "point_noise")]
    pub noise: Vec<f64>,
    /// `f_j` as domain indices, row-major over `(parent values..., noise value)`.
    pub table: Vec<usize>,
}

fn point_noise() -> Vec<f64> {
    vec![1.0]
}

/// A finite acyclic SCM with jointly independent noises, listed in topological order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub variables: Vec<ScmVariable>,
}

impl ScmVariable {
    pub fn new(name: &str, domain: &[&str], parents: &[&str], noise: Vec<f64>, table: Vec<usize>) -> Self {
        ScmVariable {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            noise,
            table,
        }
    }
}

/// An [`ScmSpec`] after validation, with parents resolved to indices.
#[derive(Clone, Debug)]
pub struct ResolvedScm {
    space: Arc<FiniteProductSpace>,
    parents: Vec<Vec<usize>>,
    noise: Vec<Vec<f64>>,
    tables: Vec<Vec<usize>>,
}

impl ScmSpec {
    pub fn resolve(&self) -> Result<ResolvedScm> {
        let mut index = HashMap::new();
        for (j, v) in self.variables.iter().enumerate() {
            if index.insert(v.name.as_str(), j).is_some() {
                return Err(Error::Domain(format!("variable `{}` is declared twice", v.name)));
            }
        }
        let mut parents = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let pa = v
                .parents
                .iter()
                .map(|p| {
                    index
                        .get(p.as_str())
                        .copied()
                        .ok_or_else(|| Error::Domain(format!("`{}` lists unknown parent `{p}`", v.name)))
                })
                .collect::<Result<Vec<_>>>()?;
            parents.push(pa);
        }
        if let Some(trace) = find_cycle(&parents) {
            return Err(Error::Cyclic {
                trace: trace.into_iter().map(|j| self.variables[j].name.clone()).collect(),
            });
        }
        for (j, pa) in parents.iter().enumerate() {
            if let Some(&p) = pa.iter().find(|&&p| p >= j) {
                return Err(Error::NotTopological(format!(
                    "`{}` is listed before its parent `{}`",
                    self.variables[j].name, self.variables[p].name
                )));
            }
        }

        let components = self
            .variables
            .iter()
            .map(|v| Component {
                name: v.name.clone(),
                outcomes: v.domain.clone(),
            })
            .collect();
        let space = FiniteProductSpace::new(components)?;
        let mut noise = Vec::with_capacity(self.variables.len());
        for (j, v) in self.variables.iter().enumerate() {
            if v.noise.is_empty() {
                return Err(Error::Domain(format!("`{}` has an empty noise domain", v.name)));
            }
            let mut w = v.noise.clone();
            normalize_weights(&mut w)
                .map_err(|e| Error::Domain(format!("noise of `{}`: {e}", v.name)))?;
            let rows: usize = parents[j].iter().map(|&p| space.sizes()[p]).product();
            let expected = rows * w.len();
            if v.table.len() != expected {
                return Err(Error::Dimension(format!(
                    "table of `{}` needs {expected} entries, got {}",
                    v.name,
                    v.table.len()
                )));
            }
            if let Some(bad) = v.table.iter().find(|&&x| x >= v.domain.len()) {
                return Err(Error::Domain(format!("table of `{}` maps to value index {bad} out of range", v.name)));
            }
            noise.push(w);
        }
        Ok(ResolvedScm {
            space,
            parents,
            noise,
            tables: self.variables.iter().map(|v| v.table.clone()).collect(),
        })
    }
}

/// A directed cycle in the parent graph, as a closed vertex trace.
fn find_cycle(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Open,
        Done,
    }
    fn visit(j: usize, parents: &[Vec<usize>], mark: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        mark[j] = Mark::Open;
        stack.push(j);
        for &p in &parents[j] {
            match mark[p] {
                Mark::Open => {
                    let start = stack.iter().position(|&x| x == p).expect("open vertex is on the stack");
                    // edges run parent -> child, so walk the stack backwards from p
                    let mut trace = vec![p];
                    trace.extend(stack[start..].iter().rev());
                    return Some(trace);
                }
                Mark::Fresh => {
                    if let Some(t) = visit(p, parents, mark, stack) {
                        return Some(t);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[j] = Mark::Done;
        None
    }
    let mut mark = vec![Mark::Fresh; parents.len()];
    let mut stack = Vec::new();
    (0..parents.len()).find_map(|j| {
        if mark[j] == Mark::Fresh {
            visit(j, parents, &mut mark, &mut stack)
        } else {
            None
        }
    })
}

impl ResolvedScm {
    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, j: usize) -> &[usize] {
        &self.parents[j]
    }

    pub fn noise(&self, j: usize) -> &[f64] {
        &self.noise[j]
    }

    /// `f_j(x_{PA_j}, e)` given values for all earlier variables.
    pub fn assign(&self, j: usize, earlier: &[usize], e: usize) -> usize {
        let row = self.parents[j]
            .iter()
            .fold(0, |acc, &p| acc * self.space.sizes()[p] + earlier[p]);
        self.tables[j][row * self.noise[j].len() + e]
    }

    /// Law on `Ω` of the assignments with `clamp[j] = Some(x)` replacing `f_j` by `x`.
    pub fn pushforward(&self, clamp: &[Option<usize>]) -> Vec<f64> {
        let mut out = vec![0.0; self.space.atoms(self.space.full())];
        let mut values = vec![0; self.n()];
        self.descend(0, 1.0, clamp, &mut values, &mut out);
        out
    }

    fn descend(&self, j: usize, weight: f64, clamp: &[Option<usize>], values: &mut [usize], out: &mut [f64]) {
        if j == self.n() {
            out[self.space.encode(self.space.full(), values)] += weight;
            return;
        }
        if let Some(x) = clamp[j] {
            values[j] = x;
            self.descend(j + 1, weight, clamp, values, out);
            return;
        }
        for (e, &pe) in self.noise[j].iter().enumerate() {
            if pe == 0.0 {
                continue;
            }
            values[j] = self.assign(j, values, e);
            self.descend(j + 1, weight * pe, clamp, values, out);
        }
    }
}

/// Compiles an SCM: `ℙ` is the pushforward of the noise law, and row `ω_S` of
/// `K_S` is the pushforward with `f_j` replaced by the constant `ω_j` for `j ∈ S`.
pub fn compile_scm(spec: &ScmSpec) -> Result<CausalSpace> {
    compile_resolved(&spec.resolve()?)
}

pub fn compile_resolved(scm: &ResolvedScm) -> Result<CausalSpace> {
    let space = scm.space().clone();
    let full = space.full();
    let p = Dist::new(space.clone(), full, scm.pushforward(&vec![None; scm.n()]))?;
    let mech = CausalMechanism::from_fn(space.clone(), full, |s: SubsetMask| {
        if s.is_empty() {
            return Kernel::constant(s, &p);
        }
        let rows = (0..space.atoms(s))
            .map(|r| {
                let mut clamp = vec![None; scm.n()];
                for (t, x) in s.indices().zip(space.decode(s, r)) {
                    clamp[t] = Some(x);
                }
                scm.pushforward(&clamp)
            })
            .collect();
        Kernel::new(space.clone(), s, full, rows)
    })?;
    CausalSpace::new(p, mech)
}
