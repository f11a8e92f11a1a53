//! JSON documents for causal spaces.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::causal::{mechanism_from_conditionals, CausalMechanism, CausalSpace};
use crate::compilers::{PoSpec, ScmSpec};
use crate::error::{Error, Result};
use crate::measure::{Component, Dist, FiniteProductSpace, Kernel, SubsetMask};

/// Value of `mechanism` selecting `K_S = ℙ(· | ω_S)` for every `S`.
pub const CONDITIONALS: &str = "conditionals";

/// A finite causal space. Kernels are keyed by sorted index lists (`""`, `"0"`, `"0,2"`)
/// and hold one row over all of `Ω` per atom of `Ω_S`, all row-major in ascending index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub components: Vec<Component>,
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kernels: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<String>,
}

impl SpaceDocument {
    /// Builds the space, checking shapes but not the axioms.
    pub fn to_space(&self) -> Result<CausalSpace> {
        let space = FiniteProductSpace::new(self.components.clone())?;
        let full = space.full();
        let p = Dist::new(space.clone(), full, self.p.clone())?;
        match self.mechanism.as_deref() {
            Some(CONDITIONALS) => {
                if !self.kernels.is_empty() {
                    return Err(Error::Parse(format!(
                        "`kernels` must be omitted when `mechanism` is \"{CONDITIONALS}\""
                    )));
                }
                let mech = mechanism_from_conditionals(&p)?;
                return CausalSpace::new(p, mech);
            }
            Some(other) => {
                return Err(Error::Parse(format!("unknown mechanism shortcut {other:?}")));
            }
            None => {}
        }
        let mut by_mask = BTreeMap::new();
        for (key, rows) in &self.kernels {
            let s = SubsetMask::parse_list(key)?;
            space.check_mask(s)?;
            if s.to_string() != key.replace([' ', '[', ']'], "") {
                return Err(Error::Parse(format!("kernel key {key:?} must be a sorted index list")));
            }
            if by_mask.insert(s.bits(), rows).is_some() {
                return Err(Error::Parse(format!("duplicate kernel for subset {{{s}}}")));
            }
        }
        let mech = CausalMechanism::from_fn(space.clone(), full, |s| {
            let rows = by_mask
                .get(&s.bits())
                .ok_or_else(|| Error::Parse(format!("missing kernel for subset \"{s}\"")))?;
            Kernel::new(space.clone(), s, full, (*rows).clone())
        })?;
        CausalSpace::new(p, mech)
    }

    /// Lists every kernel explicitly.
    pub fn from_space(cs: &CausalSpace) -> Self {
        let kernels = cs
            .mechanism()
            .iter()
            .map(|(s, k)| (s.to_string(), k.rows().map(<[f64]>::to_vec).collect()))
            .collect();
        SpaceDocument {
            components: cs.space().components().to_vec(),
            p: cs.p().weights().to_vec(),
            kernels,
            mechanism: None,
        }
    }
}

/// Any of the three input formats.
#[derive(Clone, Debug)]
pub enum InputDocument {
    Space(SpaceDocument),
    Scm(ScmSpec),
    Po(PoSpec),
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn load_space_document(path: &Path) -> Result<SpaceDocument> {
    parse_json(&read(path)?, path)
}

/// Picks the format from the file name (`.scm.json`, `.po.json`, otherwise a space)
/// and falls back to the top-level keys.
pub fn load_input(path: &Path) -> Result<InputDocument> {
    let text = read(path)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if name.ends_with(".scm.json") {
        return Ok(InputDocument::Scm(parse_json(&text, path)?));
    }
    if name.ends_with(".po.json") {
        return Ok(InputDocument::Po(parse_json(&text, path)?));
    }
    if name.ends_with(".space.json") {
        return Ok(InputDocument::Space(parse_json(&text, path)?));
    }
    let value: serde_json::Value = parse_json(&text, path)?;
    if value.get("variables").is_some() {
        Ok(InputDocument::Scm(parse_json(&text, path)?))
    } else if value.get("treatment").is_some() {
        Ok(InputDocument::Po(parse_json(&text, path)?))
    } else {
        Ok(InputDocument::Space(parse_json(&text, path)?))
    }
}

pub fn load_space(path: &Path) -> Result<CausalSpace> {
    match load_input(path)? {
        InputDocument::Space(d) => d.to_space(),
        InputDocument::Scm(s) => crate::compilers::compile_scm(&s),
        InputDocument::Po(s) => Ok(crate::compilers::compile_po(&s)?.0),
    }
}
