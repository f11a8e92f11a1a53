//! Causal effects, sources, dormant-effect activation and adjustment.
//!
//! Every universally quantified definition is evaluated by an exhaustive scan
//! over `𝒫(T)` and the atoms of each `Ω_S`; equalities are judged to
//! [`EPS_NORM`]. Effects on sub-σ-algebras are supported for `ℋ_V` only.

mod adjustment;
mod profile;

use serde::{Deserialize, Serialize};

use crate::causal::{intervene_hard, CausalSpace};
use crate::error::{Error, Result};
use crate::measure::{AtomIndex, Dist, Event, SubsetMask, EPS_NORM};

pub use adjustment::{adjustment_estimate, AdjustmentCase, AdjustmentReport};
pub use profile::EventProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EffectClass {
    None,
    Active,
    Dormant,
}

impl EffectClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectClass::None => "NONE",
            EffectClass::Active => "ACTIVE",
            EffectClass::Dormant => "DORMANT",
        }
    }
}

impl std::fmt::Display for EffectClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifies the effect of `ℋ_U` on the event `a`.
pub fn classify_effect(cs: &CausalSpace, u: SubsetMask, a: &Event) -> Result<EffectClass> {
    cs.space().check_mask(u)?;
    Ok(EventProfile::new(cs, a)?.classify(u))
}

/// The atoms `{ω_V = v}` of `ℋ_V`; every event of `ℋ_V` is a disjoint union of them.
pub(crate) fn atom_events(cs: &CausalSpace, v: SubsetMask) -> Result<Vec<Event>> {
    (0..cs.space().atoms(v))
        .map(|i| Event::atom_flat(cs.space().clone(), v, i))
        .collect()
}

/// Classifies the effect of `ℋ_U` on the σ-algebra `ℋ_V`.
///
/// Kernels are additive in the event, so checking the atoms of `ℋ_V` decides
/// the quantifiers over all of `ℋ_V`.
pub fn classify_effect_on_sigma(cs: &CausalSpace, u: SubsetMask, v: SubsetMask) -> Result<EffectClass> {
    cs.space().check_mask(u)?;
    cs.space().check_mask(v)?;
    let mut all_none = true;
    for a in atom_events(cs, v)? {
        match EventProfile::new(cs, &a)?.classify(u) {
            EffectClass::Active => return Ok(EffectClass::Active),
            EffectClass::Dormant => all_none = false,
            EffectClass::None => {}
        }
    }
    Ok(if all_none { EffectClass::None } else { EffectClass::Dormant })
}

/// Whether `ℋ_U` has no causal effect on `a` given `ℋ_V`.
pub fn has_no_effect_given(cs: &CausalSpace, u: SubsetMask, v: SubsetMask, a: &Event) -> Result<bool> {
    cs.space().check_mask(u)?;
    cs.space().check_mask(v)?;
    Ok(EventProfile::new(cs, a)?.no_effect_given(u, v))
}

/// `K_U` is trivial when `ℋ_U` has no causal effect on `ℋ_{T∖U}`.
pub fn is_trivial_kernel(cs: &CausalSpace, u: SubsetMask) -> Result<bool> {
    Ok(classify_effect_on_sigma(cs, u, cs.full().difference(u))? == EffectClass::None)
}

/// Ordered, pairwise disjoint time slices `w₁ × T̃, w₂ × T̃, …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimePartition {
    slices: Vec<SubsetMask>,
}

impl TimePartition {
    pub fn new(slices: Vec<SubsetMask>) -> Result<Self> {
        for (i, a) in slices.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::Domain(format!("time slice {i} is empty")));
            }
            if slices[..i].iter().any(|b| !a.is_disjoint(*b)) {
                return Err(Error::Domain(format!("time slice {i} overlaps an earlier slice")));
            }
        }
        Ok(TimePartition { slices })
    }

    /// One slice per component, in index order.
    pub fn singletons(n: usize) -> Self {
        TimePartition { slices: (0..n).map(SubsetMask::singleton).collect() }
    }

    pub fn slices(&self) -> &[SubsetMask] {
        &self.slices
    }

    pub fn reversed(&self) -> Self {
        TimePartition { slices: self.slices.iter().rev().copied().collect() }
    }
}

/// Whether no later slice has a causal effect on any earlier one.
pub fn is_time_respecting(cs: &CausalSpace, tp: &TimePartition) -> Result<bool> {
    for (j, later) in tp.slices().iter().enumerate() {
        for earlier in &tp.slices()[..j] {
            if classify_effect_on_sigma(cs, *later, *earlier)? != EffectClass::None {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether `K_U(·, a)` is a version of `ℙ(a | ℋ_U)`; `ℙ`-null atoms of `Ω_U` are skipped.
pub fn is_source(cs: &CausalSpace, u: SubsetMask, a: &Event) -> Result<bool> {
    cs.space().check_mask(u)?;
    let marg = cs.p().marginal(u)?;
    let joint = cs.p().marginal_event_mass(u, a)?;
    let column = cs.kernel(u).event_column(a)?;
    Ok(marg
        .weights()
        .iter()
        .zip(&joint)
        .zip(&column)
        .filter(|((&m, _), _)| m > EPS_NORM)
        .all(|((m, j), k)| (j / m - k).abs() <= EPS_NORM))
}

/// Whether `ℋ_U` is a source of every event of `ℋ_V`.
pub fn is_local_source_of_sigma(cs: &CausalSpace, u: SubsetMask, v: SubsetMask) -> Result<bool> {
    for a in atom_events(cs, v)? {
        if !is_source(cs, u, &a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `ℋ_U` is a source of every event of `ℋ`: each positive-mass row of
/// `K_U` equals the conditional `ℙ(· | ω_U)`.
pub fn is_global_source(cs: &CausalSpace, u: SubsetMask) -> Result<bool> {
    cs.space().check_mask(u)?;
    let space = cs.space();
    let proj = space.projection(space.full(), u)?;
    let marg = cs.p().marginal(u)?;
    let k = cs.kernel(u);
    for (r, &m) in marg.weights().iter().enumerate() {
        if m <= EPS_NORM {
            continue;
        }
        let row = k.row(r);
        for (i, (&pw, &j)) in cs.p().weights().iter().zip(&proj).enumerate() {
            let cond = if j == r { pw / m } else { 0.0 };
            if (row[i] - cond).abs() > EPS_NORM {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A hard intervention that turns a dormant effect into an active one.
#[derive(Clone, Debug)]
pub struct ActivationWitness {
    /// `S∖U`, the block that was hard-intervened on.
    pub intervened: SubsetMask,
    /// `ω₀ ∈ Ω`; the intervention is the Dirac measure at its `S∖U` part.
    pub atom: AtomIndex,
    /// `V = S∩U`, actively causal to the event after the intervention.
    pub activated: SubsetMask,
    pub intervened_space: CausalSpace,
}

/// Finds `S` and `ω₀` with `K_S(ω₀, a) ≠ K_{S∖U}(ω₀, a)`, hard-intervenes on
/// `ℋ_{S∖U}` with `δ_{ω₀}`, and checks that `ℋ_{S∩U}` is then actively causal to `a`.
pub fn activate_dormant(cs: &CausalSpace, u: SubsetMask, a: &Event) -> Result<ActivationWitness> {
    cs.space().check_mask(u)?;
    let profile = EventProfile::new(cs, a)?;
    let class = profile.classify(u);
    if class != EffectClass::Dormant {
        return Err(Error::Contract(format!(
            "activate_dormant requires a dormant effect, but ℋ_{{{u}}} is {class} on the event"
        )));
    }
    let (s, row) = profile.first_difference(u).ok_or_else(|| {
        Error::Internal("effect classified dormant but no kernel depends on the intervened block".into())
    })?;
    let space = cs.space();
    let intervened = s.difference(u);
    let activated = s.intersection(u);

    // complete ω_S to a full atom; coordinates outside S are irrelevant
    let s_coords = space.decode(s, row);
    let mut coords = vec![0; space.n()];
    for (t, c) in s.indices().zip(s_coords) {
        coords[t] = c;
    }
    let atom = AtomIndex::new(space, space.full(), coords)?;
    let q = Dist::dirac(space.clone(), &atom.restrict(intervened)?)?;
    let intervened_space = intervene_hard(cs, intervened, &q)?;
    let after = classify_effect(&intervened_space, activated, a)?;
    if after != EffectClass::Active {
        return Err(Error::Internal(format!(
            "hard intervention on {{{intervened}}} left ℋ_{{{activated}}} {after}, expected ACTIVE"
        )));
    }
    Ok(ActivationWitness { intervened, atom, activated, intervened_space })
}

impl Dist {
    /// `ω_S ↦ ℙ({ω_S} ∩ a)` for a distribution on `Ω`.
    pub(crate) fn marginal_event_mass(&self, s: SubsetMask, a: &Event) -> Result<Vec<f64>> {
        let space = self.space();
        let ind = a.indicator_on(self.domain())?;
        let proj = space.projection(self.domain(), s)?;
        let mut out = vec![0.0; space.atoms(s)];
        for ((w, &j), &inside) in self.weights().iter().zip(&proj).zip(&ind) {
            if inside {
                out[j] += w;
            }
        }
        Ok(out)
    }
}
