use serde::Serialize;

use crate::causal::{intervention_measure, CausalSpace};
use crate::error::{Error, Result};
use crate::measure::{Dist, Event, SubsetMask, EPS_NORM};

use super::{classify_effect_on_sigma, is_local_source_of_sigma, EffectClass};

/// Which premise licenses the adjustment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustmentCase {
    /// `ℋ_U` is a local source of `ℋ_V`; `V` is weighted by `ℙ(ω_V | ω_U)`.
    LocalSource,
    /// `ℋ_U` has no causal effect on `ℋ_V`; `V` is weighted by `ℙ(ω_V)`.
    NoEffect,
    /// `V ⊆ U`; no adjustment variable remains.
    Contained,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjustmentReport {
    /// The adjustment formula evaluated on `ℙ`.
    pub estimate: f64,
    /// `ℙ^{do(U,ℚ)}(A)`, computed from the mechanism.
    pub interventional: f64,
    pub case: Option<AdjustmentCase>,
    /// `ℙ^{do}(A | ω_{U∪V}) = ℙ(A | ω_{U∪V})` on every `ℙ^{do}`-positive atom.
    pub condition_i_holds: bool,
    pub condition_i_gap: f64,
    /// Every term the formula needs is conditioned on a `ℙ`-positive atom.
    pub positivity: bool,
    pub trusted: bool,
    pub notes: Vec<String>,
}

/// Estimates `ℙ^{do(U,ℚ)}(A)` from observational quantities by adjusting for `ℋ_V`.
///
/// The premise is chosen in the order contained, local source, no effect.
/// Condition (i) is checked numerically on the atoms of `Ω_{U∪V}` and its
/// worst gap is reported. The estimate is trusted only when a premise holds,
/// condition (i) holds and positivity holds.
pub fn adjustment_estimate(
    cs: &CausalSpace,
    u: SubsetMask,
    v: SubsetMask,
    q: &Dist,
    a: &Event,
) -> Result<AdjustmentReport> {
    let space = cs.space();
    space.check_mask(v)?;
    if q.domain() != u {
        return Err(Error::Domain(format!(
            "adjustment for an intervention on {{{u}}} given a measure on {{{}}}",
            q.domain()
        )));
    }
    let mut notes = Vec::new();
    let case = if v.is_subset_of(u) {
        Some(AdjustmentCase::Contained)
    } else if is_local_source_of_sigma(cs, u, v)? {
        Some(AdjustmentCase::LocalSource)
    } else if classify_effect_on_sigma(cs, u, v)? == EffectClass::None {
        Some(AdjustmentCase::NoEffect)
    } else {
        notes.push(format!(
            "ℋ_{{{u}}} is neither a local source of nor without effect on ℋ_{{{v}}}"
        ));
        None
    };

    let w = u.union(v);
    let rest = v.difference(u);
    let p = cs.p();
    let p_w = p.marginal(w)?;
    let pa_w = p.marginal_event_mass(w, a)?;
    let p_u = p.marginal(u)?;
    let p_rest = p.marginal(rest)?;
    let join = space.join_table(u, rest)?;

    let mut positivity = true;
    let mut estimate = 0.0;
    for (iu, &qu) in q.weights().iter().enumerate() {
        if qu == 0.0 {
            continue;
        }
        let mu = p_u.weight(iu);
        for (ir, &iw) in join[iu].iter().enumerate() {
            let weight = match case {
                Some(AdjustmentCase::Contained) => 1.0,
                Some(AdjustmentCase::NoEffect) => p_rest.weight(ir),
                _ => {
                    if mu <= EPS_NORM {
                        positivity = false;
                        continue;
                    }
                    p_w.weight(iw) / mu
                }
            };
            if weight == 0.0 {
                continue;
            }
            if p_w.weight(iw) <= EPS_NORM {
                positivity = false;
                continue;
            }
            estimate += qu * weight * pa_w[iw] / p_w.weight(iw);
        }
    }
    if !positivity {
        notes.push(format!("ℙ puts no mass on an atom of Ω_{{{w}}} that the estimate conditions on"));
    }

    let p_do = intervention_measure(cs, q)?;
    let interventional = p_do.prob(a)?;
    let do_w = p_do.marginal(w)?;
    let do_a_w = p_do.marginal_event_mass(w, a)?;
    let mut gap: f64 = 0.0;
    for (iw, &m) in do_w.weights().iter().enumerate() {
        if m <= EPS_NORM {
            continue;
        }
        let obs = p_w.weight(iw);
        if obs <= EPS_NORM {
            gap = f64::INFINITY;
            break;
        }
        gap = gap.max((do_a_w[iw] / m - pa_w[iw] / obs).abs());
    }
    let condition_i_holds = gap <= EPS_NORM;
    notes.push(format!("condition (i) worst gap over Ω_{{{w}}}: {gap:e}"));

    Ok(AdjustmentReport {
        estimate,
        interventional,
        case,
        condition_i_holds,
        condition_i_gap: gap,
        positivity,
        trusted: case.is_some() && condition_i_holds && positivity,
        notes,
    })
}
