//! Exhaustive checks of the structural identities that every causal space and
//! every intervention must satisfy, with premise (vacuity) accounting.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::causal::{
    intervene, intervene_hard, trivial_mechanism, validate_causal_space, CausalSpace, InternalMechanism,
    InterventionSpec,
};
use crate::effects::{classify_effect_on_sigma, is_global_source, is_time_respecting, EffectClass, EventProfile, TimePartition};
use crate::error::Result;
use crate::measure::{Dist, Event, Kernel, SubsetMask, EPS_NORM};

use super::random::{random_intervention, random_subset, rng_for, MeasureShape};

pub const INTERVENTION_VALIDITY: &str = "intervention_validity";
pub const OVERWRITE: &str = "overwrite_superset_kernels";
pub const NESTED_PRODUCT: &str = "nested_subset_kernel_product";
pub const DISJOINT_PRODUCT: &str = "disjoint_subset_kernel_product";
pub const HARD_GENERIC: &str = "hard_matches_generic";
pub const EFFECTIVENESS: &str = "effectiveness";
pub const NONE_EXCLUDES_ACTIVE: &str = "no_effect_excludes_active";
pub const SHRINK_TARGET: &str = "no_effect_shrinks_target";
pub const SHRINK_SOURCE: &str = "no_effect_shrinks_source";
pub const KERNEL_INVARIANCE: &str = "no_effect_kernel_invariance";
pub const UNION: &str = "no_effect_union";
pub const CONDITIONAL: &str = "no_effect_implies_conditional";
pub const SHIELDED: &str = "intervened_block_shielded";
pub const SURVIVES_DISJOINT: &str = "no_effect_survives_disjoint_intervention";
pub const SURVIVES_HARD: &str = "no_effect_survives_hard_intervention";
pub const CONDITIONAL_AFTER: &str = "conditional_no_effect_after_intervention";
pub const TIME_RESPECTING: &str = "time_respecting_survives_hard";
pub const SOURCE_GENERIC: &str = "intervened_block_global_source";
pub const SOURCE_FACTORISED: &str = "factorised_hard_sub_block_source";

pub const PROPERTIES: [&str; 19] = [
    INTERVENTION_VALIDITY,
    OVERWRITE,
    NESTED_PRODUCT,
    DISJOINT_PRODUCT,
    HARD_GENERIC,
    EFFECTIVENESS,
    NONE_EXCLUDES_ACTIVE,
    SHRINK_TARGET,
    SHRINK_SOURCE,
    KERNEL_INVARIANCE,
    UNION,
    CONDITIONAL,
    SHIELDED,
    SURVIVES_DISJOINT,
    SURVIVES_HARD,
    CONDITIONAL_AFTER,
    TIME_RESPECTING,
    SOURCE_GENERIC,
    SOURCE_FACTORISED,
];

/// Counts for one property: instances whose premise held, instances whose premise failed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Tally {
    pub checked: usize,
    pub vacuous: usize,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub spaces: usize,
    pub tallies: BTreeMap<&'static str, Tally>,
}

impl Default for TheoremReport {
    fn default() -> Self {
        TheoremReport {
            spaces: 0,
            tallies: PROPERTIES.iter().map(|&p| (p, Tally::default())).collect(),
        }
    }
}

impl TheoremReport {
    fn record<F: FnOnce() -> String>(&mut self, name: &'static str, ok: bool, detail: F) {
        let t = self.tallies.entry(name).or_default();
        t.checked += 1;
        if !ok && t.violations.len() < 20 {
            t.violations.push(detail());
        } else if !ok {
            t.violations.push(String::new());
        }
    }

    fn vacuous(&mut self, name: &'static str) {
        self.tallies.entry(name).or_default().vacuous += 1;
    }

    pub fn total_violations(&self) -> usize {
        self.tallies.values().map(|t| t.violations.len()).sum()
    }

    /// Properties that were never exercised with a true premise.
    pub fn unexercised(&self) -> Vec<&'static str> {
        self.tallies.iter().filter(|(_, t)| t.checked == 0).map(|(&k, _)| k).collect()
    }

    pub fn lines(&self) -> Vec<String> {
        self.tallies
            .iter()
            .map(|(k, t)| format!("{k}: checked {} vacuous {} violations {}", t.checked, t.vacuous, t.violations.len()))
            .collect()
    }
}

fn kernel_gap(a: &Kernel, rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .enumerate()
        .flat_map(|(r, row)| a.row(r).iter().zip(row).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn sample_events<R: Rng>(rng: &mut R, cs: &CausalSpace) -> Result<Vec<Event>> {
    let space = cs.space().clone();
    let n = cs.n();
    let mut v = random_subset(rng, n);
    if v.is_empty() {
        v = SubsetMask::singleton(rng.random_range(0..n));
    }
    let atom = rng.random_range(0..space.atoms(v));
    let w = random_subset(rng, n);
    let members: Vec<bool> = (0..space.atoms(w)).map(|_| rng.random_bool(0.5)).collect();
    let full_members: Vec<bool> = (0..space.atoms(space.full())).map(|_| rng.random_bool(0.5)).collect();
    Ok(vec![
        Event::atom_flat(space.clone(), v, atom)?,
        Event::new(space.clone(), w, members)?,
        Event::new(space.clone(), space.full(), full_members)?,
    ])
}

/// Runs every check on `cs` with randomness drawn from `seed`, adding to `report`.
pub fn check_space(cs: &CausalSpace, seed: u64, report: &mut TheoremReport) -> Result<()> {
    let mut rng = rng_for(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1));
    report.spaces += 1;
    let events = sample_events(&mut rng, cs)?;
    let profiles = events
        .iter()
        .map(|a| EventProfile::new(cs, a))
        .collect::<Result<Vec<_>>>()?;
    for p in &profiles {
        check_effect_identities(cs, p, report);
    }
    check_target_shrink(&mut rng, cs, report)?;

    let singletons = TimePartition::singletons(cs.n());
    let respects_time = is_time_respecting(cs, &singletons)?;
    for shape in [MeasureShape::FullSupport, MeasureShape::Product, MeasureShape::Dirac] {
        let u = random_subset(&mut rng, cs.n());
        let spec = random_intervention(&mut rng, cs, u, shape)?;
        check_intervention(cs, &spec, &events, &profiles, respects_time, report)?;
    }
    Ok(())
}

fn check_effect_identities(cs: &CausalSpace, p: &EventProfile<'_>, report: &mut TheoremReport) {
    let space = cs.space();
    let n = cs.n();
    let none: Vec<bool> = SubsetMask::all(n).map(|u| p.no_effect(u)).collect();
    let is_none = |s: SubsetMask| none[s.bits() as usize];
    for u in SubsetMask::all(n) {
        if !is_none(u) {
            for name in [NONE_EXCLUDES_ACTIVE, SHRINK_SOURCE, KERNEL_INVARIANCE, UNION, CONDITIONAL] {
                report.vacuous(name);
            }
            continue;
        }
        report.record(NONE_EXCLUDES_ACTIVE, !p.active(u), || format!("U={{{u}}} is both NONE and ACTIVE"));
        for v in u.subsets() {
            report.record(SHRINK_SOURCE, is_none(v), || format!("NONE for {{{u}}} but not for {{{v}}}"));
        }
        for v in SubsetMask::all(n) {
            let uv = u.union(v);
            let proj = space.projection(uv, v).expect("subset");
            let big = p.column(uv);
            let small = p.column(v);
            let gap = (0..big.len()).map(|i| (big[i] - small[proj[i]]).abs()).fold(0.0, f64::max);
            report.record(KERNEL_INVARIANCE, gap <= EPS_NORM, || {
                format!("NONE for {{{u}}} but K_{{{v}}} and K_{{{uv}}} differ by {gap:e}")
            });
            report.record(CONDITIONAL, p.no_effect_given(u, v), || {
                format!("NONE for {{{u}}} but an effect given {{{v}}}")
            });
            if is_none(v) {
                report.record(UNION, is_none(uv), || format!("NONE for {{{u}}} and {{{v}}} but not their union"));
            }
        }
    }
}

fn check_target_shrink<R: Rng>(rng: &mut R, cs: &CausalSpace, report: &mut TheoremReport) -> Result<()> {
    for _ in 0..3 {
        let u = random_subset(rng, cs.n());
        let v = random_subset(rng, cs.n());
        if classify_effect_on_sigma(cs, u, v)? != EffectClass::None {
            report.vacuous(SHRINK_TARGET);
            continue;
        }
        for w in v.subsets() {
            let ok = classify_effect_on_sigma(cs, u, w)? == EffectClass::None;
            report.record(SHRINK_TARGET, ok, || format!("{{{u}}} NONE on ℋ_{{{v}}} but not on ℋ_{{{w}}}"));
        }
    }
    Ok(())
}

fn factorises(q: &Dist, v: SubsetMask) -> Result<bool> {
    let u = q.domain();
    let prod = q.marginal(v)?.outer(&q.marginal(u.difference(v))?)?;
    Ok(prod.max_abs_diff(q) <= EPS_NORM)
}

fn check_intervention(
    cs: &CausalSpace,
    spec: &InterventionSpec,
    events: &[Event],
    before: &[EventProfile<'_>],
    respects_time: bool,
    report: &mut TheoremReport,
) -> Result<()> {
    let space = cs.space();
    let n = cs.n();
    let u = spec.u;
    let q = &spec.q;
    let l = match &spec.internal {
        InternalMechanism::Mechanism(l) => l.clone(),
        InternalMechanism::Hard => trivial_mechanism(u, q)?,
    };
    let new = intervene(cs, spec)?;
    let report_valid = validate_causal_space(&new);
    report.record(INTERVENTION_VALIDITY, report_valid.is_valid(), || report_valid.summary());

    for s in SubsetMask::all(n) {
        if u.is_subset_of(s) {
            let gap = new.kernel(s).max_abs_diff(cs.kernel(s));
            report.record(OVERWRITE, gap <= EPS_NORM, || format!("U={{{u}}}, S={{{s}}}: gap {gap:e}"));
        }
        if s.is_subset_of(u) {
            let ls = l.kernel(s);
            let ku = cs.kernel(u);
            let expected: Vec<Vec<f64>> = (0..space.atoms(s))
                .map(|r| {
                    let mut row = vec![0.0; ku.row_len()];
                    for (iu, w) in ls.row(r).iter().enumerate() {
                        for (o, x) in row.iter_mut().zip(ku.row(iu)) {
                            *o += w * x;
                        }
                    }
                    row
                })
                .collect();
            let gap = kernel_gap(new.kernel(s), &expected);
            report.record(NESTED_PRODUCT, gap <= EPS_NORM, || format!("U={{{u}}}, S={{{s}}}: gap {gap:e}"));
            let marg_gap = new.p().marginal(s)?.max_abs_diff(&q.marginal(s)?);
            report.record(EFFECTIVENESS, marg_gap <= EPS_NORM, || {
                format!("U={{{u}}}, S={{{s}}}: marginal gap {marg_gap:e}")
            });
        }
        if s.is_disjoint(u) {
            let k = cs.kernel(s.union(u));
            let expected: Vec<Vec<f64>> = (0..space.atoms(s))
                .map(|r| {
                    let mut row = vec![0.0; k.row_len()];
                    for (iu, w) in q.weights().iter().enumerate() {
                        for (o, x) in row.iter_mut().zip(k.row(space.join(s, r, u, iu))) {
                            *o += w * x;
                        }
                    }
                    row
                })
                .collect();
            let gap = kernel_gap(new.kernel(s), &expected);
            report.record(DISJOINT_PRODUCT, gap <= EPS_NORM, || format!("U={{{u}}}, S={{{s}}}: gap {gap:e}"));
        }
    }

    let hard = intervene_hard(cs, u, q)?;
    let generic = intervene(cs, &InterventionSpec::with_mechanism(q.clone(), trivial_mechanism(u, q)?))?;
    let gap = hard.max_abs_diff(&generic);
    report.record(HARD_GENERIC, gap <= EPS_NORM, || format!("U={{{u}}}: gap {gap:e}"));

    report.record(SOURCE_GENERIC, is_global_source(&new, u)?, || format!("U={{{u}}} not a global source"));
    for v in u.subsets() {
        if factorises(q, v)? {
            report.record(SOURCE_FACTORISED, is_global_source(&hard, v)?, || {
                format!("U={{{u}}}, V={{{v}}}: V not a global source after hard intervention")
            });
        } else {
            report.vacuous(SOURCE_FACTORISED);
        }
    }

    let outside = space.full().difference(u);
    for ia in 0..space.atoms(u).min(6) {
        let a = Event::atom_flat(space.clone(), u, ia)?;
        let prof = EventProfile::new(&new, &a)?;
        for v in outside.subsets() {
            report.record(SHIELDED, prof.no_effect(v), || {
                format!("U={{{u}}}: ℋ_{{{v}}} affects an ℋ_U atom after intervention")
            });
        }
    }

    for (a, pb) in events.iter().zip(before) {
        let after = EventProfile::new(&new, a)?;
        let after_hard = EventProfile::new(&hard, a)?;
        for v in SubsetMask::all(n) {
            if pb.no_effect(v) {
                if v.is_disjoint(u) {
                    report.record(SURVIVES_DISJOINT, after.no_effect(v), || {
                        format!("U={{{u}}}: NONE of {{{v}}} lost")
                    });
                }
                report.record(SURVIVES_HARD, after_hard.no_effect(v), || {
                    format!("U={{{u}}}: NONE of {{{v}}} lost under hard intervention")
                });
            } else {
                report.vacuous(SURVIVES_HARD);
                if v.is_disjoint(u) {
                    report.vacuous(SURVIVES_DISJOINT);
                }
            }
            // here the intervened set plays the conditioning role
            if pb.no_effect_given(v, u) {
                let rest = v.difference(u);
                report.record(CONDITIONAL_AFTER, after.no_effect(rest) && after_hard.no_effect(rest), || {
                    format!("{{{v}}} NONE given {{{u}}} but {{{rest}}} has an effect after intervening")
                });
            } else {
                report.vacuous(CONDITIONAL_AFTER);
            }
        }
    }

    if respects_time {
        let tp = TimePartition::singletons(n);
        report.record(TIME_RESPECTING, is_time_respecting(&hard, &tp)?, || {
            format!("U={{{u}}}: time order lost under hard intervention")
        });
    } else {
        report.vacuous(TIME_RESPECTING);
    }
    Ok(())
}
