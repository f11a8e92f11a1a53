use crate::causal::CausalSpace;
use crate::error::Result;
use crate::measure::{Event, SubsetMask, EPS_NORM};

use super::EffectClass;

/// The table `S ↦ (ω_S ↦ K_S(ω_S, A))` for one event `A`, shared by all
/// effect queries on that event.
#[derive(Clone, Debug)]
pub struct EventProfile<'a> {
    cs: &'a CausalSpace,
    columns: Vec<Vec<f64>>,
    p_a: f64,
}

impl<'a> EventProfile<'a> {
    pub fn new(cs: &'a CausalSpace, a: &Event) -> Result<Self> {
        let mut columns = vec![Vec::new(); 1 << cs.n()];
        for (s, k) in cs.mechanism().iter() {
            columns[s.bits() as usize] = k.event_column(a)?;
        }
        Ok(EventProfile { cs, columns, p_a: cs.prob(a)? })
    }

    /// `K_S(ω_S, A)`.
    pub fn value(&self, s: SubsetMask, row: usize) -> f64 {
        self.columns[s.bits() as usize][row]
    }

    pub fn column(&self, s: SubsetMask) -> &[f64] {
        &self.columns[s.bits() as usize]
    }

    pub fn p_a(&self) -> f64 {
        self.p_a
    }

    /// First `(S, ω_S)` with `|K_S(ω_S, A) − K_R(ω_R, A)| > ε`, scanning `S` in
    /// increasing order, where `R = reduce(S)`.
    fn first_mismatch<F>(&self, reduce: F) -> Option<(SubsetMask, usize)>
    where
        F: Fn(SubsetMask) -> (SubsetMask, SubsetMask),
    {
        let space = self.cs.space();
        for s in SubsetMask::all(self.cs.n()) {
            let (lhs, rhs) = reduce(s);
            if lhs == rhs {
                continue;
            }
            let proj = space.projection(lhs, rhs).expect("reduced subset is contained");
            let l = self.column(lhs);
            let r = self.column(rhs);
            if let Some(row) = (0..l.len()).find(|&i| (l[i] - r[proj[i]]).abs() > EPS_NORM) {
                return Some((lhs, row));
            }
        }
        None
    }

    /// `K_S(ω, A) = K_{S∖U}(ω, A)` for every `S` and `ω`.
    pub fn no_effect(&self, u: SubsetMask) -> bool {
        self.first_difference(u).is_none()
    }

    /// A pair `(S, ω_S)` witnessing that `ℋ_U` has some causal effect on `A`.
    pub fn first_difference(&self, u: SubsetMask) -> Option<(SubsetMask, usize)> {
        self.first_mismatch(|s| (s, s.difference(u)))
    }

    /// `K_U(ω, A) ≠ ℙ(A)` for some `ω`.
    pub fn active(&self, u: SubsetMask) -> bool {
        self.column(u).iter().any(|k| (k - self.p_a).abs() > EPS_NORM)
    }

    pub fn classify(&self, u: SubsetMask) -> EffectClass {
        if self.no_effect(u) {
            EffectClass::None
        } else if self.active(u) {
            EffectClass::Active
        } else {
            EffectClass::Dormant
        }
    }

    /// `K_{S∪V}(ω, A) = K_{(S∪V)∖(U∖V)}(ω, A)` for every `S` and `ω`.
    pub fn no_effect_given(&self, u: SubsetMask, v: SubsetMask) -> bool {
        let removed = u.difference(v);
        self.first_mismatch(|s| {
            let sv = s.union(v);
            (sv, sv.difference(removed))
        })
        .is_none()
    }
}
