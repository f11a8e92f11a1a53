use crate::error::{Error, Result};
use crate::measure::{bind, Dist, Kernel, SubsetMask};

use super::validate::validate_mechanism;
use super::{CausalMechanism, CausalSpace};

/// The internal causal structure placed on the intervened block.
#[derive(Clone, Debug, PartialEq)]
pub enum InternalMechanism {
    /// An explicit mechanism `𝕃 = {L_V : V ⊆ U}` on `(Ω_U, ℋ_U, ℚ)`.
    Mechanism(CausalMechanism),
    /// No internal structure; see [`intervene_hard`].
    Hard,
}

/// An intervention on `ℋ_U` via `(ℚ, 𝕃)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterventionSpec {
    pub u: SubsetMask,
    pub q: Dist,
    pub internal: InternalMechanism,
}

impl InterventionSpec {
    pub fn hard(q: Dist) -> Self {
        InterventionSpec { u: q.domain(), q, internal: InternalMechanism::Hard }
    }

    pub fn with_mechanism(q: Dist, l: CausalMechanism) -> Self {
        InterventionSpec { u: q.domain(), q, internal: InternalMechanism::Mechanism(l) }
    }

    pub fn check(&self) -> Result<()> {
        if self.q.domain() != self.u {
            return Err(Error::Domain(format!(
                "intervention on {{{}}} carries a measure on {{{}}}",
                self.u,
                self.q.domain()
            )));
        }
        if let InternalMechanism::Mechanism(l) = &self.internal {
            if l.universe() != self.u {
                return Err(Error::Domain(format!(
                    "internal mechanism lives on {{{}}}, intervention on {{{}}}",
                    l.universe(),
                    self.u
                )));
            }
            let report = validate_mechanism(&self.q, l);
            if !report.is_valid() {
                return Err(Error::Domain(format!("internal mechanism is invalid: {}", report.summary())));
            }
        }
        Ok(())
    }
}

/// `ℙ^{do(U,ℚ)} = ∫ ℚ(dω) K_U(ω, ·)`.
pub fn intervention_measure(cs: &CausalSpace, q: &Dist) -> Result<Dist> {
    if *q.space() != *cs.space() {
        return Err(Error::Domain("intervention measure belongs to another space".into()));
    }
    bind(q, cs.kernel(q.domain()))
}

/// Intervenes on `ℋ_U` via `(ℚ, 𝕃)`, returning a fresh causal space with
///
/// `K^do_S(ω, A) = Σ_{ω'_U} L_{S∩U}(ω_{S∩U}, ω'_U) · K_{S∪U}((ω_{S∖U}, ω'_U), A)`.
pub fn intervene(cs: &CausalSpace, spec: &InterventionSpec) -> Result<CausalSpace> {
    spec.check()?;
    if spec.u.is_empty() {
        return Ok(cs.clone());
    }
    let l = match &spec.internal {
        InternalMechanism::Hard => return intervene_hard(cs, spec.u, &spec.q),
        InternalMechanism::Mechanism(l) => l,
    };
    let space = cs.space().clone();
    let u = spec.u;
    let p_do = intervention_measure(cs, &spec.q)?;
    let omega = space.atoms(space.full());

    let mech = CausalMechanism::from_fn(space.clone(), space.full(), |s| {
        let inside = s.intersection(u);
        let outside = s.difference(u);
        let l_kernel = l.kernel(inside);
        let k = cs.kernel(s.union(u));
        let to_inside = space.projection(s, inside)?;
        let to_outside = space.projection(s, outside)?;
        let join = space.join_table(outside, u)?;
        let n_rows = space.atoms(s);
        let mut data = vec![0.0; n_rows * omega];
        for r in 0..n_rows {
            let out = &mut data[r * omega..(r + 1) * omega];
            let joined = &join[to_outside[r]];
            for (iu, &w) in l_kernel.row(to_inside[r]).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (o, x) in out.iter_mut().zip(k.row(joined[iu])) {
                    *o += w * x;
                }
            }
        }
        Ok(Kernel::from_data(space.clone(), s, space.full(), data))
    })?;
    CausalSpace::new(p_do, mech)
}

/// Hard intervention on `ℋ_U` via `ℚ`, computed in closed form:
///
/// `K^do_S(ω, A) = Σ_{ω'_{U∖S}} ℚ(ω'_{U∖S}) · K_{S∪U}((ω_S, ω'_{U∖S}), A)`.
///
/// Agrees with [`intervene`] using [`super::trivial_mechanism`] as the internal mechanism.
pub fn intervene_hard(cs: &CausalSpace, u: SubsetMask, q: &Dist) -> Result<CausalSpace> {
    if q.domain() != u {
        return Err(Error::Domain(format!(
            "intervention on {{{u}}} carries a measure on {{{}}}",
            q.domain()
        )));
    }
    // the trivial σ-algebra: the exact original, free of rounding
    if u.is_empty() {
        return Ok(cs.clone());
    }
    let space = cs.space().clone();
    let p_do = intervention_measure(cs, q)?;
    let omega = space.atoms(space.full());

    let mech = CausalMechanism::from_fn(space.clone(), space.full(), |s| {
        let rest = u.difference(s);
        let q_rest = q.marginal(rest)?;
        let k = cs.kernel(s.union(u));
        let join = space.join_table(s, rest)?;
        let n_rows = space.atoms(s);
        let mut data = vec![0.0; n_rows * omega];
        for (r, joined) in join.iter().enumerate() {
            let out = &mut data[r * omega..(r + 1) * omega];
            for (iw, &w) in q_rest.weights().iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (o, x) in out.iter_mut().zip(k.row(joined[iw])) {
                    *o += w * x;
                }
            }
        }
        Ok(Kernel::from_data(space.clone(), s, space.full(), data))
    })?;
    CausalSpace::new(p_do, mech)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{mechanism_from_conditionals, trivial_mechanism, validate_causal_space};
    use crate::measure::{Event, FiniteProductSpace};

    fn sample_space() -> CausalSpace {
        let sp = FiniteProductSpace::from_sizes(&["a", "b", "c"], &[2, 3, 2]).unwrap();
        let w: Vec<f64> = (1..=12).map(|i| (i * i % 7 + 1) as f64).collect();
        let s: f64 = w.iter().sum();
        let p = Dist::new(sp.clone(), sp.full(), w.iter().map(|x| x / s).collect()).unwrap();
        let m = mechanism_from_conditionals(&p).unwrap();
        CausalSpace::new(p, m).unwrap()
    }

    #[test]
    fn empty_intervention_is_identity() {
        let cs = sample_space();
        let q = Dist::uniform(cs.space().clone(), SubsetMask::EMPTY).unwrap();
        let l = trivial_mechanism(SubsetMask::EMPTY, &q).unwrap();
        let out = intervene(&cs, &InterventionSpec::with_mechanism(q.clone(), l)).unwrap();
        assert_eq!(out, cs);
        assert_eq!(intervene_hard(&cs, SubsetMask::EMPTY, &q).unwrap(), cs);
    }

    #[test]
    fn interventional_determinism_and_validity() {
        let cs = sample_space();
        let sp = cs.space().clone();
        let u = SubsetMask::from_indices([0, 2]);
        let q = Dist::new(sp.clone(), u, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let l = trivial_mechanism(u, &q).unwrap();
        let out = intervene(&cs, &InterventionSpec::with_mechanism(q.clone(), l)).unwrap();
        assert!(validate_causal_space(&out).is_valid());
        for i in 0..4 {
            let a = Event::atom_flat(sp.clone(), u, i).unwrap();
            assert!((out.prob(&a).unwrap() - q.prob(&a).unwrap()).abs() < 1e-12);
        }
        let hard = intervene_hard(&cs, u, &q).unwrap();
        assert!(hard.max_abs_diff(&out) < 1e-12);
    }

    #[test]
    fn hard_dirac_collapses_to_kernel_rows() {
        let cs = sample_space();
        let sp = cs.space().clone();
        let u = SubsetMask::from_indices([1]);
        let q = Dist::dirac_flat(sp.clone(), u, 2).unwrap();
        let out = intervene_hard(&cs, u, &q).unwrap();
        // S = {0}: K^do_{0}(ω_0) = K_{0,1}((ω_0, 2))
        let s = SubsetMask::singleton(0);
        let su = s.union(u);
        for r in 0..2 {
            let j = sp.join(s, r, u, 2);
            assert_eq!(out.kernel(s).row(r), cs.kernel(su).row(j));
        }
        assert_eq!(out.p().weights(), cs.kernel(u).row(2));
    }

    #[test]
    fn rejects_bad_specs() {
        let cs = sample_space();
        let sp = cs.space().clone();
        let u = SubsetMask::singleton(0);
        let q = Dist::uniform(sp.clone(), u).unwrap();
        let other = Dist::new(sp.clone(), u, vec![0.9, 0.1]).unwrap();
        let l = trivial_mechanism(u, &other).unwrap();
        // L_∅ ≠ ℚ
        assert!(intervene(&cs, &InterventionSpec::with_mechanism(q.clone(), l)).is_err());
        let wrong = InterventionSpec { u: SubsetMask::singleton(1), q, internal: InternalMechanism::Hard };
        assert!(intervene(&cs, &wrong).is_err());
    }
}
