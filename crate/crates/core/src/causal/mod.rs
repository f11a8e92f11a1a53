//! Causal spaces, their validation against the two axioms, and interventions.

mod intervene;
mod validate;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{AtomIndex, Dist, Event, FiniteProductSpace, Kernel, SubsetMask};

pub use intervene::{intervene, intervene_hard, intervention_measure, InterventionSpec, InternalMechanism};
pub use validate::{validate_causal_space, validate_mechanism, ValidationReport, Violation};

/// A total family `{K_S : S ⊆ U}` of kernels into `(Ω_U, ℋ_U)`.
///
/// For the mechanism of a causal space `U = T`; internal mechanisms of
/// interventions live on the intervened block `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalMechanism {
    space: Arc<FiniteProductSpace>,
    universe: SubsetMask,
    kernels: Vec<Option<Kernel>>,
}

impl CausalMechanism {
    pub fn new(space: Arc<FiniteProductSpace>, universe: SubsetMask, kernels: Vec<Kernel>) -> Result<Self> {
        space.check_mask(universe)?;
        let mut slots: Vec<Option<Kernel>> = vec![None; 1 << space.n()];
        for k in kernels {
            if !k.from().is_subset_of(universe) || k.target() != universe {
                return Err(Error::Domain(format!(
                    "kernel from {{{}}} into {{{}}} does not belong to a mechanism on {{{universe}}}",
                    k.from(),
                    k.target()
                )));
            }
            let slot = &mut slots[k.from().bits() as usize];
            if slot.is_some() {
                return Err(Error::Domain(format!("duplicate kernel for subset {{{}}}", k.from())));
            }
            *slot = Some(k);
        }
        if let Some(missing) = universe.subsets().find(|s| slots[s.bits() as usize].is_none()) {
            return Err(Error::Domain(format!("mechanism is missing the kernel for {{{missing}}}")));
        }
        Ok(CausalMechanism { space, universe, kernels: slots })
    }

    /// Builds every kernel `K_S`, `S ⊆ universe`, with `f`.
    pub fn from_fn<F>(space: Arc<FiniteProductSpace>, universe: SubsetMask, mut f: F) -> Result<Self>
    where
        F: FnMut(SubsetMask) -> Result<Kernel>,
    {
        let kernels = universe.subsets().map(&mut f).collect::<Result<Vec<_>>>()?;
        CausalMechanism::new(space, universe, kernels)
    }

    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn universe(&self) -> SubsetMask {
        self.universe
    }

    pub fn get(&self, s: SubsetMask) -> Option<&Kernel> {
        self.kernels.get(s.bits() as usize).and_then(Option::as_ref)
    }

    /// `K_S`. Panics if `S` is not a subset of the universe.
    pub fn kernel(&self, s: SubsetMask) -> &Kernel {
        self.get(s)
            .unwrap_or_else(|| panic!("no kernel for {{{s}}} in mechanism on {{{}}}", self.universe))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, &Kernel)> {
        self.universe.subsets().map(move |s| (s, self.kernel(s)))
    }

    pub fn max_abs_diff(&self, other: &CausalMechanism) -> f64 {
        if self.universe != other.universe {
            return f64::INFINITY;
        }
        self.iter()
            .map(|(s, k)| k.max_abs_diff(other.kernel(s)))
            .fold(0.0, f64::max)
    }
}

/// `(Ω, ℋ, ℙ, 𝕂)` over a finite product space.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalSpace {
    space: Arc<FiniteProductSpace>,
    p: Dist,
    mechanism: CausalMechanism,
}

impl CausalSpace {
    /// Assembles a space, checking shapes only; see [`CausalSpace::validated`].
    pub fn new(p: Dist, mechanism: CausalMechanism) -> Result<Self> {
        let space = p.space().clone();
        if p.domain() != space.full() {
            return Err(Error::Domain("the observational measure must live on all of Ω".into()));
        }
        if mechanism.universe() != space.full() || *mechanism.space() != space {
            return Err(Error::Domain("the mechanism must cover every subset of T".into()));
        }
        Ok(CausalSpace { space, p, mechanism })
    }

    /// Assembles a space and rejects it unless both axioms hold.
    pub fn validated(p: Dist, mechanism: CausalMechanism) -> Result<Self> {
        let cs = CausalSpace::new(p, mechanism)?;
        let report = validate_causal_space(&cs);
        if report.is_valid() {
            Ok(cs)
        } else {
            Err(Error::InvalidSpace(report.summary()))
        }
    }

    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn p(&self) -> &Dist {
        &self.p
    }

    pub fn mechanism(&self) -> &CausalMechanism {
        &self.mechanism
    }

    pub fn kernel(&self, s: SubsetMask) -> &Kernel {
        self.mechanism.kernel(s)
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn full(&self) -> SubsetMask {
        self.space.full()
    }

    pub fn prob(&self, event: &Event) -> Result<f64> {
        self.p.prob(event)
    }

    /// Largest absolute difference over `ℙ` and all kernels.
    pub fn max_abs_diff(&self, other: &CausalSpace) -> f64 {
        self.p
            .max_abs_diff(&other.p)
            .max(self.mechanism.max_abs_diff(&other.mechanism))
    }
}

/// `K_V(ω_V, ·) = δ_{ω_V} ⊗ q|_{U∖V}` for every `V ⊆ U`.
///
/// This is the product form used for hard interventions. Every kernel leaves
/// `U∖V` with its `q`-marginal regardless of `ω_V`, so joint structure of `q`
/// across `V` and `U∖V` is not carried into the rows.
pub fn trivial_mechanism(u: SubsetMask, q: &Dist) -> Result<CausalMechanism> {
    if q.domain() != u {
        return Err(Error::Domain(format!(
            "measure on {{{}}} given for an intervention on {{{u}}}",
            q.domain()
        )));
    }
    let space = q.space().clone();
    CausalMechanism::from_fn(space.clone(), u, |v| {
        let rest = q.marginal(u.difference(v))?;
        let rows = (0..space.atoms(v))
            .map(|i| Dist::dirac_flat(space.clone(), v, i)?.outer(&rest))
            .collect::<Result<Vec<_>>>()?;
        Kernel::from_dists(space.clone(), v, u, rows)
    })
}

/// The mechanism whose kernel rows are the conditionals `ℙ(· | ω_S)`, making
/// every `ℋ_S` a global source. Fails on a null atom.
pub fn mechanism_from_conditionals(p: &Dist) -> Result<CausalMechanism> {
    let space = p.space().clone();
    let universe = p.domain();
    CausalMechanism::from_fn(space, universe, |s| {
        if s.is_empty() {
            Kernel::constant(s, p)
        } else {
            Kernel::conditional(p, s)
        }
    })
}

/// Convenience: the causal space `(ℙ, mechanism_from_conditionals(ℙ))`.
pub fn conditional_space(p: Dist) -> Result<CausalSpace> {
    let mech = mechanism_from_conditionals(&p)?;
    CausalSpace::new(p, mech)
}

/// `K_S(ω_S, ·)` as a distribution, addressing the row by atom.
pub fn kernel_row(cs: &CausalSpace, atom: &AtomIndex) -> Result<Dist> {
    let k = cs.kernel(atom.domain);
    Ok(k.row_dist(AtomIndex::new(cs.space(), atom.domain, atom.coords.clone())?.flat(cs.space())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space2x2() -> Arc<FiniteProductSpace> {
        FiniteProductSpace::from_sizes(&["a", "b"], &[2, 2]).unwrap()
    }

    #[test]
    fn conditionals_mechanism_examples() {
        let sp = space2x2();
        let u = Dist::uniform(sp.clone(), sp.full()).unwrap();
        let m = mechanism_from_conditionals(&u).unwrap();
        let k0 = m.kernel(SubsetMask::singleton(0));
        assert_eq!(k0.row(0), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(k0.row(1), &[0.0, 0.0, 0.5, 0.5]);

        let p = Dist::new(sp.clone(), sp.full(), vec![0.5, 0.3, 0.1, 0.1]).unwrap();
        let m = mechanism_from_conditionals(&p).unwrap();
        let row = m.kernel(SubsetMask::singleton(0)).row(1);
        assert!((row[2] - 0.5).abs() < 1e-12 && (row[3] - 0.5).abs() < 1e-12 && row[0] == 0.0);
        let cs = CausalSpace::new(p, m).unwrap();
        assert!(validate_causal_space(&cs).is_valid());

        let null = Dist::new(sp.clone(), sp.full(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(mechanism_from_conditionals(&null), Err(Error::NullSet { .. })));
    }

    #[test]
    fn trivial_mechanism_examples() {
        let sp = space2x2();
        let q = Dist::uniform(sp.clone(), sp.full()).unwrap();
        let l = trivial_mechanism(sp.full(), &q).unwrap();
        assert_eq!(l.kernel(SubsetMask::EMPTY).row(0), q.weights());
        for i in 0..4 {
            let row = l.kernel(sp.full()).row(i);
            assert!(row.iter().enumerate().all(|(j, &w)| w == if i == j { 1.0 } else { 0.0 }));
        }
        assert_eq!(l.kernel(SubsetMask::singleton(0)).row(0), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn mechanism_requires_every_subset() {
        let sp = space2x2();
        let q = Dist::uniform(sp.clone(), sp.full()).unwrap();
        let k = Kernel::constant(SubsetMask::EMPTY, &q).unwrap();
        assert!(CausalMechanism::new(sp.clone(), sp.full(), vec![k.clone()]).is_err());
        assert!(CausalMechanism::new(sp.clone(), SubsetMask::EMPTY, vec![k.clone(), k]).is_err());
    }
}
