use std::sync::Arc;

use crate::error::{Error, Result};

use super::space::{AtomIndex, FiniteProductSpace, SubsetMask};
use super::{EPS_NORM, RENORMALIZE_TOL};

/// A probability measure on a sub-product `Ω_S`, stored as a dense weight tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Dist {
    space: Arc<FiniteProductSpace>,
    domain: SubsetMask,
    weights: Vec<f64>,
}

/// Checks and renormalizes a weight vector in place.
pub(crate) fn normalize_weights(weights: &mut [f64]) -> Result<()> {
    let mut sum = 0.0;
    for w in weights.iter_mut() {
        if !w.is_finite() {
            return Err(Error::InvalidDistribution(format!("non-finite weight {w}")));
        }
        if *w < 0.0 {
            if *w < -1e-12 {
                return Err(Error::InvalidDistribution(format!("negative weight {w}")));
            }
            *w = 0.0;
        }
        sum += *w;
    }
    if (sum - 1.0).abs() > RENORMALIZE_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {sum}, not 1")));
    }
    if sum != 1.0 {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    Ok(())
}

impl Dist {
    /// Validates and (if within `1e-6` of one) renormalizes the weights.
    pub fn new(space: Arc<FiniteProductSpace>, domain: SubsetMask, mut weights: Vec<f64>) -> Result<Self> {
        space.check_mask(domain)?;
        let expected = space.atoms(domain);
        if weights.len() != expected {
            return Err(Error::Dimension(format!(
                "distribution on {{{domain}}} needs {expected} weights, got {}",
                weights.len()
            )));
        }
        normalize_weights(&mut weights)?;
        Ok(Dist { space, domain, weights })
    }

    /// Trusted constructor for weights produced by mass-preserving operations.
    pub(crate) fn from_parts(space: Arc<FiniteProductSpace>, domain: SubsetMask, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), space.atoms(domain));
        Dist { space, domain, weights }
    }

    pub fn uniform(space: Arc<FiniteProductSpace>, domain: SubsetMask) -> Result<Self> {
        space.check_mask(domain)?;
        let k = space.atoms(domain);
        Ok(Dist::from_parts(space, domain, vec![1.0 / k as f64; k]))
    }

    /// `δ_{ω_S}` on `Ω_S`.
    pub fn dirac(space: Arc<FiniteProductSpace>, atom: &AtomIndex) -> Result<Self> {
        let atom = AtomIndex::new(&space, atom.domain, atom.coords.clone())?;
        let mut weights = vec![0.0; space.atoms(atom.domain)];
        weights[atom.flat(&space)] = 1.0;
        Ok(Dist::from_parts(space, atom.domain, weights))
    }

    pub fn dirac_flat(space: Arc<FiniteProductSpace>, domain: SubsetMask, flat: usize) -> Result<Self> {
        let atom = AtomIndex::from_flat(&space, domain, flat)?;
        Dist::dirac(space, &atom)
    }

    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn domain(&self) -> SubsetMask {
        self.domain
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.weights[flat]
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn is_full_support(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Pushforward under `π_{R,S}`.
    pub fn marginal(&self, s: SubsetMask) -> Result<Dist> {
        if !s.is_subset_of(self.domain) {
            return Err(Error::Domain(format!(
                "marginal onto {{{s}}} requested from a distribution on {{{}}}",
                self.domain
            )));
        }
        if s == self.domain {
            return Ok(self.clone());
        }
        let proj = self.space.projection(self.domain, s)?;
        let mut out = vec![0.0; self.space.atoms(s)];
        for (w, &j) in self.weights.iter().zip(&proj) {
            out[j] += w;
        }
        Ok(Dist::from_parts(self.space.clone(), s, out))
    }

    /// Mass of the cylinder `{ω : ω_S = atom}`.
    pub fn mass_at(&self, atom: &AtomIndex) -> Result<f64> {
        let m = self.marginal(atom.domain)?;
        Ok(m.weights[atom.flat(&self.space)])
    }

    /// Conditional distribution given `ω_S = atom`, supported on that cylinder.
    pub fn condition(&self, atom: &AtomIndex) -> Result<Dist> {
        let atom = AtomIndex::new(&self.space, atom.domain, atom.coords.clone())?;
        if !atom.domain.is_subset_of(self.domain) {
            return Err(Error::Domain(format!(
                "cannot condition a distribution on {{{}}} on an atom of {{{}}}",
                self.domain, atom.domain
            )));
        }
        let proj = self.space.projection(self.domain, atom.domain)?;
        let target = atom.flat(&self.space);
        let mass: f64 = self
            .weights
            .iter()
            .zip(&proj)
            .filter(|(_, &j)| j == target)
            .map(|(w, _)| w)
            .sum();
        if mass <= EPS_NORM {
            return Err(Error::NullSet {
                subset: atom.domain.to_string(),
                atom: atom.coords.clone(),
                mass,
            });
        }
        let weights = self
            .weights
            .iter()
            .zip(&proj)
            .map(|(w, &j)| if j == target { w / mass } else { 0.0 })
            .collect();
        Ok(Dist::from_parts(self.space.clone(), self.domain, weights))
    }

    /// Probability of an event whose domain is contained in this distribution's domain.
    pub fn prob(&self, event: &Event) -> Result<f64> {
        let ind = event.indicator_on(self.domain)?;
        Ok(self
            .weights
            .iter()
            .zip(&ind)
            .filter(|(_, &b)| b)
            .map(|(w, _)| w)
            .sum())
    }

    /// Product measure on the union of two disjoint domains.
    pub fn outer(&self, other: &Dist) -> Result<Dist> {
        let table = self.space.join_table(self.domain, other.domain)?;
        let union = self.domain.union(other.domain);
        let mut out = vec![0.0; self.space.atoms(union)];
        for (i, a) in self.weights.iter().enumerate() {
            for (j, b) in other.weights.iter().enumerate() {
                out[table[i][j]] = a * b;
            }
        }
        Ok(Dist::from_parts(self.space.clone(), union, out))
    }

    /// Largest absolute weight difference; infinite when domains differ.
    pub fn max_abs_diff(&self, other: &Dist) -> f64 {
        if self.domain != other.domain || self.weights.len() != other.weights.len() {
            return f64::INFINITY;
        }
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Dist, eps: f64) -> bool {
        self.max_abs_diff(other) <= eps
    }

    pub fn total_variation(&self, other: &Dist) -> f64 {
        if self.domain != other.domain {
            return f64::INFINITY;
        }
        0.5 * self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Product measure `dA ⊗ dB` on `Ω`, for domains that partition `T`.
pub fn product(a: &Dist, b: &Dist) -> Result<Dist> {
    let space = a.space();
    if !a.domain().is_disjoint(b.domain()) {
        return Err(Error::Domain(format!(
            "product domains {{{}}} and {{{}}} overlap",
            a.domain(),
            b.domain()
        )));
    }
    if a.domain().union(b.domain()) != space.full() {
        return Err(Error::Domain(format!(
            "product domains {{{}}} and {{{}}} do not cover T",
            a.domain(),
            b.domain()
        )));
    }
    a.outer(b)
}

/// An event of `ℋ_S`: a set of atoms of `Ω_S`, read as a cylinder in `Ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    space: Arc<FiniteProductSpace>,
    domain: SubsetMask,
    members: Vec<bool>,
}

impl Event {
    pub fn new(space: Arc<FiniteProductSpace>, domain: SubsetMask, members: Vec<bool>) -> Result<Self> {
        space.check_mask(domain)?;
        if members.len() != space.atoms(domain) {
            return Err(Error::Dimension(format!(
                "event on {{{domain}}} needs {} flags, got {}",
                space.atoms(domain),
                members.len()
            )));
        }
        Ok(Event { space, domain, members })
    }

    pub fn empty(space: Arc<FiniteProductSpace>) -> Self {
        Event { space, domain: SubsetMask::EMPTY, members: vec![false] }
    }

    pub fn full(space: Arc<FiniteProductSpace>) -> Self {
        Event { space, domain: SubsetMask::EMPTY, members: vec![true] }
    }

    pub fn from_predicate<F>(space: Arc<FiniteProductSpace>, domain: SubsetMask, pred: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> bool,
    {
        space.check_mask(domain)?;
        let members = (0..space.atoms(domain))
            .map(|i| pred(&space.decode(domain, i)))
            .collect();
        Ok(Event { space, domain, members })
    }

    /// Measurable rectangle `×_t A_t`; `None` leaves a coordinate unrestricted.
    pub fn rectangle(space: Arc<FiniteProductSpace>, sides: &[Option<Vec<usize>>]) -> Result<Self> {
        if sides.len() != space.n() {
            return Err(Error::Dimension(format!(
                "rectangle needs {} sides, got {}",
                space.n(),
                sides.len()
            )));
        }
        let domain = SubsetMask::from_indices(
            sides.iter().enumerate().filter(|(_, s)| s.is_some()).map(|(t, _)| t),
        );
        let allowed: Vec<&Vec<usize>> = sides.iter().flatten().collect();
        Event::from_predicate(space, domain, |coords| {
            coords.iter().zip(&allowed).all(|(c, a)| a.contains(c))
        })
    }

    /// The cylinder `{ω : ω_S = atom}`.
    pub fn atom(space: Arc<FiniteProductSpace>, atom: &AtomIndex) -> Result<Self> {
        let atom = AtomIndex::new(&space, atom.domain, atom.coords.clone())?;
        let mut members = vec![false; space.atoms(atom.domain)];
        members[atom.flat(&space)] = true;
        Ok(Event { space, domain: atom.domain, members })
    }

    pub fn atom_flat(space: Arc<FiniteProductSpace>, domain: SubsetMask, flat: usize) -> Result<Self> {
        let atom = AtomIndex::from_flat(&space, domain, flat)?;
        Event::atom(space, &atom)
    }

    pub fn space(&self) -> &Arc<FiniteProductSpace> {
        &self.space
    }

    pub fn domain(&self) -> SubsetMask {
        self.domain
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    /// Membership flags of the cylinder over the atoms of a larger domain.
    pub fn indicator_on(&self, domain: SubsetMask) -> Result<Vec<bool>> {
        if !self.domain.is_subset_of(domain) {
            return Err(Error::Domain(format!(
                "event on {{{}}} cannot be evaluated on {{{domain}}}",
                self.domain
            )));
        }
        let proj = self.space.projection(domain, self.domain)?;
        Ok(proj.iter().map(|&j| self.members[j]).collect())
    }

    /// Whether `ω` (a full atom index) lies in the event.
    pub fn contains_full(&self, flat: usize) -> bool {
        let coords = self.space.decode(self.space.full(), flat);
        let sub: Vec<usize> = self.domain.indices().map(|t| coords[t]).collect();
        self.members[self.space.encode(self.domain, &sub)]
    }

    /// Re-expresses the event on a larger domain.
    pub fn lift(&self, domain: SubsetMask) -> Result<Event> {
        Ok(Event {
            space: self.space.clone(),
            domain,
            members: self.indicator_on(domain)?,
        })
    }

    pub fn complement(&self) -> Event {
        Event {
            space: self.space.clone(),
            domain: self.domain,
            members: self.members.iter().map(|b| !b).collect(),
        }
    }

    pub fn intersect(&self, other: &Event) -> Result<Event> {
        let d = self.domain.union(other.domain);
        let a = self.indicator_on(d)?;
        let b = other.indicator_on(d)?;
        Ok(Event {
            space: self.space.clone(),
            domain: d,
            members: a.iter().zip(&b).map(|(x, y)| *x && *y).collect(),
        })
    }

    pub fn is_empty_event(&self) -> bool {
        self.members.iter().all(|b| !b)
    }

    pub fn is_sure_event(&self) -> bool {
        self.members.iter().all(|&b| b)
    }

    /// The same event expressed on `to`, if its membership depends only on `to`-coordinates,
    /// i.e. if the event lies in `ℋ_to`.
    pub fn reduce_to(&self, to: SubsetMask) -> Option<Event> {
        let keep = self.domain.intersection(to);
        let proj = self.space.projection(self.domain, keep).ok()?;
        let mut reduced: Vec<Option<bool>> = vec![None; self.space.atoms(keep)];
        for (&m, &j) in self.members.iter().zip(&proj) {
            match reduced[j] {
                None => reduced[j] = Some(m),
                Some(prev) if prev != m => return None,
                _ => {}
            }
        }
        Some(Event {
            space: self.space.clone(),
            domain: keep,
            members: reduced.into_iter().map(|m| m.unwrap_or(false)).collect(),
        })
    }

    pub fn is_measurable_wrt(&self, mask: SubsetMask) -> bool {
        self.reduce_to(mask).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space2x2() -> Arc<FiniteProductSpace> {
        FiniteProductSpace::from_sizes(&["a", "b"], &[2, 2]).unwrap()
    }

    #[test]
    fn marginal_examples() {
        let sp = space2x2();
        let u = Dist::uniform(sp.clone(), sp.full()).unwrap();
        let m = u.marginal(SubsetMask::singleton(0)).unwrap();
        assert!(m.weights().iter().all(|w| (w - 0.5).abs() < 1e-12));

        // fibers of the first coordinate: {.5,.3} and {.1,.1}
        let d = Dist::new(sp.clone(), sp.full(), vec![0.5, 0.3, 0.1, 0.1]).unwrap();
        let m = d.marginal(SubsetMask::singleton(0)).unwrap();
        assert!((m.weight(0) - 0.8).abs() < 1e-12 && (m.weight(1) - 0.2).abs() < 1e-12);

        assert_eq!(d.marginal(sp.full()).unwrap(), d);
        assert!(m.marginal(SubsetMask::singleton(1)).is_err());
    }

    #[test]
    fn condition_examples() {
        let sp = space2x2();
        let first = SubsetMask::singleton(0);
        let u = Dist::uniform(sp.clone(), sp.full()).unwrap();
        let c = u.condition(&AtomIndex::new(&sp, first, vec![0]).unwrap()).unwrap();
        assert_eq!(c.weights(), &[0.5, 0.5, 0.0, 0.0]);

        let d = Dist::new(sp.clone(), sp.full(), vec![0.5, 0.3, 0.1, 0.1]).unwrap();
        let c = d.condition(&AtomIndex::new(&sp, first, vec![1]).unwrap()).unwrap();
        assert!(c.approx_eq(&Dist::new(sp.clone(), sp.full(), vec![0.0, 0.0, 0.5, 0.5]).unwrap(), 1e-12));

        let full_atom = AtomIndex::new(&sp, sp.full(), vec![1, 0]).unwrap();
        let c = d.condition(&full_atom).unwrap();
        assert_eq!(c, Dist::dirac(sp.clone(), &full_atom).unwrap());
    }

    #[test]
    fn condition_on_null_atom_is_an_error() {
        let sp = space2x2();
        let d = Dist::new(sp.clone(), sp.full(), vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let err = d
            .condition(&AtomIndex::new(&sp, SubsetMask::singleton(0), vec![1]).unwrap())
            .unwrap_err();
        assert!(matches!(err, Error::NullSet { .. }));
    }

    #[test]
    fn product_examples() {
        let sp = space2x2();
        let (a, b) = (SubsetMask::singleton(0), SubsetMask::singleton(1));
        let da = Dist::new(sp.clone(), a, vec![0.7, 0.3]).unwrap();
        let db = Dist::new(sp.clone(), b, vec![0.5, 0.5]).unwrap();
        let p = product(&da, &db).unwrap();
        assert!(p.approx_eq(&Dist::new(sp.clone(), sp.full(), vec![0.35, 0.35, 0.15, 0.15]).unwrap(), 1e-12));

        let x = Dist::dirac_flat(sp.clone(), a, 1).unwrap();
        let y = Dist::dirac_flat(sp.clone(), b, 0).unwrap();
        assert_eq!(product(&x, &y).unwrap(), Dist::dirac_flat(sp.clone(), sp.full(), 2).unwrap());

        let ua = Dist::uniform(sp.clone(), a).unwrap();
        let ub = Dist::uniform(sp.clone(), b).unwrap();
        assert!(product(&ua, &ub).unwrap().approx_eq(&Dist::uniform(sp.clone(), sp.full()).unwrap(), 1e-15));

        assert!(product(&da, &da).is_err());
        let sp3 = FiniteProductSpace::from_sizes(&["a", "b", "c"], &[2, 2, 2]).unwrap();
        let d0 = Dist::uniform(sp3.clone(), a).unwrap();
        let d1 = Dist::uniform(sp3, b).unwrap();
        assert!(product(&d0, &d1).is_err());
    }

    #[test]
    fn dirac_examples() {
        let sp = FiniteProductSpace::from_sizes(&["a"], &[3]).unwrap();
        let d = Dist::dirac_flat(sp.clone(), sp.full(), 0).unwrap();
        assert_eq!(d.weights(), &[1.0, 0.0, 0.0]);

        let sp = FiniteProductSpace::from_sizes(&["a", "b", "c"], &[2, 3, 2]).unwrap();
        let atom = AtomIndex::new(&sp, sp.full(), vec![1, 2, 0]).unwrap();
        let d = Dist::dirac(sp.clone(), &atom).unwrap();
        let u = SubsetMask::from_indices([0, 2]);
        let expected = Dist::dirac(sp.clone(), &atom.restrict(u).unwrap()).unwrap();
        assert_eq!(d.marginal(u).unwrap(), expected);

        let full_support = Dist::new(sp.clone(), sp.full(), (1..=12).map(|i| i as f64 / 78.0).collect()).unwrap();
        assert_eq!(full_support.condition(&atom).unwrap(), d);
    }

    #[test]
    fn construction_renormalizes_or_rejects() {
        let sp = space2x2();
        let d = Dist::new(sp.clone(), sp.full(), vec![0.25, 0.25, 0.25, 0.2500001]).unwrap();
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Dist::new(sp.clone(), sp.full(), vec![0.25, 0.25, 0.25, 0.3]).is_err());
        assert!(Dist::new(sp.clone(), sp.full(), vec![1.5, -0.5, 0.0, 0.0]).is_err());
        assert!(Dist::new(sp.clone(), sp.full(), vec![1.0]).is_err());
    }

    #[test]
    fn events() {
        let sp = FiniteProductSpace::from_sizes(&["a", "b", "c"], &[2, 3, 2]).unwrap();
        let rect = Event::rectangle(sp.clone(), &[None, Some(vec![0, 2]), Some(vec![1])]).unwrap();
        assert_eq!(rect.domain(), SubsetMask::from_indices([1, 2]));
        let u = Dist::uniform(sp.clone(), sp.full()).unwrap();
        assert!((u.prob(&rect).unwrap() - 2.0 / 6.0).abs() < 1e-12);
        assert!((u.prob(&rect.complement()).unwrap() - 4.0 / 6.0).abs() < 1e-12);
        assert_eq!(u.prob(&Event::full(sp.clone())).unwrap(), 1.0);
        assert_eq!(u.prob(&Event::empty(sp.clone())).unwrap(), 0.0);

        assert!(rect.is_measurable_wrt(SubsetMask::from_indices([1, 2])));
        assert!(!rect.is_measurable_wrt(SubsetMask::singleton(1)));
        let lifted = rect.lift(sp.full()).unwrap();
        assert_eq!(lifted.reduce_to(SubsetMask::from_indices([1, 2])).unwrap(), rect);
        assert!(rect.contains_full(sp.encode(sp.full(), &[1, 2, 1])));
        assert!(!rect.contains_full(sp.encode(sp.full(), &[1, 1, 1])));
    }
}
