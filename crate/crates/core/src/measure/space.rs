use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Component cap used when `CAUSAL_SPACES_MAX_T` is not set.
pub const DEFAULT_MAX_COMPONENTS: usize = 12;
/// Environment variable overriding the component cap.
pub const MAX_COMPONENTS_ENV: &str = "CAUSAL_SPACES_MAX_T";
// Masks are u32 and mechanisms store 2^n kernels.
const HARD_MAX_COMPONENTS: usize = 24;

/// The component cap in effect, honouring `CAUSAL_SPACES_MAX_T`.
pub fn component_cap() -> usize {
    std::env::var(MAX_COMPONENTS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.clamp(1, HARD_MAX_COMPONENTS))
        .unwrap_or(DEFAULT_MAX_COMPONENTS)
}

/// A subset `S` of the index set `T`, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub const fn from_bits(bits: u32) -> Self {
        SubsetMask(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn full(n: usize) -> Self {
        if n >= 32 {
            SubsetMask(u32::MAX)
        } else {
            SubsetMask((1u32 << n) - 1)
        }
    }

    pub fn singleton(t: usize) -> Self {
        SubsetMask(1 << t)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        SubsetMask(indices.into_iter().fold(0, |acc, t| acc | (1 << t)))
    }

    pub fn contains(self, t: usize) -> bool {
        t < 32 && self.0 & (1 << t) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: SubsetMask) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 | other.0)
    }

    pub fn intersection(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 & other.0)
    }

    pub fn difference(self, other: SubsetMask) -> Self {
        SubsetMask(self.0 & !other.0)
    }

    /// Component indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |t| bits & (1 << t) != 0)
    }

    /// Every subset of `self`, in increasing bit order, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = SubsetMask> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(SubsetMask(cur))
        })
    }

    /// All `2^n` subsets of `{0, …, n-1}`.
    pub fn all(n: usize) -> impl Iterator<Item = SubsetMask> {
        SubsetMask::full(n).subsets()
    }

    /// Parses `"0,2"`, `"[0, 2]"`, `"[]"` or `""`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if inner.is_empty() {
            return Ok(SubsetMask::EMPTY);
        }
        let mut mask = SubsetMask::EMPTY;
        for part in inner.split(',') {
            let t: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad subset index {part:?} in {s:?}")))?;
            if t >= HARD_MAX_COMPONENTS {
                return Err(Error::Parse(format!("subset index {t} out of range")));
            }
            mask = mask.union(SubsetMask::singleton(t));
        }
        Ok(mask)
    }
}

impl fmt::Display for SubsetMask {
    /// Sorted comma-separated index list, e.g. `0,2`; the empty set prints as nothing.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl BitOr for SubsetMask {
    type Output = SubsetMask;
    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl BitAnd for SubsetMask {
    type Output = SubsetMask;
    fn bitand(self, rhs: Self) -> Self {
        self.intersection(rhs)
    }
}

impl Sub for SubsetMask {
    type Output = SubsetMask;
    fn sub(self, rhs: Self) -> Self {
        self.difference(rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Component {
    pub fn new<S: Into<String>>(name: S, outcomes: &[&str]) -> Self {
        Component {
            name: name.into(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// A component whose outcomes are labelled `0..k`.
    pub fn indexed<S: Into<String>>(name: S, k: usize) -> Self {
        Component {
            name: name.into(),
            outcomes: (0..k).map(|i| i.to_string()).collect(),
        }
    }
}

/// A finite product of finite measurable spaces, each with its full power set.
///
/// Atoms of a sub-product `Ω_S` are flattened row-major over the components of
/// `S` in ascending index order, so the lowest component varies slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteProductSpace {
    components: Vec<Component>,
    sizes: Vec<usize>,
}

impl FiniteProductSpace {
    pub fn new(components: Vec<Component>) -> Result<Arc<Self>> {
        Self::with_cap(components, component_cap())
    }

    pub fn with_cap(components: Vec<Component>, cap: usize) -> Result<Arc<Self>> {
        if components.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one component".into()));
        }
        if components.len() > cap.min(HARD_MAX_COMPONENTS) {
            return Err(Error::InvalidSpace(format!(
                "{} components exceeds the cap of {} (set {MAX_COMPONENTS_ENV} to raise it)",
                components.len(),
                cap
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if c.outcomes.is_empty() {
                return Err(Error::InvalidSpace(format!("component {:?} has no outcomes", c.name)));
            }
            if components[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidSpace(format!("duplicate component name {:?}", c.name)));
            }
        }
        let sizes = components.iter().map(|c| c.outcomes.len()).collect();
        Ok(Arc::new(FiniteProductSpace { components, sizes }))
    }

    /// Convenience constructor: components named by `names`, with the given outcome counts.
    pub fn from_sizes(names: &[&str], sizes: &[usize]) -> Result<Arc<Self>> {
        if names.len() != sizes.len() {
            return Err(Error::Dimension("names and sizes differ in length".into()));
        }
        Self::new(
            names
                .iter()
                .zip(sizes)
                .map(|(n, &k)| Component::indexed(*n, k))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, t: usize) -> &Component {
        &self.components[t]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn full(&self) -> SubsetMask {
        SubsetMask::full(self.n())
    }

    pub fn contains_mask(&self, mask: SubsetMask) -> bool {
        mask.is_subset_of(self.full())
    }

    pub fn check_mask(&self, mask: SubsetMask) -> Result<()> {
        if self.contains_mask(mask) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "subset {{{mask}}} is not contained in T = {{0..{}}}",
                self.n()
            )))
        }
    }

    /// `|Ω_S|`.
    pub fn atoms(&self, mask: SubsetMask) -> usize {
        mask.indices().map(|t| self.sizes[t]).product()
    }

    /// Coordinates (one per component of `mask`, ascending) of a flat atom index.
    pub fn decode(&self, mask: SubsetMask, mut flat: usize) -> Vec<usize> {
        let idx: Vec<usize> = mask.indices().collect();
        let mut coords = vec![0; idx.len()];
        for (slot, &t) in idx.iter().enumerate().rev() {
            coords[slot] = flat % self.sizes[t];
            flat /= self.sizes[t];
        }
        coords
    }

    pub fn encode(&self, mask: SubsetMask, coords: &[usize]) -> usize {
        mask.indices()
            .zip(coords)
            .fold(0, |acc, (t, &c)| acc * self.sizes[t] + c)
    }

    /// For every atom of `Ω_from`, the index of its projection onto `Ω_to`.
    pub fn projection(&self, from: SubsetMask, to: SubsetMask) -> Result<Vec<usize>> {
        if !to.is_subset_of(from) {
            return Err(Error::Domain(format!(
                "cannot project {{{from}}} onto {{{to}}}: not a subset"
            )));
        }
        let from_idx: Vec<usize> = from.indices().collect();
        // stride of each component of `from` inside the `to` encoding (0 if dropped)
        let mut to_stride = vec![0usize; from_idx.len()];
        let mut stride = 1;
        for (slot, &t) in from_idx.iter().enumerate().rev() {
            if to.contains(t) {
                to_stride[slot] = stride;
                stride *= self.sizes[t];
            }
        }
        let total = self.atoms(from);
        let mut table = Vec::with_capacity(total);
        let mut coords = vec![0usize; from_idx.len()];
        for _ in 0..total {
            table.push(coords.iter().zip(&to_stride).map(|(c, s)| c * s).sum());
            for slot in (0..coords.len()).rev() {
                coords[slot] += 1;
                if coords[slot] < self.sizes[from_idx[slot]] {
                    break;
                }
                coords[slot] = 0;
            }
        }
        Ok(table)
    }

    /// Index on `Ω_{a∪b}` of the atom whose `a`-part is `ia` and `b`-part is `ib`.
    pub fn join(&self, a: SubsetMask, ia: usize, b: SubsetMask, ib: usize) -> usize {
        debug_assert!(a.is_disjoint(b));
        let ca = self.decode(a, ia);
        let cb = self.decode(b, ib);
        let (mut ia, mut ib) = (0, 0);
        let mut acc = 0;
        for t in a.union(b).indices() {
            let c = if a.contains(t) {
                ia += 1;
                ca[ia - 1]
            } else {
                ib += 1;
                cb[ib - 1]
            };
            acc = acc * self.sizes[t] + c;
        }
        acc
    }

    /// Table `[ia][ib] -> index on Ω_{a∪b}` for disjoint `a`, `b`.
    pub fn join_table(&self, a: SubsetMask, b: SubsetMask) -> Result<Vec<Vec<usize>>> {
        if !a.is_disjoint(b) {
            return Err(Error::Domain(format!("subsets {{{a}}} and {{{b}}} overlap")));
        }
        let ab = a.union(b);
        let pa = self.projection(ab, a)?;
        let pb = self.projection(ab, b)?;
        let mut table = vec![vec![0; self.atoms(b)]; self.atoms(a)];
        for (i, (&x, &y)) in pa.iter().zip(&pb).enumerate() {
            table[x][y] = i;
        }
        Ok(table)
    }

    /// Human-readable label of an atom, e.g. `X=1,Y=0`.
    pub fn atom_label(&self, mask: SubsetMask, flat: usize) -> String {
        mask.indices()
            .zip(self.decode(mask, flat))
            .map(|(t, c)| format!("{}={}", self.components[t].name, self.components[t].outcomes[c]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// An atom `ω_S` of a sub-product `Ω_S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AtomIndex {
    pub domain: SubsetMask,
    pub coords: Vec<usize>,
}

impl AtomIndex {
    pub fn new(space: &FiniteProductSpace, domain: SubsetMask, coords: Vec<usize>) -> Result<Self> {
        space.check_mask(domain)?;
        if coords.len() != domain.len() {
            return Err(Error::Domain(format!(
                "atom has {} coordinates but subset {{{domain}}} has {} components",
                coords.len(),
                domain.len()
            )));
        }
        for (t, &c) in domain.indices().zip(&coords) {
            if c >= space.sizes()[t] {
                return Err(Error::Domain(format!(
                    "coordinate {c} out of range for component {:?} ({} outcomes)",
                    space.component(t).name,
                    space.sizes()[t]
                )));
            }
        }
        Ok(AtomIndex { domain, coords })
    }

    pub fn from_flat(space: &FiniteProductSpace, domain: SubsetMask, flat: usize) -> Result<Self> {
        space.check_mask(domain)?;
        if flat >= space.atoms(domain) {
            return Err(Error::Domain(format!(
                "flat index {flat} out of range for subset {{{domain}}}"
            )));
        }
        Ok(AtomIndex { domain, coords: space.decode(domain, flat) })
    }

    pub fn flat(&self, space: &FiniteProductSpace) -> usize {
        space.encode(self.domain, &self.coords)
    }

    /// Projection `π_{S,U}` onto a subset of the atom's domain.
    pub fn restrict(&self, to: SubsetMask) -> Result<AtomIndex> {
        if !to.is_subset_of(self.domain) {
            return Err(Error::Domain(format!(
                "cannot restrict atom on {{{}}} to {{{to}}}",
                self.domain
            )));
        }
        let coords = self
            .domain
            .indices()
            .zip(&self.coords)
            .filter(|(t, _)| to.contains(*t))
            .map(|(_, &c)| c)
            .collect();
        Ok(AtomIndex { domain: to, coords })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_power_set() {
        let m = SubsetMask::from_indices([0, 2]);
        let subs: Vec<u32> = m.subsets().map(|s| s.bits()).collect();
        assert_eq!(subs, vec![0, 1, 4, 5]);
        assert_eq!(SubsetMask::all(3).count(), 8);
        assert_eq!(SubsetMask::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn subset_list_round_trip() {
        let m = SubsetMask::from_indices([3, 0, 2]);
        assert_eq!(m.to_string(), "0,2,3");
        assert_eq!(SubsetMask::parse_list("0,2,3").unwrap(), m);
        assert_eq!(SubsetMask::parse_list("[0, 2, 3]").unwrap(), m);
        assert_eq!(SubsetMask::parse_list("[]").unwrap(), SubsetMask::EMPTY);
        assert!(SubsetMask::parse_list("a").is_err());
    }

    #[test]
    fn row_major_encoding() {
        let sp = FiniteProductSpace::from_sizes(&["a", "b", "c"], &[2, 3, 2]).unwrap();
        let full = sp.full();
        assert_eq!(sp.atoms(full), 12);
        assert_eq!(sp.encode(full, &[1, 2, 0]), 6 + 2 * 2);
        assert_eq!(sp.decode(full, 10), vec![1, 2, 0]);
        let ac = SubsetMask::from_indices([0, 2]);
        let proj = sp.projection(full, ac).unwrap();
        assert_eq!(proj[sp.encode(full, &[1, 2, 1])], sp.encode(ac, &[1, 1]));
        let b = SubsetMask::singleton(1);
        assert_eq!(sp.join(ac, sp.encode(ac, &[1, 1]), b, 2), sp.encode(full, &[1, 2, 1]));
    }

    #[test]
    fn space_invariants() {
        assert!(FiniteProductSpace::new(vec![]).is_err());
        assert!(FiniteProductSpace::new(vec![Component::new("x", &[])]).is_err());
        assert!(FiniteProductSpace::new(vec![Component::indexed("x", 2), Component::indexed("x", 2)]).is_err());
        let many: Vec<Component> = (0..13).map(|i| Component::indexed(format!("c{i}"), 2)).collect();
        assert!(FiniteProductSpace::with_cap(many.clone(), 12).is_err());
        assert!(FiniteProductSpace::with_cap(many, 13).is_ok());
    }

    #[test]
    fn atom_restrict() {
        let sp = FiniteProductSpace::from_sizes(&["a", "b", "c"], &[2, 3, 2]).unwrap();
        let a = AtomIndex::new(&sp, sp.full(), vec![1, 2, 0]).unwrap();
        let r = a.restrict(SubsetMask::from_indices([1, 2])).unwrap();
        assert_eq!(r.coords, vec![2, 0]);
        assert!(AtomIndex::new(&sp, sp.full(), vec![1, 3, 0]).is_err());
        assert!(AtomIndex::from_flat(&sp, sp.full(), 12).is_err());
    }
}
