use serde::Serialize;

use crate::measure::{Dist, EPS_NORM};

use super::{CausalMechanism, CausalSpace};

/// A breach of one of the two causal-space axioms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// `"i"` (trivial intervention) or `"ii"` (interventional determinism).
    pub axiom: &'static str,
    /// The subset `S`, as a sorted index list.
    pub subset: String,
    /// The row `ω_S`, as `name=value` pairs.
    pub atom: String,
    /// The event on which the identity fails.
    pub event: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "valid".into(),
            Some(v) => format!(
                "{} violation(s); first: axiom ({}) at S={{{}}}, ω_S=[{}], event {}, deviation {:e}",
                self.violations.len(),
                v.axiom,
                v.subset,
                v.atom,
                v.event,
                v.deviation
            ),
        }
    }
}

/// Checks a mechanism on `(Ω_U, ℋ_U, q)` against both axioms:
/// `K_∅(·, A) = q(A)` and `K_S(ω, A ∩ B) = 1_A(ω) K_S(ω, B)` for `A ∈ ℋ_S`.
///
/// On finite spaces the second axiom is equivalent to every row of `K_S`
/// having the Dirac `S`-marginal at its own atom, which is what is checked.
pub fn validate_mechanism(q: &Dist, mech: &CausalMechanism) -> ValidationReport {
    let space = mech.space();
    let mut violations = Vec::new();
    if q.domain() != mech.universe() {
        violations.push(Violation {
            axiom: "i",
            subset: String::new(),
            atom: String::new(),
            event: format!("measure lives on {{{}}}, mechanism on {{{}}}", q.domain(), mech.universe()),
            deviation: f64::INFINITY,
        });
        return ValidationReport { valid: false, violations };
    }

    let k_empty = mech.kernel(crate::measure::SubsetMask::EMPTY);
    let (worst, deviation) = k_empty
        .row(0)
        .iter()
        .zip(q.weights())
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if deviation > EPS_NORM {
        violations.push(Violation {
            axiom: "i",
            subset: String::new(),
            atom: String::new(),
            event: format!("{{{}}}", space.atom_label(mech.universe(), worst)),
            deviation,
        });
    }

    for (s, k) in mech.iter() {
        for b in k.determinism_breaches(EPS_NORM) {
            violations.push(Violation {
                axiom: "ii",
                subset: s.to_string(),
                atom: space.atom_label(s, b.row),
                event: format!("{{{}}}", space.atom_label(s, b.atom)),
                deviation: b.deviation,
            });
        }
    }
    ValidationReport { valid: violations.is_empty(), violations }
}

pub fn validate_causal_space(cs: &CausalSpace) -> ValidationReport {
    validate_mechanism(cs.p(), cs.mechanism())
}
