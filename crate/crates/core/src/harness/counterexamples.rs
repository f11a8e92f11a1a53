//! Fixtures on which composition and reversibility fail.

use crate::causal::{intervention_measure, CausalMechanism, CausalSpace};
use crate::error::{Error, Result};
use crate::measure::{Component, Dist, Event, FiniteProductSpace, Kernel, SubsetMask};

/// Outcome of comparing `ℙ^{do(S,ℚ)}` with `ℙ^{do(S∪R,ℚ′)}`, where `ℚ′` is the
/// restriction of the former to `ℋ_{S∪R}`.
#[derive(Clone, Debug)]
pub struct CompositionCheck {
    pub s: SubsetMask,
    pub r: SubsetMask,
    pub q: Dist,
    pub q_prime: Dist,
    pub via_s: Dist,
    pub via_s_and_r: Dist,
    /// Total variation between the two intervention measures.
    pub discrepancy: f64,
}

pub fn composition_check(cs: &CausalSpace, q: &Dist, r: SubsetMask) -> Result<CompositionCheck> {
    let s = q.domain();
    let via_s = intervention_measure(cs, q)?;
    let q_prime = via_s.marginal(s.union(r))?;
    let via_s_and_r = intervention_measure(cs, &q_prime)?;
    let discrepancy = via_s.total_variation(&via_s_and_r);
    Ok(CompositionCheck { s, r, q: q.clone(), q_prime, via_s, via_s_and_r, discrepancy })
}

/// Causes `X1, X2, X3` with no causal links among them and outcome
/// `Y = X1 ⊕ X2 ⊕ X3 ⊕ N`, `N ∼ Bern(.05)`.
///
/// Intervening on any set of causes leaves the others with their joint
/// observational law; `x_law` is the law of `(X1, X2, X3)`.
pub fn additive_cause_space(x_law: &[f64]) -> Result<CausalSpace> {
    let space = FiniteProductSpace::from_sizes(&["X1", "X2", "X3", "Y"], &[2, 2, 2, 2])?;
    let xs = SubsetMask::from_indices([0, 1, 2]);
    let x_dist = Dist::new(space.clone(), xs, x_law.to_vec())?;
    let y_given = |c: &[usize]| {
        let parity = (c[0] + c[1] + c[2]) % 2;
        if c[3] == parity {
            0.95
        } else {
            0.05
        }
    };
    let full = space.full();
    let mut pw = vec![0.0; space.atoms(full)];
    for (i, w) in pw.iter_mut().enumerate() {
        let c = space.decode(full, i);
        *w = x_dist.weight(space.encode(xs, &c[..3])) * y_given(&c);
    }
    let p = Dist::new(space.clone(), full, pw)?;
    let mech = CausalMechanism::from_fn(space.clone(), full, |s| {
        if s.is_empty() {
            return Kernel::constant(s, &p);
        }
        let free = xs.difference(s);
        let free_law = x_dist.marginal(free)?;
        let to_s = space.projection(full, s)?;
        let to_free = space.projection(full, free)?;
        let rows = (0..space.atoms(s))
            .map(|r| {
                (0..space.atoms(full))
                    .map(|i| {
                        if to_s[i] != r {
                            return 0.0;
                        }
                        let y = if s.contains(3) { 1.0 } else { y_given(&space.decode(full, i)) };
                        free_law.weight(to_free[i]) * y
                    })
                    .collect()
            })
            .collect();
        Kernel::new(space.clone(), s, full, rows)
    })?;
    CausalSpace::new(p, mech)
}

/// `X1 = X2` with probability `.9`, `X3` independent; all uniform.
pub const COUPLED_CAUSES: [f64; 8] = [0.225, 0.225, 0.025, 0.025, 0.025, 0.025, 0.225, 0.225];
pub const INDEPENDENT_CAUSES: [f64; 8] = [0.125; 8];

/// Intervening on `X3` and then adding `X1` with its resulting law decouples `X1`
/// from `X2` and changes the law of `Y`.
pub fn composition_counterexample() -> Result<(CausalSpace, CompositionCheck)> {
    let cs = additive_cause_space(&COUPLED_CAUSES)?;
    let q = Dist::new(cs.space().clone(), SubsetMask::singleton(2), vec![0.3, 0.7])?;
    let check = composition_check(&cs, &q, SubsetMask::singleton(0))?;
    Ok((cs, check))
}

/// A fixed point of the two mutual-consistency premises, and how far `ℙ` is from `ℚ₁`.
#[derive(Clone, Debug)]
pub struct ReversibilityWitness {
    pub r: SubsetMask,
    pub u: SubsetMask,
    pub q1: Dist,
    pub q2: Dist,
    /// `max_B |ℙ^{do(R,ℚ₁)}(B) − ℚ₂(B)|` over atoms of `ℋ_U`.
    pub premise_u_gap: f64,
    /// `max_C |ℙ^{do(U,ℚ₂)}(C) − ℚ₁(C)|` over atoms of `ℋ_R`.
    pub premise_r_gap: f64,
    /// The atom of `ℋ_R` with the largest `|ℙ(A) − ℚ₁(A)|`.
    pub event: Event,
    pub p_event: f64,
    pub q1_event: f64,
    pub violation: f64,
}

/// Solves the premises of reversibility with `S = ∅` by fixed-point iteration and
/// compares the conclusion `ℙ = ℚ₁` on `ℋ_R`.
pub fn reversibility_check(cs: &CausalSpace, r: SubsetMask, u: SubsetMask) -> Result<ReversibilityWitness> {
    if !r.is_disjoint(u) || r.is_empty() || u.is_empty() {
        return Err(Error::Domain(format!("reversibility needs disjoint non-empty R={{{r}}}, U={{{u}}}")));
    }
    let mut q1 = cs.p().marginal(r)?;
    let mut q2 = intervention_measure(cs, &q1)?.marginal(u)?;
    for _ in 0..10_000 {
        let next_q1 = intervention_measure(cs, &q2)?.marginal(r)?;
        let next_q2 = intervention_measure(cs, &next_q1)?.marginal(u)?;
        let change = next_q1.max_abs_diff(&q1).max(next_q2.max_abs_diff(&q2));
        q1 = next_q1;
        q2 = next_q2;
        if change <= f64::EPSILON {
            break;
        }
    }
    let premise_u_gap = intervention_measure(cs, &q1)?.marginal(u)?.max_abs_diff(&q2);
    let premise_r_gap = intervention_measure(cs, &q2)?.marginal(r)?.max_abs_diff(&q1);
    let p_r = cs.p().marginal(r)?;
    let (worst, violation) = p_r
        .weights()
        .iter()
        .zip(q1.weights())
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(ReversibilityWitness {
        r,
        u,
        event: Event::atom_flat(cs.space().clone(), r, worst)?,
        p_event: p_r.weight(worst),
        q1_event: q1.weight(worst),
        q1,
        q2,
        premise_u_gap,
        premise_r_gap,
        violation,
    })
}

/// Binary rice market: components `amount` and `price`, each `low`/`high`.
///
/// More rice lowers the price and a higher price brings more rice, so each
/// kernel drives the other component; `ℙ` is not the equilibrium of the loop.
pub fn rice_discrete() -> Result<CausalSpace> {
    let space = FiniteProductSpace::new(vec![
        Component::new("amount", &["low", "high"]),
        Component::new("price", &["low", "high"]),
    ])?;
    let full = space.full();
    let p = Dist::new(space.clone(), full, vec![0.05, 0.25, 0.6, 0.1])?;
    // P(price high | amount), P(amount high | price)
    let price_high = [0.8, 0.2];
    let amount_high = [0.3, 0.7];
    let amount = SubsetMask::singleton(0);
    let price = SubsetMask::singleton(1);
    let mech = CausalMechanism::from_fn(space.clone(), full, |s| {
        if s.is_empty() {
            Kernel::constant(s, &p)
        } else if s == amount {
            let rows = price_high
                .iter()
                .enumerate()
                .map(|(a, &h)| {
                    let mut row = vec![0.0; 4];
                    row[space.encode(full, &[a, 0])] = 1.0 - h;
                    row[space.encode(full, &[a, 1])] = h;
                    row
                })
                .collect();
            Kernel::new(space.clone(), s, full, rows)
        } else if s == price {
            let rows = amount_high
                .iter()
                .enumerate()
                .map(|(pr, &h)| {
                    let mut row = vec![0.0; 4];
                    row[space.encode(full, &[0, pr])] = 1.0 - h;
                    row[space.encode(full, &[1, pr])] = h;
                    row
                })
                .collect();
            Kernel::new(space.clone(), s, full, rows)
        } else {
            let rows = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
            Kernel::new(space.clone(), s, full, rows)
        }
    })?;
    CausalSpace::new(p, mech)
}

pub fn reversibility_counterexample() -> Result<(CausalSpace, ReversibilityWitness)> {
    let cs = rice_discrete()?;
    let w = reversibility_check(&cs, SubsetMask::singleton(0), SubsetMask::singleton(1))?;
    Ok((cs, w))
}
