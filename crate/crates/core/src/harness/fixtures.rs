//! Small discrete spaces with known causal structure.

use crate::causal::{CausalMechanism, CausalSpace};
use crate::compilers::{compile_scm, conditional_or_marginal, PoSpec, PoVariable, ScmSpec, ScmVariable};
use crate::error::Result;
use crate::measure::{Component, Dist, Event, FiniteProductSpace, Kernel, SubsetMask};

/// Resolution of the uniform noise used to realise Bernoulli assignments.
const GRID: usize = 20;

/// A binary variable with `ℙ(X = 1 | parents) = p1[row]`, realised as a threshold
/// on a uniform noise over `GRID` points. Each `p1` must be a multiple of `1/GRID`.
pub fn bernoulli_variable(name: &str, parents: &[&str], p1: &[f64]) -> ScmVariable {
    let mut table = Vec::with_capacity(p1.len() * GRID);
    for &p in p1 {
        let ones = (p * GRID as f64).round() as usize;
        table.extend((0..GRID).map(|e| usize::from(e < ones)));
    }
    ScmVariable::new(name, &["0", "1"], parents, vec![1.0 / GRID as f64; GRID], table)
}

/// `X := N_X ∼ Bern(.5)`, `Y := X ⊕ N_Y` with `N_Y ∼ Bern(.1)`.
pub fn xor_scm() -> ScmSpec {
    ScmSpec {
        variables: vec![
            ScmVariable::new("X", &["0", "1"], &[], vec![0.5, 0.5], vec![0, 1]),
            ScmVariable::new("Y", &["0", "1"], &["X"], vec![0.9, 0.1], vec![0, 1, 1, 0]),
        ],
    }
}

/// Binary chain `X → Y → Z`.
pub fn chain_scm() -> ScmSpec {
    ScmSpec {
        variables: vec![
            bernoulli_variable("X", &[], &[0.4]),
            bernoulli_variable("Y", &["X"], &[0.2, 0.7]),
            bernoulli_variable("Z", &["Y"], &[0.3, 0.9]),
        ],
    }
}

/// Two-step binary Markov chain `X1 → X2`.
pub fn markov2_scm() -> ScmSpec {
    ScmSpec {
        variables: vec![
            bernoulli_variable("X1", &[], &[0.5]),
            bernoulli_variable("X2", &["X1"], &[0.25, 0.85]),
        ],
    }
}

/// Confounder `V → U`, `V → A`, treatment `U → A`; components `V, U, A`.
pub fn backdoor_scm() -> ScmSpec {
    ScmSpec {
        variables: vec![
            bernoulli_variable("V", &[], &[0.4]),
            bernoulli_variable("U", &["V"], &[0.2, 0.7]),
            bernoulli_variable("A", &["U", "V"], &[0.1, 0.5, 0.4, 0.8]),
        ],
    }
}

/// `A := (U + M + N) mod k` with `M` uniform and independent of `U`.
///
/// `U` leaves the law of `A` unchanged on its own, yet moves it once `M` is held
/// fixed, so the effect of `ℋ_U` on `{A = 0}` is dormant whenever `N` is not uniform.
pub fn dormant_mod_scm(k: usize, p_u: &[f64], noise: &[f64]) -> ScmSpec {
    let labels: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
    let identity: Vec<usize> = (0..k).collect();
    let mut table = Vec::with_capacity(k * k * noise.len());
    for u in 0..k {
        for m in 0..k {
            table.extend((0..noise.len()).map(|e| (u + m + e) % k));
        }
    }
    ScmSpec {
        variables: vec![
            ScmVariable::new("U", &labels, &[], p_u.to_vec(), identity.clone()),
            ScmVariable::new("M", &labels, &[], vec![1.0 / k as f64; k], identity),
            ScmVariable::new("A", &labels, &["U", "M"], noise.to_vec(), table),
        ],
    }
}

/// A space together with a subset and an event of interest.
#[derive(Clone, Debug)]
pub struct EffectInstance {
    pub label: String,
    pub cs: CausalSpace,
    pub u: SubsetMask,
    pub event: Event,
}

/// Dormant instances built from [`dormant_mod_scm`], with `U = {0}`.
pub fn dormant_instances() -> Result<Vec<EffectInstance>> {
    let mut out = Vec::new();
    let binary_laws: [&[f64]; 3] = [&[0.5, 0.5], &[0.3, 0.7], &[0.8, 0.2]];
    let binary_noise: [&[f64]; 3] = [&[1.0], &[0.9, 0.1], &[0.75, 0.25]];
    for p in binary_laws {
        for n in binary_noise {
            out.push(dormant_instance(2, p, n, &[0])?);
        }
    }
    let ternary_laws: [&[f64]; 2] = [&[0.2, 0.3, 0.5], &[0.6, 0.2, 0.2]];
    let ternary_noise: [&[f64]; 2] = [&[0.8, 0.1, 0.1], &[0.5, 0.3, 0.2]];
    for p in ternary_laws {
        for n in ternary_noise {
            out.push(dormant_instance(3, p, n, &[0])?);
            out.push(dormant_instance(3, p, n, &[0, 1])?);
        }
    }
    Ok(out)
}

fn dormant_instance(k: usize, p_u: &[f64], noise: &[f64], a_values: &[usize]) -> Result<EffectInstance> {
    let cs = compile_scm(&dormant_mod_scm(k, p_u, noise))?;
    let a = SubsetMask::singleton(2);
    let event = Event::from_predicate(cs.space().clone(), a, |c| a_values.contains(&c[0]))?;
    Ok(EffectInstance {
        label: format!("mod{k} p_u={p_u:?} noise={noise:?} A in {a_values:?}"),
        cs,
        u: SubsetMask::singleton(0),
        event,
    })
}

/// The space whose kernels are `δ_{ω_S} ⊗ ℙ|_{T∖S}` for every `S`: nothing
/// causes anything, whatever dependence `p` carries.
pub fn product_kernel_space(p: Dist) -> Result<CausalSpace> {
    let space = p.space().clone();
    let full = space.full();
    let mech = CausalMechanism::from_fn(space.clone(), full, |s| {
        if s.is_empty() {
            return Kernel::constant(s, &p);
        }
        let rest = p.marginal(full.difference(s))?;
        let rows = (0..space.atoms(s))
            .map(|r| Dist::dirac_flat(space.clone(), s, r)?.outer(&rest))
            .collect::<Result<Vec<_>>>()?;
        Kernel::from_dists(space.clone(), s, full, rows)
    })?;
    CausalSpace::new(p, mech)
}

/// Ice-cream sales `I` and shark attacks `shark`, dependent under `ℙ` through a
/// common cause that is not modelled, with neither causing the other.
pub fn icecream_space() -> Result<CausalSpace> {
    let space = FiniteProductSpace::new(vec![
        Component::new("I", &["low", "median", "high"]),
        Component::new("shark", &["few", "many"]),
    ])?;
    let p = Dist::new(space.clone(), space.full(), vec![0.25, 0.05, 0.15, 0.15, 0.05, 0.35])?;
    product_kernel_space(p)
}

/// Quantised altitude `A` and temperature `T`, with altitude causing temperature.
pub fn altitude_temperature_discrete() -> Result<CausalSpace> {
    let levels = 10;
    // P(T | A) rows, in tenths
    let cond: [[usize; 3]; 3] = [[1, 3, 6], [2, 5, 3], [6, 3, 1]];
    let mut table = Vec::with_capacity(3 * levels);
    for row in cond {
        for e in 0..levels {
            let t = if e < row[0] {
                0
            } else if e < row[0] + row[1] {
                1
            } else {
                2
            };
            table.push(t);
        }
    }
    compile_scm(&ScmSpec {
        variables: vec![
            ScmVariable::new("A", &["low", "mid", "high"], &[], vec![0.3, 0.4, 0.3], vec![0, 1, 2]),
            ScmVariable::new("T", &["cold", "mild", "warm"], &["A"], vec![0.1; levels], table),
        ],
    })
}

/// Hides component `hidden`: `ℙ` and every `K_S` with `S` not containing it are
/// marginalised onto the remaining components.
pub fn hide_component(cs: &CausalSpace, hidden: usize) -> Result<CausalSpace> {
    let space = cs.space();
    let keep = space.full().difference(SubsetMask::singleton(hidden));
    let kept: Vec<usize> = keep.indices().collect();
    let reduced = FiniteProductSpace::new(kept.iter().map(|&t| space.component(t).clone()).collect())?;
    let lift = |s: SubsetMask| SubsetMask::from_indices(s.indices().map(|i| kept[i]));
    let p = Dist::new(reduced.clone(), reduced.full(), cs.p().marginal(keep)?.into_weights())?;
    let mech = CausalMechanism::from_fn(reduced.clone(), reduced.full(), |s| {
        let k = cs.kernel(lift(s));
        let rows = (0..k.n_rows())
            .map(|r| Ok(k.row_dist(r).marginal(keep)?.into_weights()))
            .collect::<Result<Vec<_>>>()?;
        Kernel::new(reduced.clone(), s, reduced.full(), rows)
    })?;
    CausalSpace::new(p, mech)
}

/// A hidden confounder `H` of `U` and `A`, with an independent observed `V`;
/// components after hiding `H` are `V, U, A`. Adjusting for `V` is invalid.
pub fn hidden_confounder_space() -> Result<CausalSpace> {
    let cs = compile_scm(&ScmSpec {
        variables: vec![
            bernoulli_variable("H", &[], &[0.5]),
            bernoulli_variable("V", &[], &[0.3]),
            bernoulli_variable("U", &["H"], &[0.2, 0.8]),
            bernoulli_variable("A", &["U", "H"], &[0.1, 0.6, 0.3, 0.9]),
        ],
    })?;
    hide_component(&cs, 0)
}

/// Potential outcomes with `Y_0 ≡ 0`, `Y_1 ≡ 1` and a fair treatment.
pub fn deterministic_po() -> PoSpec {
    // (z, y0, y1): only y0 = 0, y1 = 1 carries mass
    PoSpec {
        treatment: PoVariable::new("Z", &["0", "1"]),
        outcome: PoVariable::new("Y", &["0", "1"]),
        covariate: None,
        joint: vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0],
        outcome_scores: None,
    }
}

/// Treatment correlated with both potential outcomes.
pub fn confounded_po() -> PoSpec {
    PoSpec {
        treatment: PoVariable::new("Z", &["0", "1"]),
        outcome: PoVariable::new("Y", &["0", "1"]),
        covariate: None,
        joint: vec![0.20, 0.10, 0.05, 0.05, 0.05, 0.30, 0.05, 0.20],
        outcome_scores: None,
    }
}

/// The conditional mechanism, with `δ ⊗ ℙ`-marginal rows on null atoms.
pub fn conditional_space_lenient(p: Dist) -> Result<CausalSpace> {
    let space = p.space().clone();
    let mech = CausalMechanism::from_fn(space.clone(), space.full(), |s| {
        if s.is_empty() {
            Kernel::constant(s, &p)
        } else {
            conditional_or_marginal(&p, s)
        }
    })?;
    CausalSpace::new(p, mech)
}
