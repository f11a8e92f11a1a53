use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::causal::{mechanism_from_conditionals, trivial_mechanism, CausalMechanism, CausalSpace, InterventionSpec};
use crate::compilers::{compile_scm, ScmSpec, ScmVariable};
use crate::error::{Error, Result};
use crate::measure::{Dist, FiniteProductSpace, Kernel, SubsetMask};

pub const MAX_RANDOM_COMPONENTS: usize = 4;
pub const MAX_RANDOM_DOMAIN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelStyle {
    /// `K_S = ℙ(· | ω_S)`.
    Conditional,
    /// A random mixture of the conditional and a random deterministic-marginal row.
    PerturbedConditional,
    /// `δ_{ω_S} ⊗` a random law on the remaining components.
    FullyRandom,
    /// A compiled random acyclic SCM.
    CompiledScm,
}

impl KernelStyle {
    pub const ALL: [KernelStyle; 4] = [
        KernelStyle::Conditional,
        KernelStyle::PerturbedConditional,
        KernelStyle::FullyRandom,
        KernelStyle::CompiledScm,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpaceConfig {
    pub seed: u64,
    pub n_components: usize,
    pub max_domain: usize,
    pub style: KernelStyle,
}

impl RandomSpaceConfig {
    /// A configuration whose shape and style are themselves drawn from `seed`.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
        RandomSpaceConfig {
            seed,
            n_components: rng.random_range(1..=MAX_RANDOM_COMPONENTS),
            max_domain: rng.random_range(2..=MAX_RANDOM_DOMAIN),
            style: KernelStyle::ALL[(seed % 4) as usize],
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_components == 0 || self.n_components > MAX_RANDOM_COMPONENTS {
            return Err(Error::Domain(format!(
                "random spaces have 1..={MAX_RANDOM_COMPONENTS} components, asked for {}",
                self.n_components
            )));
        }
        if self.max_domain == 0 || self.max_domain > MAX_RANDOM_DOMAIN {
            return Err(Error::Domain(format!(
                "random domains have 1..={MAX_RANDOM_DOMAIN} outcomes, asked for {}",
                self.max_domain
            )));
        }
        Ok(())
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive random weights summing to one.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn random_dist<R: Rng>(rng: &mut R, space: &Arc<FiniteProductSpace>, domain: SubsetMask) -> Result<Dist> {
    Dist::new(space.clone(), domain, random_weights(rng, space.atoms(domain)))
}

/// A product of independent random per-component laws, hence factorising over every split.
pub fn random_product_dist<R: Rng>(rng: &mut R, space: &Arc<FiniteProductSpace>, domain: SubsetMask) -> Result<Dist> {
    let mut d = Dist::uniform(space.clone(), SubsetMask::EMPTY)?;
    for t in domain.indices() {
        d = d.outer(&random_dist(rng, space, SubsetMask::singleton(t))?)?;
    }
    Ok(d)
}

/// A valid mechanism on `(Ω_U, ℋ_U, q)` with `U = q.domain()`.
pub fn random_mechanism<R: Rng>(rng: &mut R, q: &Dist, style: KernelStyle) -> Result<CausalMechanism> {
    let space = q.space().clone();
    let universe = q.domain();
    match style {
        KernelStyle::Conditional => mechanism_from_conditionals(q),
        KernelStyle::PerturbedConditional | KernelStyle::FullyRandom | KernelStyle::CompiledScm => {
            CausalMechanism::from_fn(space.clone(), universe, |s| {
                if s.is_empty() {
                    return Kernel::constant(s, q);
                }
                let rest = universe.difference(s);
                let lambda = if style == KernelStyle::PerturbedConditional {
                    rng.random_range(0.1..0.6)
                } else {
                    1.0
                };
                let base = if lambda < 1.0 { Some(Kernel::conditional(q, s)?) } else { None };
                let rows = (0..space.atoms(s))
                    .map(|r| {
                        let noise = Dist::dirac_flat(space.clone(), s, r)?
                            .outer(&random_dist(rng, &space, rest)?)?
                            .into_weights();
                        Ok(match &base {
                            Some(b) => b
                                .row(r)
                                .iter()
                                .zip(&noise)
                                .map(|(c, n)| (1.0 - lambda) * c + lambda * n)
                                .collect(),
                            None => noise,
                        })
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?;
                Kernel::new(space.clone(), s, universe, rows)
            })
        }
    }
}

/// A random acyclic SCM on `n` variables named `X0, X1, …`.
pub fn random_scm<R: Rng>(rng: &mut R, n: usize, max_domain: usize) -> ScmSpec {
    let mut sizes = Vec::with_capacity(n);
    let mut variables = Vec::with_capacity(n);
    for j in 0..n {
        let k = rng.random_range(2.min(max_domain)..=max_domain.max(1));
        let parents: Vec<usize> = (0..j).filter(|_| rng.random_bool(0.5)).collect();
        let noise_len = rng.random_range(1..=3);
        let rows: usize = parents.iter().map(|&p| sizes[p]).product();
        let table = (0..rows * noise_len).map(|_| rng.random_range(0..k)).collect();
        variables.push(ScmVariable {
            name: format!("X{j}"),
            domain: (0..k).map(|i| i.to_string()).collect(),
            parents: parents.iter().map(|p| format!("X{p}")).collect(),
            noise: random_weights(rng, noise_len),
            table,
        });
        sizes.push(k);
    }
    ScmSpec { variables }
}

/// Deterministic per configuration; always passes validation.
pub fn random_causal_space(cfg: &RandomSpaceConfig) -> Result<CausalSpace> {
    cfg.check()?;
    let mut rng = rng_for(cfg.seed);
    if cfg.style == KernelStyle::CompiledScm {
        return compile_scm(&random_scm(&mut rng, cfg.n_components, cfg.max_domain));
    }
    let sizes: Vec<usize> = (0..cfg.n_components)
        .map(|_| rng.random_range(2.min(cfg.max_domain)..=cfg.max_domain))
        .collect();
    let names: Vec<String> = (0..cfg.n_components).map(|t| format!("X{t}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let space = FiniteProductSpace::from_sizes(&names, &sizes)?;
    let p = random_dist(&mut rng, &space, space.full())?;
    let mech = random_mechanism(&mut rng, &p, cfg.style)?;
    CausalSpace::new(p, mech)
}

/// How the intervention measure of a random intervention is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureShape {
    FullSupport,
    Product,
    Dirac,
}

pub fn random_measure<R: Rng>(
    rng: &mut R,
    space: &Arc<FiniteProductSpace>,
    u: SubsetMask,
    shape: MeasureShape,
) -> Result<Dist> {
    match shape {
        MeasureShape::FullSupport => random_dist(rng, space, u),
        MeasureShape::Product => random_product_dist(rng, space, u),
        MeasureShape::Dirac => {
            let atom = rng.random_range(0..space.atoms(u));
            Dist::dirac_flat(space.clone(), u, atom)
        }
    }
}

pub fn random_subset<R: Rng>(rng: &mut R, n: usize) -> SubsetMask {
    SubsetMask::from_bits(rng.random_range(0..(1u32 << n)))
}

/// A random intervention on `u` with an explicit internal mechanism.
pub fn random_intervention<R: Rng>(
    rng: &mut R,
    cs: &CausalSpace,
    u: SubsetMask,
    shape: MeasureShape,
) -> Result<InterventionSpec> {
    let q = random_measure(rng, cs.space(), u, shape)?;
    let l = match rng.random_range(0..3) {
        0 => trivial_mechanism(u, &q)?,
        1 if shape != MeasureShape::Dirac => random_mechanism(rng, &q, KernelStyle::Conditional)?,
        _ => random_mechanism(rng, &q, KernelStyle::FullyRandom)?,
    };
    Ok(InterventionSpec::with_mechanism(q, l))
}

/// Empirical `ℙ^{do(U,q)}` from two-stage sampling: `ω_U ∼ q`, then `ω ∼ K_U(ω_U, ·)`.
pub fn monte_carlo_intervention(cs: &CausalSpace, q: &Dist, samples: usize, seed: u64) -> Result<Dist> {
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    let k = cs.kernel(q.domain());
    let mut rng = rng_for(seed);
    let outer = WeightedIndex::new(q.weights()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut rows: Vec<Option<WeightedIndex<f64>>> = vec![None; k.n_rows()];
    let mut counts = vec![0usize; k.row_len()];
    for _ in 0..samples {
        let r = outer.sample(&mut rng);
        let sampler = match &mut rows[r] {
            Some(s) => s,
            slot => slot.insert(WeightedIndex::new(k.row(r)).map_err(|e| Error::InvalidDistribution(e.to_string()))?),
        };
        counts[sampler.sample(&mut rng)] += 1;
    }
    let n = samples as f64;
    Dist::new(cs.space().clone(), cs.full(), counts.into_iter().map(|c| c as f64 / n).collect())
}
