//! Differential tests against oracles written here, independent of the library's
//! kernel machinery.

use causal_spaces::causal::*;
use causal_spaces::compilers::{compile_scm, ScmSpec};
use causal_spaces::harness::fixtures::{altitude_temperature_discrete, chain_scm, xor_scm};
use causal_spaces::harness::random::{random_scm, rng_for};
use causal_spaces::harness::monte_carlo_intervention;
use causal_spaces::measure::*;

/// Joint law of an SCM with some variables clamped, by enumerating every noise
/// combination and evaluating the assignments in order. Row-major over variables.
fn truncated_factorization(spec: &ScmSpec, clamp: &[Option<usize>]) -> Vec<f64> {
    let vars = &spec.variables;
    let n = vars.len();
    let sizes: Vec<usize> = vars.iter().map(|v| v.domain.len()).collect();
    let parents: Vec<Vec<usize>> = vars
        .iter()
        .map(|v| v.parents.iter().map(|p| vars.iter().position(|w| &w.name == p).unwrap()).collect())
        .collect();
    let total: usize = sizes.iter().product();
    let mut joint = vec![0.0; total];
    let noise_lens: Vec<usize> = vars.iter().map(|v| v.noise.len()).collect();
    let combos: usize = noise_lens.iter().product();
    for mut c in 0..combos {
        let mut e = vec![0; n];
        for j in (0..n).rev() {
            e[j] = c % noise_lens[j];
            c /= noise_lens[j];
        }
        let weight: f64 = (0..n).map(|j| vars[j].noise[e[j]]).product();
        let mut x = vec![0; n];
        for j in 0..n {
            x[j] = match clamp[j] {
                Some(v) => v,
                None => {
                    let mut idx = 0;
                    for &p in &parents[j] {
                        idx = idx * sizes[p] + x[p];
                    }
                    vars[j].table[idx * noise_lens[j] + e[j]]
                }
            };
        }
        let flat = x.iter().zip(&sizes).fold(0, |acc, (xi, s)| acc * s + xi);
        joint[flat] += weight;
    }
    joint
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn empty_intervention_reproduces_p() {
    let spec = chain_scm();
    let cs = compile_scm(&spec).unwrap();
    assert!(max_diff(cs.p().weights(), &truncated_factorization(&spec, &[None; 3])) < 1e-12);
    let q = Dist::dirac_flat(cs.space().clone(), SubsetMask::EMPTY, 0).unwrap();
    let same = intervene(&cs, &InterventionSpec::hard(q)).unwrap();
    assert_eq!(same.max_abs_diff(&cs), 0.0);
}

#[test]
fn xor_do_x1() {
    let spec = xor_scm();
    let cs = compile_scm(&spec).unwrap();
    let oracle = truncated_factorization(&spec, &[Some(1), None]);
    assert!(max_diff(&oracle, &[0.0, 0.0, 0.1, 0.9]) < 1e-12);
    let q = Dist::dirac_flat(cs.space().clone(), SubsetMask::singleton(0), 1).unwrap();
    let hard = intervene_hard(&cs, SubsetMask::singleton(0), &q).unwrap();
    let generic = intervene(&cs, &InterventionSpec::hard(q)).unwrap();
    assert!(max_diff(hard.p().weights(), &oracle) < 1e-12);
    assert!(max_diff(generic.p().weights(), &oracle) < 1e-12);
}

#[test]
fn chain_do_y_leaves_x() {
    let spec = chain_scm();
    let cs = compile_scm(&spec).unwrap();
    for y in 0..2 {
        let oracle = truncated_factorization(&spec, &[None, Some(y), None]);
        let x1: f64 = (0..8).filter(|i| i / 4 == 1).map(|i| oracle[i]).sum();
        assert!((x1 - 0.4).abs() < 1e-12);
        let q = Dist::dirac_flat(cs.space().clone(), SubsetMask::singleton(1), y).unwrap();
        let new = intervene_hard(&cs, SubsetMask::singleton(1), &q).unwrap();
        assert!(max_diff(new.p().weights(), &oracle) < 1e-9);
    }
}

#[test]
fn random_scms_match_truncated_factorization() {
    for seed in 0..100u64 {
        let mut rng = rng_for(seed);
        let n = 1 + (seed as usize % 4);
        let spec = random_scm(&mut rng, n, 3);
        let cs = compile_scm(&spec).unwrap();
        assert!(validate_causal_space(&cs).is_valid(), "seed {seed}");
        for j in 0..n {
            for v in 0..spec.variables[j].domain.len() {
                let mut clamp = vec![None; n];
                clamp[j] = Some(v);
                let oracle = truncated_factorization(&spec, &clamp);
                let q = Dist::dirac_flat(cs.space().clone(), SubsetMask::singleton(j), v).unwrap();
                let new = intervene_hard(&cs, SubsetMask::singleton(j), &q).unwrap();
                assert!(max_diff(new.p().weights(), &oracle) < 1e-9, "seed {seed} do(X{j}={v})");
            }
        }
    }
}

#[test]
fn every_compiled_kernel_row_is_a_clamped_run() {
    let spec = chain_scm();
    let cs = compile_scm(&spec).unwrap();
    let space = cs.space().clone();
    for s in SubsetMask::all(3) {
        for r in 0..space.atoms(s) {
            let coords = space.decode(s, r);
            let mut clamp = vec![None; 3];
            for (t, c) in s.indices().zip(coords) {
                clamp[t] = Some(c);
            }
            let oracle = truncated_factorization(&spec, &clamp);
            assert!(max_diff(cs.kernel(s).row(r), &oracle) < 1e-12, "S={{{s}}} row {r}");
        }
    }
}

#[test]
fn quantized_altitude_hard_intervention() {
    let cs = altitude_temperature_discrete().unwrap();
    let a = SubsetMask::singleton(0);
    for level in 0..3 {
        let q = Dist::dirac_flat(cs.space().clone(), a, level).unwrap();
        let new = intervene_hard(&cs, a, &q).unwrap();
        let temp = new.p().marginal(SubsetMask::singleton(1)).unwrap();
        let row = cs.kernel(a).row_dist(level).marginal(SubsetMask::singleton(1)).unwrap();
        assert!(temp.max_abs_diff(&row) < 1e-12);
        let mc = monte_carlo_intervention(&cs, &q, 100_000, 11 + level as u64).unwrap();
        assert!(mc.total_variation(new.p()) < 0.02);
    }
}

#[test]
fn monte_carlo_xor() {
    let cs = compile_scm(&xor_scm()).unwrap();
    let q = Dist::dirac_flat(cs.space().clone(), SubsetMask::singleton(0), 1).unwrap();
    let mc = monte_carlo_intervention(&cs, &q, 100_000, 5).unwrap();
    let y = mc.marginal(SubsetMask::singleton(1)).unwrap();
    assert!((y.weight(0) - 0.1).abs() < 0.01 && (y.weight(1) - 0.9).abs() < 0.01);
}

#[test]
fn monte_carlo_degenerate_and_uniform() {
    let space = FiniteProductSpace::from_sizes(&["A", "B"], &[2, 2]).unwrap();
    let p = Dist::uniform(space.clone(), space.full()).unwrap();
    let cs = conditional_space(p.clone()).unwrap();
    let q = Dist::dirac_flat(space.clone(), space.full(), 2).unwrap();
    let mc = monte_carlo_intervention(&cs, &q, 1000, 1).unwrap();
    assert_eq!(mc.weights(), &[0.0, 0.0, 1.0, 0.0]);
    let q = Dist::uniform(space.clone(), SubsetMask::singleton(0)).unwrap();
    let mc = monte_carlo_intervention(&cs, &q, 100_000, 2).unwrap();
    assert!(mc.total_variation(&p) < 0.02);
}

#[test]
fn measure_examples() {
    let space = FiniteProductSpace::from_sizes(&["A", "B"], &[2, 2]).unwrap();
    let d = Dist::new(space.clone(), space.full(), vec![0.5, 0.3, 0.1, 0.1]).unwrap();
    let m = d.marginal(SubsetMask::singleton(0)).unwrap();
    assert!(max_diff(m.weights(), &[0.8, 0.2]) < 1e-12);
    let atom = AtomIndex::new(&space, SubsetMask::singleton(0), vec![1]).unwrap();
    let c = d.condition(&atom).unwrap();
    assert!(max_diff(c.weights(), &[0.0, 0.0, 0.5, 0.5]) < 1e-12);
    let a = Dist::new(space.clone(), SubsetMask::singleton(0), vec![0.7, 0.3]).unwrap();
    let b = Dist::new(space.clone(), SubsetMask::singleton(1), vec![0.5, 0.5]).unwrap();
    assert!(max_diff(product(&a, &b).unwrap().weights(), &[0.35, 0.35, 0.15, 0.15]) < 1e-12);
    assert!(product(&a, &a).is_err());
    // bind with q = [.5, .5]
    let k = Kernel::conditional(&d, SubsetMask::singleton(0)).unwrap();
    let q = Dist::uniform(space.clone(), SubsetMask::singleton(0)).unwrap();
    let bound = bind(&q, &k).unwrap();
    let expect: Vec<f64> = (0..4).map(|i| 0.5 * k.row(0)[i] + 0.5 * k.row(1)[i]).collect();
    assert!(max_diff(bound.weights(), &expect) < 1e-12);
    assert!(bind(&b, &k).is_err());
}

#[test]
fn mechanism_constructors() {
    let space = FiniteProductSpace::from_sizes(&["A", "B"], &[2, 2]).unwrap();
    let p = Dist::new(space.clone(), space.full(), vec![0.5, 0.3, 0.1, 0.1]).unwrap();
    let mech = mechanism_from_conditionals(&p).unwrap();
    assert!(max_diff(mech.kernel(SubsetMask::singleton(0)).row(1), &[0.0, 0.0, 0.5, 0.5]) < 1e-12);
    let q = Dist::uniform(space.clone(), space.full()).unwrap();
    let l = trivial_mechanism(space.full(), &q).unwrap();
    assert!(max_diff(l.kernel(SubsetMask::singleton(0)).row(0), &[0.5, 0.5, 0.0, 0.0]) < 1e-12);
    assert_eq!(l.kernel(SubsetMask::EMPTY).row(0), q.weights());
    for r in 0..4 {
        assert_eq!(l.kernel(space.full()).row(r)[r], 1.0);
    }
}

#[test]
fn validator_reports_each_axiom() {
    let space = FiniteProductSpace::from_sizes(&["A", "B"], &[2, 2]).unwrap();
    let p = Dist::new(space.clone(), space.full(), vec![0.4, 0.1, 0.2, 0.3]).unwrap();
    let good = conditional_space(p.clone()).unwrap();
    assert!(validate_causal_space(&good).is_valid());
    let other = Dist::uniform(space.clone(), space.full()).unwrap();
    let bad_i = CausalMechanism::from_fn(space.clone(), space.full(), |s| {
        if s.is_empty() {
            Kernel::constant(s, &other)
        } else {
            Ok(good.kernel(s).clone())
        }
    })
    .unwrap();
    let r = validate_causal_space(&CausalSpace::new(p.clone(), bad_i).unwrap());
    assert!(r.violations.iter().any(|v| v.axiom == "i"));
    let bad_ii = CausalMechanism::from_fn(space.clone(), space.full(), |s| {
        if s == SubsetMask::singleton(1) {
            Kernel::new(space.clone(), s, space.full(), vec![vec![0.25; 4], vec![0.25; 4]])
        } else {
            Ok(good.kernel(s).clone())
        }
    })
    .unwrap();
    let r = validate_causal_space(&CausalSpace::new(p, bad_ii).unwrap());
    assert!(r.violations.iter().all(|v| v.axiom == "ii" && v.subset == "1"));
    assert!(!r.violations.is_empty());
}
