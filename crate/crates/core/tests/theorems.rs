use causal_spaces::causal::*;
use causal_spaces::compilers::compile_scm;
use causal_spaces::effects::*;
use causal_spaces::harness::random::*;
use causal_spaces::harness::theorems::{check_space, TheoremReport};
use causal_spaces::harness::counterexamples::{additive_cause_space, INDEPENDENT_CAUSES};
use causal_spaces::harness::*;
use causal_spaces::measure::*;
use proptest::prelude::*;

#[test]
fn two_hundred_seeds_without_violation() {
    let mut report = TheoremReport::default();
    for seed in 0..200 {
        let cs = random_causal_space(&RandomSpaceConfig::from_seed(seed)).unwrap();
        check_space(&cs, seed, &mut report).unwrap();
    }
    assert_eq!(report.spaces, 200);
    assert!(report.unexercised().is_empty(), "{:?}", report.unexercised());
    assert_eq!(report.total_violations(), 0, "{}", report.lines().join("\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theorem_suite_holds(seed in 1_000u64..1_000_000) {
        let cs = random_causal_space(&RandomSpaceConfig::from_seed(seed)).unwrap();
        let mut report = TheoremReport::default();
        check_space(&cs, seed, &mut report).unwrap();
        prop_assert_eq!(report.total_violations(), 0, "{}", report.lines().join("\n"));
    }

    #[test]
    fn generated_spaces_are_valid(seed in any::<u64>(), n in 1usize..=4, d in 1usize..=3, style in 0usize..4) {
        let cfg = RandomSpaceConfig { seed, n_components: n, max_domain: d, style: KernelStyle::ALL[style] };
        let cs = random_causal_space(&cfg).unwrap();
        prop_assert!(validate_causal_space(&cs).is_valid());
        let again = random_causal_space(&cfg).unwrap();
        prop_assert_eq!(cs.max_abs_diff(&again), 0.0);
    }

    #[test]
    fn compiled_scms_respect_topological_time(seed in any::<u64>(), n in 1usize..=4) {
        let spec = random_scm(&mut rng_for(seed), n, 3);
        let cs = compile_scm(&spec).unwrap();
        prop_assert!(validate_causal_space(&cs).is_valid());
        prop_assert!(is_time_respecting(&cs, &TimePartition::singletons(n)).unwrap());
    }

    #[test]
    fn marginals_compose(seed in any::<u64>()) {
        let cs = random_causal_space(&RandomSpaceConfig::from_seed(seed)).unwrap();
        let n = cs.space().n();
        let mut rng = rng_for(seed);
        let a = random_subset(&mut rng, n);
        let b = a.intersection(random_subset(&mut rng, n));
        let direct = cs.p().marginal(b).unwrap();
        let staged = cs.p().marginal(a).unwrap().marginal(b).unwrap();
        prop_assert!(direct.max_abs_diff(&staged) <= 1e-12);
        let total: f64 = direct.weights().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn conditional_style_makes_every_block_a_source(seed in any::<u64>(), n in 1usize..=3) {
        let cfg = RandomSpaceConfig { seed, n_components: n, max_domain: 3, style: KernelStyle::Conditional };
        let cs = random_causal_space(&cfg).unwrap();
        for u in SubsetMask::all(n) {
            prop_assert!(is_global_source(&cs, u).unwrap());
        }
    }

    #[test]
    fn intervening_with_the_observational_marginal_through_a_source_returns_p(seed in any::<u64>()) {
        let cfg = RandomSpaceConfig { seed, n_components: 3, max_domain: 3, style: KernelStyle::Conditional };
        let cs = random_causal_space(&cfg).unwrap();
        let u = random_subset(&mut rng_for(seed), 3);
        let q = cs.p().marginal(u).unwrap();
        prop_assert!(intervention_measure(&cs, &q).unwrap().max_abs_diff(cs.p()) <= 1e-9);
    }
}

#[test]
fn fully_random_two_by_two_is_valid() {
    for seed in 0..20 {
        let cfg = RandomSpaceConfig { seed, n_components: 2, max_domain: 2, style: KernelStyle::FullyRandom };
        assert!(validate_causal_space(&random_causal_space(&cfg).unwrap()).is_valid());
    }
}

#[test]
fn composition_fails_on_coupled_causes() {
    let (cs, check) = composition_counterexample().unwrap();
    assert!(check.discrepancy > 0.01, "{}", check.discrepancy);
    // effectiveness is untouched
    for m in [&check.via_s, &check.via_s_and_r] {
        let back = m.marginal(check.s).unwrap();
        assert!(back.max_abs_diff(&check.q) <= 1e-12);
    }
    assert!(validate_causal_space(&cs).is_valid());
    let independent = additive_cause_space(&INDEPENDENT_CAUSES).unwrap();
    let again = composition_check(&independent, &check.q, check.r).unwrap();
    assert!(again.discrepancy <= 1e-12, "{}", again.discrepancy);
}

#[test]
fn reversibility_fails_on_the_discretized_cycle() {
    let (cs, w) = reversibility_counterexample().unwrap();
    assert!(validate_causal_space(&cs).is_valid());
    assert!(w.premise_u_gap <= 1e-9 && w.premise_r_gap <= 1e-9);
    assert!(w.violation > 0.01, "{}", w.violation);
    assert!((w.p_event - w.q1_event).abs() > 0.01);
    assert!((w.p_event - cs.p().prob(&w.event).unwrap()).abs() <= 1e-12);
}

#[test]
fn reversibility_holds_for_conditionals_of_a_product() {
    let space = FiniteProductSpace::from_sizes(&["R", "U"], &[3, 2]).unwrap();
    let r = Dist::new(space.clone(), SubsetMask::singleton(0), vec![0.2, 0.5, 0.3]).unwrap();
    let u = Dist::new(space.clone(), SubsetMask::singleton(1), vec![0.6, 0.4]).unwrap();
    let cs = conditional_space(product(&r, &u).unwrap()).unwrap();
    let w = reversibility_check(&cs, SubsetMask::singleton(0), SubsetMask::singleton(1)).unwrap();
    assert!(w.premise_u_gap <= 1e-9 && w.premise_r_gap <= 1e-9);
    assert!(w.violation <= 1e-9);
}
