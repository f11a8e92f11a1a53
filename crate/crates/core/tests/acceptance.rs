//! One line per acceptance criterion, with its wall-clock time against the limit.
//! Runs without the libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use causal_spaces::causal::*;
use causal_spaces::cli::{self, SpaceDocument};
use causal_spaces::compilers::*;
use causal_spaces::effects::*;
use causal_spaces::gaussian::*;
use causal_spaces::harness::fixtures::*;
use causal_spaces::harness::random::{random_causal_space, random_scm, rng_for, RandomSpaceConfig};
use causal_spaces::harness::theorems::{check_space, TheoremReport};
use causal_spaces::harness::*;
use causal_spaces::measure::*;
use nalgebra::{dmatrix, dvector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn point(t: usize, v: f64) -> GaussianMeasure {
    GaussianMeasure::dirac(vec![t], dvector![v]).unwrap()
}

fn moments_match(m: &GaussianMeasure, t: usize, mean: f64, var: f64, tol: f64) -> Result<(), String> {
    let (m_, v_) = m.moments(t).map_err(e)?;
    ensure((m_ - mean).abs() <= tol && (v_ - var).abs() <= tol, || {
        format!("coordinate {t}: N({m_}, {v_}) instead of N({mean}, {var})")
    })
}

fn altitude() -> Outcome {
    let gs = altitude_temperature().map_err(e)?;
    moments_match(&g_intervene(&gs, &point(0, 1000.0)).map_err(e)?, 1, 10.0, 0.25, 1e-9)?;
    let measures = [
        point(1, 0.0),
        GaussianMeasure::new(vec![1], dvector![-3.0], dmatrix![2.0]).map_err(e)?,
        GaussianMeasure::new(vec![1], dvector![25.0], dmatrix![0.5]).map_err(e)?,
    ];
    for q in &measures {
        moments_match(&g_intervene(&gs, q).map_err(e)?, 0, 1000.0, 300.0, 1e-9)?;
    }
    Ok("temperature N(10, .25); altitude N(1000, 300) under 3 measures".into())
}

fn rice() -> Outcome {
    let gs = rice_market().map_err(e)?;
    gs.validate().map_err(e)?;
    let a = g_intervene(&gs, &point(0, 3.0)).map_err(e)?;
    moments_match(&a, 1, 4.5, 0.25, 1e-9)?;
    let p = g_intervene(&gs, &point(1, 6.0)).map_err(e)?;
    moments_match(&p, 0, 4.0, 0.25, 1e-9)?;
    for m in [a, p] {
        GaussianMeasure::new(m.coords.clone(), m.mean.clone(), m.cov.clone()).map_err(e)?;
    }
    Ok("price N(4.5, .25); amount N(4, .25)".into())
}

fn brownian() -> Outcome {
    let rows = brownian_comparison(100, 2.0, 1.0, 0.0).map_err(e)?;
    ensure(rows.len() == 100, || format!("{} grid points", rows.len()))?;
    for r in &rows {
        let s = r.time;
        let want_do = if s < 1.0 { s } else { s - 1.0 };
        ensure((r.var_intervened - want_do).abs() <= 1e-8, || format!("do variance {} at {s}", r.var_intervened))?;
        if s < 1.0 {
            let want = s * (1.0 - s);
            ensure((r.var_conditioned - want).abs() <= 1e-8, || format!("bridge variance {} at {s}", r.var_conditioned))?;
        }
    }
    let gs = brownian_grid(100, 2.0).map_err(e)?;
    let at_one = point(49, 0.0);
    let closed = g_intervene(&gs, &at_one).map_err(e)?;
    let emp = causal_spaces::gaussian::monte_carlo_intervention(&gs, &at_one, 100_000, 7).map_err(e)?;
    let z = emp.max_standard_errors(&closed);
    ensure(z < 4.0, || format!("Monte Carlo off by {z:.2} standard errors"))?;
    Ok(format!("closed form to 1e-8; 1e5 paths, worst {z:.2} standard errors"))
}

/// Clamped re-run of the SCM over every noise combination.
fn truncated_factorization(spec: &ScmSpec, clamp: &[Option<usize>]) -> Vec<f64> {
    let vars = &spec.variables;
    let sizes: Vec<usize> = vars.iter().map(|v| v.domain.len()).collect();
    let index = |name: &String| vars.iter().position(|w| &w.name == name).unwrap();
    let mut joint = vec![0.0; sizes.iter().product()];
    let mut stack = vec![(0usize, Vec::<usize>::new(), 1.0)];
    while let Some((j, x, w)) = stack.pop() {
        if j == vars.len() {
            joint[x.iter().zip(&sizes).fold(0, |acc, (xi, s)| acc * s + xi)] += w;
            continue;
        }
        for (e_j, &pe) in vars[j].noise.iter().enumerate() {
            let row = vars[j].parents.iter().fold(0, |acc, p| acc * sizes[index(p)] + x[index(p)]);
            let v = clamp[j].unwrap_or(vars[j].table[row * vars[j].noise.len() + e_j]);
            let mut next = x.clone();
            next.push(v);
            stack.push((j + 1, next, w * pe));
        }
    }
    joint
}

fn scm_differential() -> Outcome {
    let mut checked = 0;
    for seed in 0..100u64 {
        let n = 1 + (seed as usize % 4);
        let spec = random_scm(&mut rng_for(seed), n, 3);
        let cs = compile_scm(&spec).map_err(e)?;
        for j in 0..n {
            for v in 0..spec.variables[j].domain.len() {
                let mut clamp = vec![None; n];
                clamp[j] = Some(v);
                let oracle = truncated_factorization(&spec, &clamp);
                let q = Dist::dirac_flat(cs.space().clone(), SubsetMask::singleton(j), v).map_err(e)?;
                let new = intervene(&cs, &InterventionSpec::hard(q)).map_err(e)?;
                let gap = new.p().weights().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                ensure(gap <= 1e-9, || format!("seed {seed}, do(X{j}={v}): gap {gap:e}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} interventions on 100 SCMs"))
}

fn theorem_suite() -> Outcome {
    let mut report = TheoremReport::default();
    for seed in 0..200 {
        let cs = random_causal_space(&RandomSpaceConfig::from_seed(seed)).map_err(e)?;
        check_space(&cs, seed, &mut report).map_err(e)?;
    }
    ensure(report.total_violations() == 0, || report.lines().join("; "))?;
    let idle = report.unexercised();
    ensure(idle.is_empty(), || format!("never exercised: {idle:?}"))?;
    let checks: usize = report.tallies.values().map(|t| t.checked).sum();
    Ok(format!("{} properties, {checks} checks, 0 violations", report.tallies.len()))
}

fn dormant_activation() -> Outcome {
    let instances = dormant_instances().map_err(e)?;
    ensure(instances.len() >= 10, || format!("only {} instances", instances.len()))?;
    for inst in &instances {
        let class = classify_effect(&inst.cs, inst.u, &inst.event).map_err(e)?;
        ensure(class == EffectClass::Dormant, || format!("{} is {class}", inst.label))?;
        let w = activate_dormant(&inst.cs, inst.u, &inst.event).map_err(e)?;
        let after = classify_effect(&w.intervened_space, w.activated, &inst.event).map_err(e)?;
        ensure(after == EffectClass::Active, || format!("{}: witness gives {after}", inst.label))?;
    }
    Ok(format!("{} dormant instances activated", instances.len()))
}

fn counterexamples() -> Outcome {
    let (_, c) = composition_counterexample().map_err(e)?;
    ensure(c.discrepancy > 0.01, || format!("composition discrepancy {}", c.discrepancy))?;
    let (_, r) = reversibility_counterexample().map_err(e)?;
    ensure(r.premise_u_gap <= 1e-9 && r.premise_r_gap <= 1e-9, || {
        format!("premise gaps {:e}, {:e}", r.premise_u_gap, r.premise_r_gap)
    })?;
    ensure(r.violation > 0.01, || format!("reversibility violation {}", r.violation))?;
    Ok(format!("composition {:.4}; reversibility {:.4}", c.discrepancy, r.violation))
}

fn confounder() -> Outcome {
    let cs = icecream_space().map_err(e)?;
    let p = cs.p();
    let (i, s) = (SubsetMask::singleton(0), SubsetMask::singleton(1));
    let pi = p.marginal(i).map_err(e)?;
    let ps = p.marginal(s).map_err(e)?;
    let sizes = cs.space().sizes();
    let mut mi = 0.0;
    for a in 0..sizes[0] {
        for b in 0..sizes[1] {
            let w = p.weight(a * sizes[1] + b);
            if w > 0.0 {
                mi += w * (w / (pi.weight(a) * ps.weight(b))).ln();
            }
        }
    }
    ensure(mi > 0.01, || format!("mutual information {mi}"))?;
    for (u, v) in [(i, s), (s, i)] {
        let class = classify_effect_on_sigma(&cs, u, v).map_err(e)?;
        ensure(class == EffectClass::None, || format!("ℋ_{{{u}}} on ℋ_{{{v}}} is {class}"))?;
    }
    Ok(format!("mutual information {mi:.4} nats; NONE both ways"))
}

fn potential_outcomes() -> Outcome {
    let spec = confounded_po();
    let (cs, _) = compile_po(&spec).map_err(e)?;
    // joint cells are (z, y0, y1)
    let y_z = |z: usize, y: usize| -> f64 {
        (0..8).filter(|c| (if z == 0 { (c >> 1) & 1 } else { c & 1 }) == y).map(|c| spec.joint[c]).sum()
    };
    let k = cs.kernel(SubsetMask::singleton(PO_TREATMENT));
    for z in 0..2 {
        for y in 0..2 {
            let b = Event::from_predicate(cs.space().clone(), SubsetMask::singleton(PO_OUTCOME), |c| c[0] == y)
                .map_err(e)?;
            let got = k.prob(z, &b).map_err(e)?;
            ensure((got - y_z(z, y)).abs() <= 1e-12, || format!("K_Z({z}, Y={y}) = {got}, want {}", y_z(z, y)))?;
        }
    }
    let z1: f64 = spec.joint[4..].iter().sum();
    let observed = (spec.joint[5] + spec.joint[7]) / z1;
    let gap = (observed - y_z(1, 1)).abs();
    ensure(gap > 0.05, || format!("gap {gap}"))?;
    Ok(format!("K_Z(1, Y=1) = {:.4} vs P(Y=1 | Z=1) = {observed:.4}", y_z(1, 1)))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["causal-spaces"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn cli_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let spec_path = dir.path().join("xor.scm.json");
    std::fs::write(&spec_path, serde_json::to_string(&xor_scm()).map_err(e)?).map_err(e)?;
    let target = dir.path().join("xor.space.json");
    let (code, _) = run_cli(&["compile", spec_path.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    ensure(code == 0, || format!("compile exited {code}"))?;
    let (code, _) = run_cli(&["validate", target.to_str().unwrap()]);
    ensure(code == 0, || format!("validate exited {code}"))?;
    let dumped: SpaceDocument = serde_json::from_str(&std::fs::read_to_string(&target).map_err(e)?).map_err(e)?;
    let direct = SpaceDocument::from_space(&compile_scm(&xor_scm()).map_err(e)?);
    let reparsed = SpaceDocument::from_space(&dumped.to_space().map_err(e)?);
    let bits = |d: &SpaceDocument| -> Vec<u64> {
        d.p.iter().chain(d.kernels.values().flatten().flatten()).map(|x| x.to_bits()).collect()
    };
    ensure(bits(&dumped) == bits(&direct) && bits(&reparsed) == bits(&direct), || "weights differ".into())?;

    let (code, text) = run_cli(&["demo", "altitude"]);
    let v: serde_json::Value = serde_json::from_str(&text).map_err(e)?;
    let near = |x: &serde_json::Value, want: f64| x.as_f64().is_some_and(|x| (x - want).abs() <= 1e-9);
    ensure(code == 0 && near(&v["do_altitude_1000"]["mean"], 10.0) && near(&v["do_altitude_1000"]["var"], 0.25), || text.clone())?;
    ensure(near(&v["do_temperature_0"]["altitude"]["var"], 300.0), || text.clone())?;
    let (code, text) = run_cli(&["demo", "rice"]);
    let v: serde_json::Value = serde_json::from_str(&text).map_err(e)?;
    ensure(code == 0 && near(&v["do_amount_3"]["price"]["mean"], 4.5) && near(&v["do_price_6"]["amount"]["mean"], 4.0), || text.clone())?;
    let (code, text) = run_cli(&["demo", "brownian"]);
    ensure(code == 0, || format!("brownian exited {code}"))?;
    let mut lines = text.lines();
    ensure(lines.next() == Some("time,mean_intervened,var_intervened,mean_conditioned,var_conditioned"), || "bad header".into())?;
    let mut n = 0;
    for line in lines {
        let row: Vec<f64> = line.split(',').map(str::parse).collect::<Result<_, _>>().map_err(e)?;
        ensure(row.len() == 5, || format!("row {line:?}"))?;
        let s = row[0];
        let want = if s < 1.0 { s } else { s - 1.0 };
        ensure((row[2] - want).abs() <= 1e-8, || format!("row {line:?}"))?;
        if s < 1.0 {
            ensure((row[4] - s * (1.0 - s)).abs() <= 1e-8, || format!("row {line:?}"))?;
        }
        n += 1;
    }
    ensure(n == 100, || format!("{n} CSV rows"))?;
    Ok("xor round trip bitwise; demos match".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("altitude/temperature", altitude, Duration::from_secs(1)),
        ("rice cycle", rice, Duration::from_secs(1)),
        ("brownian grid", brownian, Duration::from_secs(30)),
        ("SCM differential", scm_differential, Duration::from_secs(60)),
        ("theorem suite", theorem_suite, Duration::from_secs(300)),
        ("dormant activation", dormant_activation, Duration::from_secs(30)),
        ("counterexamples", counterexamples, Duration::from_secs(5)),
        ("confounder", confounder, Duration::from_secs(5)),
        ("potential outcomes", potential_outcomes, Duration::from_secs(1)),
        ("CLI contract", cli_contract, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(d) => (false, d),
        };
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.3} s / {} s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
