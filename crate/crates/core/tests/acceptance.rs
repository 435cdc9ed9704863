//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any criterion fails or overruns its time
//! limit.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use hedcheck::dfl::interp::interpret;
use hedcheck::dfl::{input_flats, parse, structural_diff, sym_sim, AssignmentList, SymSimConfig};
use hedcheck::hed::{Monomial, Polynomial};
use hedcheck::modular::{
    brute_force_equiv, brute_force_witness, equiv_mod, reduce_mod, v2_factorial, BruteForceMode, RingConfig,
};
use hedcheck::pipeline::{
    concrete_check, corpus, expand_outputs, mutate, pipeline_transform, LatencyModel, EXHAUSTIVE_BITS,
};
use hedcheck::sec::{sec_piped, Report, SecConfig, SegmentLimit, Verdict};
use hedcheck::{HedRef, Manager, VarId, VarRange};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Number, name, check and time limit of one criterion.
type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ring(w: u32) -> RingConfig {
    RingConfig::new(w).unwrap()
}

fn simulate(src: &str) -> Result<AssignmentList, String> {
    sym_sim(&parse(src).map_err(err)?, &SymSimConfig::default()).map_err(err)
}

// ---------------------------------------------------------------------------
// 1. Vanishing-polynomial golden pair.

fn cubic(m: &mut Manager, y: VarId, c: [i64; 4]) -> HedRef {
    let mut p = Polynomial::zero();
    for (k, &ck) in c.iter().enumerate() {
        let mono = if k == 0 { Monomial::one() } else { Monomial::one().times_var(y, k as u32) };
        p.add_term(mono, BigInt::from(ck));
    }
    m.from_polynomial(&p).unwrap()
}

fn vanishing_pair() -> Outcome {
    let mut m = Manager::new();
    let y = m.input("Y", VarRange::Full);
    let f1 = cubic(&mut m, y, [6, 19, -5, 15]);
    let f2 = cubic(&mut m, y, [6, 3, 3, 7]);
    ensure(f1 != f2, || "f1 and f2 coincide over Z".into())?;
    ensure(equiv_mod(&mut m, &f1, &f2, &ring(4)).map_err(err)?, || "f1 != f2 at width 4".into())?;
    let d = m.sub(&f1, &f2).map_err(err)?;
    let reduced = reduce_mod(&mut m, &d, &ring(4)).map_err(err)?;
    ensure(reduced.is_zero(), || format!("reduceMod(f1 - f2) = {}", m.format(&reduced).unwrap()))?;
    ensure(brute_force_equiv(&m, &f1, &f2, &ring(4), BruteForceMode::Exhaustive).map_err(err)?, || {
        "exhaustive evaluation separates f1 and f2 at width 4".into()
    })?;
    ensure(!equiv_mod(&mut m, &f1, &f2, &ring(5)).map_err(err)?, || "f1 = f2 at width 5".into())?;
    Ok(format!("f1 - f2 = {} vanishes mod 16, nonzero over Z", m.format(&d).unwrap()))
}

// ---------------------------------------------------------------------------
// 2. Normalization golden diagram.

fn normalization_example() -> Outcome {
    let mut m = Manager::new();
    let z = m.input("z", VarRange::Full);
    let y = m.input("y", VarRange::Full);
    let x = m.input("x", VarRange::Full);
    let mut p = Polynomial::zero();
    let terms: [(i64, &[(VarId, u32)]); 6] = [
        (24, &[]),
        (-8, &[(z, 1)]),
        (12, &[(y, 1)]),
        (12, &[(y, 1), (z, 1)]),
        (-6, &[(x, 1)]),
        (-6, &[(x, 1), (z, 1)]),
    ];
    for (c, vars) in terms {
        let mono = vars.iter().fold(Monomial::one(), |mo, &(v, k)| mo.times_var(v, k));
        p.add_term(mono, BigInt::from(c));
    }
    let f = m.from_polynomial(&p).map_err(err)?;
    let w = |r: &HedRef| r.weight().clone();
    let (v, xc, xl) = m.children(f.node()).ok_or("root is a terminal")?;
    ensure(v == x, || "root is not x".into())?;
    ensure(w(&f) == BigInt::from(2), || format!("root weight {}", w(&f)))?;
    let (v, yc, yl) = m.children(xc.node()).ok_or("x-const child is a terminal")?;
    ensure(v == y, || "x-const child is not y".into())?;
    // Path weights: 12 on (y, z), 8 on the z node of (24, -8), -6 on (x, xz).
    ensure(w(&f) * w(&xc) * w(&yl) == BigInt::from(12), || "factor 12 missing".into())?;
    ensure(w(&f) * w(&xc) * w(&yc) == BigInt::from(8), || "factor 8 missing".into())?;
    ensure(w(&f) * w(&xl) == BigInt::from(-6), || "factor -6 missing".into())?;
    let (_, c, l) = m.children(yc.node()).ok_or("z node missing")?;
    ensure((w(&c), w(&l)) == (BigInt::from(3), BigInt::from(-1)), || "z node of (24, -8) is not (3, -1)".into())?;
    ensure(yl.node() == xl.node(), || "12(1 + z) and -6(1 + z) do not share a node".into())?;
    for bits in 0..8u32 {
        let (xv, yv, zv) = (i64::from(bits & 1), i64::from(bits >> 1 & 1), i64::from(bits >> 2 & 1));
        let direct = 24 - 8 * zv + 12 * yv + 12 * yv * zv - 6 * xv - 6 * xv * zv;
        let point = HashMap::from([(x, BigInt::from(xv)), (y, BigInt::from(yv)), (z, BigInt::from(zv))]);
        let got = m.evaluate(&f, &point).map_err(err)?;
        ensure(got == BigInt::from(direct), || format!("evaluate at {bits:03b}: {got} != {direct}"))?;
    }
    Ok("factors 2, 12, 8, -6 placed; evaluation matches on {0,1}^3".into())
}

// ---------------------------------------------------------------------------
// 3. Canonicity.

#[derive(Clone, Debug)]
enum E {
    Var(usize),
    Const(i64),
    Neg(Box<E>),
    Add(Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
    Mul(Box<E>, Box<E>),
}

fn b(e: E) -> Box<E> {
    Box::new(e)
}

fn random_expr(rng: &mut ChaCha8Rng, vars: usize, depth: u32) -> E {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.6) { E::Var(rng.gen_range(0..vars)) } else { E::Const(rng.gen_range(-9..=9)) };
    }
    let (a, c) = (random_expr(rng, vars, depth - 1), random_expr(rng, vars, depth - 1));
    match rng.gen_range(0..7) {
        0 => E::Neg(b(a)),
        1 | 2 => E::Add(b(a), b(c)),
        3 => E::Sub(b(a), b(c)),
        _ => E::Mul(b(a), b(c)),
    }
}

/// An expression equal to `e` over the integers, by local rewrites.
fn rewrite(e: &E, rng: &mut ChaCha8Rng, vars: usize) -> E {
    let e = match e {
        E::Var(_) | E::Const(_) => e.clone(),
        E::Neg(a) => E::Neg(b(rewrite(a, rng, vars))),
        E::Add(a, c) => E::Add(b(rewrite(a, rng, vars)), b(rewrite(c, rng, vars))),
        E::Sub(a, c) => E::Sub(b(rewrite(a, rng, vars)), b(rewrite(c, rng, vars))),
        E::Mul(a, c) => E::Mul(b(rewrite(a, rng, vars)), b(rewrite(c, rng, vars))),
    };
    if !rng.gen_bool(0.5) {
        return e;
    }
    match e {
        E::Add(a, c) => match *a {
            E::Add(a1, a2) if rng.gen_bool(0.5) => E::Add(a1, b(E::Add(a2, c))),
            a => E::Add(c, b(a)),
        },
        E::Mul(a, c) => match *c {
            E::Add(c1, c2) => E::Add(b(E::Mul(a.clone(), c1)), b(E::Mul(a, c2))),
            E::Sub(c1, c2) => E::Sub(b(E::Mul(a.clone(), c1)), b(E::Mul(a, c2))),
            c => E::Mul(b(c), a),
        },
        E::Sub(a, c) => E::Add(a, b(E::Neg(c))),
        E::Neg(a) => match *a {
            E::Neg(inner) => *inner,
            a => E::Mul(b(E::Const(-1)), b(a)),
        },
        E::Const(k) => E::Add(b(E::Const(k - 3)), b(E::Const(3))),
        E::Var(v) => {
            let x = E::Var(rng.gen_range(0..vars));
            E::Add(b(E::Var(v)), b(E::Sub(b(x.clone()), b(x))))
        }
    }
}

/// A small change to `e` that usually alters its value.
fn perturb(e: &E, rng: &mut ChaCha8Rng, vars: usize) -> E {
    match e {
        E::Var(v) => {
            if rng.gen_bool(0.5) {
                E::Var((v + 1) % vars)
            } else {
                E::Add(b(E::Var(*v)), b(E::Const(1)))
            }
        }
        E::Const(k) => E::Const(k + 1),
        E::Neg(a) => a.as_ref().clone(),
        E::Add(a, c) if rng.gen_bool(0.5) => E::Sub(a.clone(), c.clone()),
        E::Add(a, c) | E::Sub(a, c) | E::Mul(a, c) => {
            let (a, c) = if rng.gen_bool(0.5) {
                (perturb(a, rng, vars), c.as_ref().clone())
            } else {
                (a.as_ref().clone(), perturb(c, rng, vars))
            };
            match e {
                E::Add(..) => E::Add(b(a), b(c)),
                E::Sub(..) => E::Sub(b(a), b(c)),
                _ => E::Mul(b(a), b(c)),
            }
        }
    }
}

fn build(m: &mut Manager, e: &E, vars: &[HedRef]) -> HedRef {
    match e {
        E::Var(v) => vars[*v].clone(),
        E::Const(k) => m.mk_const(*k),
        E::Neg(a) => {
            let a = build(m, a, vars);
            m.neg(&a).unwrap()
        }
        E::Add(a, c) | E::Sub(a, c) | E::Mul(a, c) => {
            let (a2, c2) = (build(m, a, vars), build(m, c, vars));
            match e {
                E::Add(..) => m.add(&a2, &c2).unwrap(),
                E::Sub(..) => m.sub(&a2, &c2).unwrap(),
                _ => m.mul(&a2, &c2).unwrap(),
            }
        }
    }
}

fn eval_expr(e: &E, point: &[i64]) -> BigInt {
    match e {
        E::Var(v) => BigInt::from(point[*v]),
        E::Const(k) => BigInt::from(*k),
        E::Neg(a) => -eval_expr(a, point),
        E::Add(a, c) => eval_expr(a, point) + eval_expr(c, point),
        E::Sub(a, c) => eval_expr(a, point) - eval_expr(c, point),
        E::Mul(a, c) => eval_expr(a, point) * eval_expr(c, point),
    }
}

fn canonicity() -> Outcome {
    const PAIRS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w6 = ring(6);
    let (mut equal, mut unequal, mut skipped) = (0, 0, 0);
    let mut m = Manager::new();
    let mut vars_ref = Vec::new();
    let mut ids = Vec::new();
    while equal < PAIRS || unequal < PAIRS {
        if (equal + unequal + skipped) % 200 == 0 {
            m = Manager::new();
            ids = (0..3).map(|i| m.input(&format!("v{i}"), VarRange::Full)).collect::<Vec<_>>();
            vars_ref = ids.iter().map(|&v| m.mk_var(v).unwrap()).collect();
        }
        let nvars = rng.gen_range(1..=3);
        let e1 = random_expr(&mut rng, nvars, 4);
        let r1 = build(&mut m, &e1, &vars_ref);
        // The diagram denotes the expression.
        let point: Vec<i64> = (0..3).map(|_| rng.gen_range(-20..=20)).collect();
        let at: HashMap<VarId, BigInt> = ids.iter().zip(&point).map(|(&v, &x)| (v, BigInt::from(x))).collect();
        let got = m.evaluate(&r1, &at).map_err(err)?;
        ensure(got == eval_expr(&e1, &point), || format!("evaluation of {e1:?} disagrees"))?;

        if equal < PAIRS {
            let e2 = rewrite(&e1, &mut rng, nvars);
            let r2 = build(&mut m, &e2, &vars_ref);
            let arbiter = brute_force_equiv(&m, &r1, &r2, &w6, BruteForceMode::Exhaustive).map_err(err)?;
            ensure(arbiter, || format!("rewrite changed the value: {e1:?} vs {e2:?}"))?;
            ensure(r1 == r2, || format!("rewrite-equal pair has distinct references: {e1:?} vs {e2:?}"))?;
            equal += 1;
        }
        if unequal < PAIRS {
            let e2 = if rng.gen_bool(0.5) { perturb(&e1, &mut rng, nvars) } else { random_expr(&mut rng, nvars, 4) };
            let r2 = build(&mut m, &e2, &vars_ref);
            let separated = brute_force_witness(&m, &r1, &r2, &w6, BruteForceMode::Exhaustive).map_err(err)?.is_some();
            if separated {
                ensure(r1 != r2, || format!("unequal pair shares a reference: {e1:?} vs {e2:?}"))?;
                unequal += 1;
            } else {
                skipped += 1;
            }
        }
    }
    Ok(format!(
        "{equal} equal pairs share references, {unequal} unequal pairs distinguished ({skipped} arbiter-equal skipped)"
    ))
}

// ---------------------------------------------------------------------------
// 4. Modular equivalence against exhaustive evaluation.

fn falling(v: VarId, k: u32) -> Polynomial {
    let mut p = Polynomial::constant(1);
    for j in 0..k {
        let mut f = Polynomial::var(v);
        f.add_term(Monomial::one(), BigInt::from(-(j as i64)));
        p = p.mul(&f);
    }
    p
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[VarId], max_degree: u32) -> Polynomial {
    let mut p = Polynomial::zero();
    for _ in 0..rng.gen_range(1..=5) {
        let mut mono = Monomial::one();
        let mut budget = rng.gen_range(0..=max_degree);
        for &v in vars {
            let e = rng.gen_range(0..=budget);
            budget -= e;
            if e > 0 {
                mono = mono.times_var(v, e);
            }
        }
        p.add_term(mono, BigInt::from(rng.gen_range(-300..=300)));
    }
    p
}

fn modular_agreement() -> Outcome {
    const PAIRS: usize = 1000;
    const MAX_BITS: u32 = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut agree_eq, mut agree_ne) = (0, 0);
    for pair in 0..PAIRS {
        let w = rng.gen_range(1..=8u32);
        let nvars = rng.gen_range(1..=3u32).min(MAX_BITS / w).max(1);
        let mut m = Manager::new();
        let vars: Vec<VarId> = (0..nvars).map(|i| m.input(&format!("x{i}"), VarRange::Full)).collect();
        let p1 = random_poly(&mut rng, &vars, 8);
        let modulus = BigInt::from(1) << w;
        let p2 = match pair % 4 {
            0 => random_poly(&mut rng, &vars, 8),
            1 => {
                // Add a vanishing falling-factorial product.
                let v = vars[rng.gen_range(0..vars.len())];
                let k = rng.gen_range(1..=8);
                let shift = w.saturating_sub(v2_factorial(k));
                let c = BigInt::from(rng.gen_range(1..=5)) << shift;
                p1.add(&falling(v, k).scale(&c))
            }
            2 => p1.add(&random_poly(&mut rng, &vars, 8).scale(&modulus)),
            _ => {
                let mut p = p1.clone();
                p.add_term(Monomial::one().times_var(vars[0], rng.gen_range(1..=3)), BigInt::from(1));
                p
            }
        };
        let (r1, r2) = (m.from_polynomial(&p1).map_err(err)?, m.from_polynomial(&p2).map_err(err)?);
        let cfg = ring(w);
        let symbolic = equiv_mod(&mut m, &r1, &r2, &cfg).map_err(err)?;
        let arbiter = brute_force_equiv(&m, &r1, &r2, &cfg, BruteForceMode::Exhaustive).map_err(err)?;
        ensure(symbolic == arbiter, || {
            format!(
                "w={w}: equivMod={symbolic}, exhaustive={arbiter} for {} vs {}",
                m.format_poly(&p1),
                m.format_poly(&p2)
            )
        })?;
        if arbiter {
            agree_eq += 1;
        } else {
            agree_ne += 1;
        }
    }
    Ok(format!("{} pairs agree ({agree_eq} equal, {agree_ne} unequal)", agree_eq + agree_ne))
}

// ---------------------------------------------------------------------------
// 5. FFT end to end.

/// The FFT's straight-line data statements, transcribed by hand.
const FFT4_UNROLLED: &str = "
    inout aar[4]; inout aai[4]; input wr[2]; input wi[2];
    var C; var S; var tmr; var tmi;
    C := wr[0]; S := wi[0];
    tmr := aar[0] - aar[2]; tmi := aai[0] - aai[2];
    aar[0] := aar[0] + aar[2]; aai[0] := aai[0] + aai[2];
    aar[2] := tmr; aai[2] := tmi;
    C := wr[1]; S := wi[1];
    tmr := aar[1] - aar[3]; tmi := aai[1] - aai[3];
    aar[1] := aar[1] + aar[3]; aai[1] := aai[1] + aai[3];
    aar[3] := tmr * C - tmi * S;
    aai[3] := tmr * S + tmi * C;
    C := wr[0]; S := wi[0];
    tmr := aar[0] - aar[1]; tmi := aai[0] - aai[1];
    aar[0] := aar[0] + aar[1]; aai[0] := aai[0] + aai[1];
    aar[1] := tmr; aai[1] := tmi;
    tmr := aar[2] - aar[3]; tmi := aai[2] - aai[3];
    aar[2] := aar[2] + aar[3]; aai[2] := aai[2] + aai[3];
    aar[3] := tmr; aai[3] := tmi;";

fn at_width(w: u32, limit: SegmentLimit) -> SecConfig {
    SecConfig { ring: Some(ring(w)), limit, ..SecConfig::default() }
}

fn fft_end_to_end() -> Outcome {
    const MUTANTS: usize = 50;
    let spec = simulate(corpus::source("fft4.dfl").map_err(err)?)?;
    let reference = simulate(FFT4_UNROLLED)?;
    if let Some(d) = structural_diff(&spec, &reference) {
        return Err(format!("simulated FFT differs from the unrolled listing: {d}"));
    }
    let imp = pipeline_transform(&spec, &LatencyModel::default(), 1).map_err(err)?.list;
    for cfg in [at_width(4, SegmentLimit::Unbounded), SecConfig::default()] {
        let r = sec_piped(&spec, &imp, &cfg).map_err(err)?;
        ensure(r.verdict == Verdict::Equivalent, || format!("pipelined FFT: {:?}", r.unmatched))?;
    }
    let (mut confirmed, mut neutral, mut seed) = (0, 0, 0u64);
    while confirmed < MUTANTS {
        let (m, d) = mutate(&imp, seed).map_err(err)?;
        seed += 1;
        if concrete_check(&spec, &m, 4, 4096, seed).map_err(err)?.witness.is_none() {
            neutral += 1;
            continue;
        }
        confirmed += 1;
        let r = sec_piped(&spec, &m, &at_width(4, SegmentLimit::Nodes(16))).map_err(err)?;
        ensure(r.verdict == Verdict::Unequivalent, || format!("mutant {d:?} judged equivalent"))?;
    }
    Ok(format!("listing matches; pipelined EQUIVALENT; {confirmed} mutants UNEQUIVALENT ({neutral} neutral discarded)"))
}

// ---------------------------------------------------------------------------
// 6/7/9. Corpus runs under decreasing budgets.

struct Run {
    case: String,
    spec: AssignmentList,
    imp: AssignmentList,
    reports: Vec<Report>,
}

static RUNS: Mutex<Vec<Run>> = Mutex::new(Vec::new());

fn budgets(peak: usize) -> [SegmentLimit; 3] {
    [SegmentLimit::Nodes((peak / 2).max(1)), SegmentLimit::Nodes((peak / 4).max(1)), SegmentLimit::Nodes(1)]
}

fn run_budgets(case: String, spec: AssignmentList, imp: AssignmentList, width: Option<u32>) -> Result<Run, String> {
    let cfg = |limit| SecConfig { ring: width.map(ring), limit, ..SecConfig::default() };
    let first = sec_piped(&spec, &imp, &cfg(SegmentLimit::Unbounded)).map_err(|e| format!("{case}: {e}"))?;
    let mut reports = vec![first];
    for limit in budgets(reports[0].counters.max_segment_nodes) {
        reports.push(sec_piped(&spec, &imp, &cfg(limit)).map_err(|e| format!("{case}: {e}"))?);
    }
    Ok(Run { case, spec, imp, reports })
}

fn budget_invariance() -> Outcome {
    let manifest = corpus::manifest();
    let mut runs = Vec::new();
    let mut expected = Vec::new();
    for name in &manifest.programs {
        let spec = simulate(corpus::source(name).map_err(err)?)?;
        for setting in &manifest.settings {
            let pos = corpus::pipelined(&spec, setting).map_err(err)?.list;
            let neg = corpus::distinguishing_mutant(&spec, &pos, manifest.width, manifest.mutant_seeds)
                .map_err(err)?
                .ok_or_else(|| format!("{name}/{}: no distinguishing mutant", setting.name))?
                .0;
            let w = Some(manifest.width);
            runs.push(run_budgets(format!("{name}/{}/positive", setting.name), spec.clone(), pos, w)?);
            expected.push(Verdict::Equivalent);
            runs.push(run_budgets(format!("{name}/{}/negative", setting.name), spec.clone(), neg, w)?);
            expected.push(Verdict::Unequivalent);
        }
    }
    for pair in &manifest.pairs {
        let spec = simulate(corpus::source(&pair.spec).map_err(err)?)?;
        let imp = simulate(corpus::source(&pair.implementation).map_err(err)?)?;
        let case = format!("{} vs {} at {:?}", pair.spec, pair.implementation, pair.width);
        runs.push(run_budgets(case, spec, imp, pair.width)?);
        expected.push(pair.expected);
    }
    let mut divergences = Vec::new();
    for (run, want) in runs.iter().zip(&expected) {
        let verdicts: Vec<Verdict> = run.reports.iter().map(|r| r.verdict).collect();
        if verdicts.iter().any(|v| v != want) {
            divergences.push(format!("{}: {verdicts:?}, expected {want}", run.case));
        }
    }
    let count = runs.len();
    *RUNS.lock().unwrap() = runs;
    ensure(divergences.is_empty(), || divergences.join("; "))?;
    Ok(format!("{count} cases x 4 budgets, all verdicts as expected"))
}

fn internal_calls_grow() -> Outcome {
    let runs = RUNS.lock().unwrap();
    let fft: Vec<&Run> = runs.iter().filter(|r| r.case.starts_with("fft4")).collect();
    ensure(!fft.is_empty(), || "no FFT runs recorded".into())?;
    let mut lines = Vec::new();
    for run in fft {
        let calls: Vec<u64> = run.reports.iter().map(|r| r.counters.internal_equ_calls).collect();
        ensure(calls.windows(2).all(|w| w[0] <= w[1]), || format!("{}: internal calls {calls:?}", run.case))?;
        let ms: Vec<u64> = run.reports.iter().map(|r| r.elapsed_ms).collect();
        lines.push(format!("{} {calls:?} ({ms:?} ms)", run.case));
    }
    Ok(lines.join("; "))
}

fn soundness_sweep() -> Outcome {
    let runs = RUNS.lock().unwrap();
    ensure(!runs.is_empty(), || "no corpus runs recorded".into())?;
    let w4 = ring(4);
    let (mut confirmed, mut outputs, mut sampled) = (0, 0, 0);
    for run in runs.iter() {
        let eq = run.reports.iter().any(|r| r.verdict == Verdict::Equivalent && r.inexact.is_empty());
        if !eq {
            continue;
        }
        let mut m = Manager::new();
        for (name, a, b) in expand_outputs(&mut m, &run.spec, &run.imp).map_err(err)? {
            let same = brute_force_equiv(&m, &a, &b, &w4, BruteForceMode::Exhaustive)
                .or_else(|_| brute_force_equiv(&m, &a, &b, &w4, BruteForceMode::Sampled { samples: 4096, seed: 9 }))
                .map_err(err)?;
            ensure(same, || format!("{}: output {name} refuted by exhaustive evaluation", run.case))?;
            outputs += 1;
        }
        let c = concrete_check(&run.spec, &run.imp, 4, 4096, 9).map_err(err)?;
        if let Some(wit) = c.witness {
            return Err(format!("{}: refuted by concrete point {wit:?}", run.case));
        }
        if !c.exhaustive {
            sampled += 1;
        }
        confirmed += 1;
    }
    Ok(format!(
        "{confirmed} EQUIVALENT verdicts confirmed on {outputs} outputs ({sampled} with input spaces over {EXHAUSTIVE_BITS} bits sampled concretely)"
    ))
}

// ---------------------------------------------------------------------------
// 8. Symbolic simulation against the interpreter.

fn simulation_semantics() -> Outcome {
    const WIDTH: u32 = 6;
    let mut checked = Vec::new();
    for name in corpus::file_names() {
        let p = parse(corpus::source(name).map_err(err)?).map_err(err)?;
        let flats = input_flats(&p);
        if flats.len() > 3 {
            continue;
        }
        let list = sym_sim(&p, &SymSimConfig::default()).map_err(err)?;
        let bits: Vec<u32> = flats.iter().map(|(_, w)| w.map_or(WIDTH, |w| w.min(WIDTH))).collect();
        let total: u32 = bits.iter().sum();
        for point in 0..(1u64 << total) {
            let mut rest = point;
            let mut inputs = HashMap::new();
            for (i, b) in list.inputs.iter().zip(&bits) {
                inputs.insert(i.name.clone(), BigInt::from(rest & ((1 << b) - 1)));
                rest >>= b;
            }
            let direct = interpret(&p, &inputs, 1_000_000).map_err(|e| format!("{name}: {e}"))?;
            let simulated = list.evaluate(&inputs).map_err(|e| format!("{name}: {e}"))?;
            ensure(direct == simulated, || format!("{name} at {inputs:?}: {direct:?} vs {simulated:?}"))?;
        }
        checked.push(format!("{name} ({} points)", 1u64 << total));
    }
    ensure(checked.len() >= 5, || format!("only {} small programs", checked.len()))?;
    Ok(checked.join(", "))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "vanishing polynomial golden pair", vanishing_pair, Some(Duration::from_secs(1))),
        (2, "normalization golden diagram", normalization_example, Some(Duration::from_secs(1))),
        (3, "canonicity", canonicity, Some(Duration::from_secs(60))),
        (4, "modular oracle agreement", modular_agreement, Some(Duration::from_secs(120))),
        (5, "FFT end to end", fft_end_to_end, Some(Duration::from_secs(60))),
        (6, "budget invariance", budget_invariance, Some(Duration::from_secs(600))),
        (7, "internal search grows as budgets shrink", internal_calls_grow, None),
        (8, "symbolic simulation semantics", simulation_semantics, Some(Duration::from_secs(300))),
        (9, "soundness sweep", soundness_sweep, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, f, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str()) || *x == n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let over = limit.is_some_and(|l| elapsed > l);
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        let status = if outcome.is_ok() && !over { "PASS" } else { "FAIL" };
        if status == "FAIL" {
            failed += 1;
        }
        let detail = match (&outcome, over) {
            (Ok(d), false) => d.clone(),
            (Ok(d), true) => format!("time limit exceeded; {d}"),
            (Err(e), _) => e.clone(),
        };
        println!("criterion {n} [{name}]: {status} ({:.2}s{budget}) {detail}", elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
