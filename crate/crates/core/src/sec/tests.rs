use super::*;
use crate::dfl::{sym_sim_source, SymSimConfig};

fn list(src: &str) -> AssignmentList {
    sym_sim_source(src, &SymSimConfig::default()).unwrap()
}

fn check(spec: &str, imp: &str, cfg: &SecConfig) -> Report {
    sec_piped(&list(spec), &list(imp), cfg).unwrap()
}

fn limited(limit: SegmentLimit) -> SecConfig {
    SecConfig { limit, ..SecConfig::default() }
}

const SPEC_TWO_SUMS: &str = "
    input a[2]; input b[2]; input c[2]; input d[2];
    input e[2]; input f[2]; input g[2]; input h[2];
    output res[2];
    var tempf; var temps;
    for (i := 0; i < 2; i := i + 1) {
        tempf := a[i] * b[i] + c[i] * d[i];
        temps := e[i] * f[i] + g[i] * h[i];
        res[i] := tempf * temps;
    }";

const IMPL_TWO_SUMS: &str = "
    input a[2]; input b[2]; input c[2]; input d[2];
    input e[2]; input f[2]; input g[2]; input h[2];
    output res[2];
    var mul0; var mul1; var mul2; var mul3; var mul4; var mul5; var mul6; var mul7;
    var mul8; var mul9; var add0; var add1; var add2; var add3;
    mul0 := a[0] * b[0]; mul1 := c[0] * d[0]; mul2 := e[0] * f[0]; mul3 := g[0] * h[0];
    add0 := mul0 + mul1;
    mul5 := a[1] * b[1];
    add1 := mul2 + mul3;
    mul6 := c[1] * d[1];
    mul4 := add0 * add1;
    mul7 := e[1] * f[1]; mul8 := g[1] * h[1];
    add2 := mul5 + mul6; add3 := mul7 + mul8;
    mul9 := add2 * add3;
    res[0] := mul4; res[1] := mul9;";

#[test]
fn identical_lists_need_no_internal_search() {
    let r = check(SPEC_TWO_SUMS, SPEC_TWO_SUMS, &SecConfig::default());
    assert_eq!(r.verdict, Verdict::Equivalent);
    assert_eq!(r.counters.internal_equ_calls, 0);
    assert_eq!(r.counters.confirmation_reruns, 0);
}

#[test]
fn sum_and_difference_are_unequivalent() {
    let r = check(
        "input a; input b; output y; y := a + b;",
        "input a; input b; output y; y := a - b;",
        &SecConfig::default(),
    );
    assert_eq!(r.verdict, Verdict::Unequivalent);
    assert_eq!(r.unmatched.len(), 1);
    assert_eq!(r.unmatched[0].difference, "2*b");
    // Both lists fit one segment, so no construction is blocked and no
    // internal search runs.
    assert_eq!(r.counters.internal_equ_calls, 0);
}

#[test]
fn pipelined_nest_matches_through_internal_peeling() {
    let cfg = SecConfig {
        limit: SegmentLimit::Statements(2),
        impl_limit: Some(SegmentLimit::Statements(5)),
        ..SecConfig::default()
    };
    let r = check(SPEC_TWO_SUMS, IMPL_TWO_SUMS, &cfg);
    assert_eq!(r.verdict, Verdict::Equivalent);
    let pair = |s: &str, i: &str| r.matched.iter().any(|m| m.spec == s && m.implementation == i);
    assert!(pair("tempf_1", "add0"), "{:?}", r.matched);
    assert!(pair("temps_1", "add1"), "{:?}", r.matched);
    assert!(r.counters.internal_equ_calls >= 1);
    assert!(r.counters.cut_vars >= 2);
    assert_eq!(r.counters.confirmation_reruns, 0);
}

#[test]
fn impl_side_peeling_exposes_internal_values() {
    // The impl segment's outputs are combinations of values the spec
    // segment produces directly.
    let spec = "input a; input b; input c; input d; output y; output z; var s1; var s2;
                s1 := a * b; s2 := c * d; y := s1 + s2; z := s1 - s2;";
    let imp = "input a; input b; input c; input d; output y; output z; var i1; var i2; var i3; var i4;
               i1 := a * b; i2 := c * d; i3 := i1 + i2; i4 := i1 - i2; y := i3; z := i4;";
    let cfg = SecConfig {
        limit: SegmentLimit::Statements(2),
        impl_limit: Some(SegmentLimit::Statements(4)),
        ..SecConfig::default()
    };
    let r = check(spec, imp, &cfg);
    assert_eq!(r.verdict, Verdict::Equivalent);
    assert!(r.matched.iter().any(|m| m.spec == "s1" && m.implementation == "i1"));
    assert!(r.counters.peel_rounds >= 1);
}

#[test]
fn verdict_is_independent_of_segmentation() {
    let pairs = [
        (SPEC_TWO_SUMS, IMPL_TWO_SUMS, Verdict::Equivalent),
        (
            SPEC_TWO_SUMS,
            &IMPL_TWO_SUMS.replace("add2 := mul5 + mul6", "add2 := mul5 - mul6") as &str,
            Verdict::Unequivalent,
        ),
    ];
    for (s, i, expected) in pairs {
        for limit in [
            SegmentLimit::Unbounded,
            SegmentLimit::Nodes(40),
            SegmentLimit::Nodes(10),
            SegmentLimit::Nodes(1),
            SegmentLimit::Statements(1),
            SegmentLimit::Statements(3),
        ] {
            let r = check(s, i, &limited(limit));
            assert_eq!(r.verdict, expected, "{limit:?}");
        }
    }
}

#[test]
fn false_negatives_from_cut_points_are_recovered() {
    let spec = "input a; input b; output y; var t; t := a + b; y := t * t;";
    let imp = "input a; input b; output y; var u; u := a + b; y := u * (a + b);";
    let r = check(spec, imp, &limited(SegmentLimit::Statements(1)));
    assert_eq!(r.verdict, Verdict::Equivalent);
    assert_eq!(r.counters.recovered_outputs, 1);
    assert_eq!(r.counters.confirmation_reruns, 1);
}

#[test]
fn vanishing_difference_matches_only_modulo() {
    let spec = "input x; output y; var t; t := 15*x*x*x - 5*x*x + 19*x + 6; y := t * t + x;";
    let imp = "input x; output y; var u; u := 7*x*x*x + 3*x*x + 3*x + 6; y := u * u + x;";
    let z = check(spec, imp, &SecConfig::default());
    assert_eq!(z.verdict, Verdict::Unequivalent);
    let ring = SecConfig {
        ring: Some(RingConfig::new(4).unwrap()),
        limit: SegmentLimit::Statements(1),
        ..SecConfig::default()
    };
    let r = check(spec, imp, &ring);
    assert_eq!(r.verdict, Verdict::Equivalent);
    assert!(r.matched.iter().any(|m| m.spec == "t" && m.implementation == "u"));
    assert_eq!(r.counters.recovered_outputs, 0);
}

#[test]
fn internal_matches_stay_exact_around_non_ring_operators() {
    // t and u agree modulo 16 but not their shifted values.
    let spec = "input x:u4; output y; var t; t := x + 16; y := t >> 4;";
    let imp = "input x:u4; output y; var u; u := x; y := u >> 4;";
    let ring = SecConfig {
        ring: Some(RingConfig::new(4).unwrap()),
        limit: SegmentLimit::Statements(1),
        ..SecConfig::default()
    };
    let r = check(spec, imp, &ring);
    assert_eq!(r.verdict, Verdict::Unequivalent);
}

#[test]
fn word_operators_meet_in_shared_tokens() {
    let spec = "input a; input b; output y; y := (a & b) + (a < b) * 3 + (b ^ a);";
    let imp = "input a; input b; output y; var t; t := b & a; y := t + 3 * (b > a) + (a ^ b);";
    assert_eq!(check(spec, imp, &SecConfig::default()).verdict, Verdict::Equivalent);
}

#[test]
fn bit_selects_of_inputs_are_exact() {
    let spec = "input x:u8; output y; y := x[0] + 2 * x[1] + 4 * x[2];";
    let imp = "input x:u8; output y; y := x[2] * 4 + x[1] * 2 + x[0];";
    assert_eq!(check(spec, imp, &SecConfig::default()).verdict, Verdict::Equivalent);
    let off = "input x:u8; output y; y := x[0] + 2 * x[1] + 4 * x[3];";
    assert_eq!(check(spec, off, &SecConfig::default()).verdict, Verdict::Unequivalent);
}

#[test]
fn output_correspondence_must_be_total() {
    let e = sec_piped(&list("input a; output y; y := a;"), &list("input a; output z; z := a;"), &SecConfig::default());
    assert_eq!(e.unwrap_err(), Error::Correspondence("y".into()));
    let cfg = SecConfig { output_map: Some(vec![("y".into(), "z".into())]), ..SecConfig::default() };
    let r = sec_piped(&list("input a; output y; y := a * 2;"), &list("input a; output z; z := a + a;"), &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Equivalent);
}

#[test]
fn passthrough_outputs_compare_with_inputs() {
    let spec = "inout r[2]; r[1] := r[1] * 2;";
    let imp = "inout r[2]; r[1] := r[1] + r[1]; r[0] := r[0] * 1;";
    assert_eq!(check(spec, imp, &SecConfig::default()).verdict, Verdict::Equivalent);
}

#[test]
fn report_json_is_camel_case_and_versioned() {
    let r = check("input a; output y; y := a + 1;", "input a; output y; y := 1 + a;", &SecConfig::default());
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["schemaVersion"], SCHEMA_VERSION);
    assert_eq!(v["verdict"], "EQUIVALENT");
    assert!(v["counters"]["internalEquCalls"].is_u64());
    assert!(v["counters"]["peakNodeCount"].is_u64());
    assert!(v["elapsedMs"].is_u64());
}

#[test]
fn peeling_keeps_exported_values_that_are_still_read() {
    // In the implementation `z` is an output and also feeds `u`; peeling
    // must not return it to the unprocessed list while its reader stays.
    let spec = "input a; input b; output y; output z; z := a + a + 0; y := b * (b + z + 0) + 1;";
    let imp = "input a; input b; output y; output z; var t; var u; var w; var p;
        t := a + a; z := t + 1; u := b + z; w := u + 0; p := b * w; y := p + 1;";
    let limits = (1..=8).flat_map(|n| [SegmentLimit::Nodes(n), SegmentLimit::Statements(n)]);
    for limit in limits.chain([SegmentLimit::Unbounded]) {
        let r = check(spec, imp, &limited(limit));
        assert_eq!(r.verdict, Verdict::Unequivalent, "{limit:?}");
    }
}

#[test]
fn verdict_is_independent_of_input_order() {
    for (spec, imp, expected) in [
        (SPEC_TWO_SUMS, IMPL_TWO_SUMS, Verdict::Equivalent),
        ("input a; input b; output y; y := a - b;", "input a; input b; output y; y := b + a;", Verdict::Unequivalent),
    ] {
        for input_order in [InputOrder::FirstAppearance, InputOrder::Declaration] {
            let cfg = SecConfig { input_order, limit: SegmentLimit::Nodes(4), ..SecConfig::default() };
            assert_eq!(check(spec, imp, &cfg).verdict, expected, "{input_order:?}");
        }
    }
}
