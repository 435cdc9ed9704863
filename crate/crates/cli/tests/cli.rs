use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hedcheck::dfl::{sym_sim_source, SymSimConfig};
use hedcheck::modular::RingConfig;
use hedcheck::pipeline::{corpus, oracle_check};
use hedcheck::sec::Verdict;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn file(name: &str) -> String {
    corpus_dir().join(name).display().to_string()
}

fn hedcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hedcheck")).args(args).env_remove("HEDCHECK_MAX_NODES").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn pipelined_fft_is_equivalent() {
    let out = hedcheck(&["check", &file("fft4.dfl"), &file("fft4_pipe.dfl"), "--width", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().next(), Some("EQUIVALENT"));
}

#[test]
fn mutated_fft_is_unequivalent() {
    let out = hedcheck(&["check", &file("fft4.dfl"), &file("fft4_mut.dfl"), "--width", "4"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().next(), Some("UNEQUIVALENT"));
}

#[test]
fn missing_files_are_reported() {
    let out = hedcheck(&["check", "missing.dfl", "x.dfl"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("missing.dfl"), "{}", stderr(&out));
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    assert_eq!(code(&hedcheck(&["check", &file("fft4.dfl")])), 2);
    assert_eq!(code(&hedcheck(&["check", &file("fft4.dfl"), &file("fft4.dfl"), "--width", "0"])), 2);
    assert_eq!(code(&hedcheck(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dfl");
    std::fs::write(&bad, "input a; output y; y := a +;").unwrap();
    let out = hedcheck(&["check", bad.to_str().unwrap(), &file("fft4.dfl")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("syntax error"), "{}", stderr(&out));
}

#[test]
fn exit_codes_follow_the_corpus_verdicts() {
    for pair in corpus::manifest().pairs {
        let mut args = vec!["check".to_string(), file(&pair.spec), file(&pair.implementation)];
        if let Some(w) = pair.width {
            args.extend(["--width".to_string(), w.to_string()]);
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let expected = match pair.expected {
            Verdict::Equivalent => 0,
            Verdict::Unequivalent => 1,
        };
        assert_eq!(code(&hedcheck(&args)), expected, "{args:?}");
    }
}

#[test]
fn pipelined_and_mutated_sources_check_against_their_origin() {
    let dir = tempfile::tempdir().unwrap();
    let ring = RingConfig::new(4).unwrap();
    for name in corpus::manifest().programs {
        let spec = file(&name);
        let piped = dir.path().join(format!("pipe_{name}"));
        let out = hedcheck(&["pipeline", &spec]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        std::fs::write(&piped, stdout(&out)).unwrap();
        let out = hedcheck(&["check", &spec, piped.to_str().unwrap(), "--width", "4"]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));

        let mutated = dir.path().join(format!("mut_{name}"));
        let out = hedcheck(&["mutate", piped.to_str().unwrap(), "--seed", "5"]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        std::fs::write(&mutated, stdout(&out)).unwrap();
        let lists: Vec<_> = [&spec, &mutated.display().to_string()]
            .iter()
            .map(|p| sym_sim_source(&std::fs::read_to_string(p).unwrap(), &SymSimConfig::default()).unwrap())
            .collect();
        let expected = if oracle_check(&lists[0], &lists[1], Some(&ring)).unwrap().is_empty() { 0 } else { 1 };
        let out = hedcheck(&["check", &spec, mutated.to_str().unwrap(), "--width", "4"]);
        assert_eq!(code(&out), expected, "{name}: {}", stdout(&out));
    }
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |p: &Path| {
        let text = std::fs::read_to_string(p).unwrap();
        text.lines().filter(|l| !l.trim_start().starts_with("\"elapsedMs\"")).collect::<Vec<_>>().join("\n")
    };
    for imp in ["fft4_pipe.dfl", "fft4_mut.dfl"] {
        let mut reports = Vec::new();
        for k in 0..3 {
            let path = dir.path().join(format!("{imp}.{k}.json"));
            hedcheck(&[
                "check",
                &file("fft4.dfl"),
                &file(imp),
                "--width",
                "4",
                "--max-nodes",
                "12",
                "--report",
                path.to_str().unwrap(),
            ]);
            reports.push(strip(&path));
        }
        assert!(reports.windows(2).all(|w| w[0] == w[1]), "{imp}");
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{imp}.0.json"))).unwrap()).unwrap();
        assert_eq!(json["schemaVersion"], 1);
        assert!(json["counters"]["internalEquCalls"].is_u64());
        assert!(json["elapsedMs"].is_u64());
    }
}

#[test]
fn node_budget_comes_from_the_environment() {
    let run = |budget: &str| {
        Command::new(env!("CARGO_BIN_EXE_hedcheck"))
            .args(["check", &file("fft4.dfl"), &file("fft4_pipe.dfl"), "--width", "4"])
            .env("HEDCHECK_MAX_NODES", budget)
            .output()
            .unwrap()
    };
    let tight = run("1");
    assert_eq!(code(&tight), 0);
    // A budget of one node forces one statement per segment.
    let segments = |o: &Output| stderr(o).split("segments ").nth(1).unwrap().split(',').next().unwrap().to_string();
    assert_ne!(segments(&tight), segments(&hedcheck(&["check", &file("fft4.dfl"), &file("fft4_pipe.dfl")])));
    assert_eq!(code(&run("0")), 2);
}

#[test]
fn outputs_can_be_paired_by_a_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.dfl");
    let imp = dir.path().join("impl.dfl");
    let map = dir.path().join("map.txt");
    std::fs::write(&spec, "input a; input b; output s; output d; s := a + b; d := a - b;").unwrap();
    std::fs::write(&imp, "input a; input b; output sum; output diff; sum := b + a; diff := a + (-1) * b;").unwrap();
    std::fs::write(&map, "# spec impl\ns sum\nd, diff\n").unwrap();
    let (s, i, m) = (spec.to_str().unwrap(), imp.to_str().unwrap(), map.to_str().unwrap());
    assert_eq!(code(&hedcheck(&["check", s, i])), 2);
    assert_eq!(code(&hedcheck(&["check", s, i, "--outputs-map", m])), 0);
    assert_eq!(code(&hedcheck(&["check", s, i, "--outputs-map", m, "--order", "file"])), 0);
    std::fs::write(&map, "s diff\nd sum\n").unwrap();
    assert_eq!(code(&hedcheck(&["check", s, i, "--outputs-map", m])), 1);
}

#[test]
fn canonical_forms_expose_vanishing_differences() {
    let canon = |name: &str, width: Option<&str>| {
        let mut args = vec!["canon", name, "--output", "f"];
        args.extend(width.map(|w| ["--width", w]).into_iter().flatten());
        let out = hedcheck(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        stdout(&out)
    };
    let (spec, imp) = (file("vanish_spec.dfl"), file("vanish_impl.dfl"));
    assert_eq!(canon(&spec, Some("4")), canon(&imp, Some("4")));
    assert_ne!(canon(&spec, None), canon(&imp, None));
    assert_ne!(canon(&spec, Some("5")), canon(&imp, Some("5")));
    assert_eq!(code(&hedcheck(&["canon", &spec, "--output", "nope"])), 2);
}

#[test]
fn simulation_prints_text_and_json() {
    let text = stdout(&hedcheck(&["simulate", &file("horner.dfl")]));
    assert!(text.contains(":="), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&hedcheck(&["simulate", &file("horner.dfl"), "--json"]))).unwrap();
    assert!(json["stmts"].as_array().is_some_and(|s| !s.is_empty()), "{json}");
    let out = hedcheck(&["simulate", &file("fft4.dfl"), "--unroll-limit", "3"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unrolling"), "{}", stderr(&out));
}

#[test]
fn infeasible_intervals_name_the_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let lm = dir.path().join("lm.json");
    std::fs::write(&lm, r#"{"addLatency": 1, "mulLatency": 2, "adders": 2, "multipliers": 5}"#).unwrap();
    let out = hedcheck(&["pipeline", &file("fft4.dfl"), "--ii", "1", "--latency", lm.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("minimum feasible"), "{}", stderr(&out));
    let sched = dir.path().join("s.json");
    let out = hedcheck(&[
        "pipeline",
        &file("fft4.dfl"),
        "--latency",
        lm.to_str().unwrap(),
        "--schedule",
        sched.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sched).unwrap()).unwrap();
    assert!(s["ii"].as_u64().unwrap() > 1);
}

#[test]
fn mutation_descriptors_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.json");
    let out = hedcheck(&["mutate", &file("fft4_pipe.dfl"), "--seed", "0", "--descriptor", d.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&d).unwrap()).unwrap();
    assert!(json["kind"].is_string() && json["before"] != json["after"], "{json}");
    assert_eq!(stdout(&out), stdout(&hedcheck(&["mutate", &file("fft4_pipe.dfl"), "--seed", "0"])));
}
