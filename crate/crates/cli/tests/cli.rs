use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairdiv_core::generate::{self, Family, FamilyParams, Generated};
use fairdiv_core::hardness::{reduce_set_splitting, SetSplittingInstance};
use fairdiv_core::rational;
use fairdiv_core::{IndivisibleInstance, Valuation};
use serde_json::{json, Value};
use tempfile::TempDir;

fn fairdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairdiv")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn additive_file(rows: &[&[i64]]) -> Value {
    json!({
        "version": 1,
        "kind": "indivisible",
        "agents": rows.len(),
        "items": rows.first().map_or(0, |r| r.len()),
        "valuations": rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn instance_file(inst: &IndivisibleInstance) -> Value {
    let valuations: Vec<Value> = inst
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::Additive(values) => json!(values.iter().map(rational::format).collect::<Vec<_>>()),
            Valuation::Table(t) => json!({ "table": t.values().iter().map(rational::format).collect::<Vec<_>>() }),
        })
        .collect();
    json!({
        "version": 1,
        "kind": "indivisible",
        "agents": inst.agents(),
        "items": inst.items(),
        "valuations": valuations,
    })
}

fn six_chores() -> Value {
    additive_file(&[&[-1, -4, -2, -3, 0, -1], &[-2, -1, -2, -2, -3, -1], &[-1, -3, -1, -1, -3, -10]])
}

fn bundles(v: &Value) -> Vec<Vec<usize>> {
    serde_json::from_value(v["allocation"]["bundles"].clone()).unwrap()
}

#[test]
fn ttece_on_six_chores_with_certificate() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "six.json", &six_chores());
    let out = fairdiv(&["solve", "--algo", "ttece", s(&path)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(bundles(&v), vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
    assert_eq!(v["claim"], "EF1");
    assert_eq!(v["certificate"]["notion"], "EF1");
    assert_eq!(v["certificate"]["holds"], true);
    assert_eq!(v["certificate"]["pairs"].as_array().unwrap().len(), 6);
}

#[test]
fn naive_with_item_order_makes_no_claim() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "six.json", &six_chores());
    let out = fairdiv(&["solve", "--algo", "naive-ece", "--item-order", "5,4,3,2,1,0", s(&path)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert!(v.get("claim").is_none());
    let mut all: Vec<usize> = bundles(&v).concat();
    all.sort_unstable();
    assert_eq!(all, (0..6).collect::<Vec<_>>());
}

#[test]
fn arbitrary_cycle_policy_is_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "six.json", &six_chores());
    let run = |seed: &str| fairdiv(&["solve", "--algo", "naive-ece", "--cycle-policy", "arbitrary", "--seed", seed, s(&path)]);
    let a = run("9");
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, run("9").stdout);
}

#[test]
fn brute_ef_reports_unsplittable_reduction() {
    let triangle = SetSplittingInstance::new(
        3,
        vec![BTreeSet::from([0, 1]), BTreeSet::from([1, 2]), BTreeSet::from([0, 2])],
    )
    .unwrap();
    assert!(!triangle.is_splittable());
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "reduced.json", &instance_file(&reduce_set_splitting(&triangle)));
    let out = fairdiv(&["solve", "--algo", "brute-ef", s(&path)]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["status"], "no EF allocation");
    assert!(v["allocation"].is_null());

    let out = fairdiv(&["solve", "--algo", "brute-ef1", s(&path)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["certificate"]["holds"], true);
}

#[test]
fn brute_force_budget_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "six.json", &six_chores());
    let out = fairdiv(&["solve", "--algo", "brute-ef", "--budget", "10", s(&path)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn round_robin_on_empty_instance() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "empty.json", &json!({"version": 1, "kind": "indivisible", "agents": 2, "items": 0, "valuations": [[], []]}));
    let out = fairdiv(&["solve", "--algo", "round-robin", s(&path)]);
    assert_eq!(code(&out), 0);
    assert_eq!(bundles(&stdout_json(&out)), vec![Vec::<usize>::new(), vec![]]);
}

#[test]
fn check_cycle_resolution_outcomes() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "six.json", &six_chores());
    let y = write(&dir, "y.json", &json!({"bundles": [[0, 3], [2, 5], [1, 4]]}));
    let x = write(&dir, "x.json", &json!({"bundles": [[2, 5], [1, 4], [0, 3]]}));

    let out = fairdiv(&["check", s(&inst), s(&y), "--notion", "ef1"]);
    assert_eq!(code(&out), 3);
    let cert = stdout_json(&out);
    let bad: BTreeSet<(u64, u64)> = cert["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| !matches!(p["status"].as_str(), Some("no-envy" | "ef1-witness")))
        .map(|p| {
            let (i, k) = (p["envier"].as_u64().unwrap(), p["envied"].as_u64().unwrap());
            (i.min(k), i.max(k))
        })
        .collect();
    assert_eq!(bad, BTreeSet::from([(0, 2)]));

    let out = fairdiv(&["check", s(&inst), s(&x), "--notion", "ef1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn check_empty_allocation_is_ef() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "empty.json", &json!({"version": 1, "kind": "indivisible", "agents": 2, "items": 0, "valuations": [[], []]}));
    let alloc = write(&dir, "alloc.json", &json!({"bundles": [[], []]}));
    let out = fairdiv(&["check", s(&inst), s(&alloc), "--notion", "ef"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["holds"], true);
}

#[test]
fn inconsistent_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "six.json", &six_chores());
    let missing = write(&dir, "missing.json", &json!({"bundles": [[0, 3], [1, 4], [2]]}));
    assert_eq!(code(&fairdiv(&["check", s(&inst), s(&missing)])), 1);
    let twice = write(&dir, "twice.json", &json!({"bundles": [[0, 3], [1, 3, 4], [2, 5]]}));
    assert_eq!(code(&fairdiv(&["check", s(&inst), s(&twice)])), 1);
    assert_eq!(code(&fairdiv(&["solve", "--algo", "efm-badcake", s(&inst)])), 1);
    assert_eq!(code(&fairdiv(&["solve", "--algo", "ttece", "--item-order", "0,1,2", s(&inst)])), 1);
    let bad = write(&dir, "bad.json", &json!({"version": 1, "kind": "indivisible", "agents": 1, "items": 1, "valuations": [["1/0"]]}));
    assert_eq!(code(&fairdiv(&["solve", "--algo", "ttece", s(&bad)])), 1);
}

#[test]
fn generate_is_deterministic_and_round_trips() {
    let dir = TempDir::new().unwrap();
    for family in Family::ALL {
        let gen = |seed: &str| fairdiv(&["generate", "--family", family.name(), "--seed", seed]);
        let a = gen("7");
        assert_eq!(code(&a), 0, "{}: {}", family.name(), String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, gen("7").stdout, "{}", family.name());

        let file: Value = serde_json::from_slice(&a.stdout).unwrap();
        let expected = match generate::generate(family, 7, &FamilyParams::default()).unwrap() {
            Generated::Indivisible(i) => i,
            Generated::Mixed(m) => m.indivisible().clone(),
        };
        assert_eq!(file["valuations"], instance_file(&expected)["valuations"], "{}", family.name());

        let path = dir.path().join(format!("{}.json", family.name()));
        fs::write(&path, &a.stdout).unwrap();
        let out = fairdiv(&["generate", "--family", family.name(), "--seed", "7", "--output", s(&path)]);
        assert_eq!(code(&out), 0);
        let parsed: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parsed, file);
        let algo = match family {
            Family::MixedBadCake => "efm-badcake",
            Family::MixedCake => "efm-cake-phase",
            Family::DoublyMonotone => "doubly-monotone",
            _ => "ttece",
        };
        let out = fairdiv(&["solve", "--algo", algo, s(&path)]);
        assert_eq!(code(&out), 0, "{} via {algo}: {}", family.name(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn set_splitting_family_matches_reduction() {
    for seed in 0..5u64 {
        let out = fairdiv(&["generate", "--family", "set-splitting-reduced", "--seed", &seed.to_string(), "--universe", "3"]);
        assert_eq!(code(&out), 0);
        let mut rng = generate::rng(seed);
        let ss = generate::set_splitting(&mut rng, 3, FamilyParams::default().members).unwrap();
        assert_eq!(stdout_json(&out), instance_file(&reduce_set_splitting(&ss)));
    }
}

#[test]
fn binary_chores_family_values() {
    let out = fairdiv(&["generate", "--family", "binary-chores", "--seed", "3", "--items", "8"]);
    let v = stdout_json(&out);
    for row in v["valuations"].as_array().unwrap() {
        for x in row.as_array().unwrap() {
            assert!(x == "0" || x == "-1", "{x}");
        }
    }
}

#[test]
fn unknown_family_is_an_input_error() {
    assert_eq!(code(&fairdiv(&["generate", "--family", "nope"])), 1);
}

#[test]
fn dot_and_trace_outputs_are_stable() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "six.json", &six_chores());
    let run = |tag: &str| {
        let dot = dir.path().join(format!("{tag}.dot"));
        let trace = dir.path().join(format!("{tag}.trace"));
        let out = fairdiv(&["solve", "--algo", "ttece", "--dot", s(&dot), "--trace", s(&trace), s(&inst)]);
        assert_eq!(code(&out), 0);
        (fs::read(dot).unwrap(), fs::read_to_string(trace).unwrap())
    };
    let (dot_a, trace_a) = run("a");
    let (dot_b, trace_b) = run("b");
    assert_eq!(dot_a, dot_b);
    assert_eq!(trace_a, trace_b);
    let dot = String::from_utf8(dot_a).unwrap();
    assert!(dot.starts_with("digraph envy {"));
    for edge in ["a1 -> a3;", "a2 -> a3;", "a3 -> a1;", "a3 -> a2;"] {
        assert!(dot.contains(edge), "{dot}");
    }
    assert_eq!(trace_a.lines().count(), 6);
}

#[test]
fn cake_phase_refuse_policy() {
    let dir = TempDir::new().unwrap();
    let goods = json!({
        "version": 1, "kind": "mixed", "agents": 2, "items": 2,
        "valuations": [["1", "1"], ["1", "1"]],
        "divisible": "cake",
        "densities": [{"breakpoints": ["0", "1"], "levels": ["1"]}, {"breakpoints": ["0", "1"], "levels": ["1"]}],
    });
    let path = write(&dir, "goods.json", &goods);
    let out = fairdiv(&["solve", "--algo", "efm-cake-phase", "--start", "round-robin", s(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["claim"], "EFM");
    assert_eq!(v["certificate"]["holds"], true);
    assert!(fairdiv(&["solve", "--algo", "ttece", "--cycle-policy", "refuse", s(&path)]).status.code() == Some(1));
}
