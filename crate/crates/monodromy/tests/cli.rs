//! End-to-end runs of the `monodromy` binary on the bundled fixtures.

use monodromy::json::{ConnectionJson, LoopModuleJson, QTermJson, SystemJson};
use monodromy_core::ratmat::RationalMatrix;
use monodromy_core::repmodel::LoopModule;
use monodromy_core::{c64, C64};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const HBAR: f64 = 0.3;
const S_CLOSED_FORM_TOL: f64 = 1e-8;
const HW_EIGENVALUE_TOL: f64 = 1e-6;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monodromy")).args(args).output().expect("binary runs")
}

fn run_path(args: &[&str], input: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.push(input.to_str().expect("utf-8 path"));
    run(&all)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not a JSON report ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn failed_check(r: &Value) -> &str {
    r["failure"]["check"].as_str().unwrap_or("")
}

fn read<T: serde::de::DeserializeOwned>(p: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn forward_scalar_system_matches_sine_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.json");
    let out = run_path(&["forward", "--out", out_path.to_str().unwrap()], &fixture("system_scalar.json"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let c: ConnectionJson = read(&out_path);
    let s = RationalMatrix::try_from(&c.s).unwrap();
    let (a, b) = (c64(0.15, 0.05), c64(0.62, -0.1));
    let pi_i = C64::new(0.0, std::f64::consts::PI);
    for &z in &[c64(0.3, 0.8), c64(-2.0, 0.4), c64(0.05, -0.02)] {
        let want = (pi_i * (b - a)).exp() * (z - (pi_i * 2.0 * a).exp()) / (z - (pi_i * 2.0 * b).exp());
        let got = s.eval(z).unwrap()[(0, 0)];
        assert!((got - want).norm() < S_CLOSED_FORM_TOL * want.norm().max(1.0), "S({z}) = {got}, want {want}");
    }
}

#[test]
fn forward_identity_system_is_trivial() {
    let out = run_path(&["forward"], &fixture("system_identity.json"));
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let c: ConnectionJson = serde_json::from_value(r["output"].clone()).unwrap();
    let s = RationalMatrix::try_from(&c.s).unwrap();
    let v = s.eval(c64(0.7, -0.3)).unwrap();
    assert!(monodromy_core::linalg::max_diff(&v, &monodromy_core::linalg::identity(2)) < 1e-12);
}

#[test]
fn resonant_system_exits_with_named_check() {
    let out = run_path(&["forward"], &fixture("system_resonant.json"));
    assert_eq!(code(&out), 3);
    assert_eq!(failed_check(&report(&out)), "ResonantSystem");
}

#[test]
fn inverse_recovers_the_scalar_system() {
    let dir = tempfile::tempdir().unwrap();
    let s_path = dir.path().join("s.json");
    let a_path = dir.path().join("a.json");
    assert_eq!(code(&run_path(&["forward", "--out", s_path.to_str().unwrap()], &fixture("system_scalar.json"))), 0);
    let out = run_path(&["inverse", "--hbar", "0.3,0", "--out", a_path.to_str().unwrap()], &s_path);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let sys: SystemJson = read(&a_path);
    let a = RationalMatrix::try_from(&sys.a).unwrap();
    let (za, pb) = (c64(0.15, 0.05), c64(0.62, -0.1));
    for &u in &[c64(1.3, 0.7), c64(-0.4, -1.1)] {
        let want = (u - za) / (u - pb);
        assert!((a.eval(u).unwrap()[(0, 0)] - want).norm() < 1e-7);
    }
    let missing_hbar = run_path(&["inverse"], &s_path);
    assert_eq!(code(&missing_hbar), 2);
}

#[test]
fn functor_f_on_evaluation_module() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fv.json");
    let out = run_path(&["functor", "F", "--out", out_path.to_str().unwrap()], &fixture("v2_a0.1.json"));
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    let relations: Vec<&str> = r["relations"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(relations.contains(&"QL5"));
    assert!(r["contour_metadata"]["circles"].as_u64().unwrap() >= 1);
    let w = LoopModule::try_from(&read::<LoopModuleJson>(&out_path)).unwrap();
    let q = (C64::new(0.0, std::f64::consts::PI * HBAR)).exp();
    let alpha = (C64::new(0.0, 2.0 * std::f64::consts::PI * 0.1)).exp();
    assert!((w.q - q).norm() < 1e-14);
    let z = c64(0.4, 1.7);
    let want = (q * q * z - alpha) / (q * (z - alpha));
    assert!((w.psi[&(0, 0)].eval(z).unwrap()[(0, 0)] - want).norm() < HW_EIGENVALUE_TOL);
}

#[test]
fn functor_g_inverts_f_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let fv = dir.path().join("fv.json");
    let gv = dir.path().join("gv.json");
    assert_eq!(code(&run_path(&["functor", "F", "--out", fv.to_str().unwrap()], &fixture("v2_a0.1.json"))), 0);
    let out = run_path(&["functor", "G", "--out", gv.to_str().unwrap()], &fv);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(report(&out)["status"], "pass");
    let back = monodromy_core::repmodel::WeightModule::try_from(&read::<monodromy::json::WeightModuleJson>(&gv)).unwrap();
    let orig = monodromy_core::repmodel::sl2_eval_module(2, c64(0.1, 0.0), c64(HBAR, 0.0)).unwrap();
    let u = c64(0.9, 0.6);
    for (k, m) in &orig.xi {
        let d = monodromy_core::linalg::max_diff(&m.eval(u).unwrap(), &back.xi[k].eval(u).unwrap());
        assert!(d < 1e-6, "xi block {k:?} off by {d:e}");
    }
    let out = run_path(&["functor", "F"], &fixture("v3_a0.2.json"));
    assert_eq!(code(&out), 0);
}

#[test]
fn functor_roundtrip_and_shift_pass() {
    let out = run_path(&["functor", "roundtrip"], &fixture("v2_a0.1.json"));
    assert_eq!(code(&out), 0);
    assert!(report(&out)["checks"][0]["value"].as_f64().unwrap() < 1e-6);
    let out = run_path(&["functor", "roundtrip"], &fixture("sum_v2_a0.1_v2_a0.25.json"));
    assert_eq!(code(&out), 0);
    let out = run_path(&["functor", "roundtrip"], &fixture("loop_alpha_0.9.json"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = run_path(&["functor", "shift", "--by", "0.05,0"], &fixture("v2_a0.1.json"));
    assert_eq!(code(&out), 0);
    let out = run_path(&["functor", "shift"], &fixture("v2_a0.1.json"));
    assert_eq!(code(&out), 2);
}

#[test]
fn congruent_fixture_is_rejected_by_the_gate() {
    let out = run_path(&["functor", "F"], &fixture("congruent_v2_a0.1_v2_a1.1.json"));
    assert_eq!(code(&out), 3);
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert_eq!(failed_check(&r), "NonCongruentViolation");
}

fn character(r: &Value) -> Vec<QTermJson> {
    serde_json::from_value(r["output"].clone()).unwrap()
}

#[test]
fn qchar_diagram_commutes() {
    let out = run_path(&["qchar", "--check-diagram"], &fixture("v2_a0.2.json"));
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let chi = character(&r);
    assert_eq!(chi.len(), 2);
    let locations: Vec<f64> = chi.iter().map(|t| t.monomial[0].location.re).collect();
    assert!(locations.iter().any(|x| (x - 0.2).abs() < 1e-9));
    assert!(locations.iter().any(|x| (x - 0.5).abs() < 1e-9));
    let diagram = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "diagram").unwrap();
    assert_eq!(diagram["passed"], true);
}

#[test]
fn qchar_of_empty_module_is_empty() {
    let out = run_path(&["qchar"], &fixture("empty.json"));
    assert_eq!(code(&out), 0);
    assert!(character(&report(&out)).is_empty());
}

#[test]
fn qchar_of_sum_is_union() {
    let sum = character(&report(&run_path(&["qchar", "--check-diagram"], &fixture("sum_v2_a0.2_v2_a0.35.json"))));
    let expected: Value = read(&fixture("expected.json"));
    let mut parts: Vec<QTermJson> = serde_json::from_value(expected["v2_a0.2"]["qchar_yangian"].clone()).unwrap();
    let other = run_path(&["qchar"], &fixture("sum_v2_a0.2_v2_a0.35.json"));
    assert_eq!(code(&other), 0);
    let v035 = monodromy_core::repmodel::sl2_eval_module(2, c64(0.35, 0.0), c64(HBAR, 0.0)).unwrap();
    parts.extend(monodromy::json::qchar_to_json(&monodromy_core::repmodel::qchar_yangian(&v035).unwrap()));
    assert_eq!(sum.len(), parts.len());
    for t in &parts {
        let found = sum.iter().any(|s| {
            s.mu == t.mu
                && s.mult == t.mult
                && s.monomial.len() == t.monomial.len()
                && s.monomial.iter().zip(&t.monomial).all(|(a, b)| {
                    a.exp == b.exp && (C64::from(a.location) - C64::from(b.location)).norm() < 1e-9
                })
        });
        assert!(found, "term {t:?} missing from the sum's character");
    }
}

#[test]
fn plot_marks_poles() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("p.svg");
    let out = run_path(&["plot", "--out", svg_path.to_str().unwrap()], &fixture("system_three_poles.json"));
    assert_eq!(code(&out), 0);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg"));
    assert_eq!(svg.matches(r#"class="pole""#).count(), 3);
    let out = run_path(&["plot"], &fixture("empty.json"));
    assert_eq!(code(&out), 0);
    let empty = String::from_utf8(out.stdout).unwrap();
    assert!(empty.contains("<svg"));
    assert_eq!(empty.matches(r#"r="3.5""#).count(), 0);
    let out = run_path(&["plot"], &fixture("v2_a0.1.json"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().matches(r#"class="sigma""#).count(), 3);
}

#[test]
fn reports_are_byte_identical_for_a_fixed_seed() {
    let args = ["functor", "F", "--seed", "11"];
    let a = run_path(&args, &fixture("sum_v2_a0.1_v2_a0.25.json"));
    let b = run_path(&args, &fixture("sum_v2_a0.1_v2_a0.25.json"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let threaded = Command::new(env!("CARGO_BIN_EXE_monodromy"))
        .args(args)
        .arg(fixture("sum_v2_a0.1_v2_a0.25.json"))
        .env("MONODROMY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, threaded.stdout);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run_path(&["forward"], &bad)), 2);
    assert_eq!(code(&run_path(&["forward"], &dir.path().join("missing.json"))), 2);
    assert_eq!(code(&run_path(&["functor", "F"], &fixture("system_scalar.json"))), 2);
    assert_eq!(code(&run(&["forward", "--hbar", "x,y", "a.json"])), 2);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_monodromy"))
        .args(["qchar"])
        .arg(fixture("empty.json"))
        .env("MONODROMY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad_threads), 2);
}

#[test]
fn custom_branch_file_is_honoured() {
    let out = run_path(&["functor", "roundtrip", "--branch", fixture("branch_left.json").to_str().unwrap()], &fixture("v2_a0.1.json"));
    assert_eq!(code(&out), 0);
    let out = run_path(&["functor", "roundtrip", "--format", "table"], &fixture("v2_a0.1.json"));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("functor roundtrip PASS"));
}

#[test]
fn bootstrap_reproduces_the_bundled_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["bootstrap", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let files = report(&out)["output"]["files"].as_array().unwrap().len();
    assert!(files >= 10);
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name();
        let fresh = std::fs::read(dir.path().join(&name)).unwrap_or_else(|_| panic!("{name:?} not regenerated"));
        assert_eq!(fresh, std::fs::read(entry.path()).unwrap(), "{name:?} differs from its regenerated copy");
    }
}
