use std::path::PathBuf;
use std::process::{Command, Output};

fn wqg() -> Command {
    // target/debug/<exe> sits two levels above the test executable.
    let mut path = PathBuf::from(std::env::current_exe().unwrap());
    path.pop();
    path.pop();
    path.push("wqg");
    let mut cmd = Command::new(path);
    cmd.env_remove("WQG_TOL");
    cmd
}

fn run(args: &[&str]) -> Output {
    wqg().args(args).output().expect("wqg runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_spec(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn verify_passes_on_the_z2_preset() {
    let out = run(&["verify", "--preset", "trivial-linking:Z2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("ALL CHECKS PASSED"), "{text}");
    assert!(text.contains("coassociativity"), "{text}");
    assert!(text.ends_with("runtime_ms: 0\n"), "{text}");
}

#[test]
fn every_bundled_preset_verifies() {
    for preset in [
        "trivial-linking:Z2",
        "trivial-linking:Z3",
        "trivial-linking:Z4",
        "trivial-linking:Z2xZ2",
        "cocycle-linking:Z2xZ2:standard",
    ] {
        let out = run(&["verify", "--preset", preset]);
        assert_eq!(out.status.code(), Some(0), "{preset}: {}", stdout(&out));
    }
}

#[test]
fn json_reports_carry_the_schema_and_are_byte_identical() {
    let a = run(&["structure", "--preset", "trivial-linking:Z2", "--json"]);
    let b = run(&["structure", "--preset", "trivial-linking:Z2", "--json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical across runs");
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    assert_eq!(v["runtime_ms"], 0);
    assert!(v["checks"].as_array().unwrap().iter().any(|c| {
        c["name"].as_str().unwrap().contains("pentagon for W")
    }));
    assert_eq!(v["scalars"]["lambda_0.re"], 1.0);
}

#[test]
fn structure_and_regularity_pass_on_a_cyclic_preset() {
    for cmd in ["structure", "regularity"] {
        let out = run(&[cmd, "--preset", "trivial-linking:Z3"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", stdout(&out));
    }
}

#[test]
fn crossed_reports_the_dual_dimension_for_the_trivial_action() {
    let out = run(&["crossed", "--preset", "trivial-linking:Z2", "--action", "trivial"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("dim B = dim Shat"), "{text}");
    assert!(text.contains("dim_B = 8"), "{text}");
}

#[test]
fn crossed_passes_for_the_self_action() {
    let out = run(&["crossed", "--preset", "trivial-linking:Z2", "--action", "self"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn induce_runs_the_round_trip_and_reassembly() {
    let out = run(&["induce", "--preset", "trivial-linking:Z2", "--action", "self-corner"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("roundtrip: pi_1 is multiplicative"), "{text}");
    assert!(text.contains("reassembly: delta_B(1_B) = q_B"), "{text}");
    assert!(text.contains("dim_A2 = 2"), "{text}");
}

#[test]
fn a_spec_file_selects_the_action_and_tolerance() {
    let path = write_spec(
        "wqg_spec_action.json",
        r#"{"schema":1,"kind":"action","preset":"trivial-linking:Z2","action":"self","tolerance":1e-8}"#,
    );
    let out = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("(tol 1e-8)"), "{text}");
    assert!(text.contains("action: continuity"), "{text}");
}

#[test]
fn an_inline_group_table_builds_a_trivial_linking_groupoid() {
    let path = write_spec(
        "wqg_spec_inline.json",
        r#"{"schema":1,"kind":"groupoid","group":{"table":[[0,1],[1,0]],"presentation":"group-algebra"}}"#,
    );
    let out = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn a_seeded_coassociativity_defect_is_detected() {
    let path = write_spec(
        "wqg_spec_coassoc.json",
        r#"{"schema":1,"kind":"groupoid","preset":"trivial-linking:Z2","perturb":{"target":"coassociativity","magnitude":0.1}}"#,
    );
    let out = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("[FAIL] groupoid: coassociativity"), "{text}");
}

#[test]
fn a_seeded_cocycle_defect_is_detected() {
    let path = write_spec(
        "wqg_spec_cocycle.json",
        r#"{"schema":1,"kind":"linking","preset":"cocycle-linking:Z2xZ2:standard","perturb":{"target":"cocycle","magnitude":0.1}}"#,
    );
    let out = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("[FAIL] cocycle identity"), "{text}");
}

#[test]
fn a_seeded_continuity_defect_is_detected() {
    let path = write_spec(
        "wqg_spec_cont.json",
        r#"{"schema":1,"kind":"action","preset":"trivial-linking:Z2","action":"self","perturb":{"target":"continuity","magnitude":0.1}}"#,
    );
    let out = run(&["verify", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(
        text.contains("[FAIL] action: continuity [delta_A(A)(1 x S)] = q(A x S)"),
        "{text}"
    );
}

#[test]
fn malformed_input_exits_with_status_two() {
    // unknown field
    let path = write_spec(
        "wqg_spec_bad.json",
        r#"{"schema":1,"kind":"groupoid","preset":"trivial-linking:Z2","bogus":3}"#,
    );
    assert_eq!(run(&["verify", "--spec", path.to_str().unwrap()]).status.code(), Some(2));
    // unknown preset
    assert_eq!(run(&["verify", "--preset", "no-such"]).status.code(), Some(2));
    // wrong schema version
    let path = write_spec(
        "wqg_spec_schema.json",
        r#"{"schema":2,"kind":"groupoid","preset":"trivial-linking:Z2"}"#,
    );
    assert_eq!(run(&["verify", "--spec", path.to_str().unwrap()]).status.code(), Some(2));
    // both preset and inline group
    let path = write_spec(
        "wqg_spec_both.json",
        r#"{"schema":1,"kind":"groupoid","preset":"trivial-linking:Z2","group":{"table":[[0]],"presentation":"functions"}}"#,
    );
    assert_eq!(run(&["verify", "--spec", path.to_str().unwrap()]).status.code(), Some(2));
    // tolerance out of range
    assert_eq!(
        run(&["verify", "--preset", "trivial-linking:Z2", "--tol", "5.0"]).status.code(),
        Some(2)
    );
}

#[test]
fn the_tolerance_env_var_is_honoured_and_the_flag_wins() {
    let out = wqg()
        .args(["verify", "--preset", "trivial-linking:Z2"])
        .env("WQG_TOL", "1e-7")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("(tol 1e-7)"), "{}", stdout(&out));
    let out = wqg()
        .args(["verify", "--preset", "trivial-linking:Z2", "--tol", "1e-6"])
        .env("WQG_TOL", "1e-7")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("(tol 1e-6)"), "{}", stdout(&out));
}

#[test]
fn reports_can_be_written_to_a_file() {
    let path = std::env::temp_dir().join("wqg_report.json");
    let out = run(&[
        "verify",
        "--preset",
        "trivial-linking:Z2",
        "--json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "verify");
}
