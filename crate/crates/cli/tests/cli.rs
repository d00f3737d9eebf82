use std::process::Command;

use gradgauge_cli::invoke;

fn model(name: &str) -> String {
    format!("{}/../../models/{name}.gg", env!("CARGO_MANIFEST_DIR"))
}

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gradgauge")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn status_of(stdout: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(stdout).unwrap();
    v["status"].as_str().unwrap().to_string()
}

#[test]
fn binary_exit_codes() {
    let (code, out, _) = bin(&["check", "poisson", &model("r4_twisted")]);
    assert_eq!((code, status_of(&out).as_str()), (0, "pass"));
    let (code, out, _) = bin(&["check", "poisson", &model("failing_r3")]);
    assert_eq!((code, status_of(&out).as_str()), (1, "fail"));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = std::env::temp_dir().join(format!("gradgauge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.gg");
    std::fs::write(&bad, "manifold M dim 2 coords x1 x2;\nbivector P { (1,1): 1 };\n").unwrap();
    let (code, out, err) = bin(&["check", "poisson", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(err.trim_end(), format!("{}:2:14: diagonal entry violates antisymmetry", bad.display()));
    let empty = dir.join("empty.gg");
    std::fs::write(&empty, "").unwrap();
    let inv = invoke(["gradgauge", "check", "poisson", empty.to_str().unwrap()]);
    assert_eq!(inv.code, 2);
    assert!(inv.stderr.contains("missing manifold declaration"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["check", "dirac"],
        vec!["symmetries", "--degree", "2", "--algebra", "gtilde"],
        vec!["oracle", "--samples", "7", "--seed", "11"],
    ] {
        let mut a = args.clone();
        let m = model("r4_twisted");
        a.push(&m);
        let first = bin(&a);
        assert_eq!(first, bin(&a), "{args:?}");
        assert_eq!(first.0, 0, "{}", first.1);
    }
}

#[test]
fn timing_is_opt_in() {
    let m = model("symplectic_r2");
    let plain = invoke(["gradgauge", "check", "poisson", &m]);
    assert!(!plain.stdout.contains("timing_ms"));
    let timed = invoke(["gradgauge", "--timing", "check", "poisson", &m]);
    assert!(timed.stdout.contains("timing_ms"));
}

#[test]
fn gauge_emits_to_file() {
    let dir = std::env::temp_dir().join(format!("gradgauge-emit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("psm.tex");
    let m = model("symplectic_r2");
    let inv = invoke(["gradgauge", "gauge", "--emit", "latex", "--output", file.to_str().unwrap(), &m]);
    assert_eq!(inv.code, 0, "{}", inv.stderr);
    assert_eq!(status_of(&inv.stdout), "unique");
    let tex = std::fs::read_to_string(&file).unwrap();
    assert!(tex.starts_with("S = \\int_{\\Sigma}"));
    assert!(tex.contains("A_1 \\wedge d X^1"));
    let direct = invoke(["gradgauge", "gauge", "--emit", "latex", &m]);
    assert_eq!(direct.stdout, tex);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_format_is_a_usage_error() {
    let inv = invoke(["gradgauge", "gauge", "--emit", "pdf", &model("symplectic_r2")]);
    assert_eq!(inv.code, 2);
}

#[test]
fn command_needing_missing_declaration_is_an_error() {
    let inv = invoke(["gradgauge", "check", "poisson", &model("dsm_r2")]);
    assert_eq!(inv.code, 1);
    assert_eq!(status_of(&inv.stdout), "error");
}

#[test]
fn dsm_model_checks() {
    let m = model("dsm_r2");
    for args in [["check", "gjac"], ["check", "dirac"]] {
        let inv = invoke(["gradgauge", args[0], args[1], &m]);
        assert_eq!(inv.code, 0, "{args:?}: {}", inv.stdout);
    }
    let inv = invoke(["gradgauge", "gauge", &m]);
    assert_eq!(inv.code, 0);
    assert!(inv.stdout.contains("\"convention\": \"reversed\""));
}

#[test]
fn standard_extension_models() {
    let good = invoke(["gradgauge", "standard-extend", &model("rotation_r3")]);
    assert_eq!(good.code, 0);
    let bad = invoke(["gradgauge", "standard-extend", &model("rotation_r3_perturbed")]);
    assert_eq!(bad.code, 1);
    assert!(bad.stdout.contains("\"horizontal\": \"fail\""));
}
