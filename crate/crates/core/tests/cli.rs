//! The `delta2` front end, driven in-process through `cli::run`.

use std::fs;
use std::path::PathBuf;

use delta2_capacity::cli::{run, EXIT_OK, EXIT_PRECISION, EXIT_VALIDATION, EXIT_VERIFICATION};
use delta2_capacity::hierarchy::REEnumerator;
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("delta2-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs `delta2 <args> --out <file>` and returns the exit code and the output.
fn run_to(name: &str, args: &[&str]) -> (i32, String) {
    let out = scratch(name);
    let _ = fs::remove_file(&out);
    let mut argv = vec!["delta2".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--out".into(), out.display().to_string()]);
    let code = run(argv);
    (code, fs::read_to_string(&out).unwrap_or_default())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn specker_identity_prefix() {
    let (code, text) =
        run_to("sp.json", &["specker", "--enumerator", "identity", "--k", "8", "--format", "json", "--no-timestamp"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&text);
    let e = REEnumerator::identity();
    assert_eq!(v["meta"]["enumerator"]["hash"], e.content_hash());
    assert!(v["meta"]["timestamp_unix"].is_null());
    assert!(text.contains("255/256"), "{text}");
}

#[test]
fn identical_runs_give_identical_bytes() {
    let args = ["specker", "--enumerator", "dovetail", "--k", "6", "--no-timestamp", "--format", "csv"];
    let (_, a) = run_to("det-a.csv", &args);
    let (_, b) = run_to("det-b.csv", &args);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(a.starts_with("# tool: delta2\n"), "{a}");
    assert!(a.contains("# config_digest: "));
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(run_to("v1", &["gen-pdf", "--pdf", "bump:1", "--power", "1", "--sigma-sq", "0"]).0, EXIT_VALIDATION);
    assert_eq!(run_to("v2", &["gen-pdf", "--pdf", "wedge:3"]).0, EXIT_VALIDATION);
    assert_eq!(run_to("v3", &["quad", "--precision-bits", "200"]).0, EXIT_VALIDATION);
    assert_eq!(run_to("v4", &["specker", "--threads", "0"]).0, EXIT_VALIDATION);
    assert_eq!(run(["delta2", "no-such-command"]), EXIT_VALIDATION);
}

#[test]
fn exhausted_enumerator_exits_3() {
    assert_eq!(run_to("p1", &["specker", "--enumerator", "table:3,5,9", "--k", "10"]).0, EXIT_PRECISION);
}

#[test]
fn config_file_and_flag_override() {
    let cfg = scratch("quad.toml");
    fs::write(&cfg, "schema_version = 1\ncommand = \"specker\"\nenumerator = \"identity\"\nk = 3\n").unwrap();
    let c = cfg.display().to_string();
    let (code, text) = run_to("cfg.json", &["specker", "--config", &c, "--no-timestamp"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.contains("7/8") && !text.contains("15/16"), "{text}");
    let (_, text) = run_to("cfg2.json", &["specker", "--config", &c, "--k", "4", "--no-timestamp"]);
    assert!(text.contains("15/16"), "{text}");

    // the digest follows the resolved configuration
    let digest = |t: &str| t.lines().find(|l| l.starts_with("# config_digest:")).map(str::to_string);
    let (_, file_only) = run_to("cfg3.csv", &["specker", "--config", &c, "--no-timestamp"]);
    let (_, overridden) =
        run_to("cfg4.csv", &["specker", "--config", &c, "--k", "4", "--no-timestamp", "--threads", "2"]);
    let (_, again) = run_to("cfg5.csv", &["specker", "--config", &c, "--k", "4", "--no-timestamp"]);
    assert!(digest(&file_only).is_some());
    assert_ne!(digest(&file_only), digest(&overridden));
    assert_eq!(digest(&overridden), digest(&again));
}

#[test]
fn config_errors_name_line_and_field() {
    let cfg = scratch("bad.toml");
    fs::write(&cfg, "schema_version = 1\nk = 3\nenumeratr = \"identity\"\n").unwrap();
    assert_eq!(run(["delta2", "specker", "--config", cfg.to_str().unwrap()]), EXIT_VALIDATION);
    fs::write(&cfg, "schema_version = 1\npdf = \"bump:0\"\n").unwrap();
    // a field the command does not read is rejected
    assert_eq!(run(["delta2", "specker", "--config", cfg.to_str().unwrap()]), EXIT_VALIDATION);
}

#[test]
fn gen_pdf_star_support() {
    let (code, text) = run_to("star.json", &["gen-pdf", "--pdf", "star:identity:16", "--no-timestamp"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&text);
    assert_eq!(v["support_radius"]["exact"], "17/1");
    assert_eq!(v["descriptor"]["kind"], "star");
    let lo: f64 = v["mass"]["lo_decimal"].as_str().unwrap().parse().unwrap();
    let hi: f64 = v["mass"]["hi_decimal"].as_str().unwrap().parse().unwrap();
    assert!(lo <= 1.0 && 1.0 <= hi);
}

#[test]
fn symmetric_channel_estimates_zero() {
    let (code, text) = run_to(
        "sym.csv",
        &["capacity", "--channel", "symmetric", "--radius", "10", "--format", "csv", "--no-timestamp"],
    );
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 10);
    for r in rows {
        assert_eq!(r.split(',').nth(3), Some("0/1"), "{r}");
    }
}

#[test]
fn corrupted_golden_exits_4() {
    let dir = scratch("golden-bad");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("specker_dovetail.json"), "{\"table_hash\": \"0\", \"k\": 1, \"phi\": [], \"partial\": []}")
        .unwrap();
    let code = run([
        "delta2",
        "verify",
        "--only",
        "golden",
        "--golden-dir",
        dir.to_str().unwrap(),
        "--out",
        scratch("verify.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code, EXIT_VERIFICATION);
    let v = json(&fs::read_to_string(scratch("verify.json")).unwrap());
    assert!(v["meta"].is_object());
}
