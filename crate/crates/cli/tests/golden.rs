//! Golden-file tests: every exit code, byte-exact output. Regenerate with
//! `LOSSSENSE_BLESS=1 cargo test -p losssense-cli --test golden`.

use std::path::{Path, PathBuf};
use std::process::Command;

struct Case {
    name: &'static str,
    args: &'static [&'static str],
    exit: i32,
}

const CASES: &[Case] = &[
    // 0: evaluation, sensitive verdicts, passing fixtures
    Case { name: "eval_es_json_file", args: &["eval", "--spec", "es:0.1", "--position", "tests/data/mixed.json", "--format", "json"], exit: 0 },
    Case { name: "eval_var_rare_loss", args: &["eval", "--spec", "var:0.1", "--position", "loss:0.05", "--format", "json"], exit: 0 },
    Case { name: "eval_entropic_csv", args: &["eval", "--spec", "entropic:1", "--position", "tests/data/mixed.csv"], exit: 0 },
    Case { name: "sll_entropic_full", args: &["sll", "--spec", "entropic:1.0", "--domain", "full", "--format", "json"], exit: 0 },
    Case { name: "battery_worstcase", args: &["battery", "--spec", "worstcase", "--format", "json"], exit: 0 },
    Case { name: "recession_entropic", args: &["recession", "--spec", "entropic:1", "--position", "0.5:-1,0.5:0", "--format", "json"], exit: 0 },
    Case { name: "fixture_es_insensitive", args: &["fixture", "--id", "es-insensitive", "--format", "json"], exit: 0 },
    Case { name: "fixture_params", args: &["fixture", "--id", "var-insensitive", "--params", r#"{"alpha":0.2,"p_a":0.2}"#], exit: 0 },
    Case { name: "fixture_all", args: &["fixture", "--all", "--format", "json"], exit: 0 },
    Case { name: "fixture_list", args: &["fixture", "--list"], exit: 0 },
    Case { name: "axioms_es", args: &["axioms", "--spec", "es:0.1", "--trials", "200", "--format", "json"], exit: 0 },
    Case { name: "axioms_capital_floor", args: &["axioms", "--spec", "custom:min-worst-case-var", "--trials", "200"], exit: 0 },
    // 1: insensitive verdicts and counterexamples
    Case { name: "battery_var", args: &["battery", "--spec", "var:0.05", "--format", "json"], exit: 1 },
    Case { name: "battery_var_text", args: &["battery", "--spec", "var:0.05"], exit: 1 },
    Case { name: "battery_es", args: &["battery", "--spec", "es:0.05"], exit: 1 },
    Case { name: "sll_oce_remark_file", args: &["sll", "--spec", "tests/data/oce_remark.json", "--format", "json"], exit: 1 },
    Case { name: "sll_es_ray", args: &["sll", "--spec", "es:0.1", "--position", "0.05:-1,0.95:1", "--format", "json"], exit: 1 },
    Case { name: "axioms_declared_star_fails", args: &["axioms", "--spec", "tests/data/capital_floor_star.json", "--trials", "200", "--format", "json"], exit: 1 },
    Case { name: "recession_zero", args: &["recession", "--spec", "custom:zero", "--position", "loss:0.3"], exit: 1 },
    // 2: validation errors
    Case { name: "eval_malformed_json", args: &["eval", "--spec", "es:0.1", "--position", "tests/data/malformed.json"], exit: 2 },
    Case { name: "eval_bad_csv_row", args: &["eval", "--spec", "es:0.1", "--position", "tests/data/bad_row.csv"], exit: 2 },
    Case { name: "eval_unknown_preset", args: &["eval", "--spec", "cvar:0.1", "--position", "loss:0.1"], exit: 2 },
    Case { name: "eval_bad_alpha", args: &["eval", "--spec", "es:1.5", "--position", "loss:0.1"], exit: 2 },
    Case { name: "sll_oce_not_below_identity", args: &["sll", "--spec", "oce:power-s:0.3,0.5"], exit: 2 },
    Case { name: "sll_unknown_domain", args: &["sll", "--spec", "es:0.1", "--domain", "half"], exit: 2 },
    Case { name: "sll_position_without_loss", args: &["sll", "--spec", "es:0.1", "--position", "0.5:1,0.5:2"], exit: 2 },
    Case { name: "fixture_unknown", args: &["fixture", "--id", "no-such-fixture"], exit: 2 },
    Case { name: "fixture_param_out_of_range", args: &["fixture", "--id", "var-insensitive", "--params", r#"{"alpha":0.05,"p_a":0.1}"#], exit: 2 },
    Case { name: "lambda_exp_out_of_range", args: &["sll", "--spec", "es:0.1", "--lambda-max-exp", "5"], exit: 2 },
    // 3: inconclusive
    Case { name: "sll_event_concentration", args: &["sll", "--spec", "custom:event-concentration", "--format", "json"], exit: 3 },
    Case { name: "sll_ray_undecided", args: &["sll", "--spec", "custom:event-concentration", "--position", "0.5:-1,0.5:2"], exit: 3 },
    Case { name: "recession_ce_sqrt", args: &["recession", "--spec", "ce:sqrt-s", "--position", "0.5:-1,0.5:2", "--format", "json"], exit: 3 },
];

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_losssense"))
        .args(args)
        .current_dir(crate_dir())
        .env_remove("LOSSSENSE_SEED")
        .output()
        .expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn compare(path: &Path, actual: &str, bless: bool) -> Option<String> {
    if bless {
        std::fs::write(path, actual).unwrap();
        return None;
    }
    let expected = std::fs::read_to_string(path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    (expected != actual).then(|| format!("{} differs:\n--- expected\n{expected}\n--- actual\n{actual}", path.display()))
}

#[test]
fn golden_files() {
    let bless = std::env::var_os("LOSSSENSE_BLESS").is_some();
    let dir = crate_dir().join("tests/golden");
    let mut failures = Vec::new();
    for case in CASES {
        let (code, stdout, stderr) = run(case.args);
        if code != case.exit {
            failures.push(format!("{}: exit {code}, expected {}\n{stderr}", case.name, case.exit));
            continue;
        }
        let (ext, body) = if case.exit == 2 { ("stderr", &stderr) } else { ("out", &stdout) };
        failures.extend(compare(&dir.join(format!("{}.{ext}", case.name)), body, bless));
    }
    assert!(failures.is_empty(), "{}", failures.join("\n\n"));
}

#[test]
fn every_exit_code_is_covered() {
    for code in 0..=3 {
        assert!(CASES.iter().any(|c| c.exit == code), "no golden case exits with {code}");
    }
}

#[test]
fn output_does_not_depend_on_the_thread_count() {
    for args in [&["battery", "--spec", "es:0.05", "--format", "json"][..], &["fixture", "--all", "--format", "json"]] {
        let one = run(&[args, &["--jobs", "1"]].concat());
        let four = run(&[args, &["--jobs", "4"]].concat());
        assert_eq!(one, four, "{args:?}");
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let args = ["sll", "--spec", "custom:event-concentration", "--format", "json"];
    let via_env = Command::new(env!("CARGO_BIN_EXE_losssense")).args(args).env("LOSSSENSE_SEED", "7").output().unwrap();
    let via_flag = run(&[&args[..], &["--seed", "7"]].concat());
    assert_eq!(String::from_utf8(via_env.stdout).unwrap(), via_flag.1);
    assert!(via_flag.1.contains("\"seed\": 7"));
}

#[test]
fn output_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("losssense-golden-{}.json", std::process::id()));
    let args = ["battery", "--spec", "var:0.05", "--format", "json"];
    let (code, stdout, _) = run(&args);
    let (code2, quiet, _) = run(&[&args[..], &["--output", path.to_str().unwrap()]].concat());
    assert_eq!((code, code2), (1, 1));
    assert!(quiet.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
    let _ = std::fs::remove_file(path);
}

#[test]
fn reports_carry_version_and_spec_hash() {
    let (_, out, _) = run(&["eval", "--spec", "es:0.1", "--position", "loss:0.05", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["spec_sha256"].as_str().unwrap().len(), 64);
    // Equivalent spellings hash identically.
    let (_, out2, _) = run(&["eval", "--spec", r#"{"variant":{"type":"es","alpha":0.1}}"#, "--position", "0.05:-1,0.95:0", "--format", "json"]);
    assert_eq!(out, out2);
}
