use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use wfcheck::cli::{execute, CliOutput, EXIT_FOUND, EXIT_IO, EXIT_OK, EXIT_USAGE};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name).to_string_lossy().into_owned()
}

fn wf(args: &[&str]) -> CliOutput {
    execute(args.iter().copied())
}

fn json(out: &CliOutput) -> Value {
    serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}\n{}", out.stdout))
}

#[test]
fn exit_code_matrix() {
    let epr = fixture("epr.wfs");
    let cpl = fixture("cpl.wfs");
    let ghz = fixture("ghz.wfs");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["parse", &ghz], EXIT_OK),
        (vec!["parse", &epr, "--format", "json"], EXIT_OK),
        (vec!["parse", "/nonexistent/none.wfs"], EXIT_IO),
        (vec!["run", &epr, "--rules", "rqm5"], EXIT_OK),
        (vec!["run", &epr, "--rules", "orthodox"], EXIT_OK),
        (vec!["run", &cpl, "--rules", "rqm5"], EXIT_OK),
        (vec!["run", &cpl, "--rules", "cpl"], EXIT_FOUND),
        (vec!["run", &ghz, "--rules", "cpl"], EXIT_OK),
        (vec!["run", &epr, "--rules", "bohm"], EXIT_USAGE),
        (vec!["run", &epr, "--rules", "rqm5", "--tolerance", "-1"], EXIT_USAGE),
        (vec!["run", "/nonexistent/none.wfs", "--rules", "rqm5"], EXIT_IO),
        (vec!["check", "ghz"], EXIT_FOUND),
        (vec!["check", "epr"], EXIT_FOUND),
        (vec!["check", "cpl", "--c", "0.3,0.7", "--ra", "1"], EXIT_FOUND),
        (vec!["check", "cpl", "--c", "1,0", "--ra", "0"], EXIT_OK),
        (vec!["check", "cpl", "--c", "0.3,0.6"], EXIT_USAGE),
        (vec!["check", "cpl", "--c", "0.3,0.7", "--ra", "5"], EXIT_USAGE),
        (vec!["check", "cpl", "--c", "-0.3,1.3"], EXIT_USAGE),
        (vec!["check", "epr", "--c", "0.5,0.5"], EXIT_USAGE),
        (vec!["check", "ghz", "--c", "0.5,0.5"], EXIT_USAGE),
        (vec!["check", "bell"], EXIT_USAGE),
        (vec!["frobnicate"], EXIT_USAGE),
        (vec![], EXIT_USAGE),
        (vec!["--help"], EXIT_OK),
        (vec!["--version"], EXIT_OK),
    ];
    for (args, code) in cases {
        let out = wf(&args);
        assert_eq!(out.code, code, "{args:?}\nstdout: {}\nstderr: {}", out.stdout, out.stderr);
        if code == EXIT_USAGE || code == EXIT_IO {
            assert!(!out.stderr.is_empty(), "{args:?}");
            assert!(out.stdout.is_empty(), "{args:?}");
        }
    }
}

#[test]
fn truncated_file_gives_located_diagnostic() {
    let dir = std::env::temp_dir().join(format!("wfcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = std::fs::read_to_string(fixture("ghz.wfs")).unwrap();
    let cut = &src[..src.find("-> A2").unwrap()];
    let path = dir.join("truncated.wfs");
    std::fs::write(&path, cut).unwrap();
    let p = path.to_string_lossy().into_owned();
    let out = wf(&["parse", &p]);
    assert_eq!(out.code, EXIT_USAGE);
    let line = cut.lines().count();
    assert!(out.stderr.starts_with(&format!("{p}:{line}:")), "{}", out.stderr);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_is_byte_identical_for_a_fixed_seed() {
    let epr = fixture("epr.wfs");
    let cpl = fixture("cpl.wfs");
    for args in [
        vec!["run", &epr, "--rules", "rqm5", "--seed", "7", "--samples", "500", "--format", "json"],
        vec!["run", &cpl, "--rules", "cpl", "--seed", "7", "--samples", "500", "--format", "json"],
        vec!["check", "ghz", "--format", "json"],
        vec!["check", "cpl", "--c", "0.2,0.3,0.5", "--ra", "2", "--format", "json"],
    ] {
        let a = wf(&args);
        let b = wf(&args);
        assert_eq!(a.stdout.as_bytes(), b.stdout.as_bytes(), "{args:?}");
        assert!(json(&a)["timing"].is_null());
    }
    let other = wf(&["run", &epr, "--rules", "rqm5", "--seed", "8", "--samples", "500", "--format", "json"]);
    let seven = wf(&["run", &epr, "--rules", "rqm5", "--seed", "7", "--samples", "500", "--format", "json"]);
    assert_ne!(json(&other)["results"]["sampled"], json(&seven)["results"]["sampled"]);
    assert_eq!(json(&other)["results"]["exact"], json(&seven)["results"]["exact"]);
}

#[test]
fn envelope_has_the_documented_shape() {
    let out = wf(&["check", "cpl", "--c", "0.3,0.7", "--ra", "1", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["tool"], "wfcheck");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["invocation"][0], "check");
    assert_eq!(v["results"]["kind"], "check");
    assert_eq!(v["results"]["verdict"], "contradiction");
    let params = &v["results"]["parameters"];
    assert_eq!(params["probabilities"], serde_json::json!([0.3, 0.7]));
    let f = &v["results"]["findings"][0];
    let born = f["predictions"].as_array().unwrap().iter().find(|p| p["rule"] == "born").unwrap();
    assert!((born["value"].as_f64().unwrap() - 0.3).abs() < 1e-12);

    let ghz = json(&wf(&["check", "ghz", "--format", "json"]));
    let search = &ghz["results"]["search"];
    assert_eq!(search["satisfying"].as_array().unwrap().len(), 0);
    assert_eq!(search["domain_size"], 8);
    assert_eq!(search["formal_product"]["square"], -1);
    assert_eq!(search["formal_product"]["value"], "±i");
}

#[test]
fn epr_run_table_matches_products_of_squares() {
    let out = wf(&["run", &fixture("epr.wfs"), "--rules", "rqm5", "--samples", "0", "--format", "json"]);
    let v = json(&out);
    let exact = &v["results"]["exact"];
    let p = [0.3, 0.7];
    for row in exact["joint"].as_array().unwrap() {
        let vals: Vec<usize> = row["values"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().parse().unwrap()).collect();
        assert!((row["probability"].as_f64().unwrap() - p[vals[0]] * p[vals[1]]).abs() < 1e-12);
    }
    let orth = json(&wf(&["run", &fixture("epr.wfs"), "--rules", "orthodox", "--format", "json"]));
    let agree = &orth["results"]["exact"]["agreement"][0];
    assert!((agree["probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

/// `(claim, rule) -> value` pairs from the text rendering of a check.
fn text_predictions(text: &str) -> Vec<(String, String, f64)> {
    let mut out = Vec::new();
    let mut claim = String::new();
    let mut in_findings = false;
    for line in text.lines() {
        if line == "findings:" {
            in_findings = true;
            continue;
        }
        if !line.starts_with(' ') {
            in_findings = false;
        }
        if !in_findings {
            continue;
        }
        if let Some(c) = line.strip_prefix("  - ") {
            claim = c.to_string();
        } else if let Some((rule, value)) = line.trim().split_once(": ") {
            out.push((claim.clone(), rule.to_string(), value.parse().unwrap()));
        }
    }
    out
}

fn json_predictions(v: &Value) -> Vec<(String, String, f64)> {
    let mut out = Vec::new();
    for f in v["results"]["findings"].as_array().unwrap() {
        let claim = f["claim"].as_str().unwrap().to_string();
        for p in f["predictions"].as_array().unwrap() {
            out.push((claim.clone(), p["rule"].as_str().unwrap().into(), p["value"].as_f64().unwrap()));
        }
        out.push((claim, "discrepancy".into(), f["discrepancy"].as_f64().unwrap()));
    }
    out
}

fn same_to_twelve_digits(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-11 * a.abs().max(b.abs()) || (a - b).abs() < 1e-300
}

#[test]
fn text_and_json_carry_the_same_numbers() {
    for base in [
        vec!["check", "ghz"],
        vec!["check", "epr", "--c", "0.25,0.75"],
        vec!["check", "cpl", "--c", "0.1,0.2,0.3,0.4", "--ra", "3"],
    ] {
        let text = wf(&base).stdout;
        let mut j = base.clone();
        j.extend(["--format", "json"]);
        let from_json = json_predictions(&json(&wf(&j)));
        let from_text = text_predictions(&text);
        assert_eq!(from_text.len(), from_json.len(), "{base:?}\n{text}");
        for (t, j) in from_text.iter().zip(&from_json) {
            assert_eq!((&t.0, &t.1), (&j.0, &j.1));
            assert!(same_to_twelve_digits(t.2, j.2), "{base:?} {}: {} text {} json {}", t.0, t.1, t.2, j.2);
        }
    }

    let epr = fixture("epr.wfs");
    let text = wf(&["run", &epr, "--rules", "rqm5"]).stdout;
    let v = json(&wf(&["run", &epr, "--rules", "rqm5", "--format", "json"]));
    for row in v["results"]["exact"]["joint"].as_array().unwrap() {
        let vals: Vec<&str> = row["values"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
        let prefix = format!("    {}  ", vals.join(" "));
        let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap();
        let t: f64 = line[prefix.len()..].parse().unwrap();
        assert!(same_to_twelve_digits(t, row["probability"].as_f64().unwrap()));
    }
}

#[test]
fn binary_exit_codes_and_streams() {
    let bin = env!("CARGO_BIN_EXE_wfcheck");
    let out = Command::new(bin).args(["check", "ghz"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FOUND));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: contradiction"));
    let out = Command::new(bin).args(["parse", "/nonexistent/none.wfs"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_IO));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
    let out = Command::new(bin).args(["parse", &fixture("ghz.wfs")]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
}
