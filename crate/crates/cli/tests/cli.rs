use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mvg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvg"))
        .args(args)
        .env_remove("MVG_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn eval_value(function: &str, args: &str) -> f64 {
    let o = mvg(&["eval", function, args]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_str(&stdout(&o)).expect("json output");
    v["value"].as_f64().expect("numeric value")
}

fn without_timestamp(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

const BINOMIAL: &str = r#"{"m":1,"n":2,"alpha":[1],"partition":[[0.5]]}"#;

#[test]
fn eval_examples() {
    let o = mvg(&["eval", "ln_gamma_m", r#"{"m":1,"z":2}"#]);
    assert_eq!(stdout(&o).trim(), r#"{"value":0.0}"#);
    assert!((eval_value("lemma_J", r#"{"beta":0,"u":[0.5],"y":2}"#) - 1.0 / 3.0).abs() < 1e-15);
    let q = eval_value(
        "q",
        r#"{"m":1,"n":2,"alpha":[1],"partition":[[0.5]],"x":1}"#,
    );
    assert!((q - 0.5).abs() < 1e-15);
    let lp = eval_value(
        "multinomial_reference",
        r#"{"n":4,"k":[2,2],"p":[0.25,0.25,0.5]}"#,
    );
    assert!((lp + 3.7534179752515073).abs() < 1e-13);
}

#[test]
fn eval_errors_exit_two() {
    assert_eq!(mvg(&["eval", "nope", "{}"]).status.code(), Some(2));
    assert_eq!(
        mvg(&["eval", "ln_gamma", r#"{"x":-1}"#]).status.code(),
        Some(2)
    );
    assert_eq!(
        mvg(&["eval", "ln_gamma", "not json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mvg(&["eval", "ln_gamma_m", r#"{"m":3,"z":0.9}"#])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mvg(&["eval", "ln_gamma", r#"{"x":2,"extra":1}"#])
            .status
            .code(),
        Some(2)
    );
    let o = mvg(&["eval", "psi_m", r#"{"order":13,"m":1,"z":2}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("order"));
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lemma.json");
    let o = mvg(&[
        "verify",
        "lemma",
        "--trials",
        "2000",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = without_timestamp(&out);
    assert_eq!(report["claim"], "lemma");
    assert_eq!(report["trials"], 2000);
    assert_eq!(report["violations"], 0);
    assert_eq!(report["seed"], 7);
}

#[test]
fn verify_reports_violations_with_exit_one() {
    // zero agreement tolerance cannot be met at finite x
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    std::fs::write(&inst, BINOMIAL).unwrap();
    let o = mvg(&[
        "verify",
        "limit",
        "--trials",
        "5",
        "--instance",
        inst.to_str().unwrap(),
        "--tolerance",
        "agreement=0",
    ]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["violations"].as_u64().unwrap() > 0);
}

#[test]
fn verify_usage_errors_exit_two() {
    assert_eq!(mvg(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(
        mvg(&["verify", "lemma", "--trials", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mvg(&["verify", "lemma", "--tolerance", "bogus=1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mvg(&["verify", "lcm", "--max-order", "11", "--trials", "1"])
            .status
            .code(),
        Some(2)
    );
    let o = mvg(&[
        "verify",
        "lemma",
        "--trials",
        "10",
        "--out",
        "/nonexistent/dir/report.json",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    for claim in ["thm2", "lcm", "minkowski", "m1-reduction"] {
        let a = dir.path().join(format!("{claim}-a.json"));
        let b = dir.path().join(format!("{claim}-b.json"));
        for (path, workers) in [(&a, "1"), (&b, "3")] {
            let o = mvg(&[
                "verify",
                claim,
                "--trials",
                "50",
                "--seed",
                "99",
                "--workers",
                workers,
                "--out",
                path.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0), "{claim}");
        }
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{claim}");
        let strip = |p: &Path| {
            std::fs::read_to_string(p)
                .unwrap()
                .lines()
                .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&a), strip(&b), "{claim}: byte-level difference");
    }
}

#[test]
fn seed_comes_from_environment() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_mvg"));
        c.args(["verify", "minkowski", "--trials", "20"]);
        match seed {
            Some(s) => c.env("MVG_SEED", s),
            None => c.env_remove("MVG_SEED"),
        };
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["seed"].clone()
    };
    assert_eq!(run(Some("123")), 123);
    assert_eq!(run(None), 0);
}

#[test]
fn table_examples() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("binom.json");
    std::fs::write(&inst, BINOMIAL).unwrap();
    let inst = inst.to_str().unwrap();

    let o = mvg(&["table", "lnQ", "--x", "0.1:10:100", "--instance", inst]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 101);

    let o = mvg(&[
        "table",
        "lemma_J",
        "--y",
        "1.001:100:50",
        "--beta",
        "0",
        "--u",
        "0.5",
    ]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    for row in rows {
        let v: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(v > 0.0, "{row}");
    }

    // R(x) = Γ(2x+1)/Γ(x+1)² at x = 1, 2, 3
    let o = mvg(&["table", "R", "--x", "1:3:3", "--instance", inst]);
    let text = stdout(&o);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (got, want) in values.iter().zip([2f64.ln(), 6f64.ln(), 20f64.ln()]) {
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
    // 17 significant digits
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("1.0000000000000000e0,"));
}

#[test]
fn table_to_file_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = mvg(&[
        "table",
        "g",
        "--s",
        "1:50:5",
        "--y",
        "2",
        "--beta",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("y,beta,s,g"));
    assert_eq!(csv.lines().count(), 6);

    assert_eq!(mvg(&["table", "g", "--s", "1:50"]).status.code(), Some(2));
    assert_eq!(mvg(&["table", "nope", "--x", "1"]).status.code(), Some(2));
    assert_eq!(
        mvg(&["table", "ln_gamma", "--x", "-1:1:3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mvg(&[
            "table",
            "H",
            "--y",
            "2:3:2",
            "--beta",
            "0:1:2",
            "--u",
            "0.1:0.5:2"
        ])
        .status
        .code(),
        Some(2)
    );
}
