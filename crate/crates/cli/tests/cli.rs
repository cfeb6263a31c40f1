use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_symavg");

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn run(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn validate(schema_name: &str, instance: &Value) {
    let schema = read_json(&schema_dir().join(format!("{schema_name}.schema.json")));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

const CASES: &[(&str, &[&str])] = &[
    ("group", &["group", "--group", "dihedral:4", "--table"]),
    ("irreps", &["irreps", "--group", "symmetric:3"]),
    (
        "certify",
        &[
            "certify",
            "--group",
            "dihedral:3",
            "--scheme",
            "random:3",
            "--coefficients",
        ],
    ),
    (
        "sample",
        &["sample", "--group", "cyclic:16", "--trials", "5"],
    ),
    (
        "minimize",
        &["minimize", "--group", "signflip:3", "--eps", "0.5"],
    ),
    ("kbound", &["kbound", "--group", "symmetric:3"]),
    ("separation", &["separation", "--min", "2", "--max", "4"]),
    (
        "lowerbound",
        &["lowerbound", "--d", "3", "--support", "1,2"],
    ),
    ("figure1", &["figure1", "--n", "20", "--grid", "10"]),
    ("regress", &["regress", "--trials", "50", "--n", "40"]),
    (
        "mlp",
        &[
            "mlp",
            "--d",
            "4",
            "--n-train",
            "256",
            "--n-test",
            "128",
            "--h1",
            "8",
            "--h2",
            "4",
            "--batch",
            "32",
            "--epochs",
            "3",
            "--k-max",
            "3",
            "--curve-k",
            "2",
        ],
    ),
    ("selftest", &["selftest"]),
];

#[test]
fn every_subcommand_output_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in CASES {
        let out = dir.path().join(name);
        let (code, stdout, stderr) = run(args, &out);
        assert_eq!(code, 0, "{name}: {stderr}");
        let result = read_json(&out.join(format!("{name}.json")));
        assert_eq!(
            serde_json::from_str::<Value>(&stdout).unwrap(),
            result,
            "{name}"
        );
        validate(name, &result);
        let meta = read_json(&out.join(format!("{name}.meta.json")));
        validate("metadata", &meta);
        for f in meta["outputs"].as_array().unwrap() {
            assert!(out.join(f.as_str().unwrap()).exists(), "{name}: {f}");
        }
    }
}

#[test]
fn identical_arguments_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "sample",
            "--group",
            "dihedral:5",
            "--trials",
            "4",
            "--seed",
            "7",
        ][..],
        &["regress", "--trials", "40", "--n", "30", "--seed", "3"][..],
        &["figure1", "--n", "12", "--grid", "6", "--seed", "5"][..],
    ] {
        let out = dir.path().join("same");
        let _ = std::fs::remove_dir_all(&out);
        run(args, &out);
        let first: Vec<(String, Vec<u8>)> = snapshot(&out);
        std::fs::remove_dir_all(&out).unwrap();
        run(args, &out);
        assert_eq!(first, snapshot(&out), "{args:?}");
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn documented_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    run(
        &[
            "certify",
            "--group",
            "signflip:4",
            "--rep",
            "regular",
            "--scheme",
            "uniform",
        ],
        out,
    );
    assert_eq!(
        read_json(&out.join("certify.json"))["report"]["eps_weak"].as_f64(),
        Some(0.0)
    );
    run(
        &["kbound", "--group", "symmetric:3", "--rep", "permutation"],
        out,
    );
    assert_eq!(read_json(&out.join("kbound.json"))["K"], 5);
    run(
        &[
            "sample",
            "--group",
            "cyclic:100",
            "--eps",
            "0.5",
            "--delta",
            "0.1",
            "--trials",
            "50",
        ],
        out,
    );
    let s = read_json(&out.join("sample.json"));
    assert!(s["n"].as_u64().unwrap() <= 41);
    assert!(s["success_fraction"].as_f64().unwrap() >= 0.9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let (code, _, stderr) = run(&["certify", "--group", "cyclic:4", "--no-such-flag"], out);
    assert_eq!(code, 1);
    assert!(stderr.contains("Usage"), "{stderr}");
    assert_eq!(run(&["frobnicate"], out).0, 1);
    assert_eq!(run(&["kbound", "--group", "nonsense:3"], out).0, 1);
    assert_eq!(run(&["regress", "--n", "2"], out).0, 1);
    // a learning rate this large overflows within the first epoch
    let diverge = [
        "mlp",
        "--d",
        "4",
        "--n-train",
        "64",
        "--n-test",
        "16",
        "--h1",
        "4",
        "--h2",
        "4",
        "--batch",
        "16",
        "--epochs",
        "3",
        "--k-max",
        "2",
        "--curve-k",
        "1",
        "--lr",
        "1e6",
    ];
    assert_eq!(run(&diverge, out).0, 2);
    // rounding keeps even the uniform scheme above this target
    let (code, _, stderr) = run(
        &[
            "minimize",
            "--group",
            "cyclic:7",
            "--eps",
            "1e-300",
            "--no-fallback",
            "--trials",
            "2",
        ],
        out,
    );
    assert_eq!(code, 3, "{stderr}");
    assert_eq!(run(&["selftest", "--quiet"], out).0, 0);
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("batch.cfg");
    std::fs::write(
        &cfg,
        "# regression batch\ntrials = 30\nn = 25\nseed = 11\nuniform = true\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let (code, _, stderr) = run(
        &["regress", "--seed", "4", "--config", cfg.to_str().unwrap()],
        &out,
    );
    assert_eq!(code, 0, "{stderr}");
    let r = read_json(&out.join("regress.json"));
    assert_eq!(r["config"]["trials"], 30);
    assert_eq!(r["config"]["n"], 25);
    assert_eq!(r["config"]["seed"], 4);
    assert!(r["config"]["eps"].is_null());
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(
        &[
            "sample",
            "--group",
            "signflip:5",
            "--trials",
            "6",
            "--threads",
            "1",
        ],
        &a,
    );
    run(
        &[
            "sample",
            "--group",
            "signflip:5",
            "--trials",
            "6",
            "--threads",
            "3",
        ],
        &b,
    );
    assert_eq!(
        std::fs::read(a.join("sample.json")).unwrap(),
        std::fs::read(b.join("sample.json")).unwrap()
    );
}
