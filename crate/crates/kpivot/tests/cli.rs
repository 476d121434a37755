//! End-to-end checks of the `kpivot` binary: exit codes, output files,
//! determinism under a fixed seed, and JSON schema conformance.

use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kpivot"))
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Minimal JSON-schema subset validator: type / required / properties / items.
fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type") {
        let types: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().map(|v| v.as_str().unwrap()).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{path}: expected type {types:?}, got {value}"));
        }
    }
    if let Some(req) = schema.get("required").and_then(|r| r.as_array()) {
        for key in req {
            let key = key.as_str().unwrap();
            if value.get(key).is_none() {
                return Err(format!("{path}: missing required key '{key}'"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        for (key, sub) in props {
            if let Some(v) = value.get(key) {
                validate(sub, v, &format!("{path}.{key}"))?;
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn run_json(args: &[&str], schema_name: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let status = bin()
        .args(args)
        .arg("--output")
        .arg(&out)
        .arg("--format")
        .arg("json")
        .status()
        .unwrap();
    assert!(status.success(), "command failed: {args:?}");
    let value: Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    validate(&schema(schema_name), &value, "$").unwrap();
    value
}

#[test]
fn trees_subcommand() {
    let v = run_json(&["trees", "--k", "4", "--seed", "0"], "trees.schema.json");
    assert_eq!(v["count"], 14);
    assert_eq!(v["trees"].as_array().unwrap().len(), 14);
}

#[test]
fn gamma_subcommand() {
    let v = run_json(
        &["gamma", "--k", "3", "--samples", "40000", "--seed", "7"],
        "estimate.schema.json",
    );
    let est = v["estimate"].as_f64().unwrap();
    let se = v["std_error"].as_f64().unwrap();
    assert!((est - 133.0 / 72.0).abs() < 4.0 * se, "est={est}");
}

#[test]
fn sigma2_subcommand() {
    let v = run_json(
        &["sigma2", "--k", "1", "--samples", "40000", "--seed", "7"],
        "estimate.schema.json",
    );
    assert!(v["estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn psi_subcommand_exact() {
    let v = run_json(
        &["psi", "--k", "1", "--n", "10", "--exact", "--seed", "0"],
        "psi.schema.json",
    );
    assert_eq!(v["rows"][3]["psi_exact"], "8/3");
}

#[test]
fn constants_subcommand() {
    let v = run_json(&["constants", "--seed", "0"], "constants.schema.json");
    assert_eq!(v["table"][2]["alpha"], "133/78");
    assert_eq!(v["table"][5]["alpha"], "31796145419183/19945995498000");
}

#[test]
fn sort_subcommand() {
    let v = run_json(
        &[
            "sort", "--k", "3", "--n", "500", "--runs", "8", "--strategy", "adaptive", "--seed",
            "42",
        ],
        "sort.schema.json",
    );
    assert!(v["mean_total"].as_f64().unwrap() > 0.0);
}

#[test]
fn mean_study_subcommand() {
    let v = run_json(
        &[
            "mean-study",
            "--k",
            "2",
            "--n-grid",
            "100:400:2",
            "--runs",
            "50",
            "--seed",
            "3",
        ],
        "mean_study.schema.json",
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn oracle_gap_subcommand() {
    let v = run_json(
        &[
            "oracle-gap",
            "--k",
            "3",
            "--n-grid",
            "200:800:2",
            "--runs",
            "100",
            "--seed",
            "5",
        ],
        "oracle_gap.schema.json",
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn zsample_subcommand() {
    let v = run_json(
        &[
            "zsample", "--k", "2", "--samples", "2000", "--depth", "15", "--seed", "9",
        ],
        "zsample.schema.json",
    );
    assert_eq!(v["values"].as_array().unwrap().len(), 2000);
}

#[test]
fn zsample_kde_subcommand() {
    let v = run_json(
        &[
            "zsample", "--k", "1", "--samples", "2000", "--depth", "15", "--kde", "--seed", "9",
        ],
        "zsample_kde.schema.json",
    );
    assert_eq!(
        v["grid"].as_array().unwrap().len(),
        v["density"].as_array().unwrap().len()
    );
}

#[test]
fn rate_study_subcommand() {
    let v = run_json(
        &[
            "rate-study",
            "--k",
            "2",
            "--n-grid",
            "64:256:2",
            "--runs",
            "300",
            "--z-samples",
            "300",
            "--seed",
            "11",
        ],
        "rate_study.schema.json",
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["outside_stated_range"], false);
}

#[test]
fn brute_force_subcommand() {
    let v = run_json(
        &["brute-force", "--k", "2", "--n", "3", "--seed", "0"],
        "brute_force.schema.json",
    );
    assert_eq!(v["mean"], "8/3");
    assert_eq!(v["variance"], "2/9");
}

#[test]
fn unknown_flag_exits_2() {
    let status = bin().args(["gamma", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn config_error_exits_2() {
    // k out of range
    let status = bin()
        .args(["trees", "--k", "40", "--seed", "0"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // bad strategy
    let status = bin()
        .args([
            "sort", "--k", "2", "--n", "10", "--strategy", "nope", "--seed", "0",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // bad grid
    let status = bin()
        .args([
            "mean-study", "--k", "2", "--n-grid", "9:1:2", "--runs", "5", "--seed", "0",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["gamma", "--k", "2", "--samples", "20000", "--seed", "123"])
            .arg("--output")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn csv_output_has_fixed_header_and_lf_endings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gamma.csv");
    let status = bin()
        .args(["gamma", "--k", "2", "--samples", "5000", "--seed", "1"])
        .arg("--output")
        .arg(&out)
        .args(["--format", "csv"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("k,samples,seed,estimate,std_error\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn summary_line_on_stdout() {
    let output = bin()
        .args(["trees", "--k", "3", "--seed", "0"])
        .output()
        .unwrap();
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.trim(), "trees: k=3 count=5");
}
