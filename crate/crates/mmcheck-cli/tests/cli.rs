//! End-to-end tests of the binary: the exit-code contract, determinism of
//! JSON reports, the kernel dump format, and structural validation of every
//! report kind against the bundled schema.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mmcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmcheck"))
        .args(args)
        .env_remove("MMCHECK_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn exit_codes_follow_the_contract() {
    // Certified property: 0.
    let out = mmcheck(&[
        "classify", "--property", "monotone", "--function", "sqrt(x)",
        "--interval", "0.01,100", "--n", "3", "--grid-size", "64",
        "--random-tuples", "16",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout_of(&out));

    // Refuted property: 1.
    let out = mmcheck(&[
        "classify", "--property", "convex", "--function", "x^3",
        "--interval", "0.1,10", "--n", "2", "--grid-size", "32",
        "--random-tuples", "8",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Malformed expression: 2.
    let out = mmcheck(&[
        "classify", "--property", "monotone", "--function", "sqrt(",
        "--interval", "0.1,10", "--n", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("offset 5"), "stderr: {err}");

    // Bad interval: 2.
    let out = mmcheck(&[
        "classify", "--property", "monotone", "--function", "x",
        "--interval", "10,0.1", "--n", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown flag: 2.
    let out = mmcheck(&["classify", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    // Domain violation (log needs positive interval): 2.
    let out = mmcheck(&[
        "classify", "--property", "monotone", "--function", "log(x)",
        "--interval", "-1,1", "--n", "2", "--grid-size", "8",
        "--random-tuples", "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_reports_are_deterministic() {
    let args = [
        "classify", "--property", "monotone", "--function", "x*log(x)",
        "--interval", "0.01,10", "--n", "3", "--grid-size", "48",
        "--random-tuples", "12", "--seed", "42", "--format", "json",
    ];
    let first = mmcheck(&args);
    let second = mmcheck(&args);
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout, "reports must be byte-identical");

    // Thread cap must not change the bytes either.
    let parallel = Command::new(env!("CARGO_BIN_EXE_mmcheck"))
        .args(args)
        .env("MMCHECK_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(first.stdout, parallel.stdout);

    // A different seed changes the sampled tuples but not the verdict.
    let other_seed = mmcheck(&[
        "classify", "--property", "monotone", "--function", "x*log(x)",
        "--interval", "0.01,10", "--n", "3", "--grid-size", "48",
        "--random-tuples", "12", "--seed", "43", "--format", "json",
    ]);
    let a: Value = serde_json::from_slice(&first.stdout).unwrap();
    let b: Value = serde_json::from_slice(&other_seed.stdout).unwrap();
    assert_eq!(a["result"]["verdict"], b["result"]["verdict"]);
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_mmcheck"))
        .args(["kernel", "--which", "i", "--points", "0,1"])
        .env("MMCHECK_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_dump_two_point_case() {
    let out = mmcheck(&["kernel", "--which", "i", "--points", "0,1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["breakpoints"], serde_json::json!([0.0, 1.0]));
    let piece = v["result"]["pieces"][0].as_array().unwrap();
    let coeffs: Vec<f64> = piece.iter().map(|c| c.as_f64().unwrap()).collect();
    assert_eq!(coeffs.len(), 3);
    assert!((coeffs[0]).abs() < 1e-14);
    assert!((coeffs[1] - 2.0).abs() < 1e-13);
    assert!((coeffs[2] + 2.0).abs() < 1e-13);
    assert!((v["result"]["mass"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-13);
}

#[test]
fn refuted_runs_carry_witnesses() {
    let out = mmcheck(&[
        "classify", "--property", "monotone", "--function", "x^3",
        "--interval", "0.1,10", "--n", "2", "--grid-size", "32",
        "--random-tuples", "8", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["verdict"], "refuted");
    let witnesses = v["result"]["witnesses"].as_array().unwrap();
    assert!(!witnesses.is_empty());
    // Witnesses ship full matrices.
    assert!(witnesses[0]["matrix"]["rows"].is_array());
}

#[test]
fn reports_can_be_written_to_a_path() {
    let dir = std::env::temp_dir().join("mmcheck-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = mmcheck(&[
        "hankel", "--which", "m", "--function", "exp(x)", "--at", "0",
        "--n", "2", "--format", "json", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1)); // det M₂ = −1/12: not psd
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["which"], "hankel-m");
    assert!(!v["result"]["psd"]["is_psd"].as_bool().unwrap());
}

// ---------------------------------------------------------------------------
// Structural schema validation
// ---------------------------------------------------------------------------

/// Structural validator for the bundled schema subset: `type` (including
/// type lists), `required`, `properties`, `items`, `enum`, and local
/// `$ref` into `$defs`.
fn validate(instance: &Value, schema: &Value, root: &Value, path: &str) -> Result<(), String> {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        let name = reference
            .strip_prefix("#/$defs/")
            .ok_or_else(|| format!("{path}: unsupported $ref {reference}"))?;
        let target = &root["$defs"][name];
        if target.is_null() {
            return Err(format!("{path}: dangling $ref {reference}"));
        }
        return validate(instance, target, root, path);
    }
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{path}: {instance} not in enum {allowed:?}"));
        }
    }
    if let Some(ty) = schema.get("type") {
        let names: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = names.iter().any(|name| match *name {
            "object" => instance.is_object(),
            "array" => instance.is_array(),
            "string" => instance.is_string(),
            "number" => instance.is_number(),
            "integer" => instance.is_i64() || instance.is_u64(),
            "boolean" => instance.is_boolean(),
            "null" => instance.is_null(),
            _ => false,
        });
        if !ok {
            return Err(format!("{path}: expected type {names:?}, got {instance}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required.iter().filter_map(Value::as_str) {
            if instance.get(key).is_none() {
                return Err(format!("{path}: missing required field `{key}`"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        if let Some(obj) = instance.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(v, sub, root, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = instance.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate(v, items, root, &format!("{path}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn validate_report(report: &Value) {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json");
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    validate(report, &schema, &schema, "$").unwrap();
    // Dispatch on the result kind and validate against its full layout.
    let kind = report["result"]["kind"].as_str().unwrap();
    let def = &schema["$defs"][kind];
    assert!(!def.is_null(), "schema has no layout for kind {kind}");
    validate(&report["result"], def, &schema, "$.result").unwrap();
}

#[test]
fn every_report_kind_is_schema_valid() {
    let runs: Vec<Vec<&str>> = vec![
        vec![
            "classify", "--property", "convex", "--function", "x^2",
            "--interval", "-1,1", "--n", "2", "--grid-size", "16",
            "--random-tuples", "8", "--format", "json",
        ],
        vec![
            "classify", "--property", "monotone", "--function", "exp(x)",
            "--interval", "-1,1", "--n", "2", "--grid-size", "16",
            "--random-tuples", "8", "--format", "json",
        ],
        vec![
            "loewner", "--function", "-1/x", "--points", "1,2",
            "--interval", "0.5,3", "--format", "json",
        ],
        vec![
            "kraus", "--function", "x^3", "--points", "1,2", "--anchor", "1",
            "--interval", "0.5,3", "--format", "json",
        ],
        vec![
            "hankel", "--which", "k", "--function", "1/x", "--at", "1",
            "--n", "2", "--interval", "0.1,10", "--format", "json",
        ],
        vec!["kernel", "--which", "i", "--points", "0,1", "--format", "json"],
        vec![
            "kernel", "--which", "j", "--points", "0,1", "--anchor", "0.5",
            "--format", "json",
        ],
        vec![
            "verify-representation", "--which", "loewner", "--function", "exp(x)",
            "--points", "0,0.5,1", "--format", "json",
        ],
        vec![
            "verify-representation", "--which", "kraus", "--function", "x^2",
            "--points", "0,0.5,1", "--anchor", "0.25", "--format", "json",
        ],
        vec![
            "oracle", "--property", "convex", "--function", "exp(x)",
            "--interval", "-1,1", "--n", "2", "--trials", "64", "--format", "json",
        ],
    ];
    for args in runs {
        let out = mmcheck(&args);
        let code = out.status.code().unwrap();
        assert!(code == 0 || code == 1, "unexpected exit {code} for {args:?}");
        let v: Value = serde_json::from_slice(&out.stdout)
            .unwrap_or_else(|e| panic!("bad JSON for {args:?}: {e}"));
        validate_report(&v);
    }
}
