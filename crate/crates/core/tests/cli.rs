use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyinj"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    JSONSchema::compile(&v).expect("schema compiles")
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let s = schema(schema_name);
    let msgs: Vec<String> = match s.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{schema_name}: {msgs:?}");
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Runs with `--out`, checks exit 0, validates output and manifest.
fn run_to_file(dir: &Path, name: &str, args: &[&str], schema_name: &str) -> Value {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap().to_string();
    full.extend(["--out", &out_s]);
    let o = run(&full);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out);
    assert_valid(schema_name, &doc);
    let m = read_json(&manifest_path(&out));
    assert_valid("manifest.schema.json", &m);
    doc
}

#[test]
fn surface_taxicab() {
    let dir = tempfile::tempdir().unwrap();
    let doc = run_to_file(
        dir.path(),
        "pts.json",
        &["surface", "--form", "x^3+y^3", "--height", "12"],
        "surface_report.schema.json",
    );
    let exc = doc["exceptional"].as_array().unwrap();
    assert!(exc.contains(&serde_json::json!(["1", "12", "9", "10"])));
    assert_eq!(doc["height"], 12);
}

#[test]
fn collide_zagier_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let doc = run_to_file(
        dir.path(),
        "c.json",
        &["collide", "--poly", "x^7+3*y^7", "--mode", "int", "--height", "20"],
        "collision_report.schema.json",
    );
    assert_eq!(doc["collisions"].as_array().unwrap().len(), 0);
    let doc = run_to_file(
        dir.path(),
        "r.json",
        &["collide", "--poly", "x^2+y^2", "--mode", "rat", "--height", "3"],
        "collision_report.schema.json",
    );
    assert!(!doc["collisions"].as_array().unwrap().is_empty());
}

#[test]
fn build_is_replayable_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["build", "--form", "x^5+3*y^5", "--height", "30", "--seed", "1"];
    let a = run_to_file(dir.path(), "t1.json", &args, "trace.schema.json");
    run_to_file(dir.path(), "t2.json", &args, "trace.schema.json");
    assert_eq!(
        std::fs::read(dir.path().join("t1.json")).unwrap(),
        std::fs::read(dir.path().join("t2.json")).unwrap()
    );
    let m1 = read_json(&dir.path().join("t1.json.manifest.json"));
    let m2 = read_json(&dir.path().join("t2.json.manifest.json"));
    assert_eq!(m1["outputs"][0]["sha256"], m2["outputs"][0]["sha256"]);
    assert_eq!(m1["rng_seed"], 1);

    let trace: polyinj::pipeline::ConstructionTrace = serde_json::from_value(a).unwrap();
    trace.check().unwrap();
    let again = polyinj::pipeline::replay(&trace).unwrap();
    assert_eq!(again, trace);
}

#[test]
fn build_without_seed_reports_one() {
    let o = run(&["build", "--form", "x^3+2*y^3", "--height", "3"]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    let seed_line = err.lines().find(|l| l.starts_with("seed: ")).expect("seed printed");
    let seed: u64 = seed_line["seed: ".len()..].parse().unwrap();
    let manifest: Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_valid("manifest.schema.json", &manifest);
    assert_eq!(manifest["rng_seed"], seed);
    let trace: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("trace.schema.json", &trace);
    assert_eq!(trace["rng_seed"], seed);
}

#[test]
fn local_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let real = run_to_file(
        dir.path(),
        "real.json",
        &["local", "--poly", "x^7+3*y^7", "--real", "--at", "1,1", "--tol", "1e-12"],
        "real_point.schema.json",
    );
    assert!(real["residual"].as_f64().unwrap() <= 1e-12);
    let padic = run_to_file(
        dir.path(),
        "padic.json",
        &["local", "--poly", "x^3+y^3", "--padic", "5", "--prec", "8", "--at", "1,1", "--delta", "5"],
        "padic_approx.schema.json",
    );
    assert_eq!(padic["x"], "6");
    let lin = run_to_file(
        dir.path(),
        "lin.json",
        &["local", "--poly", "x+y", "--padic", "5", "--prec", "3", "--at", "0,0", "--delta", "1"],
        "padic_approx.schema.json",
    );
    assert_eq!(lin["y"], "-1");
    assert!(lin["residual_valuation"].is_null());
}

#[test]
fn ffield_output() {
    let dir = tempfile::tempdir().unwrap();
    let doc = run_to_file(
        dir.path(),
        "ff.json",
        &["ffield", "--p", "3", "--deg", "2", "--trials", "500", "--seed", "4"],
        "ffield_report.schema.json",
    );
    assert_eq!(doc["collisions"], 0);
}

#[test]
fn poly_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("f.txt");
    std::fs::write(&src, "x^3 + y^3\n").unwrap();
    let at = format!("@{}", src.display());
    run_to_file(
        dir.path(),
        "pts.json",
        &["surface", "--form", &at, "--height", "4"],
        "surface_report.schema.json",
    );
    let m = read_json(&dir.path().join("pts.json.manifest.json"));
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, [0xff, b'x', b'^']).unwrap();
    let o = run(&["collide", "--poly", &format!("@{}", bad.display()), "--height", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["collide", "--poly", "@/nonexistent/poly.txt", "--height", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes_and_structured_errors() {
    for (args, code) in [
        (vec!["nope"], 2),
        (vec!["surface", "--height", "3"], 2),
        (vec!["collide", "--poly", "x", "--height", "x"], 2),
        (vec!["surface", "--form", "x^2 + y", "--height", "3"], 1),
        (vec!["surface", "--form", "x^3 + y^3", "--height", "0"], 1),
        (vec!["collide", "--poly", "x*z", "--height", "2"], 1),
        (vec!["collide", "--poly", "3y", "--height", "2"], 1),
        (vec!["local", "--poly", "x^2+y^2", "--real", "--at", "1,0"], 1),
        (vec!["local", "--poly", "x^2", "--padic", "7", "--prec", "4", "--at", "1,1"], 1),
        (vec!["ffield", "--p", "6", "--deg", "2", "--trials", "3", "--seed", "1"], 1),
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        if code == 1 {
            let line = String::from_utf8_lossy(&o.stderr);
            let v: Value = serde_json::from_str(line.trim()).unwrap_or_else(|_| panic!("{args:?}: {line}"));
            assert_valid("error.schema.json", &v);
        }
    }
}

#[test]
fn collide_checkpoint_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.jsonl");
    let ck_s = ck.to_str().unwrap();
    let base = ["collide", "--poly", "x^3+y^3", "--height", "15", "--shards", "5", "--checkpoint", ck_s];
    let first = run_to_file(dir.path(), "a.json", &base, "collision_report.schema.json");
    // drop two shard lines and tear another, then resume
    let text = std::fs::read_to_string(&ck).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut kept = lines[..lines.len() - 3].join("\n");
    kept.push('\n');
    kept.push_str(&lines[lines.len() - 3][..10]);
    std::fs::write(&ck, kept).unwrap();
    let mut resume: Vec<&str> = base.to_vec();
    resume.push("--resume");
    let second = run_to_file(dir.path(), "b.json", &resume, "collision_report.schema.json");
    assert_eq!(first, second);
    let m = read_json(&dir.path().join("b.json.manifest.json"));
    assert!(m["inputs"].as_array().unwrap().iter().any(|d| d["path"] == ck_s));

    // a checkpoint from a different search is refused
    let other = ["collide", "--poly", "x^3+2*y^3", "--height", "15", "--shards", "5", "--checkpoint", ck_s, "--resume"];
    assert_eq!(run(&other).status.code(), Some(1));
}
