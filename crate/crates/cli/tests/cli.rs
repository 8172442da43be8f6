use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liouville"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn schema_for(path: &Path) -> Option<&'static str> {
    let name = path.file_name()?.to_str()?;
    let parent = path.parent()?.file_name()?.to_str()?;
    Some(match (parent, name) {
        (_, "manifest.json") => "manifest.v1.json",
        (_, "config.json") => "run-config.v1.json",
        (_, "mesh.json") => "mesh.v1.json",
        (_, "solution.json") => "solution.v1.json",
        (_, "trace.json") => "trace.v1.json",
        (_, "sweep.json") => "sweep.v1.json",
        (_, "criteria.json") => "criteria.v1.json",
        ("reports", _) => "experiment-report.v1.json",
        ("evidence", _) => "evidence.v1.json",
        _ => return None,
    })
}

fn validate(instance: &Value, schema: &str) -> Result<(), String> {
    let dir = repo().join("schemas");
    let mut opts = jsonschema::options();
    let mut root = None;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        let doc = read_json(&p);
        let id = doc["$id"].as_str().unwrap().to_string();
        if p.file_name().unwrap() == schema {
            root = Some(doc.clone());
        }
        opts = opts.with_resource(id, jsonschema::Resource::from_contents(doc).unwrap());
    }
    let validator = opts.build(&root.expect("schema exists")).map_err(|e| e.to_string())?;
    let errors: Vec<String> =
        validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).take(3).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors.join("; "))
    }
}

/// Validates every JSON output under `dir` that has a schema; returns how many were checked.
fn validate_tree(dir: &Path) -> usize {
    let mut n = 0;
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "json") {
                let schema = schema_for(&p).unwrap_or_else(|| panic!("no schema for {}", p.display()));
                validate(&read_json(&p), schema).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
                n += 1;
            }
        }
    }
    n
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["bogus"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&run(&["verify", "--no-such-flag"])), 2);
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{\n  \"seed\": 1,\n  \"out\": \"x\",\n}\n");
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"), "{}", String::from_utf8_lossy(&o.stderr));

    let cfg = write_config(tmp.path(), "missing.json", r#"{"mesh": {"file": "nowhere.json"}}"#);
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));
}

#[test]
fn empty_experiment_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"experiments": []}"#);
    let out = tmp.path().join("out");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0);
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["experiments"].as_array().unwrap().len(), 0);
    assert_eq!(m["status"], "ok");
    assert!(validate_tree(&out) >= 2);
}

#[test]
fn unequal_toda_sums_are_recorded_and_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{
            "problem": {"variant": {"kind": "toda", "a": 2.0, "a_prime": 1.0, "b": 1.0, "b_prime": 1.0}},
            "mesh": {"target-h": 0.2},
            "budget": {"starts": 2},
            "experiments": [{"kind": "collapse"}, {"kind": "solve", "id": "after"}]
        }"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 1);
    let m = read_json(&out.join("manifest.json"));
    let exps = m["experiments"].as_array().unwrap();
    // the run continues past the failed experiment
    assert_eq!(exps.len(), 2);
    assert!(exps[0]["error"].as_str().unwrap().contains("condition violated"));
    assert_eq!(m["status"], "failed");
    validate_tree(&out);
}

#[test]
fn solve_below_threshold_gives_the_zero_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = repo().join("configs/eq2.json");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out.join("solve/solution.json"));
    assert_eq!(doc["summary"]["converged"], true);
    let values = doc["fields"][0]["values"].as_array().unwrap();
    assert!(!values.is_empty() && values.iter().all(|v| v.as_f64() == Some(0.0)));
    validate_tree(&out);

    let svg_path = tmp.path().join("profile.svg");
    let profile = out.join("solve/u1-profile.csv");
    let o = run(&["plot", "--input", profile.to_str().unwrap(), "--output", svg_path.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(r#"class="axes""#));
    assert_eq!(svg.matches("<polyline").count(), 1);

    let field_svg = tmp.path().join("field.svg");
    let doc = out.join("solve/solution.json");
    let o = run(&["plot", "--input", doc.to_str().unwrap(), "--output", field_svg.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&field_svg).unwrap().contains("<polygon"));
}

#[test]
fn radial_profile_csv_plots_as_one_polyline() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("profile.csv");
    let mut text = String::from("r,value\n");
    for k in 0..=20 {
        let r = k as f64 / 20.0;
        text.push_str(&format!("{r},{}\n", -2.0 * (1.0 + r * r / 8.0f64).ln()));
    }
    fs::write(&csv, text).unwrap();
    let o = run(&["plot", "--input", csv.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(tmp.path().join("profile.svg")).unwrap();
    assert!(svg.contains(r#"class="axes""#));
    assert_eq!(svg.matches("<polyline").count(), 1);
}

const SMALL: &str = r#"{
    "problem": {"variant": {"kind": "gelfand", "rho": 1.0}},
    "mesh": {"target-h": 0.2},
    "budget": {"starts": 6},
    "seed": 11,
    "experiments": [
        {"kind": "solve"},
        {"kind": "uniqueness"},
        {"kind": "bol", "region": {"kind": "ball", "center": [0.0, 0.0], "radius": 0.5}},
        {"kind": "continuation", "start": 0.2, "end": 1.0, "step": 0.2},
        {"kind": "sweep", "grid": [0.5, 1.0]}
    ]
}"#;

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "json") {
                files.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, jobs) in [(&a, "1"), (&b, "2")] {
        let o = run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--jobs",
            jobs,
            "--quiet",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = json_files(&a);
    assert_eq!(files, json_files(&b));
    assert!(files.iter().any(|f| f.starts_with("sweep-4/reports")));
    for f in &files {
        let name = f.file_name().unwrap();
        // timings, the output path and the job count differ by design
        if name == "manifest.json" || name == "config.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{} differs", f.display());
    }
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_eq!(ma["experiments"][1]["reports"], mb["experiments"][1]["reports"]);
    assert!(validate_tree(&a) >= 8);
}

#[test]
fn toml_and_json_configs_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let json = write_config(
        tmp.path(),
        "c.json",
        r#"{"domain": {"kind": "ellipse", "a": 1.3, "b": 0.8},
            "problem": {"variant": {"kind": "sinh-gordon-positive", "rho": 12.252211349000193, "exponents": [0.5]}},
            "mesh": {"target-h": 0.2}, "budget": {"starts": 4},
            "experiments": [{"kind": "symmetry"}]}"#,
    );
    let toml = write_config(
        tmp.path(),
        "c.toml",
        r#"
        [domain]
        kind = "ellipse"
        a = 1.3
        b = 0.8
        [problem.variant]
        kind = "sinh-gordon-positive"
        rho = 12.252211349000193
        exponents = [0.5]
        [mesh]
        target-h = 0.2
        [budget]
        starts = 4
        [[experiments]]
        kind = "symmetry"
        "#,
    );
    let out = tmp.path().join("out");
    let mut digests = Vec::new();
    let mut reports = Vec::new();
    for cfg in [&json, &toml] {
        let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let m = read_json(&out.join("manifest.json"));
        digests.push(m["config_digest"].clone());
        let path = m["experiments"][0]["reports"][0]["path"].as_str().unwrap().to_string();
        assert_eq!(m["experiments"][0]["reports"][0]["verdict"], "consistent");
        reports.push(fs::read(out.join(path)).unwrap());
    }
    assert_eq!(digests[0], digests[1]);
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn verify_selects_one_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", SMALL);
    let out = tmp.path().join("out");
    let o = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--experiment",
        "bol-2",
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["experiments"].as_array().unwrap().len(), 1);
    assert_eq!(m["experiments"][0]["reports"][0]["theorem"], "P2.1");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--experiment", "nope", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn mesh_export_and_refine() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = write_config(tmp.path(), "c.toml", "[domain]\nkind = \"disk\"\nradius = 2.0\n[mesh]\ntarget-h = 0.4\n");
    assert_eq!(code(&run(&["mesh", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--quiet"])), 0);
    let input = a.join("mesh.json");
    let o =
        run(&["mesh", "--input", input.to_str().unwrap(), "--refine", "1", "--out", b.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (ma, mb) = (read_json(&a.join("mesh.json")), read_json(&b.join("mesh.json")));
    let tris = |m: &Value| m["triangles"].as_array().unwrap().len();
    assert_eq!(tris(&mb), 4 * tris(&ma));
    validate(&mb, "mesh.v1.json").unwrap();
    assert!(fs::read_to_string(b.join("mesh.svg")).unwrap().contains("<polygon"));
}

#[test]
fn shipped_configs_validate() {
    for entry in fs::read_dir(repo().join("configs")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            validate(&read_json(&p), "run-config.v1.json").unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        }
    }
}

#[test]
fn acceptance_suite_writes_ten_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = repo().join("configs/accept.json");
    let o = run(&["suite", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&out.join("manifest.json"));
    let reports = m["experiments"][0]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 10);
    assert!(reports.iter().all(|r| r["verdict"] != "violated"));
    let text = fs::read_to_string(out.join("acceptance/acceptance.txt")).unwrap();
    assert_eq!(text.lines().count(), 10);
    validate_tree(&out);
}
