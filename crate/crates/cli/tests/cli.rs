use std::path::PathBuf;
use std::process::{Command, Output};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causaloop")).args(args).output().expect("binary runs")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn apex() {
    let o = run(&["geometry", "apex", "-1", "0", "1", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(0,1)");
}

#[test]
fn precedes_and_contain() {
    let o = run(&["geometry", "precedes", "0", "0", "1", "1"]);
    assert_eq!(stdout(&o).trim(), "before");
    let o = run(&["geometry", "precedes", "0", "0", "2", "1"]);
    assert_eq!(stdout(&o).trim(), "spacelike");
    let o = run(&["geometry", "contain", "-1", "0", "1", "0", "0", "-1/2"]);
    assert_eq!(stdout(&o).trim(), "true");
    let o = run(&["geometry", "contain", "--dim", "2", "-1", "0", "0", "1", "0", "0", "0", "0", "1/2"]);
    assert_eq!(stdout(&o).trim(), "false");
    let o = run(&["geometry", "slice", "--dim", "2", "-1", "0", "0", "1", "0", "0", "0", "0", "1/2", "6/5"]);
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn analyze_jamming() {
    let o = run(&["analyze", &model("classical-jamming.model"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["report_version"], 1);
    let rel = |name: &str| {
        r["relations"].as_array().unwrap().iter().find(|e| e["relation"] == name).unwrap_or_else(|| panic!("{name}"))["holds"]
            .as_bool()
            .unwrap()
    };
    assert!(rel("B affects XZ"));
    assert!(!rel("B affects X"));
    assert_eq!(r["compat"]["report"]["verdict"], "compatible");
}

#[test]
fn conditional_signatures_on_four_nodes() {
    let r = json(&run(&["analyze", &model("xor-signalling.model"), "--conditional", "--format", "json"]));
    assert_eq!(r["evaluated"], 194);
    let r = json(&run(&["analyze", &model("xor-signalling.model"), "--format", "json"]));
    assert_eq!(r["evaluated"], 110);
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["analyze", &model("classical-jamming-observed.model"), "--format", "json"]);
    let b = run(&["analyze", &model("classical-jamming-observed.model"), "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn loops() {
    let o = run(&["loops", &model("affects-loop.model")]);
    assert!(stdout(&o).contains("ACL: certified"));
    let o = run(&["loops", &model("hidden-loop.model"), "--witness", &model("disconnected.model")]);
    assert!(stdout(&o).contains("HCL: certified"));
    // the witness must be acyclic
    let o = run(&["loops", &model("hidden-loop.model"), "--witness", &model("hidden-loop.model")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ns_and_compat() {
    let o = run(&["ns", &model("pr-jamming.model")]);
    let s = stdout(&o);
    assert!(s.contains("NS3: false") && s.contains("NS3': true") && s.contains("jamming: true"), "{s}");
    let o = run(&["compat", &model("classical-jamming-observed.model")]);
    assert!(stdout(&o).contains("Incompatible"));
    let o = run(&["compat", &model("hidden-loop.model")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("embedding"));
}

#[test]
fn scenarios() {
    let o = run(&["scenario", "classical-jamming-observed"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("expected Incompatible, got Incompatible"));
    let o = run(&["scenario", "--all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["scenario", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_law_is_located() {
    let dir = std::env::temp_dir().join(format!("causaloop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.model");
    std::fs::write(&path, "[nodes]\nA observed 0 1\n\n[laws]\nA = 1/2 1/3\n").unwrap();
    let o = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5") && err.contains("[laws]"), "{err}");
}

#[test]
fn shipped_models_match_the_library() {
    for entry in std::fs::read_dir(models()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        if name == "disconnected" {
            continue;
        }
        let o = run(&["scenario", &name, "--export"]);
        assert_eq!(stdout(&o), std::fs::read_to_string(&path).unwrap(), "{name}");
    }
}
