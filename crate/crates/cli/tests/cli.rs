use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgexplain_core::gateway::FILLER_PHRASES;
use kgexplain_core::text::tokenize;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kgexplain"));
    cmd.env_remove("RUST_LOG");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Builds the synthetic graph into `dir/kg`.
fn built_graph(dir: &Path) -> PathBuf {
    let out = dir.join("kg");
    let o = run(&["build-kg", "--corpus", s(&repo_file("data/synthetic/corpus.jsonl")), "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

const CHAIN: &str = r#"{"type":"node","id":"g","level":"learning_goal","title":"Goal","description":"The learning goal."}
{"type":"node","id":"c","level":"course","title":"Course","description":"A course on things."}
{"type":"node","id":"t","level":"topic","title":"Topic","description":"A topic in the course."}
{"type":"edge","head":"g","tail":"c","kind":"taxonomy_child"}
{"type":"edge","head":"c","tail":"t","kind":"taxonomy_child"}
"#;

#[test]
fn build_kg_writes_graph_communities_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = built_graph(dir.path());
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("taxonomy edges: 42"), "{report}");
    assert!(report.contains("learning objects"));
    assert!(report.lines().any(|l| l.starts_with("communities: ")));
    assert!(out.join("graph.jsonl").exists());
    assert!(out.join("communities.json").exists());
}

#[test]
fn dangling_edge_names_file_line_and_edge() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("bad.jsonl");
    fs::write(&corpus, format!("{CHAIN}{}\n", r#"{"type":"edge","head":"t","tail":"ghost","kind":"taxonomy_child"}"#)).unwrap();
    let o = run(&["build-kg", "--corpus", s(&corpus), "--out-dir", s(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("bad.jsonl:6"), "{err}");
    assert!(err.contains("t -> ghost"), "{err}");
}

#[test]
fn threshold_one_adds_no_semantic_edges_and_flags_beat_config() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = repo_file("data/synthetic/corpus.jsonl");
    let o = run(&["build-kg", "--corpus", s(&corpus), "--out-dir", s(&dir.path().join("a")), "--threshold", "1.0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("semantic edges: 0 "), "{}", stdout(&o));

    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[similarity]\nthreshold = 1.0\n").unwrap();
    let from_file = run(&["build-kg", "--config", s(&cfg), "--corpus", s(&corpus), "--out-dir", s(&dir.path().join("b"))]);
    assert!(stdout(&from_file).contains("semantic edges: 0 "));
    let overridden = run(&[
        "build-kg", "--config", s(&cfg), "--corpus", s(&corpus), "--out-dir", s(&dir.path().join("c")), "--threshold", "0.35",
    ]);
    assert!(!stdout(&overridden).contains("semantic edges: 0 "));
}

#[test]
fn recommend_prints_unique_chain() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("chain.jsonl");
    fs::write(&corpus, CHAIN).unwrap();
    let o = run(&["recommend", "--graph", s(&corpus), "--start", "t", "--goal", "g"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    assert_eq!(ids, ["t", "c", "g"]);

    let o = run(&["recommend", "--graph", s(&corpus), "--start", "t", "--goal", "c"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not a learning goal"));

    let o = run(&["recommend", "--graph", s(&corpus), "--start", "t", "--goal", "g", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["path"]["steps"], serde_json::json!(["t", "c", "g"]));
}

#[test]
fn explain_without_context_is_filler_only() {
    let dir = tempfile::tempdir().unwrap();
    let kg = built_graph(dir.path());
    let graph = kg.join("graph.jsonl");
    let o = run(&["explain", "--graph", s(&graph), "--target", "o05", "--no-context", "--dump-context"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("(no context)"));
    let filler: std::collections::HashSet<String> = FILLER_PHRASES.iter().flat_map(|p| tokenize(p)).collect();
    for line in text.lines().skip(2).filter(|l| !l.is_empty()) {
        let (_, body) = line.split_once(": ").unwrap();
        assert!(tokenize(body).iter().all(|w| filler.contains(w)), "{line}");
    }

    let o = run(&["explain", "--graph", s(&graph), "--communities", s(&kg.join("communities.json")), "--target", "o05", "--dump-context"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("[HIERARCHY]"));
}

#[test]
fn evaluate_reproduces_golden_reports() {
    let dir = tempfile::tempdir().unwrap();
    let kg = built_graph(dir.path());
    let out = dir.path().join("eval");
    let o = run(&[
        "evaluate", "--graph", s(&kg.join("graph.jsonl")), "--paths", s(&repo_file("data/synthetic/paths.jsonl")), "--backend", "mock",
        "--out-dir", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = fs::read_to_string(repo_file("data/synthetic/golden/report.txt")).unwrap();
    assert_eq!(fs::read_to_string(out.join("report.txt")).unwrap(), golden);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let aggregates: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(repo_file("data/synthetic/golden/aggregates.json")).unwrap()).unwrap();
    assert_eq!(report["aggregates"], aggregates);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["build-kg", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["explain", "--graph", "x", "--target", "y", "--with-context", "--no-context"]).status.code(), Some(2));
    assert_eq!(run(&["evaluate", "--graph", "x", "--paths", "y", "--out-dir", "z", "--backend", "other"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[recommender]\nunknown_key = 1\n").unwrap();
    let o = run(&["synth", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_api_key_is_a_backend_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("chain.jsonl");
    fs::write(&corpus, CHAIN).unwrap();
    let o = bin()
        .args(["explain", "--graph", s(&corpus), "--target", "t", "--backend", "remote"])
        .env_remove("KGEXPLAIN_API_KEY")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("KGEXPLAIN_API_KEY"));
}

#[test]
fn failed_samples_exit_five_without_leaking_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let kg = built_graph(dir.path());
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[backend]\nkind = \"remote\"\nbase_url = \"http://127.0.0.1:9\"\nretries = 0\ntimeout_ms = 500\n").unwrap();
    let paths = dir.path().join("paths.jsonl");
    fs::write(&paths, "{\"start\":\"o01\",\"goal\":\"g1\"}\n").unwrap();
    let secret = "sk-test-very-secret-value";
    let out = dir.path().join("eval");
    let o = bin()
        .args(["evaluate", "--config", s(&cfg), "--graph", s(&kg.join("graph.jsonl")), "--paths", s(&paths), "--out-dir", s(&out)])
        .env("KGEXPLAIN_API_KEY", secret)
        .env("RUST_LOG", "trace")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    let everything = format!(
        "{}{}{}{}",
        stdout(&o),
        stderr(&o),
        fs::read_to_string(out.join("report.json")).unwrap(),
        fs::read_to_string(out.join("report.txt")).unwrap()
    );
    assert!(everything.contains("failed"));
    assert!(!everything.contains(secret));
}

#[test]
fn synth_matches_shipped_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--out-dir", s(dir.path())]);
    assert!(o.status.success());
    for name in ["corpus.jsonl", "paths.jsonl"] {
        assert_eq!(
            fs::read_to_string(dir.path().join(name)).unwrap(),
            fs::read_to_string(repo_file(&format!("data/synthetic/{name}"))).unwrap()
        );
    }
}

#[test]
fn shipped_default_config_matches_builtin_defaults() {
    use kgexplain_core::AppConfig;
    let path = repo_file("config/default.toml");
    let expected = AppConfig::default().to_toml_string();
    if std::env::var_os("KGEXPLAIN_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &expected).unwrap();
    }
    let shipped = fs::read_to_string(&path).unwrap();
    assert_eq!(AppConfig::from_toml_str(&shipped).unwrap(), AppConfig::default());
    assert_eq!(shipped, expected);
}
