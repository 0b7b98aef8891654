use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ineqlab::gridfn::CorpusFile;
use ineqlab::verify::{default_corpus, ReportDocument, DEFAULT_CORPUS_COUNT, DEFAULT_CORPUS_SEED};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ineqlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ineqlab")
}

fn shipped_corpus_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/default.json")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Set `INEQLAB_BLESS=1` to regenerate the shipped corpus.
#[test]
fn shipped_corpus_matches_generator() {
    let expected = default_corpus(DEFAULT_CORPUS_SEED, DEFAULT_CORPUS_COUNT).unwrap();
    if std::env::var_os("INEQLAB_BLESS").is_some() {
        let text = serde_json::to_string_pretty(&expected).unwrap();
        fs::write(shipped_corpus_path(), text + "\n").unwrap();
    }
    let shipped = CorpusFile::from_json(&fs::read_to_string(shipped_corpus_path()).unwrap()).unwrap();
    assert_eq!(shipped, expected);
}

#[test]
fn count_zero_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&["corpus", "gen", "--seed", "1", "--count", "0", "--dim", "1", "--grid", "8,64", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unknown_subcommand_and_flag_exit_two_with_usage() {
    for args in [&["frobnicate"][..], &["verify", "all", "--bogus"][..], &[][..]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn unknown_entry_and_question_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "run", "--id", "no_such_entry", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["probe", "--question", "nope", "--depth", "1", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corpus_gen_writes_versioned_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&["corpus", "gen", "--seed", "7", "--count", "3", "--dim", "2", "--grid", "4,32", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file = CorpusFile::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.format_version, ineqlab::FORMAT_VERSION);
    assert_eq!(file.sets[0].members.len(), 3);
    assert_eq!(file.sets[0].grid.points(), &[32, 32]);
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let cfg = dir.path().join("cfg.json");
    let body = serde_json::json!({"seed": 7, "count": 5, "dim": 1, "grid": "8,64", "out": out});
    fs::write(&cfg, body.to_string()).unwrap();
    let o = run(&["--config", p(&cfg), "corpus", "gen", "--count", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file = CorpusFile::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.sets[0].members.len(), 2);
    assert_eq!(file.sets[0].seed, Some(7));
}

fn strip_metadata(text: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    v.as_object_mut().unwrap().remove("metadata");
    v
}

#[test]
fn verify_run_is_deterministic_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.json");
    let o = run(&["corpus", "gen", "--seed", "3", "--count", "4", "--dim", "1", "--grid", "8,256", "--out", p(&corpus)]);
    assert!(o.status.success());
    let before = fs::read(&corpus).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = run(&["--threads", "2", "verify", "run", "--id", "hardy", "--corpus", p(&corpus), "--out", p(d)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&corpus).unwrap(), before);
    let ra = fs::read_to_string(a.join("report.json")).unwrap();
    let rb = fs::read_to_string(b.join("report.json")).unwrap();
    assert_eq!(strip_metadata(&ra), strip_metadata(&rb));
    let doc = ReportDocument::from_json(&ra).unwrap();
    assert!(doc.passed);

    let o = run(&["report", "render", "--in", p(&a), "--format", "csv"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(a.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    let o = run(&["report", "render", "--in", p(&a), "--format", "svg"]);
    assert!(o.status.success());
    assert!(a.join("svg/hardy_n1_members.svg").exists());
    assert!(a.join("svg/hardy_n1_resolution.svg").exists());
}

#[test]
fn probe_writes_labeled_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["probe", "--question", "obertype_n2", "--depth", "1", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("probe_obertype_n2.json")).unwrap()).unwrap();
    assert_eq!(v["format_version"], ineqlab::FORMAT_VERSION);
    assert!(v["label"].as_str().unwrap().starts_with("OPEN QUESTION"));
}
