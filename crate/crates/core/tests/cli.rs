use std::path::Path;
use std::process::{Command, Output};

fn deckforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deckforge"))
        .args(args)
        .env_remove("DECKFORGE_ASSETS")
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(&format!("{key}: ")))
}

#[test]
fn no_arguments_is_a_usage_error() {
    let o = deckforge(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("usage"));
}

#[test]
fn json_to_stdout_is_repeatable() {
    let a = deckforge(&["cat", "--seed", "7", "--format", "json", "-o", "-"]);
    let b = deckforge(&["cat", "--seed", "7", "--format", "json", "-o", "-"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["slides"].as_array().unwrap().len(), 7);
    assert_eq!(v["topic"], "cat");
}

#[test]
fn pptx_and_html_files() {
    let dir = tempfile::tempdir().unwrap();
    for (format, file, magic) in [("pptx", "talk.pptx", &b"PK"[..]), ("html", "talk.html", &b"<!DOCTYPE"[..])] {
        let path = dir.path().join(file);
        let o = deckforge(&["coffee", "--seed", "3", "--slides", "9", "--format", format, "-o", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let out = stdout(&o);
        assert_eq!(report_value(&out, "topic"), Some("coffee"));
        assert_eq!(report_value(&out, "seed"), Some("3"));
        assert_eq!(report_value(&out, "slides"), Some("9"));
        assert_eq!(report_value(&out, "output"), Some(path.to_str().unwrap()));
        assert!(std::fs::read(&path).unwrap().starts_with(magic));
    }
}

#[test]
fn pecha_kucha_defaults_to_twenty_slides() {
    let o = deckforge(&["river", "--seed", "11", "--schema", "pecha_kucha", "--format", "json", "-o", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["slides"].as_array().unwrap().len(), 20);
}

#[test]
fn config_errors() {
    let o = deckforge(&["cat", "--schema", "no_such_schema"]);
    assert_eq!(o.status.code(), Some(3));
    let o = deckforge(&["bench", "/nonexistent/topics.txt", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let o = deckforge(&["cat", "--slides", "0"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn export_error_for_unwritable_output() {
    let o = deckforge(&["cat", "--seed", "1", "-o", "/nonexistent/dir/out.pptx"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn bench_reports_every_topic() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("topics.txt");
    std::fs::write(&list, "cat\n# skipped\n\ncoffee\nguitar\n").unwrap();
    let o = deckforge(&["bench", list.to_str().unwrap(), "--seed", "5", "--runs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(report_value(&out, "seed"), Some("5"));
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect::<Vec<_>>()).filter(|c| c.len() == 8 && c[0] != "topic").collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[1][0], "cat");
    assert_eq!(rows[1][2], "6");
    assert!(rows.iter().all(|r| r[3] == "ok"));
    assert_eq!(report_value(&out, "decks"), Some("6"));
    assert_eq!(report_value(&out, "failures"), Some("0"));
    assert!(report_value(&out, "under_threshold").unwrap().starts_with("1.000"));
}

#[test]
fn assets_dir_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_deckforge"))
        .args(["cat", "--seed", "1", "--format", "json", "-o", "-"])
        .env("DECKFORGE_ASSETS", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/corpus").is_dir());
}
