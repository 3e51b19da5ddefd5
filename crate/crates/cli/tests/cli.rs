use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn genbias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genbias"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sample(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/sample")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_vectors(path: &Path) -> Vec<(String, Vec<f64>)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(' ');
            let word = it.next().unwrap().to_owned();
            (word, it.map(|x| x.parse().unwrap()).collect())
        })
        .collect()
}

fn dumped_direction(subspace: &str) -> Vec<f64> {
    let out = genbias(&[
        "dump-direction",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--subspace",
        subspace,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["method"], subspace);
    assert_eq!(json["n_pairs_used"], 5);
    json["vector"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn temp_path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn audit_text_report() {
    let out = genbias(&[
        "audit",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--percent",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for needle in [
        "[occupations] neutral",
        "[gendered_occupations] gendered_pairs",
        "[anger]",
        "Partial RIPA",
        "RND-g",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn audit_json_is_deterministic_and_versioned() {
    let dir = tempfile::tempdir().unwrap();
    let a = temp_path(&dir, "a.json");
    let b = temp_path(&dir, "b.json");
    for path in [&a, &b] {
        let out = genbias(&[
            "audit",
            "--embeddings",
            &sample("embeddings.vec"),
            "--lexicon",
            &sample("lexicon.json"),
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let a = std::fs::read(a).unwrap();
    assert_eq!(a, std::fs::read(b).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["cells"].as_array().unwrap().len(), 6 * 2 * 5);
}

#[test]
fn audit_csv_has_a_row_per_cell() {
    let out = genbias(&[
        "audit",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--format",
        "csv",
        "--mu-mode",
        "along",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "condition,category,kind,metric,status,value,abs_value,n_used,n_skipped,reason"
    );
    assert_eq!(lines.count(), 60);
}

#[test]
fn missing_lexicon_is_a_usage_error() {
    let out = genbias(&["audit", "--embeddings", &sample("embeddings.vec")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--lexicon"));
}

#[test]
fn invalid_choice_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = genbias(&[
        "debias",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--method",
        "hard",
        "--subspace",
        "pca",
        "--out",
        temp_path(&dir, "x.vec").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let bad_floor = genbias(&[
        "audit",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--coverage-floor",
        "1.5",
    ]);
    assert_eq!(bad_floor.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = genbias(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("audit"));
}

#[test]
fn coverage_below_floor_is_a_data_error() {
    let out = genbias(&[
        "audit",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--coverage-floor",
        "0.8",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("anger: 3/4"), "{err}");
    assert!(err.contains("चिढ़"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_file_is_a_data_error() {
    let out = genbias(&[
        "coverage",
        "--embeddings",
        "/nonexistent/x.vec",
        "--lexicon",
        &sample("lexicon.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coverage_lists_utf8_oov_words() {
    let out = genbias(&[
        "coverage",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let anger = text.lines().find(|l| l.starts_with("anger ")).unwrap();
    assert!(
        anger.contains("3/4") && anger.contains("0.75") && anger.ends_with("चिढ़"),
        "{anger}"
    );
    assert!(text
        .lines()
        .any(|l| l.starts_with("fear ") && l.ends_with("घबराहट")));
    for full in ["target_pairs ", "occupations ", "joy "] {
        let line = text.lines().find(|l| l.starts_with(full)).unwrap();
        assert!(line.trim_end().ends_with("1.00"), "{line}");
    }
}

#[test]
fn coverage_of_disjoint_vocabulary_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let path = temp_path(&dir, "other.vec");
    std::fs::write(&path, "2 8\nfoo 1 0 0 0 0 0 0 0\nbar 0 1 0 0 0 0 0 0\n").unwrap();
    let out = genbias(&[
        "coverage",
        "--embeddings",
        path.to_str().unwrap(),
        "--lexicon",
        &sample("lexicon.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("overall 0.00"));
}

#[test]
fn projection_output_is_orthogonal_to_direction() {
    let dir = tempfile::tempdir().unwrap();
    for subspace in ["pca", "ripa"] {
        let path = temp_path(&dir, &format!("{subspace}.vec"));
        let out = genbias(&[
            "debias",
            "--embeddings",
            &sample("embeddings.vec"),
            "--lexicon",
            &sample("lexicon.json"),
            "--method",
            "projection",
            "--subspace",
            subspace,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("n_pairs_used=5"));
        let v = dumped_direction(subspace);
        let vectors = read_vectors(&path);
        assert_eq!(vectors.len(), 38);
        for (word, w) in vectors {
            assert!(dot(&w, &v).abs() <= 1e-8, "{word}: {}", dot(&w, &v));
        }
    }
}

#[test]
fn partial_projection_levels_the_direction() {
    let dir = tempfile::tempdir().unwrap();
    let path = temp_path(&dir, "partial.vec");
    let out = genbias(&[
        "debias",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--method",
        "partial",
        "--subspace",
        "ripa",
        "--mu-mode",
        "full",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = dumped_direction("ripa");
    let levels: Vec<f64> = read_vectors(&path)
        .iter()
        .map(|(_, w)| dot(w, &v))
        .collect();
    for l in &levels {
        assert!((l - levels[0]).abs() <= 1e-6);
    }
}

#[test]
fn debias_all_words_keeps_the_whole_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let path = temp_path(&dir, "all.vec");
    let out = genbias(&[
        "debias",
        "--embeddings",
        &sample("embeddings.vec"),
        "--lexicon",
        &sample("lexicon.json"),
        "--method",
        "projection",
        "--subspace",
        "pca",
        "--all-words",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let words: Vec<String> = read_vectors(&path).into_iter().map(|(w, _)| w).collect();
    assert_eq!(words.len(), 44);
    assert!(words.iter().any(|w| w == "और"));
}

#[test]
fn malformed_embeddings_are_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = temp_path(&dir, "bad.vec");
    std::fs::write(&path, "1 3\nराजा 1 2\n").unwrap();
    let out = genbias(&[
        "audit",
        "--embeddings",
        path.to_str().unwrap(),
        "--lexicon",
        &sample("lexicon.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"));
}
