//! End-to-end runs of the binary over the checked-in toy corpus.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use premise_forge::features::FeatureStore;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_premise-forge")
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../premise-forge/tests/fixtures/corpus_a")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("PREMISE_FORGE_CONFIG")
        .output()
        .expect("binary runs")
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Writes the text feature fixture as a PFV1 binary for the CLI.
fn features_pfv(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(fixture_dir().join("features.tsv")).unwrap();
    let mut store: Option<FeatureStore> = None;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let mut fields = line.split_whitespace();
        let id: u64 = fields.next().unwrap().parse().unwrap();
        let vector: Vec<f32> = fields.map(|v| v.parse().unwrap()).collect();
        store
            .get_or_insert_with(|| FeatureStore::new(vector.len()))
            .insert(id, vector)
            .unwrap();
    }
    let path = dir.join("features.pfv");
    store.unwrap().save(&path).unwrap();
    path
}

fn s(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

#[test]
fn build_qrpe_matches_checked_in_oracle_output_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let features = features_pfv(dir.path());
    let fixtures = fixture_dir();
    let out1 = dir.path().join("tuples1.jsonl");
    let out2 = dir.path().join("tuples2.jsonl");
    for out in [&out1, &out2] {
        let output = run(&[
            "build-qrpe",
            "--in",
            &s(&fixtures.join("questions.jsonl")),
            "--objects",
            &s(&fixtures.join("objects.jsonl")),
            "--attributes",
            &s(&fixtures.join("attributes.jsonl")),
            "--exclusions",
            &s(&fixtures.join("exclusions.txt")),
            "--features",
            &s(&features),
            "--out",
            &s(out),
            "--dataset-out",
            &s(&dir.path().join("dataset.jsonl")),
        ]);
        assert_success(&output);
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("tuples           4"), "{}", stdout);
        assert!(stdout.contains("train            2"), "{}", stdout);
        assert!(stdout.contains("val              2"), "{}", stdout);
    }
    let expected = std::fs::read(fixtures.join("expected_tuples.jsonl")).unwrap();
    let first = std::fs::read(&out1).unwrap();
    assert_eq!(first, expected, "tuple output drifted from checked-in oracle");
    assert_eq!(first, std::fs::read(&out2).unwrap(), "rerun not byte-identical");
    // balanced dataset: one relevant and one irrelevant row per tuple
    let dataset = std::fs::read_to_string(dir.path().join("dataset.jsonl")).unwrap();
    assert_eq!(dataset.lines().count(), 8);
}

#[test]
fn extract_reports_premises_per_question() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("premises.jsonl");
    let output = run(&[
        "extract",
        "--in",
        &s(&fixture_dir().join("questions.jsonl")),
        "--out",
        &s(&out),
        "--strict",
    ]);
    assert_success(&output);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["question_id"], 1);
    let premises: Vec<&str> = first["premises"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(premises, vec!["<dog>", "<dog, big>", "<dog, red>", "<dog, old>"]);
    // existential question under --strict has no premises
    let second: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
    assert!(second["premises"].as_array().unwrap().is_empty());
}

#[test]
fn generate_then_stats_reports_zero_no_answers() {
    let dir = tempfile::tempdir().unwrap();
    let questions = dir.path().join("questions.jsonl");
    std::fs::write(
        &questions,
        concat!(
            "{\"question_id\": 1, \"image_id\": 1, \"text\": \"Why is the man looking at the lady?\"}\n",
            "{\"question_id\": 2, \"image_id\": 1, \"text\": \"Where is the pink hat?\"}\n",
            "{\"question_id\": 3, \"image_id\": 2, \"text\": \"What is the child sitting on?\"}\n",
        ),
    )
    .unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    let output = run(&["generate", "--in", &s(&questions), "--out", &s(&pairs)]);
    assert_success(&output);
    let generated = std::fs::read_to_string(&pairs).unwrap();
    assert!(generated.contains("Is there a hat in the image?"));
    assert!(generated.contains("What is the color of the hat?"));

    let output = run(&["stats", "--answer-types", &s(&pairs)]);
    assert_success(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    let no_line = stdout.lines().find(|l| l.starts_with("No")).unwrap();
    assert_eq!(no_line.split_whitespace().last().unwrap(), "0");
}

#[test]
fn train_eval_explain_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let features = features_pfv(dir.path());
    let fixtures = fixture_dir();
    let tuples = dir.path().join("tuples.jsonl");
    assert_success(&run(&[
        "build-qrpe",
        "--in",
        &s(&fixtures.join("questions.jsonl")),
        "--objects",
        &s(&fixtures.join("objects.jsonl")),
        "--attributes",
        &s(&fixtures.join("attributes.jsonl")),
        "--exclusions",
        &s(&fixtures.join("exclusions.txt")),
        "--features",
        &s(&features),
        "--out",
        &s(&tuples),
    ]));
    let model = dir.path().join("fpd.pmlp");
    let output = run(&[
        "train",
        "--kind",
        "fpd",
        "--in",
        &s(&tuples),
        "--questions",
        &s(&fixtures.join("questions.jsonl")),
        "--features",
        &s(&features),
        "--model",
        &s(&model),
        "--epochs",
        "50",
        "--seed",
        "7",
    ]);
    assert_success(&output);
    assert!(model.exists());
    assert!(dir.path().join("fpd.pmlp.json").exists());

    let output = run(&[
        "eval",
        "--in",
        &s(&tuples),
        "--questions",
        &s(&fixtures.join("questions.jsonl")),
        "--features",
        &s(&features),
        "--model",
        &s(&model),
    ]);
    assert_success(&output);
    assert!(String::from_utf8_lossy(&output.stdout).contains("overall"));

    // ground-truth explanation: image 4 has a cat but no dog
    let output = run(&[
        "explain",
        "--question",
        "Where is the big red old dog?",
        "--image-id",
        "4",
        "--objects",
        &s(&fixtures.join("objects.jsonl")),
        "--attributes",
        &s(&fixtures.join("attributes.jsonl")),
        "--exclusions",
        &s(&fixtures.join("exclusions.txt")),
    ]);
    assert_success(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("There is no dog in the image."),
        "{}",
        stdout
    );

    // model-backed explanation runs end to end
    let output = run(&[
        "explain",
        "--question",
        "Where is the big red old dog?",
        "--image-id",
        "4",
        "--model",
        &s(&model),
        "--features",
        &s(&features),
        "--json",
    ]);
    assert_success(&output);
}

#[test]
fn relevance_model_workflow_over_dataset_rows() {
    let dir = tempfile::tempdir().unwrap();
    let features = features_pfv(dir.path());
    let fixtures = fixture_dir();
    let tuples = dir.path().join("tuples.jsonl");
    let dataset = dir.path().join("dataset.jsonl");
    assert_success(&run(&[
        "build-qrpe",
        "--in",
        &s(&fixtures.join("questions.jsonl")),
        "--objects",
        &s(&fixtures.join("objects.jsonl")),
        "--attributes",
        &s(&fixtures.join("attributes.jsonl")),
        "--exclusions",
        &s(&fixtures.join("exclusions.txt")),
        "--features",
        &s(&features),
        "--out",
        &s(&tuples),
        "--dataset-out",
        &s(&dataset),
    ]));
    for kind in ["relq", "relqp"] {
        let model = dir.path().join(format!("{}.pmlp", kind));
        assert_success(&run(&[
            "train",
            "--kind",
            kind,
            "--in",
            &s(&dataset),
            "--questions",
            &s(&fixtures.join("questions.jsonl")),
            "--features",
            &s(&features),
            "--model",
            &s(&model),
            "--epochs",
            "40",
            "--hidden",
            "16",
        ]));
        let output = run(&[
            "eval",
            "--kind",
            kind,
            "--in",
            &s(&dataset),
            "--questions",
            &s(&fixtures.join("questions.jsonl")),
            "--features",
            &s(&features),
            "--model",
            &s(&model),
        ]);
        assert_success(&output);
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("overall"), "{}", stdout);
        assert!(stdout.contains("first-order"), "{}", stdout);
    }
}

#[test]
fn stats_over_tuples_and_distances() {
    let dir = tempfile::tempdir().unwrap();
    let features = features_pfv(dir.path());
    let fixtures = fixture_dir();
    let tuples = dir.path().join("tuples.jsonl");
    assert_success(&run(&[
        "build-qrpe",
        "--in",
        &s(&fixtures.join("questions.jsonl")),
        "--objects",
        &s(&fixtures.join("objects.jsonl")),
        "--attributes",
        &s(&fixtures.join("attributes.jsonl")),
        "--exclusions",
        &s(&fixtures.join("exclusions.txt")),
        "--features",
        &s(&features),
        "--out",
        &s(&tuples),
    ]));
    let output = run(&[
        "stats",
        "--tuples",
        &s(&tuples),
        "--questions",
        &s(&fixtures.join("questions.jsonl")),
    ]);
    assert_success(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("tuples           4"), "{}", stdout);
    assert!(stdout.contains("second order     2"), "{}", stdout);

    let output = run(&[
        "stats",
        "--distances",
        &s(&tuples),
        "--features",
        &s(&features),
        "--bucket-width",
        "0.5",
        "--baseline-seed",
        "3",
    ]);
    assert_success(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("# builder-selected pairs"), "{}", stdout);
    assert!(stdout.contains("mean="), "{}", stdout);
    assert!(stdout.contains("# shuffled baseline pairs"), "{}", stdout);
}

#[test]
fn augment_merges_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("source.jsonl");
    std::fs::write(
        &source,
        concat!(
            "{\"question_id\": 1, \"image_id\": 1, \"text\": \"What color is the dog?\", \"answer\": \"red\"}\n",
            "{\"question_id\": 2, \"image_id\": 2, \"text\": \"Why is the man looking at the lady?\", \"answer\": \"curious\"}\n",
        ),
    )
    .unwrap();
    let pairs = dir.path().join("pairs.jsonl");
    assert_success(&run(&["generate", "--in", &s(&source), "--out", &s(&pairs)]));
    let merged = dir.path().join("merged.jsonl");
    let output = run(&[
        "augment",
        "--in",
        &s(&source),
        "--generated",
        &s(&pairs),
        "--strategy",
        "only-binary",
        "--out",
        &s(&merged),
    ]);
    assert_success(&output);
    let text = std::fs::read_to_string(&merged).unwrap();
    assert!(text.lines().count() > 2);
    for line in text.lines().skip(2) {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["answer"], "yes");
        assert!(value["provenance"]["premise"].is_string());
    }
}

#[test]
fn nearest_finds_verbatim_question() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(
        &corpus,
        concat!(
            "{\"question_id\": 5, \"image_id\": 1, \"text\": \"man dog\"}\n",
            "{\"question_id\": 6, \"image_id\": 2, \"text\": \"cat hat\"}\n",
        ),
    )
    .unwrap();
    let embeddings = dir.path().join("embeddings.txt");
    std::fs::write(&embeddings, "man 1 0\ndog 0 1\ncat -1 0\nhat 0 -1\n").unwrap();
    let output = run(&[
        "nearest",
        "--in",
        &s(&corpus),
        "--embeddings",
        &s(&embeddings),
        "--question",
        "man dog",
    ]);
    assert_success(&output);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.starts_with("5\t"), "{}", stdout);
}

#[test]
fn exit_codes_distinguish_usage_and_data_errors() {
    // unknown flag: usage error, exit 1
    let output = run(&["extract", "--bogus"]);
    assert_eq!(output.status.code(), Some(1));
    // missing input file: data error, exit 2
    let output = run(&[
        "extract",
        "--in",
        "/nonexistent/questions.jsonl",
        "--out",
        "/nonexistent/out.jsonl",
    ]);
    assert_eq!(output.status.code(), Some(2));
    // malformed record: data error with a line number on stderr
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"question_id\": 1}\n").unwrap();
    let output = run(&["extract", "--in", &s(&bad), "--out", &s(&dir.path().join("o.jsonl"))]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains(":1:"));
    // help exits zero
    let output = run(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let stoplist = dir.path().join("stoplist.txt");
    // a stoplist that also drops "dog"
    std::fs::write(&stoplist, "photo\nimage\npicture\nphotograph\ndog\n").unwrap();
    let config = dir.path().join("forge.conf");
    std::fs::write(&config, format!("stoplist={}\n", stoplist.display())).unwrap();
    let questions = dir.path().join("q.jsonl");
    std::fs::write(
        &questions,
        "{\"question_id\": 1, \"image_id\": 1, \"text\": \"Where is the red dog?\"}\n",
    )
    .unwrap();
    let out = dir.path().join("p.jsonl");
    let output = Command::new(bin())
        .args(["extract", "--in", &s(&questions), "--out", &s(&out)])
        .env("PREMISE_FORGE_CONFIG", &config)
        .output()
        .unwrap();
    assert_success(&output);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains("dog"), "config stoplist ignored: {}", text);
}
