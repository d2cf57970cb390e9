use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{Rgb, RgbImage};

fn tablesieve(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tablesieve"));
    cmd.args(args).env_remove("TABLESIEVE_RENDERER");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "exit {:?}\n{}", out.status.code(), stderr(&out));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn manifest_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn synth_writes_fragments_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    ok(tablesieve(&["--seed", "5", "synth", "--n-genuine", "2", "--n-layout", "2", "--out", p(&corpus)]));
    let html: Vec<PathBuf> = fs::read_dir(corpus.join("html")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(html.len(), 4);
    let lines = manifest_lines(&corpus.join("dataset.jsonl"));
    assert_eq!(lines.len(), 5, "header plus four entries");
    assert_eq!(lines[0]["seed"], 5);
    let labels: Vec<&str> = lines[1..].iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert_eq!(labels.iter().filter(|l| **l == "genuine").count(), 2);
    for e in &lines[1..] {
        assert!(corpus.join(e["html_path"].as_str().unwrap()).exists());
    }
}

#[test]
fn html_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = d.join("corpus");
    let manifest = corpus.join("dataset.jsonl");
    ok(tablesieve(&["synth", "--n-genuine", "40", "--n-layout", "40", "--out", p(&corpus)]));
    ok(tablesieve(&["split", "--manifest", p(&manifest), "--test-frac", "0.25"]));
    let splits: Vec<String> = manifest_lines(&manifest)[1..]
        .iter()
        .map(|e| e["split"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(splits.iter().filter(|s| *s == "test").count(), 20);

    let features = d.join("html.csv");
    ok(tablesieve(&["featurize", "--manifest", p(&manifest), "--kind", "html", "--out", p(&features)]));
    assert!(d.join("html.csv.meta.json").exists());
    let header = fs::read_to_string(&features).unwrap().lines().next().unwrap().to_string();
    assert!(header.starts_with("id,label,"));

    let model = d.join("rf.json");
    ok(tablesieve(&[
        "train", "--features", p(&features), "--classifier", "rf", "--preset", "dwtc-original", "--manifest",
        p(&manifest), "--out", p(&model),
    ]));
    let preds = d.join("rf.csv");
    ok(tablesieve(&["classify", "--model", p(&model), "--features", p(&features), "--out", p(&preds)]));
    let pred_text = fs::read_to_string(&preds).unwrap();
    assert_eq!(pred_text.lines().next().unwrap(), "id,label,probability");
    assert_eq!(pred_text.lines().count(), 81);

    let nested = d.join("rf-nested.csv");
    ok(tablesieve(&[
        "classify", "--model", p(&model), "--features", p(&features), "--nested-default-layout", "--out",
        p(&nested),
    ]));

    let report_dir = d.join("eval");
    let out = ok(tablesieve(&[
        "evaluate", "--pred", p(&preds), "--pred", p(&nested), "--gold", p(&manifest), "--split", "test", "--out",
        p(&report_dir),
    ]));
    let report = fs::read_to_string(report_dir.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3, "{report}");
    assert!(fs::read_to_string(report_dir.join("mcnemar.csv")).unwrap().lines().count() == 2);
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("Weighted avg."), "{table}");
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut models = Vec::new();
    for run in 0..2 {
        let base = dir.path().join(format!("run{run}"));
        let corpus = base.join("corpus");
        let features = base.join("f.csv");
        let model = base.join("m.json");
        ok(tablesieve(&["--seed", "9", "synth", "--n-genuine", "15", "--n-layout", "15", "--out", p(&corpus)]));
        ok(tablesieve(&[
            "featurize", "--manifest", p(&corpus.join("dataset.jsonl")), "--kind", "html", "--out", p(&features),
        ]));
        ok(tablesieve(&["--seed", "9", "train", "--features", p(&features), "--preset", "dwtc-original", "--out", p(&model)]));
        models.push(fs::read(&model).unwrap());
    }
    assert_eq!(models[0], models[1]);
}

#[test]
fn evaluate_reports_missing_ids_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("gold.csv");
    fs::write(&gold, "id,label\na,genuine\nb,layout\nc,layout\n").unwrap();
    let preds = dir.path().join("p.csv");
    fs::write(&preds, "id,label,probability\na,genuine,0.900000\n").unwrap();
    let out = tablesieve(&["evaluate", "--pred", p(&preds), "--gold", p(&gold), "--out", p(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains('b') && err.contains('c'), "{err}");
}

#[test]
fn unknown_preset_is_a_usage_error_listing_presets() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    let features = dir.path().join("f.csv");
    ok(tablesieve(&["synth", "--n-genuine", "4", "--n-layout", "4", "--out", p(&corpus)]));
    ok(tablesieve(&["featurize", "--manifest", p(&corpus.join("dataset.jsonl")), "--kind", "html", "--out", p(&features)]));
    let out = tablesieve(&["train", "--features", p(&features), "--preset", "fancy", "--out", p(&dir.path().join("m.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("dwtc-original") && err.contains("dwtc-retrained"), "{err}");

    let out = tablesieve(&["train", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(tablesieve(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_supplies_paths_and_unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(tablesieve(&["synth", "--n-genuine", "3", "--n-layout", "3", "--out", p(&d.join("corpus"))]));
    let config = d.join("pipeline.toml");
    fs::write(
        &config,
        "seed = 3\n[paths]\nmanifest = \"corpus/dataset.jsonl\"\nfeature_dir = \"features\"\n",
    )
    .unwrap();
    ok(tablesieve(&["--config", p(&config), "featurize", "--kind", "html", "--out", p(&d.join("f.csv"))]));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("f.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);

    fs::write(&config, "seed = 3\ncolour = \"blue\"\n").unwrap();
    let out = tablesieve(&["--config", p(&config), "featurize", "--kind", "html", "--out", p(&d.join("g.csv"))]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

fn table_png(path: &Path) {
    RgbImage::from_fn(100, 60, |x, y| {
        let inside = (5..=95).contains(&x) && (5..=55).contains(&y);
        if inside && (x == 5 || x == 50 || x == 95 || y == 5 || y == 30 || y == 55) {
            Rgb([0, 0, 0])
        } else if inside && (x + y) % 7 == 0 {
            Rgb([120, 120, 120])
        } else {
            Rgb([255, 255, 255])
        }
    })
    .save(path)
    .unwrap();
}

#[cfg(unix)]
fn renderer_script(dir: &Path) -> PathBuf {
    use std::os::unix::fs::PermissionsExt;
    let fixture = dir.join("fixture.png");
    table_png(&fixture);
    let path = dir.join("render.sh");
    fs::write(&path, format!("#!/bin/sh\nfor last; do :; done\ncp {} \"$last\"\n", fixture.display())).unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    path
}

#[cfg(unix)]
#[test]
fn visual_pipeline_with_stub_renderer_and_stub_model() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = d.join("corpus");
    let manifest = corpus.join("dataset.jsonl");
    ok(tablesieve(&["synth", "--n-genuine", "3", "--n-layout", "3", "--out", p(&corpus)]));

    let renderer = renderer_script(d);
    let images = d.join("images");
    ok(run_with_env(
        &["render", "--manifest", p(&manifest), "--out", p(&images), "--parallelism", "2"],
        &[("TABLESIEVE_RENDERER", &renderer)],
    ));
    let entries = manifest_lines(&manifest);
    for e in &entries[1..] {
        assert_eq!(e["render"]["width"], 91);
        assert_eq!(e["render"]["viewport_width"], 1024);
        assert!(corpus.join(e["image_path"].as_str().unwrap()).exists());
    }

    let model_dir = d.join("vgg16");
    ok(tablesieve(&["stub-model", "--backbone", "vgg16", "--out", p(&model_dir)]));
    assert!(model_dir.join("model.onnx").exists() && model_dir.join("model.json").exists());

    for (kind, width) in [("visual-top", 512), ("visual-all", 1472)] {
        let out = d.join(format!("{kind}.csv"));
        let model_json = model_dir.join("model.json");
        ok(tablesieve(&[
            "featurize", "--manifest", p(&manifest), "--kind", kind, "--model", p(&model_json), "--out", p(&out),
        ]));
        let text = fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert_eq!(text.lines().next().unwrap().split(',').count(), width + 2);
    }

    let constant = d.join("constant");
    ok(tablesieve(&["stub-model", "--backbone", "vgg16", "--constant-probability", "0.1", "--out", p(&constant)]));
    let preds = d.join("visual.csv");
    ok(tablesieve(&[
        "classify", "--visual-model", p(&constant.join("model.json")), "--manifest", p(&manifest), "--out", p(&preds),
    ]));
    let text = fs::read_to_string(&preds).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().skip(1).all(|l| l.contains(",layout,0.1")), "{text}");

    let out = tablesieve(&["stub-model", "--backbone", "vgg16", "--constant-probability", "1.5", "--out", p(&d.join("bad"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_renderer_is_an_external_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let manifest = corpus.join("dataset.jsonl");
    ok(tablesieve(&["synth", "--n-genuine", "2", "--n-layout", "2", "--out", p(&corpus)]));
    let missing = dir.path().join("no-such-renderer");
    let out = run_with_env(
        &["render", "--manifest", p(&manifest), "--out", p(&dir.path().join("img"))],
        &[("TABLESIEVE_RENDERER", &missing)],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("TABLESIEVE_RENDERER"));
    let entries = manifest_lines(&manifest);
    assert!(entries[1..].iter().all(|e| e["render"]["error"].is_string()));
}
