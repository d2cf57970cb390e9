use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use tablesieve::classify::{save_forest, save_mlp, FeatureScope, PRESET_NAMES};
use tablesieve::eval::stratified_split;
use tablesieve::features::{FeatureMatrix, FeatureRow, CATALOGUE_VERSION};
use tablesieve::{ForestConfig, ForestModel, Label, MlpConfig, MlpModel, Split};

use crate::artifacts::{ensure_parent, load_manifest, read_sidecar};
use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::{ClassifierKind, TrainArgs};

pub const MLP_PRESETS: [&str; 1] = ["mlp-joint"];

/// Loads and joins feature CSVs on id.
pub fn load_features(paths: &[PathBuf]) -> CmdResult<FeatureMatrix> {
    let mut iter = paths.iter();
    let first = iter.next().ok_or_else(|| CliError::usage("no feature files given"))?;
    let mut matrix = FeatureMatrix::load(first)?;
    for p in iter {
        matrix = matrix.join(&FeatureMatrix::load(p)?)?;
    }
    Ok(matrix)
}

fn infer_scope(paths: &[PathBuf]) -> FeatureScope {
    if paths.len() > 1 {
        return FeatureScope::Joint;
    }
    let kind = read_sidecar(&paths[0]).and_then(|m| m.get("kind").and_then(|k| k.as_str()).map(str::to_owned));
    match kind.as_deref() {
        Some("visual-top") => FeatureScope::VisualTop,
        Some("visual-all") => FeatureScope::VisualAll,
        _ => FeatureScope::Html,
    }
}

fn xy(rows: &[&FeatureRow]) -> (Vec<Vec<f64>>, Vec<Label>) {
    rows.iter()
        .map(|r| (r.values.clone(), r.label.expect("labeled rows only")))
        .unzip()
}

fn default_out(ctx: &Context, preset: &str, classifier: ClassifierKind) -> CmdResult<PathBuf> {
    let dir = ctx
        .config
        .paths
        .model_dir
        .clone()
        .ok_or_else(|| CliError::usage("missing --out: pass the flag or set paths.model_dir"))?;
    let ext = match classifier {
        ClassifierKind::Rf => "forest.json",
        ClassifierKind::Mlp => "mlp.json",
    };
    Ok(dir.join(format!("{preset}.{ext}")))
}

pub fn run(ctx: &Context, args: TrainArgs) -> CmdResult {
    let matrix = load_features(&args.features)?;
    let scope = match &args.scope {
        Some(s) => s.parse::<FeatureScope>()?,
        None => infer_scope(&args.features),
    };
    let splits: Option<HashMap<String, Split>> = match &args.manifest {
        Some(p) => Some(load_manifest(p)?.entries.into_iter().map(|e| (e.id, e.split)).collect()),
        None => None,
    };
    let labeled: Vec<&FeatureRow> = matrix.rows.iter().filter(|r| r.label.is_some()).collect();
    let split_of = |r: &FeatureRow| splits.as_ref().and_then(|s| s.get(&r.id).copied()).unwrap_or(Split::Unsplit);
    let has_train = labeled.iter().any(|r| split_of(r) == Split::Train);
    let train_rows: Vec<&FeatureRow> = if has_train {
        labeled.iter().copied().filter(|r| split_of(r) == Split::Train).collect()
    } else {
        labeled.clone()
    };
    let val_rows: Vec<&FeatureRow> = labeled.iter().copied().filter(|r| split_of(r) == Split::Val).collect();
    let (x, y) = xy(&train_rows);

    let seed = ctx.seed();
    let (preset, log) = match args.classifier {
        ClassifierKind::Rf => {
            let preset = args.preset.clone().unwrap_or_else(|| ctx.config.classifier.preset.clone());
            let config = ForestConfig::preset(&preset, seed).map_err(|_| {
                CliError::usage(format!("unknown rf preset `{preset}`; valid presets: {}", PRESET_NAMES.join(", ")))
            })?;
            let mut model = ForestModel::train(&x, &y, &matrix.names, scope, CATALOGUE_VERSION, &config)?;
            model.provenance = Some(ctx.provenance());
            let out = args.out.clone().map_or_else(|| default_out(ctx, &preset, args.classifier), Ok)?;
            ensure_parent(&out)?;
            save_forest(&model, &out)?;
            (preset, (out, json!({ "trees": model.trees.len(), "tie_label": model.tie_label })))
        }
        ClassifierKind::Mlp => {
            let preset = args.preset.clone().unwrap_or_else(|| MLP_PRESETS[0].to_string());
            if !MLP_PRESETS.contains(&preset.as_str()) {
                return Err(CliError::usage(format!(
                    "unknown mlp preset `{preset}`; valid presets: {}",
                    MLP_PRESETS.join(", ")
                )));
            }
            let config = MlpConfig::joint(seed);
            let (tx, ty, vx, vy) = if val_rows.is_empty() {
                carve_validation(&train_rows, seed)
            } else {
                let (vx, vy) = xy(&val_rows);
                (x.clone(), y.clone(), vx, vy)
            };
            let mut model = MlpModel::train(&tx, &ty, &vx, &vy, &matrix.names, scope, &config)?;
            model.provenance = Some(ctx.provenance());
            let out = args.out.clone().map_or_else(|| default_out(ctx, &preset, args.classifier), Ok)?;
            ensure_parent(&out)?;
            save_mlp(&model, &out)?;
            let best = model
                .history
                .iter()
                .map(|h| h.val_loss)
                .fold(f64::INFINITY, f64::min);
            (preset, (out, json!({ "epochs": model.history.len(), "best_val_loss": best, "history": model.history })))
        }
    };
    let (out, details) = log;
    let genuine = y.iter().filter(|l| **l == Label::Genuine).count();
    let log_path = training_log_path(&out);
    write_training_log(
        &log_path,
        json!({
            "seed": seed,
            "config_hash": ctx.config_hash,
            "preset": preset,
            "scope": scope.as_str(),
            "features": args.features,
            "n_train": y.len(),
            "n_train_genuine": genuine,
            "n_train_layout": y.len() - genuine,
            "details": details,
        }),
    )?;
    eprintln!("train: {preset} on {} rows ({scope}) → {}", y.len(), out.display());
    Ok(())
}

/// Holds out a stratified 10% of the training rows for early stopping,
/// falling back to the training rows when a class is too small to split.
fn carve_validation(rows: &[&FeatureRow], seed: u64) -> (Vec<Vec<f64>>, Vec<Label>, Vec<Vec<f64>>, Vec<Label>) {
    let items: Vec<(String, Label)> = rows.iter().map(|r| (r.id.clone(), r.label.expect("labeled"))).collect();
    match stratified_split(&items, 0.0, 0.1, seed) {
        Ok(a) if !a.val.is_empty() => {
            let val: std::collections::HashSet<&str> = a.val.iter().map(String::as_str).collect();
            let (v, t): (Vec<&FeatureRow>, Vec<&FeatureRow>) = rows.iter().partition(|r| val.contains(r.id.as_str()));
            let (tx, ty) = xy(&t);
            let (vx, vy) = xy(&v);
            (tx, ty, vx, vy)
        }
        _ => {
            log::warn!("too few rows for a validation split; early stopping monitors the training rows");
            let (x, y) = xy(rows);
            (x.clone(), y.clone(), x, y)
        }
    }
}

fn training_log_path(model: &Path) -> PathBuf {
    let name = model.file_name().unwrap_or_default().to_string_lossy();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    model.with_file_name(format!("{stem}.log.json"))
}

fn write_training_log(path: &Path, value: serde_json::Value) -> CmdResult {
    let text = serde_json::to_string_pretty(&value).expect("json") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}
