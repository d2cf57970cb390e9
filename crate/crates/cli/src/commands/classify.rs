use rayon::prelude::*;
use serde_json::json;
use tablesieve::classify::{load_model, nested_default};
use tablesieve::eval::{save_predictions, Prediction};
use tablesieve::render::preprocess;
use tablesieve::visual::{ModelManifest, VisualModel};
use tablesieve::Result as CoreResult;

use super::train::load_features;
use crate::artifacts::{ensure_parent, load_manifest, manifest_base, write_sidecar};
use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::ClassifyArgs;

/// Catalogue column flagging nested tables.
const NESTED_COLUMN: &str = "has_nested";

pub fn run(ctx: &Context, args: ClassifyArgs) -> CmdResult {
    let predictions = match (&args.model, &args.visual_model) {
        (Some(_), _) => with_model(ctx, &args)?,
        (None, Some(name)) => with_visual_model(ctx, &args, name)?,
        (None, None) => return Err(CliError::usage("pass --model or --visual-model")),
    };
    ensure_parent(&args.out)?;
    save_predictions(&predictions, &args.out)?;
    write_sidecar(
        &args.out,
        ctx,
        "classify",
        json!({
            "model": args.model.as_ref().map(|p| p.display().to_string()).or(args.visual_model.clone()),
            "rows": predictions.len(),
        }),
    )?;
    eprintln!("classify: {} predictions → {}", predictions.len(), args.out.display());
    Ok(())
}

fn with_model(ctx: &Context, args: &ClassifyArgs) -> CmdResult<Vec<Prediction>> {
    let model = load_model(args.model.as_ref().expect("checked"))?;
    if args.features.is_empty() {
        return Err(CliError::usage("--features is required with --model"));
    }
    let matrix = load_features(&args.features)?;
    if matrix.names != model.feature_names() {
        return Err(CliError::data(format!(
            "feature columns do not match the model: model expects {} features ({} …), files provide {}",
            model.feature_names().len(),
            model.feature_names().iter().take(3).cloned().collect::<Vec<_>>().join(", "),
            matrix.names.len()
        )));
    }
    let enabled = args.nested_default_layout || ctx.config.classifier.nested_default_layout;
    let nested_col = matrix.names.iter().position(|n| n == NESTED_COLUMN);
    matrix
        .rows
        .iter()
        .map(|r| {
            let nested = nested_col.is_some_and(|c| r.values[c] >= 0.5);
            let (label, probability) = match nested_default(enabled, model.feature_scope(), nested) {
                Some(label) => (label, 0.0),
                None => model.predict(&r.values)?,
            };
            Ok(Prediction { id: r.id.clone(), label, probability })
        })
        .collect()
}

fn with_visual_model(ctx: &Context, args: &ClassifyArgs, name: &str) -> CmdResult<Vec<Prediction>> {
    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| ctx.config.paths.manifest.clone())
        .ok_or_else(|| CliError::usage("--manifest is required with --visual-model"))?;
    let manifest = load_manifest(&manifest_path)?;
    let base = manifest_base(&manifest_path);
    let model_manifest = ModelManifest::load(&ctx.model_manifest(name)?)?;
    if model_manifest.head_output.is_none() {
        return Err(CliError::data(format!("model `{name}` has no head output to classify with")));
    }
    let model = VisualModel::load(&model_manifest)?;
    let rendered: Vec<_> = manifest.entries.iter().filter(|e| e.image_path.is_some()).collect();
    let results: Vec<CoreResult<Prediction>> = rendered
        .par_iter()
        .map(|e| {
            let tensor = preprocess(&base.join(e.image_path.as_ref().expect("filtered")), &model_manifest)?;
            let (probability, label) = model.classify_visual(&tensor)?;
            Ok(Prediction { id: e.id.clone(), label, probability })
        })
        .collect();
    results.into_iter().map(|r| r.map_err(CliError::from)).collect()
}
