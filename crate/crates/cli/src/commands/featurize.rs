use rayon::prelude::*;
use serde_json::json;
use tablesieve::corpus::LabeledExample;
use tablesieve::features::{extract_features, select_features_cfs, FeatureCatalogue, FeatureMatrix, CATALOGUE_VERSION};
use tablesieve::render::preprocess;
use tablesieve::table::parse_table;
use tablesieve::visual::{ModelManifest, VisualModel};
use tablesieve::{Label, Result as CoreResult};

use crate::artifacts::{ensure_parent, load_manifest, manifest_base, pick, write_sidecar};
use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::{FeatureKind, FeaturizeArgs};

pub fn run(ctx: &Context, args: FeaturizeArgs) -> CmdResult {
    let manifest_path = pick(args.manifest, ctx.config.paths.manifest.as_ref(), "--manifest")?;
    let out = match args.out {
        Some(p) => p,
        None => pick(None, ctx.config.paths.feature_dir.as_ref(), "--out")?.join(format!("{}.csv", args.kind.as_str())),
    };
    let manifest = load_manifest(&manifest_path)?;
    let base = manifest_base(&manifest_path);

    let (mut matrix, model_name) = match args.kind {
        FeatureKind::Html => {
            if args.model.is_some() {
                return Err(CliError::usage("--model applies to visual feature kinds only"));
            }
            let mut m = FeatureMatrix::new(FeatureCatalogue::v1().names);
            for e in manifest.entries.iter().filter(|e| e.passes_size_filter != Some(false)) {
                let path = base.join(&e.html_path);
                let html = std::fs::read_to_string(&path)
                    .map_err(|err| CliError::data(format!("cannot read {}: {err}", path.display())))?;
                let grid = parse_table(&html).map_err(|err| CliError::data(format!("{}: {err}", e.id)))?;
                m.push(e.id.clone(), e.label, extract_features(&grid).values)?;
            }
            (m, None)
        }
        FeatureKind::VisualTop | FeatureKind::VisualAll => {
            let name = args
                .model
                .ok_or_else(|| CliError::usage("--model is required for visual feature kinds"))?;
            let model_manifest = ModelManifest::load(&ctx.model_manifest(&name)?)?;
            (visual_matrix(&model_manifest, &manifest.entries, &base, args.kind)?, Some(name))
        }
    };

    let mut selected = None;
    if let Some(k) = args.cfs {
        let (x, y): (Vec<Vec<f64>>, Vec<Label>) = matrix.labeled();
        let cols = select_features_cfs(&x, &y, k)?;
        matrix = matrix.project(&cols);
        selected = Some(matrix.names.clone());
    }

    ensure_parent(&out)?;
    matrix.save(&out)?;
    write_sidecar(
        &out,
        ctx,
        "featurize",
        json!({
            "kind": args.kind.as_str(),
            "model": model_name,
            "catalogue_version": CATALOGUE_VERSION,
            "cfs_selected": selected,
            "rows": matrix.rows.len(),
        }),
    )?;
    eprintln!("featurize: {} rows × {} features → {}", matrix.rows.len(), matrix.dim(), out.display());
    Ok(())
}

fn visual_matrix(
    model_manifest: &ModelManifest,
    entries: &[LabeledExample],
    base: &std::path::Path,
    kind: FeatureKind,
) -> CmdResult<FeatureMatrix> {
    let model = VisualModel::load(model_manifest)?;
    let rendered: Vec<&LabeledExample> = entries.iter().filter(|e| e.image_path.is_some()).collect();
    let skipped = entries.len() - rendered.len();
    if skipped > 0 {
        log::warn!("{skipped} entries have no image and are skipped");
    }
    let vectors: Vec<CoreResult<Vec<f64>>> = rendered
        .par_iter()
        .map(|e| {
            let tensor = preprocess(&base.join(e.image_path.as_ref().expect("filtered")), model_manifest)?;
            let v = match kind {
                FeatureKind::VisualTop => model.extract_top(&tensor)?,
                _ => model.extract_all(&tensor)?,
            };
            Ok(v.values)
        })
        .collect();

    let prefix = if kind == FeatureKind::VisualTop { "top" } else { "all" };
    let dim = match kind {
        FeatureKind::VisualTop => model_manifest.top_output.channels,
        _ => model_manifest.tap_channel_sum(),
    };
    let names = (0..dim)
        .map(|i| format!("{}_{}_{prefix}_{i}", model_manifest.backbone, model_manifest.mode.as_str()))
        .collect();
    let mut matrix = FeatureMatrix::new(names);
    for (e, v) in rendered.iter().zip(vectors) {
        matrix.push(e.id.clone(), e.label, v?)?;
    }
    Ok(matrix)
}
