use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde_json::json;
use tablesieve::eval::{load_predictions, mcnemar, mcnemar_csv, report_csv, report_text, score, NamedReport};
use tablesieve::features::FeatureMatrix;
use tablesieve::{Label, Split};

use crate::artifacts::{create_dir, load_manifest, write_sidecar};
use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::EvaluateArgs;

/// Gold labels in file order.
fn load_gold(path: &Path, split: Option<Split>) -> CmdResult<Vec<(String, Label)>> {
    let is_manifest = path.extension().is_some_and(|e| e == "jsonl");
    if is_manifest {
        let manifest = load_manifest(path)?;
        return Ok(manifest
            .entries
            .into_iter()
            .filter(|e| split.is_none_or(|s| e.split == s))
            .filter_map(|e| e.label.map(|l| (e.id, l)))
            .collect());
    }
    if split.is_some() {
        return Err(CliError::usage("--split needs a manifest as --gold"));
    }
    // A labels CSV is a feature CSV without feature columns.
    let m = FeatureMatrix::load(path)?;
    m.rows
        .into_iter()
        .map(|r| {
            r.label
                .map(|l| (r.id.clone(), l))
                .ok_or_else(|| CliError::data(format!("gold row `{}` has no label", r.id)))
        })
        .collect()
}

fn listed(ids: &BTreeSet<&str>) -> String {
    const SHOWN: usize = 10;
    let mut s: Vec<&str> = ids.iter().take(SHOWN).copied().collect();
    if ids.len() > SHOWN {
        s.push("…");
    }
    s.join(", ")
}

pub fn run(ctx: &Context, args: EvaluateArgs) -> CmdResult {
    let split = match &args.split {
        Some(s) => Some(match s.as_str() {
            "train" => Split::Train,
            "val" => Split::Val,
            "test" => Split::Test,
            "unsplit" => Split::Unsplit,
            other => return Err(CliError::usage(format!("unknown split `{other}`; expected train, val, test or unsplit"))),
        }),
        None => None,
    };
    let gold = load_gold(&args.gold, split)?;
    if gold.is_empty() {
        return Err(CliError::data("no labeled gold entries"));
    }
    let gold_ids: BTreeSet<&str> = gold.iter().map(|(id, _)| id.as_str()).collect();
    let gold_labels: Vec<Label> = gold.iter().map(|(_, l)| *l).collect();

    let mut names = Vec::new();
    let mut aligned: Vec<Vec<Label>> = Vec::new();
    for path in &args.preds {
        let preds = load_predictions(path)?;
        let by_id: HashMap<&str, Label> = preds.iter().map(|p| (p.id.as_str(), p.label)).collect();
        let pred_ids: BTreeSet<&str> = by_id.keys().copied().collect();
        let missing: BTreeSet<&str> = gold_ids.difference(&pred_ids).copied().collect();
        let extra: BTreeSet<&str> = pred_ids.difference(&gold_ids).copied().collect();
        if !missing.is_empty() {
            return Err(CliError::data(format!(
                "{}: {} gold ids have no prediction: {}",
                path.display(),
                missing.len(),
                listed(&missing)
            )));
        }
        if !extra.is_empty() && split.is_none() {
            return Err(CliError::data(format!(
                "{}: {} predicted ids are missing from the gold set: {}",
                path.display(),
                extra.len(),
                listed(&extra)
            )));
        }
        names.push(
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        );
        aligned.push(gold.iter().map(|(id, _)| by_id[id.as_str()]).collect());
    }

    let mut reports = Vec::new();
    for (name, preds) in names.iter().zip(&aligned) {
        reports.push(NamedReport {
            name: name.clone(),
            report: score(preds, &gold_labels)?,
        });
    }
    let mut pairs = Vec::new();
    for i in 0..aligned.len() {
        for j in i + 1..aligned.len() {
            pairs.push((names[i].clone(), names[j].clone(), mcnemar(&aligned[i], &aligned[j], &gold_labels)?));
        }
    }

    create_dir(&args.out)?;
    let report_path = args.out.join("report.csv");
    let mcnemar_path = args.out.join("mcnemar.csv");
    for (path, text) in [(&report_path, report_csv(&reports)), (&mcnemar_path, mcnemar_csv(&pairs))] {
        std::fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        write_sidecar(
            path,
            ctx,
            "evaluate",
            json!({ "gold": args.gold.display().to_string(), "split": args.split, "n": gold.len() }),
        )?;
    }
    print!("{}", report_text(&reports));
    Ok(())
}
