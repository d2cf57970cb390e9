use std::collections::HashMap;

use serde_json::json;
use tablesieve::eval::stratified_split;
use tablesieve::{Label, Split};

use crate::artifacts::{load_manifest, pick, save_manifest};
use crate::config::Context;
use crate::error::CmdResult;
use crate::SplitArgs;

pub fn run(ctx: &Context, args: SplitArgs) -> CmdResult {
    let manifest_path = pick(args.manifest, ctx.config.paths.manifest.as_ref(), "--manifest")?;
    let mut manifest = load_manifest(&manifest_path)?;
    let items: Vec<(String, Label)> = manifest
        .entries
        .iter()
        .filter(|e| e.passes_size_filter != Some(false))
        .filter_map(|e| e.label.map(|l| (e.id.clone(), l)))
        .collect();
    let assignment = stratified_split(&items, args.test_frac, args.val_frac, ctx.seed())?;
    let mut splits: HashMap<&str, Split> = HashMap::new();
    for (ids, split) in [(&assignment.train, Split::Train), (&assignment.val, Split::Val), (&assignment.test, Split::Test)] {
        splits.extend(ids.iter().map(|id| (id.as_str(), split)));
    }
    for e in &mut manifest.entries {
        e.split = splits.get(e.id.as_str()).copied().unwrap_or(Split::Unsplit);
    }
    let out = args.out.unwrap_or(manifest_path);
    save_manifest(&mut manifest, ctx, &out)?;
    eprintln!(
        "split: {} train, {} val, {} test {}",
        assignment.train.len(),
        assignment.val.len(),
        assignment.test.len(),
        json!({"test_frac": args.test_frac, "val_frac": args.val_frac})
    );
    Ok(())
}
