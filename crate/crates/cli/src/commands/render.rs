use std::time::Duration;

use tablesieve::corpus::RenderRecord;
use tablesieve::error::RenderFailure;
use tablesieve::render::{render_all, AssetPolicy, RenderJob};
use tablesieve::Error;
use url::Url;

use crate::artifacts::{create_dir, load_manifest, manifest_base, pick, relative_to, save_manifest};
use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::RenderArgs;

pub fn run(ctx: &Context, args: RenderArgs) -> CmdResult {
    let settings = &ctx.config.renderer;
    let manifest_path = pick(args.manifest, ctx.config.paths.manifest.as_ref(), "--manifest")?;
    let out_dir = pick(args.out, ctx.config.paths.image_dir.as_ref(), "--out image directory")?;
    let timeout = args.render_timeout_secs.unwrap_or(settings.timeout_secs);
    if !(timeout > 0.0) || !timeout.is_finite() {
        return Err(CliError::usage("--render-timeout-secs must be positive"));
    }
    let parallelism = args.parallelism.unwrap_or(settings.parallelism);
    let policy = if args.fetch_assets { AssetPolicy::Fetch } else { settings.asset_policy };
    let renderer = settings.renderer_config();

    let mut manifest = load_manifest(&manifest_path)?;
    let base = manifest_base(&manifest_path);
    create_dir(&out_dir)?;

    let mut jobs = Vec::new();
    let mut positions = Vec::new();
    for (i, e) in manifest.entries.iter().enumerate() {
        if e.passes_size_filter == Some(false) {
            continue;
        }
        let mut job = RenderJob::new(
            e.id.clone(),
            base.join(&e.html_path),
            out_dir.join(format!("{}.png", e.id)),
            Duration::from_secs_f64(timeout),
        )?;
        job.asset_policy = policy;
        job.base_url = Url::parse(&e.source_url).ok();
        jobs.push(job);
        positions.push(i);
    }

    let results = render_all(&jobs, &renderer, parallelism)?;
    let (mut ok, mut failed) = (0usize, 0usize);
    let mut spawn_error = None;
    for (result, &i) in results.into_iter().zip(&positions) {
        let entry = &mut manifest.entries[i];
        match result {
            Ok(outcome) => {
                ok += 1;
                entry.image_path = Some(relative_to(&outcome.output_path, &base));
                entry.render = Some(RenderRecord {
                    viewport_width: outcome.viewport_width,
                    width: outcome.width,
                    height: outcome.height,
                    error: None,
                });
            }
            Err(Error::RenderFailed { example_id, reason, stderr }) => {
                failed += 1;
                let stderr = stderr.trim();
                log::warn!("render failed for {example_id}: {reason}{}{stderr}", if stderr.is_empty() { "" } else { ": " });
                if let RenderFailure::Spawn(msg) = &reason {
                    spawn_error.get_or_insert_with(|| msg.clone());
                }
                entry.image_path = None;
                entry.render = Some(RenderRecord {
                    viewport_width: renderer.viewport_width,
                    width: 0,
                    height: 0,
                    error: Some(reason.to_string()),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }

    let out_manifest = args.out_manifest.unwrap_or(manifest_path);
    save_manifest(&mut manifest, ctx, &out_manifest)?;
    eprintln!("render: {ok} rendered, {failed} failed");
    match spawn_error {
        Some(msg) => Err(CliError::External(format!(
            "renderer could not be started ({msg}); set {} or renderer.executable",
            tablesieve::render::RENDERER_ENV
        ))),
        None => Ok(()),
    }
}
