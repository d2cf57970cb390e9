use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use sha2::{Digest, Sha256};
use tablesieve::corpus::{
    is_english, page_title, read_warc, sample_one_table, stylesheet_links, DatasetManifest, LabeledExample,
};
use tablesieve::table::{parse_table, passes_size_filter, visible_text};
use tablesieve::Split;

use crate::artifacts::{create_dir, manifest_base, pick, save_manifest};
use crate::config::Context;
use crate::error::{CliError, CmdResult};
use crate::IngestArgs;

#[derive(Default)]
struct Tally {
    pages: usize,
    no_table: usize,
    unparseable: usize,
    non_english: usize,
    duplicate: usize,
    skipped_records: usize,
    kept: usize,
    filtered: usize,
}

fn example_id(url: &str) -> String {
    hex::encode(&Sha256::digest(url.as_bytes())[..8])
}

pub fn run(ctx: &Context, args: IngestArgs) -> CmdResult {
    let out = pick(args.out, ctx.config.paths.manifest.as_ref(), "--out manifest")?;
    let base = manifest_base(&out);
    let html_dir = base.join("html");
    create_dir(&html_dir)?;

    let mut manifest = DatasetManifest::default();
    let mut seen = HashSet::new();
    let mut tally = Tally::default();
    for warc in &args.warcs {
        ingest_one(ctx, warc, &html_dir, &base, args.keep_non_english, &mut seen, &mut manifest, &mut tally)?;
    }
    save_manifest(&mut manifest, ctx, &out)?;
    eprintln!(
        "ingest: {} pages, {} tables kept ({} fail the size filter); skipped {} without table, {} unparseable, \
         {} non-English, {} duplicate URLs, {} malformed records",
        tally.pages,
        tally.kept,
        tally.filtered,
        tally.no_table,
        tally.unparseable,
        tally.non_english,
        tally.duplicate,
        tally.skipped_records
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn ingest_one(
    ctx: &Context,
    warc: &Path,
    html_dir: &Path,
    base: &Path,
    keep_non_english: bool,
    seen: &mut HashSet<String>,
    manifest: &mut DatasetManifest,
    tally: &mut Tally,
) -> CmdResult {
    let file = File::open(warc).map_err(|e| CliError::data(format!("cannot open {}: {e}", warc.display())))?;
    let pages = read_warc(BufReader::new(file)).map_err(|e| CliError::data(format!("{}: {e}", warc.display())))?;
    for page in pages {
        let page = match page {
            Ok(p) => p,
            Err(e) if e.is_terminal() => return Err(CliError::data(format!("{}: {e}", warc.display()))),
            Err(e) => {
                log::warn!("{}: skipping record: {e}", warc.display());
                tally.skipped_records += 1;
                continue;
            }
        };
        tally.pages += 1;
        let Some(table) = sample_one_table(&page, ctx.seed()) else {
            tally.no_table += 1;
            continue;
        };
        let grid = match parse_table(&table) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("{}: {e}", page.url);
                tally.unparseable += 1;
                continue;
            }
        };
        let mut text = visible_text(&grid);
        if let Some(title) = page_title(&page.html) {
            text.push(' ');
            text.push_str(&title);
        }
        if !keep_non_english && !is_english(&text) {
            tally.non_english += 1;
            continue;
        }
        let id = example_id(page.url.as_str());
        if !seen.insert(id.clone()) {
            tally.duplicate += 1;
            continue;
        }
        let mut doc = stylesheet_links(&page.html).join("\n");
        if !doc.is_empty() {
            doc.push('\n');
        }
        doc.push_str(&table);
        let path = html_dir.join(format!("{id}.html"));
        std::fs::write(&path, doc).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;

        let passes = passes_size_filter(&grid);
        tally.kept += 1;
        tally.filtered += usize::from(!passes);
        manifest.entries.push(LabeledExample {
            id,
            source_url: page.url.to_string(),
            html_path: crate::artifacts::relative_to(&path, base),
            image_path: None,
            label: None,
            split: Split::Unsplit,
            rows: grid.n_rows,
            cols: grid.n_cols,
            passes_size_filter: Some(passes),
            render: None,
        });
    }
    Ok(())
}
