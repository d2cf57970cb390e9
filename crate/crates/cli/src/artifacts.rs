//! Output plumbing shared by the commands.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use tablesieve::corpus::{read_manifest, write_manifest, DatasetManifest};

use crate::config::Context;
use crate::error::{CliError, CmdResult};

/// `<path>.meta.json`, holding the provenance of a CSV or report.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn write_sidecar(path: &Path, ctx: &Context, command: &str, extra: Value) -> CmdResult {
    let mut meta = Map::new();
    meta.insert("command".into(), json!(command));
    meta.insert("seed".into(), json!(ctx.seed()));
    meta.insert("config_hash".into(), json!(ctx.config_hash));
    if let Value::Object(fields) = extra {
        meta.extend(fields);
    }
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&Value::Object(meta)).expect("json value") + "\n";
    std::fs::write(&side, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", side.display())))
}

pub fn read_sidecar(path: &Path) -> Option<Value> {
    let text = std::fs::read_to_string(sidecar_path(path)).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn ensure_parent(path: &Path) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(())
}

pub fn create_dir(path: &Path) -> CmdResult {
    std::fs::create_dir_all(path).map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))
}

/// Directory against which a manifest's relative paths resolve.
pub fn manifest_base(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// `path` relative to `base` when it lies below it, else unchanged.
pub fn relative_to(path: &Path, base: &Path) -> PathBuf {
    path.strip_prefix(base).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf())
}

pub fn load_manifest(path: &Path) -> CmdResult<DatasetManifest> {
    Ok(read_manifest(path)?)
}

pub fn save_manifest(manifest: &mut DatasetManifest, ctx: &Context, path: &Path) -> CmdResult {
    manifest.provenance = Some(ctx.provenance());
    ensure_parent(path)?;
    Ok(write_manifest(manifest, path)?)
}

/// The flag value, else the configured default, else a usage error.
pub fn pick(flag: Option<PathBuf>, configured: Option<&PathBuf>, what: &str) -> CmdResult<PathBuf> {
    flag.or_else(|| configured.cloned())
        .ok_or_else(|| CliError::usage(format!("missing {what}: pass the flag or set it in the config file")))
}
