//! TOML pipeline configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tablesieve::corpus::Provenance;
use tablesieve::render::{AssetPolicy, RendererConfig, DEFAULT_TIMEOUT_SECS, DEFAULT_VIEWPORT_WIDTH};

use crate::error::{CliError, CmdResult};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: Paths,
    pub renderer: RendererSettings,
    /// Visual model manifests by name.
    pub models: BTreeMap<String, ModelRef>,
    pub classifier: ClassifierSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: DEFAULT_SEED,
            paths: Paths::default(),
            renderer: RendererSettings::default(),
            models: BTreeMap::new(),
            classifier: ClassifierSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    pub image_dir: Option<PathBuf>,
    pub model_dir: Option<PathBuf>,
    pub feature_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RendererSettings {
    /// Overridden by `TABLESIEVE_RENDERER`.
    pub executable: Option<PathBuf>,
    pub args: Option<Vec<String>>,
    pub timeout_secs: f64,
    pub parallelism: usize,
    pub viewport_width: u32,
    pub asset_policy: AssetPolicy,
    pub trim: bool,
}

impl Default for RendererSettings {
    fn default() -> Self {
        RendererSettings {
            executable: None,
            args: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            parallelism: 4,
            viewport_width: DEFAULT_VIEWPORT_WIDTH,
            asset_policy: AssetPolicy::Offline,
            trim: true,
        }
    }
}

impl RendererSettings {
    pub fn renderer_config(&self) -> RendererConfig {
        let mut cfg = RendererConfig::from_env();
        if std::env::var_os(tablesieve::render::RENDERER_ENV).is_none() {
            if let Some(exe) = &self.executable {
                cfg.executable = exe.clone();
            }
        }
        if let Some(args) = &self.args {
            cfg.args = args.clone();
        }
        cfg.viewport_width = self.viewport_width;
        cfg.trim = self.trim;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRef {
    /// Path to `model.json` or the directory holding it.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    pub preset: String,
    pub nested_default_layout: bool,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            preset: "dwtc-retrained".into(),
            nested_default_layout: false,
        }
    }
}

/// Loaded configuration plus the values every artifact records.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: PipelineConfig,
    pub config_hash: String,
}

impl Context {
    /// Reads the config file if given; relative paths inside it resolve
    /// against its directory. `seed` overrides the file's seed.
    pub fn load(path: Option<&Path>, seed: Option<u64>) -> CmdResult<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display())))?;
                let mut cfg: PipelineConfig = toml::from_str(&text)
                    .map_err(|e| CliError::usage(format!("invalid config {}: {e}", p.display())))?;
                cfg.resolve_paths(p.parent().unwrap_or(Path::new(".")));
                cfg
            }
            None => PipelineConfig::default(),
        };
        if let Some(s) = seed {
            config.seed = s;
        }
        config.check()?;
        let config_hash = hash_config(&config);
        Ok(Context { config, config_hash })
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            seed: self.config.seed,
            config_hash: self.config_hash.clone(),
        }
    }

    /// Manifest path of a named model, or `name` itself taken as a path.
    pub fn model_manifest(&self, name: &str) -> CmdResult<PathBuf> {
        if let Some(m) = self.config.models.get(name) {
            return Ok(m.manifest.clone());
        }
        let p = PathBuf::from(name);
        if p.exists() {
            return Ok(p);
        }
        let known: Vec<&str> = self.config.models.keys().map(String::as_str).collect();
        Err(CliError::usage(format!(
            "unknown model `{name}`; configured models: [{}]",
            known.join(", ")
        )))
    }
}

impl PipelineConfig {
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.paths.manifest,
            &mut self.paths.image_dir,
            &mut self.paths.model_dir,
            &mut self.paths.feature_dir,
            &mut self.renderer.executable,
        ]
        .into_iter()
        .flatten()
        {
            // Bare executable names are looked up on PATH.
            if p.components().count() > 1 || p.exists() {
                fix(p);
            }
        }
        for m in self.models.values_mut() {
            fix(&mut m.manifest);
        }
    }

    fn check(&self) -> CmdResult<()> {
        if !(self.renderer.timeout_secs > 0.0) {
            return Err(CliError::usage("renderer.timeout_secs must be positive"));
        }
        for (name, m) in &self.models {
            if !m.manifest.exists() {
                return Err(CliError::data(format!(
                    "model `{name}`: manifest {} does not exist",
                    m.manifest.display()
                )));
            }
        }
        Ok(())
    }
}

/// First 16 hex digits of SHA-256 over the canonical JSON form.
pub fn hash_config(config: &PipelineConfig) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    hex::encode(&digest[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let text = r#"
            seed = 7
            [paths]
            manifest = "data/dataset.jsonl"
            [renderer]
            timeout_secs = 5.0
            parallelism = 2
            asset_policy = "fetch"
            [classifier]
            preset = "dwtc-original"
            nested_default_layout = true
        "#;
        let cfg: PipelineConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.renderer.asset_policy, AssetPolicy::Fetch);
        assert!(cfg.classifier.nested_default_layout);
        assert_eq!(cfg.renderer.viewport_width, 1024);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sed = 1").is_err());
    }

    #[test]
    fn hash_depends_on_content() {
        let a = PipelineConfig::default();
        let b = PipelineConfig { seed: 1, ..PipelineConfig::default() };
        assert_eq!(hash_config(&a), hash_config(&PipelineConfig::default()));
        assert_ne!(hash_config(&a), hash_config(&b));
        assert_eq!(hash_config(&a).len(), 16);
    }
}
