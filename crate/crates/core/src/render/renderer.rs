use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use image::RgbImage;
use rayon::prelude::*;
use url::Url;
use wait_timeout::ChildExt;

use super::assets::fetch_assets;
use crate::error::{Error, RenderFailure, Result};

/// Environment variable overriding the renderer executable.
pub const RENDERER_ENV: &str = "TABLESIEVE_RENDERER";
pub const DEFAULT_RENDERER: &str = "wkhtmltoimage";
pub const DEFAULT_TIMEOUT_SECS: f64 = 30.0;
/// Page width the default renderer lays out at when given no width flag.
pub const DEFAULT_VIEWPORT_WIDTH: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetPolicy {
    Fetch,
    Offline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderJob {
    pub example_id: String,
    pub html_path: PathBuf,
    /// Base for resolving relative asset references.
    pub base_url: Option<Url>,
    pub asset_policy: AssetPolicy,
    pub output_path: PathBuf,
    pub timeout: Duration,
}

impl RenderJob {
    pub fn new(
        example_id: impl Into<String>,
        html_path: impl Into<PathBuf>,
        output_path: impl Into<PathBuf>,
        timeout: Duration,
    ) -> Result<Self> {
        if timeout.is_zero() {
            return Err(Error::InvalidArgument("render timeout must be positive".into()));
        }
        Ok(RenderJob {
            example_id: example_id.into(),
            html_path: html_path.into(),
            base_url: None,
            asset_policy: AssetPolicy::Offline,
            output_path: output_path.into(),
            timeout,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RendererConfig {
    pub executable: PathBuf,
    /// Flags placed before the input and output paths.
    pub args: Vec<String>,
    pub viewport_width: u32,
    /// Crop the image to the bounding box of pixels that differ from the
    /// top-left (background) pixel.
    pub trim: bool,
    pub asset_timeout: Duration,
}

impl Default for RendererConfig {
    fn default() -> Self {
        RendererConfig {
            executable: DEFAULT_RENDERER.into(),
            args: ["--format", "png", "--quality", "100"].map(String::from).to_vec(),
            viewport_width: DEFAULT_VIEWPORT_WIDTH,
            trim: true,
            asset_timeout: Duration::from_secs(10),
        }
    }
}

impl RendererConfig {
    /// Defaults, with the executable taken from `TABLESIEVE_RENDERER` if set.
    pub fn from_env() -> Self {
        let mut cfg = RendererConfig::default();
        if let Some(exe) = std::env::var_os(RENDERER_ENV).filter(|v| !v.is_empty()) {
            cfg.executable = exe.into();
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOutcome {
    pub example_id: String,
    pub output_path: PathBuf,
    pub width: u32,
    pub height: u32,
    pub viewport_width: u32,
    pub assets_fetched: usize,
}

/// Wraps a table fragment in a minimal document with no page margin.
pub fn wrap_fragment(fragment: &str) -> String {
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"></head>\
         <body style=\"margin:0;background:#ffffff\">\n{fragment}\n</body></html>\n"
    )
}

fn failed(job: &RenderJob, reason: RenderFailure, stderr: String) -> Error {
    Error::RenderFailed {
        example_id: job.example_id.clone(),
        reason,
        stderr,
    }
}

/// Collects a child's stderr on a helper thread. The thread is detached on
/// timeout, since a grandchild may keep the pipe open.
struct StderrTap {
    buf: Arc<Mutex<Vec<u8>>>,
    done: mpsc::Receiver<()>,
}

impl StderrTap {
    fn spawn(mut pipe: impl Read + Send + 'static) -> Self {
        let buf = Arc::new(Mutex::new(Vec::new()));
        let (tx, done) = mpsc::channel();
        let sink = Arc::clone(&buf);
        thread::spawn(move || {
            let mut chunk = [0u8; 4096];
            while let Ok(n) = pipe.read(&mut chunk) {
                if n == 0 {
                    break;
                }
                sink.lock().expect("stderr buffer").extend_from_slice(&chunk[..n]);
            }
            let _ = tx.send(());
        });
        StderrTap { buf, done }
    }

    fn collect(self, wait: Duration) -> String {
        let _ = self.done.recv_timeout(wait);
        let bytes = self.buf.lock().expect("stderr buffer");
        String::from_utf8_lossy(&bytes).into_owned()
    }
}

fn run_renderer(job: &RenderJob, cfg: &RendererConfig, input: &Path, output: &Path) -> Result<()> {
    let mut child = Command::new(&cfg.executable)
        .args(&cfg.args)
        .arg(input)
        .arg(output)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| {
            failed(
                job,
                RenderFailure::Spawn(format!("{}: {e}", cfg.executable.display())),
                String::new(),
            )
        })?;
    let tap = StderrTap::spawn(child.stderr.take().expect("piped stderr"));

    let status = match child.wait_timeout(job.timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(failed(job, RenderFailure::Timeout, tap.collect(Duration::from_millis(50))));
        }
        Err(e) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(failed(job, RenderFailure::Spawn(e.to_string()), String::new()));
        }
    };
    let stderr = tap.collect(Duration::from_millis(500));
    if !status.success() {
        return Err(failed(job, RenderFailure::ExitStatus(status.code()), stderr));
    }
    if !stderr.trim().is_empty() {
        log::debug!("renderer stderr for {}: {}", job.example_id, stderr.trim());
    }
    Ok(())
}

/// Bounding box `(x, y, w, h)` of pixels differing from the top-left pixel.
fn content_box(img: &RgbImage) -> Option<(u32, u32, u32, u32)> {
    let bg = *img.get_pixel(0, 0);
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for (x, y, p) in img.enumerate_pixels() {
        if *p != bg {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    (x0 != u32::MAX).then(|| (x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Renders one table to a PNG at `job.output_path`.
///
/// The fragment is wrapped in a minimal document inside a private temp
/// directory, assets are fetched there when the policy allows, and the
/// renderer is killed once the timeout expires. An output without any
/// non-background pixel counts as empty.
pub fn render_table(job: &RenderJob, cfg: &RendererConfig) -> Result<RenderOutcome> {
    let fragment = fs::read_to_string(&job.html_path).map_err(|e| Error::io(&job.html_path, e))?;
    let workdir = tempfile::Builder::new()
        .prefix("tablesieve-render-")
        .tempdir()
        .map_err(|e| Error::io(std::env::temp_dir(), e))?;

    let (fragment, assets_fetched) = match (&job.asset_policy, &job.base_url) {
        (AssetPolicy::Fetch, Some(base)) => {
            let fetched = fetch_assets(&fragment, base, workdir.path(), cfg.asset_timeout);
            (fetched.html, fetched.files.len())
        }
        _ => (fragment, 0),
    };
    let input = workdir.path().join("table.html");
    fs::write(&input, wrap_fragment(&fragment)).map_err(|e| Error::io(&input, e))?;
    let raw = workdir.path().join("table.png");
    run_renderer(job, cfg, &input, &raw)?;

    let empty = |why: String| failed(job, RenderFailure::EmptyOutput, why);
    match fs::metadata(&raw) {
        Ok(m) if m.len() > 0 => {}
        _ => return Err(empty(String::new())),
    }
    let mut img = image::open(&raw).map_err(|e| empty(e.to_string()))?.to_rgb8();
    if img.width() == 0 || img.height() == 0 {
        return Err(empty("zero-area image".into()));
    }
    if cfg.trim {
        let Some((x, y, w, h)) = content_box(&img) else {
            return Err(empty("image has no content".into()));
        };
        img = image::imageops::crop_imm(&img, x, y, w, h).to_image();
    }
    if let Some(parent) = job.output_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    img.save_with_format(&job.output_path, image::ImageFormat::Png)
        .map_err(|e| Error::Image(format!("{}: {e}", job.output_path.display())))?;

    Ok(RenderOutcome {
        example_id: job.example_id.clone(),
        output_path: job.output_path.clone(),
        width: img.width(),
        height: img.height(),
        viewport_width: cfg.viewport_width,
        assets_fetched,
    })
}

/// Renders jobs on a pool of `parallelism` workers; results keep job order.
pub fn render_all(jobs: &[RenderJob], cfg: &RendererConfig, parallelism: usize) -> Result<Vec<Result<RenderOutcome>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start render pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|job| render_table(job, cfg)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn content_box_finds_drawn_region() {
        let mut img = RgbImage::from_pixel(10, 8, Rgb([255, 255, 255]));
        img.put_pixel(2, 3, Rgb([0, 0, 0]));
        img.put_pixel(5, 6, Rgb([0, 0, 0]));
        assert_eq!(content_box(&img), Some((2, 3, 4, 4)));
        assert_eq!(content_box(&RgbImage::from_pixel(4, 4, Rgb([1, 2, 3]))), None);
    }

    #[test]
    fn zero_timeout_is_rejected() {
        assert!(RenderJob::new("a", "a.html", "a.png", Duration::ZERO).is_err());
    }

    #[test]
    fn default_command_shape() {
        let cfg = RendererConfig::default();
        assert_eq!(cfg.args, ["--format", "png", "--quality", "100"]);
        assert_eq!(cfg.viewport_width, 1024);
    }

    #[test]
    fn wrap_has_body() {
        let doc = wrap_fragment("<table></table>");
        assert!(doc.contains("<body") && doc.contains("<table></table>"));
    }
}
