use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Duration;

use regex::Regex;
use url::Url;

/// Size cap for a single downloaded asset.
const MAX_ASSET_BYTES: u64 = 20 * 1024 * 1024;

static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?is)<(link|img)\b[^>]*>").unwrap());
static ATTR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?is)\s([a-z-]+)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'>]+))"#).unwrap()
});

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedHtml {
    pub html: String,
    /// Downloaded files, inside the job directory.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

struct AttrMatch {
    name: String,
    value: String,
    /// Byte range of the value inside the tag, quotes included.
    range: std::ops::Range<usize>,
}

fn attributes(tag: &str) -> Vec<AttrMatch> {
    ATTR.captures_iter(tag)
        .map(|c| {
            let value = c.get(2).or_else(|| c.get(3)).or_else(|| c.get(4)).expect("one alternative");
            let whole = c.get(0).expect("match");
            let eq = whole.as_str().find('=').expect("has =");
            AttrMatch {
                name: c[1].to_ascii_lowercase(),
                value: value.as_str().replace("&amp;", "&"),
                range: whole.start() + eq + 1..whole.end(),
            }
        })
        .collect()
}

/// The attribute holding the asset reference, if the tag references one.
fn asset_reference(kind: &str, attrs: &[AttrMatch]) -> Option<usize> {
    if kind.eq_ignore_ascii_case("img") {
        return attrs.iter().position(|a| a.name == "src");
    }
    let stylesheet = attrs
        .iter()
        .any(|a| a.name == "rel" && a.value.split_whitespace().any(|t| t.eq_ignore_ascii_case("stylesheet")));
    if stylesheet {
        attrs.iter().position(|a| a.name == "href")
    } else {
        None
    }
}

fn local_name(index: usize, url: &Url) -> String {
    let ext = Path::new(url.path())
        .extension()
        .and_then(|e| e.to_str())
        .filter(|e| !e.is_empty() && e.len() <= 5 && e.chars().all(|c| c.is_ascii_alphanumeric()))
        .map(|e| format!(".{}", e.to_ascii_lowercase()))
        .unwrap_or_default();
    format!("asset-{index}{ext}")
}

fn download(agent: &ureq::Agent, url: &Url) -> Result<Vec<u8>, String> {
    let mut resp = agent.get(url.as_str()).call().map_err(|e| e.to_string())?;
    resp.body_mut()
        .with_config()
        .limit(MAX_ASSET_BYTES)
        .read_to_vec()
        .map_err(|e| e.to_string())
}

/// Downloads every stylesheet `<link>` and `<img>` source into `dir` and
/// points the references at the local copies.
///
/// Failures never propagate: an asset that cannot be fetched keeps its
/// original reference and adds a warning, and when the host of `base_url`
/// does not resolve nothing is fetched at all.
pub fn fetch_assets(html: &str, base_url: &Url, dir: &Path, timeout: Duration) -> FetchedHtml {
    let mut out = FetchedHtml {
        html: html.to_string(),
        files: Vec::new(),
        warnings: Vec::new(),
    };
    let resolvable = base_url.socket_addrs(|| None).map(|a| !a.is_empty()).unwrap_or(false);
    if !resolvable {
        let msg = format!("cannot resolve host of {base_url}; skipping assets");
        log::warn!("{msg}");
        out.warnings.push(msg);
        return out;
    }

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .build()
        .into();
    let mut fetched: HashMap<Url, Option<String>> = HashMap::new();
    let mut rewritten = String::with_capacity(html.len());
    let mut cursor = 0;

    for tag in TAG.captures_iter(html) {
        let whole = tag.get(0).expect("match");
        let attrs = attributes(whole.as_str());
        let Some(i) = asset_reference(&tag[1], &attrs) else {
            continue;
        };
        let Ok(url) = base_url.join(attrs[i].value.trim()) else {
            out.warnings.push(format!("unparseable asset reference `{}`", attrs[i].value));
            continue;
        };
        if !matches!(url.scheme(), "http" | "https") {
            continue;
        }
        let local = fetched
            .entry(url.clone())
            .or_insert_with(|| {
                let name = local_name(out.files.len(), &url);
                let path = dir.join(&name);
                match download(&agent, &url).and_then(|bytes| fs::write(&path, bytes).map_err(|e| e.to_string())) {
                    Ok(()) => {
                        out.files.push(path);
                        Some(name)
                    }
                    Err(e) => {
                        let msg = format!("asset {url} not fetched: {e}");
                        log::warn!("{msg}");
                        out.warnings.push(msg);
                        None
                    }
                }
            })
            .clone();
        if let Some(name) = local {
            let range = &attrs[i].range;
            rewritten.push_str(&html[cursor..whole.start() + range.start]);
            rewritten.push('"');
            rewritten.push_str(&name);
            rewritten.push('"');
            cursor = whole.start() + range.end;
        }
    }
    rewritten.push_str(&html[cursor..]);
    out.html = rewritten;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_stylesheets_and_images_only() {
        let tag = r#"<link rel="icon" href="a.ico">"#;
        assert_eq!(asset_reference("link", &attributes(tag)), None);
        let tag = r#"<link href='s.css' REL="alternate stylesheet">"#;
        let attrs = attributes(tag);
        assert_eq!(attrs[asset_reference("link", &attrs).unwrap()].value, "s.css");
        let tag = r#"<img alt=x src=pic.png?a=1&amp;b=2>"#;
        let attrs = attributes(tag);
        assert_eq!(attrs[asset_reference("img", &attrs).unwrap()].value, "pic.png?a=1&b=2");
    }

    #[test]
    fn local_names_keep_short_extensions() {
        let u = Url::parse("http://h/x/style.CSS?v=2").unwrap();
        assert_eq!(local_name(3, &u), "asset-3.css");
        let u = Url::parse("http://h/x/").unwrap();
        assert_eq!(local_name(0, &u), "asset-0");
    }

    #[test]
    fn no_references_no_network() {
        let dir = tempfile::tempdir().unwrap();
        let base = Url::parse("http://127.0.0.1:9/").unwrap();
        let html = "<table><tr><td>x</td></tr></table>";
        let r = fetch_assets(html, &base, dir.path(), Duration::from_secs(1));
        assert_eq!(r.html, html);
        assert!(r.files.is_empty());
    }

    #[test]
    fn unresolvable_host_leaves_html_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let base = Url::parse("http://no-such-host.invalid/").unwrap();
        let html = r#"<link rel="stylesheet" href="a.css"><table></table>"#;
        let r = fetch_assets(html, &base, dir.path(), Duration::from_secs(1));
        assert_eq!(r.html, html);
        assert_eq!(r.warnings.len(), 1);
    }
}
