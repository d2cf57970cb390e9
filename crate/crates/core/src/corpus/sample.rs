use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scraper::{Html, Selector};
use sha2::{Digest, Sha256};

use super::PageRecord;

/// Outer HTML of every `<table>` that has no `<table>` ancestor, in document order.
pub fn top_level_tables(html: &str) -> Vec<String> {
    let doc = Html::parse_document(html);
    let selector = Selector::parse("table").expect("static selector");
    doc.select(&selector)
        .filter(|t| {
            !t.ancestors()
                .filter_map(scraper::ElementRef::wrap)
                .any(|a| a.value().name() == "table")
        })
        .map(|t| t.html())
        .collect()
}

pub fn page_title(html: &str) -> Option<String> {
    let doc = Html::parse_document(html);
    let selector = Selector::parse("title").expect("static selector");
    let title = doc.select(&selector).next()?;
    let text = title.text().collect::<String>();
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    (!text.is_empty()).then_some(text)
}

/// Outer HTML of the page's stylesheet `<link>` elements, so a sampled
/// table can be rendered with the page's CSS.
pub fn stylesheet_links(html: &str) -> Vec<String> {
    let doc = Html::parse_document(html);
    let selector = Selector::parse("link[rel~=stylesheet i][href]").expect("static selector");
    doc.select(&selector).map(|l| l.html()).collect()
}

fn page_rng(seed: u64, url: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(url.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(bytes)
}

/// Picks one top-level table of the page uniformly at random.
///
/// The choice depends only on `seed` and the page URL, so re-running over
/// the same archive reproduces the same sample. Nested tables are carried
/// inside the chosen table's markup.
pub fn sample_one_table(page: &PageRecord, seed: u64) -> Option<String> {
    let mut tables = top_level_tables(&page.html);
    if tables.is_empty() {
        return None;
    }
    let i = page_rng(seed, page.url.as_str()).random_range(0..tables.len());
    Some(tables.swap_remove(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn page(html: &str) -> PageRecord {
        PageRecord {
            url: "http://example.com/p".parse().unwrap(),
            fetch_time: Utc.with_ymd_and_hms(2014, 5, 1, 0, 0, 0).unwrap(),
            html: html.to_owned(),
        }
    }

    const FOUR: &str = "<html><body>\
        <table id=t0><tr><td>0</td></tr></table>\
        <table id=t1><tr><td>1<table id=inner><tr><td>x</td></tr></table></td></tr></table>\
        <div><table id=t2><tr><td>2</td></tr></table></div>\
        <table id=t3><tr><td>3</td></tr></table></body></html>";

    #[test]
    fn no_tables() {
        assert_eq!(sample_one_table(&page("<p>none</p>"), 7), None);
    }

    #[test]
    fn single_table_for_any_seed() {
        let p = page("<table><tr><td>only</td></tr></table>");
        for seed in 0..20 {
            assert!(sample_one_table(&p, seed).unwrap().contains("only"));
        }
    }

    #[test]
    fn population_is_top_level_tables() {
        let tables = top_level_tables(FOUR);
        assert_eq!(tables.len(), 4);
        assert!(tables[1].contains("id=\"inner\""));
    }

    #[test]
    fn deterministic_per_seed_and_url() {
        let p = page(FOUR);
        let first = sample_one_table(&p, 42);
        for _ in 0..5 {
            assert_eq!(sample_one_table(&p, 42), first);
        }
    }

    #[test]
    fn title_extraction() {
        assert_eq!(page_title("<html><head><title> Stock\n prices </title></head></html>").as_deref(), Some("Stock prices"));
        assert_eq!(page_title("<p>x</p>"), None);
    }

    #[test]
    fn stylesheet_links_only() {
        let html = r#"<html><head><link rel="stylesheet" href="a.css"><link rel="icon" href="f.ico"><link REL="Stylesheet" href="b.css"></head></html>"#;
        let links = stylesheet_links(html);
        assert_eq!(links.len(), 2);
        assert!(links[0].contains("a.css") && links[1].contains("b.css"));
    }
}
