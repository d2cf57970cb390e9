//! Corpus construction: WARC ingestion, per-page table sampling, language
//! filtering, and the persistent dataset manifest.

mod language;
mod manifest;
mod sample;
pub mod warc;

use chrono::{DateTime, Utc};
use url::Url;

pub use language::{is_english, LanguageDetector, StopwordDetector, ENGLISH_STOPWORDS, MIN_TEXT_CHARS, STOPWORD_RATIO};
pub use manifest::{read_manifest, write_manifest, DatasetManifest, LabeledExample, Provenance, RenderRecord, SCHEMA_VERSION};
pub use sample::{page_title, sample_one_table, stylesheet_links, top_level_tables};
pub use warc::{read_warc, PageIter, WarcError, WarcReader, WarcRecord};

/// One crawled HTML page.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRecord {
    pub url: Url,
    pub fetch_time: DateTime<Utc>,
    pub html: String,
}
