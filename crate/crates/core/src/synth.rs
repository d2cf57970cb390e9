//! Synthetic corpus of genuine-like and layout-like tables.
//!
//! Genuine tables are data grids with a header row and typed columns,
//! sometimes bordered or zebra-striped. Layout tables come in four shapes:
//! link bars, image grids, nesting shells wrapping an inner table, and
//! form layouts.

use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_manifest, DatasetManifest, LabeledExample, Provenance};
use crate::error::{Error, Result};
use crate::label::{Label, Split};
use crate::table::{parse_table, passes_size_filter};

/// Manifest file name inside a synthetic corpus directory.
pub const DATASET_FILE: &str = "dataset.jsonl";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub n_genuine: usize,
    pub n_layout: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthTable {
    pub id: String,
    pub label: Label,
    pub html: String,
}

const WORDS: &[&str] = &[
    "river", "market", "station", "garden", "harbor", "valley", "council", "library", "bridge", "museum", "forest",
    "school", "airport", "castle", "theater", "village", "stadium", "island", "canal", "tower",
];
const NAMES: &[&str] = &[
    "Alice", "Bruno", "Chen", "Dana", "Emeka", "Farah", "Goran", "Hana", "Ivo", "Jun", "Kira", "Lars", "Mina", "Nils",
    "Omar", "Priya",
];
const NAV: &[&str] = &[
    "Home", "About", "News", "Contact", "Products", "Services", "Blog", "Login", "Search", "Help", "Careers", "Shop",
];
const HEADERS: &[&str] = &[
    "Name", "City", "Year", "Population", "Price", "Rank", "Score", "Country", "Date", "Share", "Area", "Team",
];

#[derive(Clone, Copy)]
enum Column {
    Name,
    Word,
    Integer,
    Decimal,
    Year,
    Percent,
    Date,
}

fn cell_value<R: Rng>(kind: Column, rng: &mut R) -> String {
    match kind {
        Column::Name => NAMES.choose(rng).expect("non-empty").to_string(),
        Column::Word => {
            let w = WORDS.choose(rng).expect("non-empty");
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
        }
        Column::Integer => rng.random_range(1..100_000).to_string(),
        Column::Decimal => format!("{:.2}", rng.random_range(0.0..1000.0)),
        Column::Year => rng.random_range(1950..2024).to_string(),
        Column::Percent => format!("{:.1}%", rng.random_range(0.0..100.0)),
        Column::Date => format!(
            "{:04}-{:02}-{:02}",
            rng.random_range(2000..2024),
            rng.random_range(1..13),
            rng.random_range(1..29)
        ),
    }
}

fn genuine_table<R: Rng>(rng: &mut R) -> String {
    let n_cols = rng.random_range(2..=7);
    let n_rows = rng.random_range(3..=15);
    let kinds = [
        Column::Name,
        Column::Word,
        Column::Integer,
        Column::Decimal,
        Column::Year,
        Column::Percent,
        Column::Date,
    ];
    let mut columns: Vec<Column> = vec![if rng.random_bool(0.5) { Column::Name } else { Column::Word }];
    columns.extend((1..n_cols).map(|_| *kinds[2..].choose(rng).expect("non-empty")));

    let bordered = rng.random_bool(0.5);
    let zebra = rng.random_bool(0.4);
    let mut html = String::new();
    if bordered {
        html.push_str("<table border=\"1\" style=\"border-collapse:collapse\">");
    } else {
        html.push_str("<table>");
    }
    let mut headers: Vec<&str> = HEADERS.to_vec();
    headers.shuffle(rng);
    html.push_str("<thead><tr>");
    for h in &headers[..n_cols] {
        html.push_str(&format!("<th>{h}</th>"));
    }
    html.push_str("</tr></thead><tbody>");
    for r in 0..n_rows {
        if zebra && r % 2 == 1 {
            html.push_str("<tr style=\"background:#eeeeee\">");
        } else {
            html.push_str("<tr>");
        }
        for (c, kind) in columns.iter().enumerate() {
            let v = cell_value(*kind, rng);
            if c == 0 && rng.random_bool(0.1) {
                html.push_str(&format!("<td><a href=\"/item/{r}\">{v}</a></td>"));
            } else {
                html.push_str(&format!("<td>{v}</td>"));
            }
        }
        html.push_str("</tr>");
    }
    html.push_str("</tbody></table>");
    html
}

fn link_bar<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(3..=NAV.len());
    let mut items: Vec<&str> = NAV.to_vec();
    items.shuffle(rng);
    let mut html = format!(
        "<table width=\"100%\"><tr><td colspan=\"{n}\"><img src=\"/logo.png\" alt=\"logo\"></td></tr><tr>"
    );
    for item in &items[..n] {
        html.push_str(&format!("<td><a href=\"/{}\">{item}</a></td>", item.to_lowercase()));
    }
    html.push_str("</tr></table>");
    html
}

fn image_grid<R: Rng>(rng: &mut R) -> String {
    let rows = rng.random_range(2..=4);
    let cols = rng.random_range(2..=4);
    let captions = rng.random_bool(0.5);
    let mut html = String::from("<table cellpadding=\"4\">");
    for r in 0..rows {
        html.push_str("<tr>");
        for c in 0..cols {
            let word = WORDS.choose(rng).expect("non-empty");
            html.push_str(&format!("<td><a href=\"/p/{r}{c}\"><img src=\"/img/{word}.jpg\"></a>"));
            if captions {
                html.push_str(&format!("<br><a href=\"/p/{r}{c}\">{word}</a>"));
            }
            html.push_str("</td>");
        }
        html.push_str("</tr>");
    }
    html.push_str("</table>");
    html
}

fn sentence<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(6..14);
    let mut words: Vec<&str> = Vec::with_capacity(2 * n);
    for _ in 0..n {
        words.push(["the", "a", "of", "and", "to", "in", "is", "for", "with", "on"].choose(rng).expect("non-empty"));
        words.push(WORDS.choose(rng).expect("non-empty"));
    }
    let mut s = words.join(" ");
    s.push('.');
    s
}

fn nesting_shell<R: Rng>(rng: &mut R) -> String {
    let mut nav = String::from("<table>");
    let k = rng.random_range(3..7);
    for item in NAV.choose_multiple(rng, k) {
        nav.push_str(&format!("<tr><td><a href=\"/{0}\">{0}</a></td></tr>", item.to_lowercase()));
    }
    nav.push_str("</table>");
    let body: Vec<String> = (0..rng.random_range(1..4)).map(|_| format!("<p>{}</p>", sentence(rng))).collect();
    format!(
        "<table width=\"100%\"><tr><td colspan=\"2\"><h1>{}</h1></td></tr>\
         <tr><td width=\"20%\">{nav}</td><td>{}</td></tr>\
         <tr><td colspan=\"2\">&copy; {}</td></tr></table>",
        WORDS.choose(rng).expect("non-empty"),
        body.join(""),
        rng.random_range(1998..2024)
    )
}

fn form_layout<R: Rng>(rng: &mut R) -> String {
    let fields = ["Name", "Email", "Phone", "Address", "Password", "Comment"];
    let n = rng.random_range(2..=fields.len());
    let mut html = String::from("<table>");
    for f in &fields[..n] {
        if *f == "Comment" {
            html.push_str(&format!("<tr><td>{f}:</td><td><textarea name=\"{f}\"></textarea></td></tr>"));
        } else {
            html.push_str(&format!("<tr><td>{f}:</td><td><input type=\"text\" name=\"{f}\"></td></tr>"));
        }
    }
    html.push_str("<tr><td></td><td><button type=\"submit\">Send</button></td></tr></table>");
    html
}

fn layout_table<R: Rng>(rng: &mut R) -> String {
    match rng.random_range(0..4) {
        0 => link_bar(rng),
        1 => image_grid(rng),
        2 => nesting_shell(rng),
        _ => form_layout(rng),
    }
}

/// Generates the corpus in a seeded, shuffled order. Ids carry no label
/// information.
pub fn generate(cfg: &SynthConfig) -> Vec<SynthTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Genuine, cfg.n_genuine)
        .chain(std::iter::repeat_n(Label::Layout, cfg.n_layout))
        .collect();
    labels.shuffle(&mut rng);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| SynthTable {
            id: format!("synth-{i:05}"),
            label,
            html: match label {
                Label::Genuine => genuine_table(&mut rng),
                Label::Layout => layout_table(&mut rng),
            },
        })
        .collect()
}

/// Writes `html/<id>.html` for every table plus a labeled `dataset.jsonl`
/// manifest under `dir`.
pub fn write_corpus(dir: &Path, tables: &[SynthTable], provenance: Option<Provenance>) -> Result<DatasetManifest> {
    let html_dir = dir.join("html");
    fs::create_dir_all(&html_dir).map_err(|e| Error::io(&html_dir, e))?;
    let mut entries = Vec::with_capacity(tables.len());
    for t in tables {
        let rel = Path::new("html").join(format!("{}.html", t.id));
        let path = dir.join(&rel);
        fs::write(&path, &t.html).map_err(|e| Error::io(&path, e))?;
        let grid = parse_table(&t.html)?;
        entries.push(LabeledExample {
            id: t.id.clone(),
            source_url: format!("http://synthetic.invalid/{}", t.id),
            html_path: rel,
            image_path: None,
            label: Some(t.label),
            split: Split::Unsplit,
            rows: grid.n_rows,
            cols: grid.n_cols,
            passes_size_filter: Some(passes_size_filter(&grid)),
            render: None,
        });
    }
    let manifest = DatasetManifest {
        provenance,
        ..DatasetManifest::new(entries)
    };
    write_manifest(&manifest, &dir.join(DATASET_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let cfg = SynthConfig { n_genuine: 20, n_layout: 30, seed: 1 };
        let a = generate(&cfg);
        assert_eq!(a.len(), 50);
        assert_eq!(a.iter().filter(|t| t.label == Label::Genuine).count(), 20);
        assert_eq!(a, generate(&cfg));
        assert_ne!(a, generate(&SynthConfig { seed: 2, ..cfg }));
    }

    #[test]
    fn every_table_parses_and_passes_filter() {
        for t in generate(&SynthConfig { n_genuine: 100, n_layout: 100, seed: 7 }) {
            let grid = parse_table(&t.html).unwrap();
            assert!(passes_size_filter(&grid), "{}: {}", t.id, t.html);
        }
    }

    #[test]
    fn corpus_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let tables = generate(&SynthConfig { n_genuine: 2, n_layout: 2, seed: 0 });
        let m = write_corpus(dir.path(), &tables, None).unwrap();
        assert_eq!(m.entries.len(), 4);
        assert_eq!(fs::read_dir(dir.path().join("html")).unwrap().count(), 4);
        assert!(dir.path().join(DATASET_FILE).exists());
    }
}
