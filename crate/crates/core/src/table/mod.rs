//! Span-expanded table grids parsed from `<table>` markup.

mod parse;

use serde::{Deserialize, Serialize};

pub use parse::parse_table;

/// One origin cell of a table, i.e. one `td`/`th` element (or a padding cell).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    /// Visible text with whitespace collapsed and trimmed.
    pub text: String,
    pub is_header: bool,
    pub n_links: u32,
    pub n_images: u32,
    pub n_form_controls: u32,
    /// Effective spans after clipping to the table bounds; always ≥ 1.
    pub rowspan: u32,
    pub colspan: u32,
    pub contains_table: bool,
}

impl Cell {
    /// An empty cell used to pad short rows.
    pub fn padding() -> Self {
        Cell {
            rowspan: 1,
            colspan: 1,
            ..Cell::default()
        }
    }
}

/// A slot of the dense grid: either the cell that starts there, or a
/// reference to the origin slot whose span covers it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Origin(Cell),
    Continuation { row: usize, col: usize },
}

impl Slot {
    pub fn origin(&self) -> Option<&Cell> {
        match self {
            Slot::Origin(cell) => Some(cell),
            Slot::Continuation { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableGrid {
    /// Row-major, `n_rows` rows of exactly `n_cols` slots each.
    pub cells: Vec<Vec<Slot>>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub has_nested_table: bool,
    #[serde(skip)]
    pub raw_html: String,
}

/// Structural equality; `raw_html` is provenance and does not participate.
impl PartialEq for TableGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.has_nested_table == other.has_nested_table
            && self.cells == other.cells
    }
}

impl TableGrid {
    pub fn slot(&self, row: usize, col: usize) -> &Slot {
        &self.cells[row][col]
    }

    /// Resolves a slot to the cell that covers it.
    pub fn cell_at(&self, row: usize, col: usize) -> &Cell {
        match &self.cells[row][col] {
            Slot::Origin(cell) => cell,
            Slot::Continuation { row, col } => match &self.cells[*row][*col] {
                Slot::Origin(cell) => cell,
                Slot::Continuation { .. } => unreachable!("continuation points at continuation"),
            },
        }
    }

    /// Origin cells in row-major order together with their position.
    pub fn origins(&self) -> impl Iterator<Item = (usize, usize, &Cell)> + '_ {
        self.cells.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(c, slot)| slot.origin().map(|cell| (r, c, cell)))
        })
    }

    pub fn origin_count(&self) -> usize {
        self.origins().count()
    }

    /// Serializes the grid back to minimal markup that parses to an equal grid.
    ///
    /// Content counts are reproduced with empty placeholder elements; the
    /// nested-table flag with an empty inner `<table>`.
    pub fn to_minimal_html(&self) -> String {
        let mut out = String::from("<table>");
        for row in &self.cells {
            out.push_str("<tr>");
            for slot in row {
                let Slot::Origin(cell) = slot else { continue };
                let tag = if cell.is_header { "th" } else { "td" };
                out.push('<');
                out.push_str(tag);
                if cell.rowspan > 1 {
                    out.push_str(&format!(" rowspan=\"{}\"", cell.rowspan));
                }
                if cell.colspan > 1 {
                    out.push_str(&format!(" colspan=\"{}\"", cell.colspan));
                }
                out.push('>');
                escape_text(&cell.text, &mut out);
                for _ in 0..cell.n_links {
                    out.push_str("<a href=\"#\"></a>");
                }
                for _ in 0..cell.n_images {
                    out.push_str("<img src=\"#\">");
                }
                for _ in 0..cell.n_form_controls {
                    out.push_str("<input>");
                }
                if cell.contains_table {
                    out.push_str("<table></table>");
                }
                out.push_str("</");
                out.push_str(tag);
                out.push('>');
            }
            out.push_str("</tr>");
        }
        out.push_str("</table>");
        out
    }

    /// Debug dump: the text of every slot, continuation slots as `null`.
    pub fn to_json_matrix(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.cells
                .iter()
                .map(|row| {
                    serde_json::Value::Array(
                        row.iter()
                            .map(|slot| match slot {
                                Slot::Origin(cell) => serde_json::Value::String(cell.text.clone()),
                                Slot::Continuation { .. } => serde_json::Value::Null,
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

fn escape_text(text: &str, out: &mut String) {
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(ch),
        }
    }
}

/// Structural pre-filter: tables with fewer than two rows or two columns
/// are never genuine.
pub fn passes_size_filter(grid: &TableGrid) -> bool {
    grid.n_rows >= 2 && grid.n_cols >= 2
}

/// Origin-cell texts in row-major order, single-space separated.
pub fn visible_text(grid: &TableGrid) -> String {
    let mut out = String::new();
    for (_, _, cell) in grid.origins() {
        if cell.text.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&cell.text);
    }
    out
}
