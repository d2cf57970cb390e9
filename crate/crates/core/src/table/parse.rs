use scraper::{ElementRef, Html, Node, Selector};

use super::{Cell, Slot, TableGrid};
use crate::error::{Error, Result};

const MAX_COLSPAN: u32 = 1000;
const MAX_ROWSPAN: u32 = 65534;

/// Parses the first top-level `<table>` of `raw_html` into a rectangular grid.
///
/// Parsing follows the HTML5 tree-construction rules, so malformed markup is
/// recovered rather than rejected. Row groups are flattened in document
/// order. Nested tables contribute neither text nor rows to the parent; they
/// only set [`Cell::contains_table`] and [`TableGrid::has_nested_table`].
pub fn parse_table(raw_html: &str) -> Result<TableGrid> {
    let fragment = Html::parse_fragment(raw_html);
    let selector = Selector::parse("table").expect("static selector");
    let table = fragment.select(&selector).next().ok_or(Error::NoTable)?;

    let rows = collect_rows(table);
    let mut grid = layout_grid(rows);
    grid.raw_html = raw_html.to_owned();
    Ok(grid)
}

fn collect_rows(table: ElementRef<'_>) -> Vec<Vec<Cell>> {
    let mut rows = Vec::new();
    for child in table.children().filter_map(ElementRef::wrap) {
        match child.value().name() {
            "tr" => rows.push(collect_cells(child)),
            "thead" | "tbody" | "tfoot" => {
                for tr in child.children().filter_map(ElementRef::wrap) {
                    if tr.value().name() == "tr" {
                        rows.push(collect_cells(tr));
                    }
                }
            }
            _ => {}
        }
    }
    rows
}

fn collect_cells(tr: ElementRef<'_>) -> Vec<Cell> {
    tr.children()
        .filter_map(ElementRef::wrap)
        .filter(|el| matches!(el.value().name(), "td" | "th"))
        .map(read_cell)
        .collect()
}

fn span_attr(el: ElementRef<'_>, name: &str) -> Option<u32> {
    el.value().attr(name)?.trim().parse::<u32>().ok()
}

fn read_cell(el: ElementRef<'_>) -> Cell {
    let mut cell = Cell {
        is_header: el.value().name() == "th",
        // rowspan="0" means "to the end of the table"; resolved during layout.
        rowspan: span_attr(el, "rowspan").map_or(1, |v| v.min(MAX_ROWSPAN)),
        colspan: span_attr(el, "colspan").map_or(1, |v| v.clamp(1, MAX_COLSPAN)),
        ..Cell::default()
    };
    let mut text = String::new();
    for child in el.children() {
        walk_content(child, &mut cell, &mut text);
    }
    cell.text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    cell
}

fn walk_content(node: ego_tree::NodeRef<'_, Node>, cell: &mut Cell, text: &mut String) {
    match node.value() {
        Node::Text(t) => text.push_str(&t[..]),
        Node::Element(el) => {
            let name = el.name();
            match name {
                "table" => {
                    cell.contains_table = true;
                    return;
                }
                "script" | "style" | "template" | "noscript" => return,
                "a" if el.attr("href").is_some() => cell.n_links += 1,
                "img" => cell.n_images += 1,
                "input" | "select" | "textarea" | "button" => cell.n_form_controls += 1,
                _ => {}
            }
            let block = matches!(
                name,
                "br" | "p" | "div" | "li" | "ul" | "ol" | "h1" | "h2" | "h3" | "h4" | "h5" | "h6"
            );
            if block {
                text.push(' ');
            }
            // Option text inside a select is a control's state, not cell text.
            if name == "select" || name == "textarea" {
                return;
            }
            for child in node.children() {
                walk_content(child, cell, text);
            }
            if block {
                text.push(' ');
            }
        }
        _ => {}
    }
}

/// Places cells into slots following the HTML table model. A cell whose span
/// would overlap an occupied slot is shifted right to the first position
/// where its whole span fits.
fn layout_grid(rows: Vec<Vec<Cell>>) -> TableGrid {
    let n_rows = rows.len();
    let mut slots: Vec<Vec<Option<Slot>>> = vec![Vec::new(); n_rows];
    let mut has_nested_table = false;

    let occupied = |slots: &Vec<Vec<Option<Slot>>>, r: usize, c: usize| -> bool {
        slots[r].get(c).is_some_and(Option::is_some)
    };

    for (r, row) in rows.into_iter().enumerate() {
        let mut col = 0usize;
        for mut cell in row {
            has_nested_table |= cell.contains_table;
            let remaining = (n_rows - r) as u32;
            cell.rowspan = if cell.rowspan == 0 {
                remaining
            } else {
                cell.rowspan.min(remaining)
            };
            let (rs, cs) = (cell.rowspan as usize, cell.colspan as usize);

            loop {
                while occupied(&slots, r, col) {
                    col += 1;
                }
                let collides = (r..r + rs)
                    .any(|rr| (col..col + cs).any(|cc| occupied(&slots, rr, cc)));
                if !collides {
                    break;
                }
                col += 1;
            }

            for rr in r..r + rs {
                if slots[rr].len() < col + cs {
                    slots[rr].resize(col + cs, None);
                }
                for cc in col..col + cs {
                    slots[rr][cc] = Some(Slot::Continuation { row: r, col });
                }
            }
            slots[r][col] = Some(Slot::Origin(cell));
            col += cs;
        }
    }

    let n_cols = slots.iter().map(Vec::len).max().unwrap_or(0);
    let cells = slots
        .into_iter()
        .map(|mut row| {
            row.resize(n_cols, None);
            row.into_iter()
                .map(|slot| slot.unwrap_or_else(|| Slot::Origin(Cell::padding())))
                .collect()
        })
        .collect();

    TableGrid {
        cells,
        n_rows,
        n_cols,
        has_nested_table,
        raw_html: String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(grid: &TableGrid) -> Vec<Vec<Option<String>>> {
        grid.cells
            .iter()
            .map(|row| row.iter().map(|s| s.origin().map(|c| c.text.clone())).collect())
            .collect()
    }

    fn s(v: &str) -> Option<String> {
        Some(v.to_owned())
    }

    #[test]
    fn plain_two_by_two() {
        let g = parse_table("<table><tr><td>a</td><td>b</td></tr><tr><td>c</td><td>d</td></tr></table>")
            .unwrap();
        assert_eq!((g.n_rows, g.n_cols), (2, 2));
        assert_eq!(texts(&g), vec![vec![s("a"), s("b")], vec![s("c"), s("d")]]);
        assert!(!g.has_nested_table);
    }

    #[test]
    fn colspan_expands_to_continuation() {
        let g = parse_table("<table><tr><td colspan=\"2\">x</td></tr><tr><td>y</td><td>z</td></tr></table>")
            .unwrap();
        assert_eq!((g.n_rows, g.n_cols), (2, 2));
        assert_eq!(g.cells[0][1], Slot::Continuation { row: 0, col: 0 });
        assert_eq!(g.cell_at(0, 1).text, "x");
        assert_eq!(g.cell_at(0, 0).colspan, 2);
        assert_eq!(texts(&g)[1], vec![s("y"), s("z")]);
    }

    #[test]
    fn nested_table_is_excluded_from_text() {
        let g = parse_table(
            "<table><tr><td><table><tr><td>i</td></tr></table></td><td>t</td></tr><tr><td>u</td><td>v</td></tr></table>",
        )
        .unwrap();
        assert_eq!((g.n_rows, g.n_cols), (2, 2));
        assert!(g.has_nested_table);
        assert_eq!(g.cell_at(0, 0).text, "");
        assert!(g.cell_at(0, 0).contains_table);
        assert_eq!(g.cell_at(0, 1).text, "t");
    }

    #[test]
    fn rowspan_and_padding() {
        let g = parse_table(
            "<table><tr><td rowspan=2>a</td><td>b</td><td>c</td></tr><tr><td>d</td></tr></table>",
        )
        .unwrap();
        assert_eq!((g.n_rows, g.n_cols), (2, 3));
        assert_eq!(g.cells[1][0], Slot::Continuation { row: 0, col: 0 });
        assert_eq!(texts(&g)[1], vec![None, s("d"), s("")]);
    }

    #[test]
    fn rowspan_is_clipped_to_table() {
        let g = parse_table("<table><tr><td rowspan=5>a</td><td>b</td></tr><tr><td>c</td></tr></table>")
            .unwrap();
        assert_eq!(g.n_rows, 2);
        assert_eq!(g.cell_at(0, 0).rowspan, 2);
        let g = parse_table("<table><tr><td rowspan=0>a</td><td>b</td></tr><tr><td>c</td></tr></table>")
            .unwrap();
        assert_eq!(g.cell_at(0, 0).rowspan, 2);
    }

    #[test]
    fn colliding_span_shifts_right() {
        // Row 1's colspan=2 cell would overlap the rowspan from (0,1).
        let g = parse_table(
            "<table><tr><td>a</td><td rowspan=2>b</td></tr><tr><td colspan=2>c</td></tr></table>",
        )
        .unwrap();
        assert_eq!(g.n_cols, 4);
        assert_eq!(g.cells[1][1], Slot::Continuation { row: 0, col: 1 });
        assert_eq!(g.cell_at(1, 2).text, "c");
        assert_eq!(g.cells[1][3], Slot::Continuation { row: 1, col: 2 });
        assert_eq!(g.cells[1][0], Slot::Origin(Cell::padding()));
    }

    #[test]
    fn row_groups_flatten_in_document_order() {
        let g = parse_table(
            "<table><thead><tr><th>h</th></tr></thead><tfoot><tr><td>f</td></tr></tfoot><tbody><tr><td>b</td></tr></tbody></table>",
        )
        .unwrap();
        assert_eq!(texts(&g), vec![vec![s("h")], vec![s("f")], vec![s("b")]]);
        assert!(g.cell_at(0, 0).is_header);
    }

    #[test]
    fn counts_content_types() {
        let g = parse_table(
            "<table><tr><td><a href='/x'>one</a> <a href='/y'>two</a><img src='p.png'></td>\
             <td><form><input type=text><select><option>opt</option></select><button>Go</button></form></td></tr></table>",
        )
        .unwrap();
        let first = g.cell_at(0, 0);
        assert_eq!((first.n_links, first.n_images), (2, 1));
        assert_eq!(first.text, "one two");
        let second = g.cell_at(0, 1);
        assert_eq!(second.n_form_controls, 3);
        assert_eq!(second.text, "Go");
    }

    #[test]
    fn unclosed_tags_recover() {
        let g = parse_table("<table><tr><td>a<td>b<tr><td>c<td>d</table>").unwrap();
        assert_eq!(texts(&g), vec![vec![s("a"), s("b")], vec![s("c"), s("d")]]);
        let g = parse_table("<table><tr><td>a").unwrap();
        assert_eq!((g.n_rows, g.n_cols), (1, 1));
    }

    #[test]
    fn whitespace_is_normalized() {
        let g = parse_table("<table><tr><td>  line\n one<br>two  </td></tr></table>").unwrap();
        assert_eq!(g.cell_at(0, 0).text, "line one two");
    }

    #[test]
    fn missing_table_is_an_error() {
        assert!(matches!(parse_table("<div>no table</div>"), Err(Error::NoTable)));
        assert!(matches!(parse_table(""), Err(Error::NoTable)));
    }

    #[test]
    fn empty_table() {
        let g = parse_table("<table></table>").unwrap();
        assert_eq!((g.n_rows, g.n_cols), (0, 0));
    }
}
