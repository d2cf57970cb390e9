use std::collections::HashSet;

use proptest::prelude::*;

use tablesieve::classify::FeatureScope;
use tablesieve::corpus::{read_manifest, write_manifest, DatasetManifest, LabeledExample, RenderRecord};
use tablesieve::eval::{mcnemar, score, McNemarResult};
use tablesieve::features::{extract_features, select_features_cfs, CATALOGUE_VERSION, RATIO_FEATURES};
use tablesieve::table::parse_table;
use tablesieve::visual::{global_average_pool, FeatureMap};
use tablesieve::{ForestConfig, ForestModel, Label, Slot, Split};

#[derive(Debug, Clone)]
struct GenCell {
    header: bool,
    rowspan: u32,
    colspan: u32,
    text: String,
    links: u8,
    images: u8,
}

fn gen_cell() -> impl Strategy<Value = GenCell> {
    (
        any::<bool>(),
        prop_oneof![4 => Just(1u32), 1 => 0u32..4],
        prop_oneof![4 => Just(1u32), 1 => 0u32..4],
        "[a-z0-9 .%]{0,8}",
        0u8..2,
        0u8..2,
    )
        .prop_map(|(header, rowspan, colspan, text, links, images)| GenCell {
            header,
            rowspan,
            colspan,
            text,
            links,
            images,
        })
}

fn gen_table() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::collection::vec(gen_cell(), 0..5), 0..6).prop_map(|rows| {
        let mut html = String::from("<table>");
        for row in rows {
            html.push_str("<tr>");
            for c in row {
                let tag = if c.header { "th" } else { "td" };
                html.push_str(&format!("<{tag} rowspan=\"{}\" colspan=\"{}\">{}", c.rowspan, c.colspan, c.text));
                for _ in 0..c.links {
                    html.push_str("<a href=\"/x\">x</a>");
                }
                for _ in 0..c.images {
                    html.push_str("<img src=\"i.png\">");
                }
                html.push_str(&format!("</{tag}>"));
            }
            html.push_str("</tr>");
        }
        html.push_str("</table>");
        html
    })
}

fn label_of(b: bool) -> Label {
    if b {
        Label::Genuine
    } else {
        Label::Layout
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn grid_is_rectangular_and_spans_are_consistent(html in gen_table()) {
        let grid = parse_table(&html).unwrap();
        prop_assert_eq!(grid.cells.len(), grid.n_rows);
        for row in &grid.cells {
            prop_assert_eq!(row.len(), grid.n_cols);
        }
        for (r, row) in grid.cells.iter().enumerate() {
            for (c, slot) in row.iter().enumerate() {
                match slot {
                    Slot::Origin(cell) => {
                        prop_assert!(cell.rowspan >= 1 && cell.colspan >= 1);
                        let (rs, cs) = (cell.rowspan as usize, cell.colspan as usize);
                        prop_assert!(r + rs <= grid.n_rows && c + cs <= grid.n_cols);
                        for rr in r..r + rs {
                            for cc in c..c + cs {
                                if (rr, cc) != (r, c) {
                                    prop_assert_eq!(&grid.cells[rr][cc], &Slot::Continuation { row: r, col: c });
                                }
                            }
                        }
                    }
                    Slot::Continuation { row, col } => {
                        let origin = grid.cells[*row][*col].origin();
                        prop_assert!(origin.is_some());
                        let cell = origin.unwrap();
                        prop_assert!(*row <= r && r < row + cell.rowspan as usize);
                        prop_assert!(*col <= c && c < col + cell.colspan as usize);
                    }
                }
            }
        }
    }

    #[test]
    fn minimal_html_reparses_to_the_same_grid(html in gen_table()) {
        let grid = parse_table(&html).unwrap();
        let again = parse_table(&grid.to_minimal_html()).unwrap();
        prop_assert_eq!(again, grid);
    }

    #[test]
    fn ratio_features_are_bounded(html in gen_table()) {
        let grid = parse_table(&html).unwrap();
        let v = extract_features(&grid);
        prop_assert!(v.values.iter().all(|x| x.is_finite()));
        for &i in &RATIO_FEATURES {
            prop_assert!((0.0..=1.0).contains(&v.values[i]), "feature {} = {}", i, v.values[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gap_is_linear(
        a in prop::collection::vec(-100.0f64..100.0, 3 * 4 * 5),
        b in prop::collection::vec(-100.0f64..100.0, 3 * 4 * 5),
        s in -5.0f64..5.0,
        t in -5.0f64..5.0,
    ) {
        let map = |d: Vec<f64>| FeatureMap::new(3, 4, 5, d).unwrap();
        let mixed: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
        let lhs = global_average_pool(&map(mixed));
        let ga = global_average_pool(&map(a));
        let gb = global_average_pool(&map(b));
        for k in 0..5 {
            prop_assert!((lhs[k] - (s * ga[k] + t * gb[k])).abs() <= 1e-9);
        }
    }

    #[test]
    fn scores_ignore_example_order(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60),
        seed in any::<u64>(),
    ) {
        let pred: Vec<Label> = pairs.iter().map(|p| label_of(p.0)).collect();
        let gold: Vec<Label> = pairs.iter().map(|p| label_of(p.1)).collect();
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut state = seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let pred2: Vec<Label> = order.iter().map(|&i| pred[i]).collect();
        let gold2: Vec<Label> = order.iter().map(|&i| gold[i]).collect();
        prop_assert_eq!(score(&pred, &gold).unwrap(), score(&pred2, &gold2).unwrap());
    }

    #[test]
    fn weighted_f1_lies_between_class_f1(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60),
    ) {
        let pred: Vec<Label> = pairs.iter().map(|p| label_of(p.0)).collect();
        let gold: Vec<Label> = pairs.iter().map(|p| label_of(p.1)).collect();
        let r = score(&pred, &gold).unwrap();
        let lo = r.layout.f1.min(r.genuine.f1);
        let hi = r.layout.f1.max(r.genuine.f1);
        prop_assert!(lo - 1e-12 <= r.weighted.f1 && r.weighted.f1 <= hi + 1e-12);
    }

    #[test]
    fn mcnemar_is_symmetric_in_the_classifiers(
        rows in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 1..80),
    ) {
        let a: Vec<Label> = rows.iter().map(|r| label_of(r.0)).collect();
        let b: Vec<Label> = rows.iter().map(|r| label_of(r.1)).collect();
        let g: Vec<Label> = rows.iter().map(|r| label_of(r.2)).collect();
        let ab = mcnemar(&a, &b, &g).unwrap();
        let ba = mcnemar(&b, &a, &g).unwrap();
        prop_assert_eq!((ab.b, ab.c), (ba.c, ba.b));
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
        prop_assert_eq!(ab, McNemarResult::from_counts(ab.b, ab.c));
    }

    #[test]
    fn cfs_ignores_positive_rescaling(
        rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 6..30),
        labels in prop::collection::vec(any::<bool>(), 30),
        exponents in prop::collection::vec(-3i32..6, 4),
        k in 1usize..=4,
    ) {
        let labels: Vec<Label> = labels[..rows.len()].iter().map(|&b| label_of(b)).collect();
        // Power-of-two factors keep every intermediate exact, so selections must match bit for bit.
        let scaled: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().zip(&exponents).map(|(x, e)| x * 2f64.powi(*e)).collect())
            .collect();
        let a = select_features_cfs(&rows, &labels, k).unwrap();
        prop_assert_eq!(a.iter().collect::<HashSet<_>>().len(), k);
        prop_assert_eq!(select_features_cfs(&scaled, &labels, k).unwrap(), a);
    }
}

fn example(i: usize, label: Option<Label>, split: Split, render: bool) -> LabeledExample {
    LabeledExample {
        id: format!("ex{i}"),
        source_url: format!("http://example.com/{i}?q=\"x\""),
        html_path: format!("html/ex{i}.html").into(),
        image_path: render.then(|| format!("img/ex{i}.png").into()),
        label,
        split,
        rows: i % 7,
        cols: i % 5,
        passes_size_filter: Some(i % 7 >= 2 && i % 5 >= 2),
        render: render.then_some(RenderRecord {
            viewport_width: 1024,
            width: 100 + i as u32,
            height: 40,
            error: None,
        }),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn manifest_round_trips(
        specs in prop::collection::vec((prop::option::of(any::<bool>()), 0usize..4, any::<bool>()), 0..20),
    ) {
        let entries = specs
            .iter()
            .enumerate()
            .map(|(i, (label, split, render))| {
                let split = [Split::Train, Split::Val, Split::Test, Split::Unsplit][*split];
                example(i, label.map(label_of), split, *render)
            })
            .collect();
        let manifest = DatasetManifest::new(entries);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.jsonl");
        write_manifest(&manifest, &path).unwrap();
        prop_assert_eq!(read_manifest(&path).unwrap(), manifest);
    }

    #[test]
    fn forest_prediction_ignores_tree_order(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 12..40),
        probe in prop::collection::vec(-1.5f64..1.5, 3),
        seed in any::<u64>(),
    ) {
        let y: Vec<Label> = rows.iter().map(|r| label_of(r[0] + 0.5 * r[1] > 0.0)).collect();
        prop_assume!(y.contains(&Label::Genuine) && y.contains(&Label::Layout));
        let names: Vec<String> = (0..3).map(|i| format!("f{i}")).collect();
        let cfg = ForestConfig { n_trees: 9, ..ForestConfig::dwtc_original(seed) };
        let model = ForestModel::train(&rows, &y, &names, FeatureScope::Html, CATALOGUE_VERSION, &cfg).unwrap();
        let mut reversed = model.clone();
        reversed.trees.reverse();
        let p = model.predict_proba(&probe).unwrap();
        let q = reversed.predict_proba(&probe).unwrap();
        prop_assert!((p - q).abs() <= 1e-12);
        if (p - 0.5).abs() > 1e-9 {
            prop_assert_eq!(model.predict(&probe).unwrap().0, reversed.predict(&probe).unwrap().0);
        }
    }
}
