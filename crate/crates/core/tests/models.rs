use sha2::{Digest, Sha256};

use tablesieve::classify::{load_model, save_forest, save_mlp, FeatureScope, Model};
use tablesieve::features::{extract_features, FeatureCatalogue, FeatureMatrix, CATALOGUE_VERSION};
use tablesieve::synth::{generate, SynthConfig};
use tablesieve::table::parse_table;
use tablesieve::{ForestConfig, ForestModel, Label, MlpConfig, MlpModel};

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Features of ten synthetic tables; labels and ids ride along.
fn synthetic_matrix() -> FeatureMatrix {
    let tables = generate(&SynthConfig {
        n_genuine: 5,
        n_layout: 5,
        seed: 2024,
    });
    let mut matrix = FeatureMatrix::new(FeatureCatalogue::v1().names);
    for t in &tables {
        let v = extract_features(&parse_table(&t.html).unwrap());
        matrix.push(t.id.clone(), Some(t.label), v.values).unwrap();
    }
    matrix
}

#[test]
fn ten_table_features_are_pinned() {
    let mut csv = Vec::new();
    synthetic_matrix().write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert_eq!(sha256_hex(&csv), "24d2e94a983069575549236a69cffb1527d1fa70091f94f7c85655369b394782");
    let reread = FeatureMatrix::read_csv(&csv[..]).unwrap();
    let mut again = Vec::new();
    reread.write_csv(&mut again).unwrap();
    assert_eq!(again, csv);
}

fn training_data() -> (Vec<Vec<f64>>, Vec<Label>, Vec<String>) {
    let m = synthetic_matrix();
    let x = m.rows.iter().map(|r| r.values.clone()).collect();
    let y = m.rows.iter().map(|r| r.label.unwrap()).collect();
    (x, y, m.names.clone())
}

#[test]
fn forest_file_is_pinned_for_a_fixed_seed() {
    let (x, y, names) = training_data();
    let cfg = ForestConfig {
        n_trees: 25,
        ..ForestConfig::dwtc_retrained(7)
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("forest.json");
    let model = ForestModel::train(&x, &y, &names, FeatureScope::Html, CATALOGUE_VERSION, &cfg).unwrap();
    save_forest(&model, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(sha256_hex(&bytes), "025fcb839583c36e357345a139f107b0af3c49c916bcb5d3e2d71c48b06dc69d");

    let retrained = ForestModel::train(&x, &y, &names, FeatureScope::Html, CATALOGUE_VERSION, &cfg).unwrap();
    assert_eq!(retrained, model);
    match load_model(&path).unwrap() {
        Model::Forest(loaded) => assert_eq!(loaded, model),
        Model::Mlp(_) => panic!("loaded an MLP"),
    }
}

#[test]
fn mlp_file_round_trips_and_is_deterministic() {
    let (x, y, names) = training_data();
    let cfg = MlpConfig {
        max_epochs: 30,
        ..MlpConfig::joint(3)
    };
    let model = MlpModel::train(&x, &y, &x, &y, &names, FeatureScope::Html, &cfg).unwrap();
    let again = MlpModel::train(&x, &y, &x, &y, &names, FeatureScope::Html, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    save_mlp(&model, &a).unwrap();
    save_mlp(&again, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let Model::Mlp(loaded) = load_model(&a).unwrap() else {
        panic!("loaded a forest")
    };
    for row in &x {
        assert_eq!(loaded.predict(row).unwrap(), model.predict(row).unwrap());
    }
}
