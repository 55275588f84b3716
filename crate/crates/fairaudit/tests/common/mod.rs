//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)] // not every suite uses every helper

use std::io::Read;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairaudit::data::{Dataset, GroupSpec, SchemaConfig};
use fairaudit::experiments::ExperimentConfig;
use fairaudit::gbdt::GbdtParams;
use fairaudit::smote::SmoteParams;

/// Locate the UCI credit-default CSV. Checked locations, in order:
/// `$FAIRAUDIT_UCI_CSV`, then `data/uci_credit_default.csv` at the
/// workspace root.
pub fn uci_csv_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("FAIRAUDIT_UCI_CSV") {
        let p = PathBuf::from(p);
        if p.exists() {
            return Some(p);
        }
    }
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/uci_credit_default.csv");
    p.exists().then_some(p)
}

/// Load the UCI dataset, tolerating an `ID` column (stripped on the fly) and
/// either spelling of the label header.
pub fn load_uci(path: &std::path::Path) -> Dataset {
    let mut raw = String::new();
    std::fs::File::open(path)
        .unwrap()
        .read_to_string(&mut raw)
        .unwrap();
    let mut lines = raw.lines();
    let header_line = lines.next().expect("empty csv");
    let headers: Vec<&str> = header_line.split(',').map(|h| h.trim()).collect();
    let label = headers
        .iter()
        .find(|h| h.to_lowercase().contains("default"))
        .expect("no default-payment label column")
        .to_string();
    let drop_idx: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.eq_ignore_ascii_case("id"))
        .map(|(i, _)| i)
        .collect();
    let csv_data = if drop_idx.is_empty() {
        path.to_path_buf()
    } else {
        let keep = |line: &str| -> String {
            line.split(',')
                .enumerate()
                .filter(|(i, _)| !drop_idx.contains(i))
                .map(|(_, c)| c)
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = keep(header_line);
        out.push('\n');
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            out.push_str(&keep(line));
            out.push('\n');
        }
        let tmp = std::env::temp_dir().join("fairaudit_uci_noid.csv");
        std::fs::write(&tmp, out).unwrap();
        tmp
    };
    let schema = SchemaConfig {
        label_column: label,
        label_positive_token: "1".into(),
        protected_column: "SEX".into(),
        feature_columns: vec![],
        weight_column: None,
    };
    fairaudit::data::load_csv(&csv_data, &schema).unwrap()
}

/// Gender spec matching the UCI coding: 1 = male (privileged), 2 = female;
/// favourable outcome is no default (label 0).
pub fn uci_group_spec() -> GroupSpec {
    GroupSpec::new("SEX", "1", "2", 0).unwrap()
}

pub fn uci_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema: SchemaConfig {
            label_column: "default payment next month".into(),
            label_positive_token: "1".into(),
            protected_column: "SEX".into(),
            feature_columns: vec![],
            weight_column: None,
        },
        group: uci_group_spec(),
        test_fraction: 0.3,
        seed,
        smote: SmoteParams::default(),
        gbdt: GbdtParams::default(),
        injection: None,
    }
}

/// Imbalanced synthetic dataset with a mild group/label dependence; label 1
/// is the minority class.
pub fn synthetic_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n * 4);
    let mut labels = Vec::with_capacity(n);
    let mut protected = Vec::with_capacity(n);
    for _ in 0..n {
        let male = rng.random_bool(0.4);
        let x0: f64 = rng.random_range(-1.0..1.0);
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(0.0..100.0);
        let noise: f64 = rng.random_range(-0.7..0.7);
        let label = (x0 + 0.6 * x1 + 0.01 * x2 + noise + if male { 0.25 } else { 0.0 } > 1.2) as u8;
        features.extend_from_slice(&[x0, x1, x2, if male { 1.0 } else { 2.0 }]);
        labels.push(label);
        protected.push(if male { "1" } else { "2" }.to_string());
    }
    Dataset::unweighted(
        features,
        vec!["x0".into(), "x1".into(), "x2".into(), "sex".into()],
        labels,
        protected,
    )
    .unwrap()
}

pub fn synthetic_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema: SchemaConfig {
            label_column: "y".into(),
            label_positive_token: "1".into(),
            protected_column: "sex".into(),
            feature_columns: vec![],
            weight_column: None,
        },
        group: GroupSpec::new("sex", "1", "2", 0).unwrap(),
        test_fraction: 0.3,
        seed,
        smote: SmoteParams {
            k: 5,
            target_ratio: 1.0,
            seed: 0,
        },
        gbdt: GbdtParams {
            rounds: 20,
            max_depth: 3,
            ..Default::default()
        },
        injection: None,
    }
}
