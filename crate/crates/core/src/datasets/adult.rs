use std::collections::BTreeSet;
use std::path::Path;

use log::info;

use crate::error::{Error, Result};
use crate::providers::FeatureTable;
use crate::types::{Catalog, GroupId};

pub const INCOME_LOW: u8 = 0;
pub const INCOME_HIGH: u8 = 1;

const COLUMNS: [(&str, bool); 14] = [
    ("age", true),
    ("workclass", false),
    ("fnlwgt", true),
    ("education", false),
    ("education-num", true),
    ("marital-status", false),
    ("occupation", false),
    ("relationship", false),
    ("race", false),
    ("sex", false),
    ("capital-gain", true),
    ("capital-loss", true),
    ("hours-per-week", true),
    ("native-country", false),
];
const SEX_COLUMN: usize = 9;

/// The Adult census records as recommendable "people".
#[derive(Clone, Debug)]
pub struct AdultDataset {
    pub features: FeatureTable,
    /// Sex of each record; group names are the raw values, sorted.
    pub catalog: Catalog,
    /// Income class per record, [`INCOME_LOW`] or [`INCOME_HIGH`].
    pub labels: Vec<u8>,
    pub dropped_missing: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AdultOptions {
    /// Also encode sex as a feature. By default it is only the group label.
    pub keep_sex_feature: bool,
}

/// Loads `adult.data` (and `adult.test` when present) from `dir`, drops
/// records with missing values, and one-hot encodes every categorical
/// column except sex. Continuous columns are kept raw; the k-NN provider
/// standardizes.
pub fn load_adult(dir: &Path) -> Result<AdultDataset> {
    load_adult_with(dir, AdultOptions::default())
}

pub fn load_adult_with(dir: &Path, opts: AdultOptions) -> Result<AdultDataset> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0usize;
    for name in ["adult.data", "adult.test"] {
        let path = dir.join(name);
        if !path.exists() {
            if name == "adult.data" {
                return Err(Error::input(format!("{} not found", path.display())));
            }
            continue;
        }
        let text = std::fs::read_to_string(&path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('|') {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
            if fields.len() != COLUMNS.len() + 1 {
                return Err(Error::parse(&path, lineno + 1, format!("expected 15 fields, got {}", fields.len())));
            }
            if fields.iter().any(|f| f == "?") {
                dropped += 1;
                continue;
            }
            let label = match fields[14].trim_end_matches('.') {
                "<=50K" => INCOME_LOW,
                ">50K" => INCOME_HIGH,
                other => {
                    return Err(Error::parse(&path, lineno + 1, format!("unknown income class `{other}`")))
                }
            };
            for (j, (col, numeric)) in COLUMNS.iter().enumerate() {
                if *numeric && fields[j].parse::<f64>().is_err() {
                    return Err(Error::parse(&path, lineno + 1, format!("non-numeric {col} `{}`", fields[j])));
                }
            }
            labels.push(label);
            rows.push(fields);
        }
    }

    let levels: Vec<Vec<String>> = COLUMNS
        .iter()
        .enumerate()
        .map(|(j, (_, numeric))| {
            if *numeric {
                Vec::new()
            } else {
                rows.iter()
                    .map(|r| r[j].clone())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            }
        })
        .collect();
    let encoded = |j: usize| j != SEX_COLUMN || opts.keep_sex_feature;
    let mut names = Vec::new();
    for (j, ((col, numeric), lv)) in COLUMNS.iter().zip(&levels).enumerate() {
        if !encoded(j) {
            continue;
        }
        if *numeric {
            names.push(col.to_string());
        } else {
            names.extend(lv.iter().map(|v| format!("{col}={v}")));
        }
    }
    let mut data = Vec::with_capacity(rows.len() * names.len());
    for r in &rows {
        for (j, (_, numeric)) in COLUMNS.iter().enumerate().filter(|(j, _)| encoded(*j)) {
            if *numeric {
                data.push(r[j].parse::<f64>().expect("validated"));
            } else {
                data.extend(levels[j].iter().map(|v| f64::from(u8::from(*v == r[j]))));
            }
        }
    }
    let features = FeatureTable::new(names, data)?;

    let sexes = &levels[SEX_COLUMN];
    let groups = rows
        .iter()
        .map(|r| GroupId(sexes.iter().position(|s| *s == r[SEX_COLUMN]).unwrap() as u32))
        .collect();
    let catalog = Catalog::new(groups, sexes.clone())?;
    info!(
        "adult: {} records x {} features ({dropped} records with missing values dropped)",
        features.n_rows(),
        features.n_cols()
    );
    Ok(AdultDataset {
        features,
        catalog,
        labels,
        dropped_missing: dropped,
    })
}
