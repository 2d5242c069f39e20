//! Canonical on-disk form of a prepared corpus:
//!
//! ```text
//! manifest.json              counts, group sizes, file digests
//! interactions.csv           user,item,timestamp   (dense indices)
//! users.csv / items.csv      dense index -> raw dataset id
//! item_groups_<attr>.csv     item,group
//! features.csv, labels.csv   feature corpora only
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datasets::{
    load_adult, load_amazon, load_lastfm, load_movielens, AdultDataset, Attribute, DatasetKind,
    Interaction, InteractionMatrix,
};
use crate::error::{Error, Result};
use crate::providers::FeatureTable;
use crate::types::{Catalog, GroupId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub attribute: Attribute,
    pub group_names: Vec<String>,
    pub group_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset: DatasetKind,
    pub n_users: Option<usize>,
    pub n_items: usize,
    pub n_interactions: Option<usize>,
    pub n_features: Option<usize>,
    pub groups: Vec<GroupSummary>,
    /// MovieLens items without a release date (assigned the later period).
    pub missing_release_years: usize,
    /// Raw records dropped for missing values.
    pub dropped_records: usize,
    /// SHA-256 of every data file, by file name.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    /// Digest of the manifest itself; equal for byte-identical preparations.
    pub fn digest(&self) -> String {
        hex_digest(serde_json::to_string(self).expect("manifest serializes").as_bytes())
    }
}

/// Published post-preprocessing sizes of each corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpectedCounts {
    pub users: Option<usize>,
    pub items: usize,
    pub interactions: Option<usize>,
    pub features: Option<usize>,
}

pub fn expected_counts(kind: DatasetKind) -> ExpectedCounts {
    let implicit = |users, items, interactions| ExpectedCounts {
        users: Some(users),
        items,
        interactions: Some(interactions),
        features: None,
    };
    match kind {
        DatasetKind::MovieLens => implicit(943, 1682, 100_000),
        DatasetKind::LastFm => implicit(1797, 1507, 62_376),
        DatasetKind::Amazon => implicit(1395, 1171, 25_445),
        DatasetKind::Adult => ExpectedCounts {
            users: None,
            items: 39_190,
            interactions: None,
            features: Some(112),
        },
    }
}

/// Compares a manifest with the published sizes of its corpus.
pub fn audit(manifest: &Manifest) -> Result<()> {
    let want = expected_counts(manifest.dataset);
    let mut diffs = Vec::new();
    let mut check = |what: &str, want: Option<usize>, got: Option<usize>| {
        if let Some(w) = want.filter(|_| want != got) {
            diffs.push(format!(
                "{what}: expected {w}, found {}",
                got.map_or("none".to_string(), |g| g.to_string())
            ));
        }
    };
    check("users", want.users, manifest.n_users);
    check("items", Some(want.items), Some(manifest.n_items));
    check("interactions", want.interactions, manifest.n_interactions);
    check("features", want.features, manifest.n_features);
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(Error::Audit {
            dataset: manifest.dataset.to_string(),
            details: diffs.join("; "),
        })
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A prepared corpus.
#[derive(Clone, Debug)]
pub enum ProcessedDataset {
    Interactions {
        kind: DatasetKind,
        interactions: InteractionMatrix,
        catalogs: BTreeMap<Attribute, Catalog>,
        missing_release_years: usize,
    },
    Features {
        features: FeatureTable,
        catalog: Catalog,
        labels: Vec<u8>,
        dropped_records: usize,
    },
}

impl ProcessedDataset {
    /// Loads and preprocesses a raw corpus.
    pub fn from_raw(kind: DatasetKind, raw: &Path) -> Result<Self> {
        let ds = match kind {
            DatasetKind::Adult => return Ok(Self::from(load_adult(raw)?)),
            DatasetKind::MovieLens => load_movielens(raw)?,
            DatasetKind::LastFm => load_lastfm(raw)?,
            DatasetKind::Amazon => load_amazon(raw)?,
        };
        let catalogs = ds
            .attributes()
            .into_iter()
            .map(|a| Ok((a, ds.catalog(a)?)))
            .collect::<Result<_>>()?;
        Ok(ProcessedDataset::Interactions {
            kind,
            missing_release_years: ds.missing_release_years(),
            interactions: ds.interactions,
            catalogs,
        })
    }

    pub fn kind(&self) -> DatasetKind {
        match self {
            ProcessedDataset::Interactions { kind, .. } => *kind,
            ProcessedDataset::Features { .. } => DatasetKind::Adult,
        }
    }

    pub fn n_items(&self) -> usize {
        match self {
            ProcessedDataset::Interactions { interactions, .. } => interactions.n_items(),
            ProcessedDataset::Features { features, .. } => features.n_rows(),
        }
    }

    pub fn catalog(&self, attribute: Attribute) -> Result<&Catalog> {
        let found = match self {
            ProcessedDataset::Interactions { catalogs, .. } => catalogs.get(&attribute),
            ProcessedDataset::Features { catalog, .. } => (attribute == Attribute::Sex).then_some(catalog),
        };
        found.ok_or_else(|| Error::input(format!("{} has no `{attribute}` attribute", self.kind())))
    }

    fn catalogs(&self) -> Vec<(Attribute, &Catalog)> {
        match self {
            ProcessedDataset::Interactions { catalogs, .. } => catalogs.iter().map(|(a, c)| (*a, c)).collect(),
            ProcessedDataset::Features { catalog, .. } => vec![(Attribute::Sex, catalog)],
        }
    }

    /// Writes the canonical directory and returns its manifest.
    pub fn write(&self, dir: &Path) -> Result<Manifest> {
        fs::create_dir_all(dir)?;
        let mut files = BTreeMap::new();
        let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
            files.insert(name.to_string(), hex_digest(&bytes));
            write_atomic(&dir.join(name), &bytes)
        };
        let mut manifest = Manifest {
            dataset: self.kind(),
            n_users: None,
            n_items: self.n_items(),
            n_interactions: None,
            n_features: None,
            groups: Vec::new(),
            missing_release_years: 0,
            dropped_records: 0,
            files: BTreeMap::new(),
        };
        for (attribute, catalog) in self.catalogs() {
            let rows = catalog
                .labels()
                .iter()
                .enumerate()
                .map(|(i, g)| vec![i.to_string(), g.to_string()]);
            put(&format!("item_groups_{attribute}.csv"), csv_bytes(&["item", "group"], rows)?)?;
            manifest.groups.push(GroupSummary {
                attribute,
                group_names: catalog.group_names().to_vec(),
                group_sizes: catalog.group_counts().to_vec(),
            });
        }
        match self {
            ProcessedDataset::Interactions {
                interactions,
                missing_release_years,
                ..
            } => {
                let rows = interactions.entries().iter().map(|e| {
                    vec![
                        e.user.to_string(),
                        e.item.to_string(),
                        e.timestamp.map(|t| t.to_string()).unwrap_or_default(),
                    ]
                });
                put("interactions.csv", csv_bytes(&["user", "item", "timestamp"], rows)?)?;
                let keyed = |keys: &[String]| {
                    keys.iter()
                        .enumerate()
                        .map(|(i, k)| vec![i.to_string(), k.clone()])
                        .collect::<Vec<_>>()
                };
                put("users.csv", csv_bytes(&["user", "key"], keyed(interactions.user_keys()))?)?;
                put("items.csv", csv_bytes(&["item", "key"], keyed(interactions.item_keys()))?)?;
                manifest.n_users = Some(interactions.n_users());
                manifest.n_interactions = Some(interactions.len());
                manifest.missing_release_years = *missing_release_years;
            }
            ProcessedDataset::Features {
                features,
                labels,
                dropped_records,
                ..
            } => {
                let header: Vec<&str> = features.columns.iter().map(String::as_str).collect();
                let rows = (0..features.n_rows())
                    .map(|i| features.row(i).iter().map(|x| format!("{x:?}")).collect::<Vec<_>>());
                put("features.csv", csv_bytes(&header, rows)?)?;
                let rows = labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| vec![i.to_string(), l.to_string()]);
                put("labels.csv", csv_bytes(&["item", "label"], rows)?)?;
                manifest.n_features = Some(features.n_cols());
                manifest.dropped_records = *dropped_records;
            }
        }
        manifest.files = files;
        let json = serde_json::to_vec_pretty(&manifest)?;
        write_atomic(&dir.join("manifest.json"), &json)?;
        Ok(manifest)
    }

    /// Reads a directory produced by [`ProcessedDataset::write`], verifying
    /// file digests.
    pub fn read(dir: &Path) -> Result<(Self, Manifest)> {
        let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
        for (name, digest) in &manifest.files {
            let bytes = fs::read(dir.join(name))?;
            if &hex_digest(&bytes) != digest {
                return Err(Error::input(format!("{name} does not match its manifest digest")));
            }
        }
        let mut catalogs = BTreeMap::new();
        for g in &manifest.groups {
            let path = dir.join(format!("item_groups_{}.csv", g.attribute));
            let labels: Vec<GroupId> = read_rows(&path)?
                .into_iter()
                .map(|r| parse_field(&path, &r, 1).map(GroupId))
                .collect::<Result<_>>()?;
            catalogs.insert(g.attribute, Catalog::new(labels, g.group_names.clone())?);
        }
        let ds = if manifest.dataset == DatasetKind::Adult {
            let path = dir.join("features.csv");
            let mut reader = csv::Reader::from_path(&path)?;
            let columns: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
            let mut data = Vec::new();
            for (i, rec) in reader.records().enumerate() {
                let rec = rec?;
                for f in rec.iter() {
                    data.push(f.parse::<f64>().map_err(|_| {
                        Error::parse(&path, i + 2, format!("bad feature value `{f}`"))
                    })?);
                }
            }
            let path = dir.join("labels.csv");
            let labels = read_rows(&path)?
                .into_iter()
                .map(|r| parse_field(&path, &r, 1).map(|l| l as u8))
                .collect::<Result<_>>()?;
            ProcessedDataset::Features {
                features: FeatureTable::new(columns, data)?,
                catalog: catalogs
                    .remove(&Attribute::Sex)
                    .ok_or_else(|| Error::input("adult directory lacks sex groups"))?,
                labels,
                dropped_records: manifest.dropped_records,
            }
        } else {
            let keys = |name: &str| -> Result<Vec<String>> {
                Ok(read_rows(&dir.join(name))?.into_iter().map(|r| r[1].clone()).collect())
            };
            let (user_keys, item_keys) = (keys("users.csv")?, keys("items.csv")?);
            let path = dir.join("interactions.csv");
            let entries = read_rows(&path)?
                .into_iter()
                .map(|r| {
                    Ok(Interaction {
                        user: parse_field(&path, &r, 0)?,
                        item: parse_field(&path, &r, 1)?,
                        timestamp: if r[2].is_empty() {
                            None
                        } else {
                            Some(r[2].parse().map_err(|_| Error::parse(&path, 0, "bad timestamp"))?)
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ProcessedDataset::Interactions {
                kind: manifest.dataset,
                interactions: InteractionMatrix::from_parts(entries, user_keys, item_keys),
                catalogs,
                missing_release_years: manifest.missing_release_years,
            }
        };
        Ok((ds, manifest))
    }
}

impl From<AdultDataset> for ProcessedDataset {
    fn from(ds: AdultDataset) -> Self {
        ProcessedDataset::Features {
            features: ds.features,
            catalog: ds.catalog,
            labels: ds.labels,
            dropped_records: ds.dropped_missing,
        }
    }
}

fn csv_bytes<I>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::Reader::from_path(path)?;
    reader
        .records()
        .map(|r| Ok(r?.iter().map(str::to_string).collect()))
        .collect()
}

fn parse_field(path: &Path, row: &[String], j: usize) -> Result<u32> {
    row.get(j)
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| Error::parse(path, 0, format!("bad integer field in row {row:?}")))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ProcessedDataset {
        let entries = vec![
            Interaction { user: 0, item: 0, timestamp: Some(3) },
            Interaction { user: 0, item: 1, timestamp: None },
            Interaction { user: 1, item: 2, timestamp: Some(1) },
        ];
        let m = InteractionMatrix::from_entries(2, 3, entries).unwrap();
        let mut catalogs = BTreeMap::new();
        catalogs.insert(Attribute::Popularity, Catalog::from_labels(&[0, 1, 0], 2).unwrap());
        ProcessedDataset::Interactions {
            kind: DatasetKind::LastFm,
            interactions: m,
            catalogs,
            missing_release_years: 0,
        }
    }

    #[test]
    fn write_read_round_trip_and_stable_digest() {
        let dir = tempfile::tempdir().unwrap();
        let ds = tiny();
        let m1 = ds.write(dir.path()).unwrap();
        let m2 = ds.write(dir.path()).unwrap();
        assert_eq!(m1.digest(), m2.digest());
        let (back, m3) = ProcessedDataset::read(dir.path()).unwrap();
        assert_eq!(m3, m1);
        match (back, ds) {
            (
                ProcessedDataset::Interactions { interactions: a, catalogs: ca, .. },
                ProcessedDataset::Interactions { interactions: b, catalogs: cb, .. },
            ) => {
                assert_eq!(a.entries(), b.entries());
                assert_eq!(ca, cb);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn tampered_file_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        tiny().write(dir.path()).unwrap();
        fs::write(dir.path().join("interactions.csv"), "user,item,timestamp\n0,0,\n").unwrap();
        assert!(ProcessedDataset::read(dir.path()).is_err());
    }

    #[test]
    fn audit_lists_expected_and_found() {
        let dir = tempfile::tempdir().unwrap();
        let m = tiny().write(dir.path()).unwrap();
        let err = audit(&m).unwrap_err().to_string();
        assert!(err.contains("users: expected 1797, found 2"), "{err}");
    }
}
