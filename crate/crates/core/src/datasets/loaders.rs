use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use log::info;

use crate::datasets::{
    k_core, period_catalog, popularity_catalog, Attribute, DatasetKind, InteractionMatrix, CORE_K,
    PERIOD_CUTOFF_YEAR, POPULARITY_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::types::Catalog;

/// A preprocessed implicit-feedback corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionDataset {
    pub kind: DatasetKind,
    pub interactions: InteractionMatrix,
    /// Release year per item, when the corpus has one.
    pub release_years: Option<Vec<Option<i32>>>,
}

impl InteractionDataset {
    pub fn attributes(&self) -> Vec<Attribute> {
        if self.release_years.is_some() {
            vec![Attribute::Period, Attribute::Popularity]
        } else {
            vec![Attribute::Popularity]
        }
    }

    pub fn catalog(&self, attribute: Attribute) -> Result<Catalog> {
        match (attribute, &self.release_years) {
            (Attribute::Popularity, _) => popularity_catalog(&self.interactions, POPULARITY_THRESHOLD),
            (Attribute::Period, Some(years)) => period_catalog(years, PERIOD_CUTOFF_YEAR),
            _ => Err(Error::input(format!(
                "{} has no `{attribute}` attribute",
                self.kind
            ))),
        }
    }

    pub fn missing_release_years(&self) -> usize {
        self.release_years
            .as_ref()
            .map_or(0, |y| y.iter().filter(|y| y.is_none()).count())
    }
}

fn lines(path: &Path) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)>> {
    let file = File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    Ok(BufReader::new(file).lines().enumerate().map(|(i, l)| (i + 1, l)))
}

/// Reads raw bytes as Latin-1 text (MovieLens metadata is not UTF-8).
fn latin1_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path)?;
    Ok(bytes
        .split(|&b| b == b'\n')
        .map(|l| l.iter().map(|&b| b as char).collect::<String>())
        .map(|l| l.trim_end_matches('\r').to_string())
        .collect())
}

/// MovieLens 100k from a directory holding `u.data` and `u.item`.
///
/// Items are numbered in `u.item` order; the release year is taken from the
/// date field (`dd-Mon-yyyy`). Ratings are binarized.
pub fn load_movielens(dir: &Path) -> Result<InteractionDataset> {
    let item_path = dir.join("u.item");
    let mut item_keys = Vec::new();
    let mut years = Vec::new();
    for (lineno, line) in latin1_lines(&item_path)?.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() < 3 {
            return Err(Error::parse(&item_path, lineno + 1, "expected `id|title|release date|...`"));
        }
        item_keys.push(fields[0].trim().to_string());
        let date = fields[2].trim();
        let year = if date.is_empty() {
            None
        } else {
            let y = date.rsplit('-').next().and_then(|y| y.parse::<i32>().ok());
            Some(y.ok_or_else(|| {
                Error::parse(&item_path, lineno + 1, format!("bad release date `{date}`"))
            })?)
        };
        years.push(year);
    }

    let data_path = dir.join("u.data");
    let mut records = Vec::new();
    for (lineno, line) in lines(&data_path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [user, item, _rating, ts] = fields.as_slice() else {
            return Err(Error::parse(&data_path, lineno, "expected 4 tab-separated fields"));
        };
        let ts: i64 = ts
            .trim()
            .parse()
            .map_err(|_| Error::parse(&data_path, lineno, format!("bad timestamp `{ts}`")))?;
        records.push((user.trim().to_string(), item.trim().to_string(), Some(ts)));
    }
    let interactions = InteractionMatrix::from_raw(records, Some(&item_keys))?;
    let missing = years.iter().filter(|y| y.is_none()).count();
    info!(
        "movielens: {} users, {} items, {} interactions ({missing} items without release date)",
        interactions.n_users(),
        interactions.n_items(),
        interactions.len()
    );
    Ok(InteractionDataset {
        kind: DatasetKind::MovieLens,
        interactions,
        release_years: Some(years),
    })
}

fn resolve(path: &Path, default_name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(default_name)
    } else {
        path.to_path_buf()
    }
}

/// LastFM hetrec-2011 `user_artists.dat` (tab-separated with a header, no
/// timestamps), reduced to its 10-core.
pub fn load_lastfm(path: &Path) -> Result<InteractionDataset> {
    let path = resolve(path, "user_artists.dat");
    let mut records = Vec::new();
    for (lineno, line) in lines(&path)? {
        let line = line?;
        if lineno == 1 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(Error::parse(&path, lineno, "expected `userID artistID weight`"));
        }
        records.push((fields[0].trim().to_string(), fields[1].trim().to_string(), None));
    }
    let raw = InteractionMatrix::from_raw(records, None)?;
    Ok(InteractionDataset {
        kind: DatasetKind::LastFm,
        interactions: k_core(&raw, CORE_K)?,
        release_years: None,
    })
}

/// Amazon ratings CSV (`user,item,rating,timestamp`, no header), reduced to
/// its 10-core.
pub fn load_amazon(path: &Path) -> Result<InteractionDataset> {
    let path = resolve(path, "ratings_Home_and_Kitchen.csv");
    let mut records = Vec::new();
    for (lineno, line) in lines(&path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let [user, item, _rating, ts] = fields.as_slice() else {
            return Err(Error::parse(&path, lineno, "expected `user,item,rating,timestamp`"));
        };
        let ts: i64 = ts
            .trim()
            .parse()
            .map_err(|_| Error::parse(&path, lineno, format!("bad timestamp `{ts}`")))?;
        records.push((user.trim().to_string(), item.trim().to_string(), Some(ts)));
    }
    let raw = InteractionMatrix::from_raw(records, None)?;
    Ok(InteractionDataset {
        kind: DatasetKind::Amazon,
        interactions: k_core(&raw, CORE_K)?,
        release_years: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn movielens_small_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let mut item = File::create(dir.path().join("u.item")).unwrap();
        writeln!(item, "1|A|01-Jan-1989||").unwrap();
        writeln!(item, "2|B|01-Jan-1995||").unwrap();
        writeln!(item, "3|unknown||||").unwrap();
        let mut data = File::create(dir.path().join("u.data")).unwrap();
        writeln!(data, "7\t2\t5\t100").unwrap();
        writeln!(data, "7\t1\t3\t90").unwrap();
        writeln!(data, "8\t3\t1\t95").unwrap();
        drop((item, data));
        let ds = load_movielens(dir.path()).unwrap();
        assert_eq!(ds.interactions.n_items(), 3);
        assert_eq!(ds.interactions.n_users(), 2);
        assert_eq!(ds.release_years, Some(vec![Some(1989), Some(1995), None]));
        let period = ds.catalog(Attribute::Period).unwrap();
        assert_eq!(period.group_counts(), &[1, 2]);
        assert!(ds.catalog(Attribute::Sex).is_err());
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("u.item"), "1|A|01-Jan-1989||\n").unwrap();
        std::fs::write(dir.path().join("u.data"), "1\t1\t5\t10\n1\t1\n").unwrap();
        match load_movielens(dir.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
