//! Raw corpus loaders, k-core filtering, group labelling, leave-one-out
//! splits and the canonical processed-directory format.

mod adult;
mod interactions;
mod kcore;
mod loaders;
mod processed;
mod split;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Catalog, GroupId};

pub use adult::{load_adult, load_adult_with, AdultDataset, AdultOptions, INCOME_HIGH, INCOME_LOW};
pub use interactions::{Interaction, InteractionMatrix};
pub use kcore::k_core;
pub use loaders::{load_amazon, load_lastfm, load_movielens, InteractionDataset};
pub use processed::{audit, expected_counts, Manifest, ProcessedDataset, ExpectedCounts};
pub use split::{leave_one_out_split, leave_one_out_split_with, Split, SplitOrder, TestCase};
pub(crate) use processed::write_atomic;

/// Items with fewer interactions than this form the protected popularity group.
pub const POPULARITY_THRESHOLD: usize = 50;
/// Movies released before this year form the protected period group.
pub const PERIOD_CUTOFF_YEAR: i32 = 1990;
/// Core size used for LastFM and Amazon.
pub const CORE_K: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    MovieLens,
    LastFm,
    Amazon,
    Adult,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::MovieLens => "movielens",
            DatasetKind::LastFm => "lastfm",
            DatasetKind::Amazon => "amazon",
            DatasetKind::Adult => "adult",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "movielens" | "ml-100k" | "ml100k" => Ok(DatasetKind::MovieLens),
            "lastfm" => Ok(DatasetKind::LastFm),
            "amazon" => Ok(DatasetKind::Amazon),
            "adult" => Ok(DatasetKind::Adult),
            other => Err(Error::input(format!("unknown dataset kind `{other}`"))),
        }
    }
}

/// Sensitive attribute used to split items into groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    /// Release year before 1990 (MovieLens only).
    Period,
    /// Fewer than 50 interactions.
    Popularity,
    /// Sex (Adult only).
    Sex,
}

impl Attribute {
    pub fn name(self) -> &'static str {
        match self {
            Attribute::Period => "period",
            Attribute::Popularity => "popularity",
            Attribute::Sex => "sex",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "period" => Ok(Attribute::Period),
            "popularity" => Ok(Attribute::Popularity),
            "sex" | "gender" => Ok(Attribute::Sex),
            other => Err(Error::input(format!("unknown attribute `{other}`"))),
        }
    }
}

/// Protected group 0 = items with fewer than `threshold` interactions.
pub fn popularity_catalog(interactions: &InteractionMatrix, threshold: usize) -> Result<Catalog> {
    let groups = interactions
        .item_degrees()
        .into_iter()
        .map(|d| GroupId(u32::from(d >= threshold)))
        .collect();
    Catalog::new(groups, vec!["less-popular".into(), "popular".into()])
}

/// Protected group 0 = released before `cutoff`. Unknown years go to group 1.
pub fn period_catalog(release_years: &[Option<i32>], cutoff: i32) -> Result<Catalog> {
    let groups = release_years
        .iter()
        .map(|y| GroupId(u32::from(!matches!(y, Some(y) if *y < cutoff))))
        .collect();
    Catalog::new(groups, vec![format!("before-{cutoff}"), format!("{cutoff}-or-later")])
}
