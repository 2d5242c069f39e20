//! Identifiers, recommendation lists and the item catalog.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 0-based item index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ItemId {
    fn from(i: usize) -> Self {
        ItemId(i as u32)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense 0-based index of a sensitive group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub u32);

impl GroupId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type ItemSet = HashSet<ItemId>;

/// An ordered recommendation list. Rank is position + 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecList(Vec<ItemId>);

impl RecList {
    pub fn new() -> Self {
        RecList(Vec::new())
    }

    pub fn with_capacity(k: usize) -> Self {
        RecList(Vec::with_capacity(k))
    }

    /// Wraps `items`, rejecting duplicates.
    pub fn from_items(items: Vec<ItemId>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(items.len());
        for &item in &items {
            if !seen.insert(item) {
                return Err(Error::input(format!("duplicate item {item} in list")));
            }
        }
        Ok(RecList(items))
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.contains(&item)
    }

    /// 1-based rank of `item`, if present.
    pub fn rank_of(&self, item: ItemId) -> Option<usize> {
        self.0.iter().position(|&i| i == item).map(|p| p + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.0.iter().copied()
    }

    pub(crate) fn push(&mut self, item: ItemId) {
        debug_assert!(!self.0.contains(&item));
        self.0.push(item);
    }

    pub fn into_inner(self) -> Vec<ItemId> {
        self.0
    }
}

impl<'a> IntoIterator for &'a RecList {
    type Item = &'a ItemId;
    type IntoIter = std::slice::Iter<'a, ItemId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Item universe together with each item's sensitive group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    group_of: Vec<GroupId>,
    group_counts: Vec<usize>,
    group_names: Vec<String>,
}

impl Catalog {
    /// Builds a catalog from one group label per item. Group names are
    /// indexed by `GroupId`; every label must be in range.
    pub fn new(group_of: Vec<GroupId>, group_names: Vec<String>) -> Result<Self> {
        if group_names.is_empty() {
            return Err(Error::input("catalog needs at least one group"));
        }
        let mut group_counts = vec![0usize; group_names.len()];
        for (i, g) in group_of.iter().enumerate() {
            let slot = group_counts.get_mut(g.index()).ok_or_else(|| {
                Error::input(format!(
                    "item {i} has group {g} but only {} groups exist",
                    group_names.len()
                ))
            })?;
            *slot += 1;
        }
        Ok(Catalog {
            group_of,
            group_counts,
            group_names,
        })
    }

    /// Catalog with anonymous group names `g0, g1, ...`.
    pub fn from_labels(labels: &[u32], n_groups: usize) -> Result<Self> {
        let names = (0..n_groups).map(|g| format!("g{g}")).collect();
        Catalog::new(labels.iter().map(|&g| GroupId(g)).collect(), names)
    }

    pub fn n_items(&self) -> usize {
        self.group_of.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_counts.len()
    }

    #[inline]
    pub fn group_of(&self, item: ItemId) -> GroupId {
        self.group_of[item.index()]
    }

    pub fn group_counts(&self) -> &[usize] {
        &self.group_counts
    }

    pub fn group_name(&self, group: GroupId) -> &str {
        &self.group_names[group.index()]
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn labels(&self) -> &[GroupId] {
        &self.group_of
    }

    pub fn check_item(&self, item: ItemId) -> Result<()> {
        if item.index() < self.n_items() {
            Ok(())
        } else {
            Err(Error::input(format!(
                "item {item} out of range for catalog of {} items",
                self.n_items()
            )))
        }
    }

    /// Per-group counts of `items`.
    pub fn tally<'a>(&self, items: impl IntoIterator<Item = &'a ItemId>) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_groups()];
        for &item in items {
            counts[self.group_of(item).index()] += 1;
        }
        counts
    }
}
