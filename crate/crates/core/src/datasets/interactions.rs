use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ItemId;

/// One observed (user, item) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub user: u32,
    pub item: u32,
    pub timestamp: Option<i64>,
}

/// Binary implicit-feedback matrix over dense user and item indices.
///
/// Each (user, item) pair is stored once, in input order. Raw dataset ids
/// are kept for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    n_users: usize,
    n_items: usize,
    entries: Vec<Interaction>,
    user_keys: Vec<String>,
    item_keys: Vec<String>,
}

impl InteractionMatrix {
    /// Builds the matrix from raw-keyed records. Users and items are numbered
    /// in order of first appearance unless `item_order` fixes the item
    /// numbering. Repeated pairs keep their earliest timestamp.
    pub fn from_raw<I>(records: I, item_order: Option<&[String]>) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, Option<i64>)>,
    {
        let mut user_index: HashMap<String, u32> = HashMap::new();
        let mut user_keys = Vec::new();
        let mut item_index: HashMap<String, u32> = HashMap::new();
        let mut item_keys = Vec::new();
        let fixed_items = item_order.is_some();
        if let Some(order) = item_order {
            for key in order {
                item_index.insert(key.clone(), item_keys.len() as u32);
                item_keys.push(key.clone());
            }
        }
        let mut pair_index: HashMap<(u32, u32), usize> = HashMap::new();
        let mut entries = Vec::new();
        for (user, item, timestamp) in records {
            let u = *user_index.entry(user.clone()).or_insert_with(|| {
                user_keys.push(user);
                (user_keys.len() - 1) as u32
            });
            let i = match item_index.get(&item) {
                Some(&i) => i,
                None if fixed_items => {
                    return Err(Error::input(format!("item {item} is not in the item list")))
                }
                None => {
                    let i = item_keys.len() as u32;
                    item_index.insert(item.clone(), i);
                    item_keys.push(item);
                    i
                }
            };
            match pair_index.get(&(u, i)) {
                Some(&pos) => {
                    let e: &mut Interaction = &mut entries[pos];
                    e.timestamp = match (e.timestamp, timestamp) {
                        (Some(a), Some(b)) => Some(a.min(b)),
                        (a, b) => a.or(b),
                    };
                }
                None => {
                    pair_index.insert((u, i), entries.len());
                    entries.push(Interaction {
                        user: u,
                        item: i,
                        timestamp,
                    });
                }
            }
        }
        Ok(InteractionMatrix {
            n_users: user_keys.len(),
            n_items: item_keys.len(),
            entries,
            user_keys,
            item_keys,
        })
    }

    /// Matrix over already-dense indices; keys are the indices themselves.
    pub fn from_entries(n_users: usize, n_items: usize, entries: Vec<Interaction>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            if e.user as usize >= n_users || e.item as usize >= n_items {
                return Err(Error::input(format!(
                    "interaction ({}, {}) outside {n_users} x {n_items}",
                    e.user, e.item
                )));
            }
            if !seen.insert((e.user, e.item)) {
                return Err(Error::input(format!("duplicate interaction ({}, {})", e.user, e.item)));
            }
        }
        Ok(InteractionMatrix {
            n_users,
            n_items,
            entries,
            user_keys: (0..n_users).map(|u| u.to_string()).collect(),
            item_keys: (0..n_items).map(|i| i.to_string()).collect(),
        })
    }

    pub(crate) fn from_parts(
        entries: Vec<Interaction>,
        user_keys: Vec<String>,
        item_keys: Vec<String>,
    ) -> Self {
        InteractionMatrix {
            n_users: user_keys.len(),
            n_items: item_keys.len(),
            entries,
            user_keys,
            item_keys,
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Number of nonzero entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Interaction] {
        &self.entries
    }

    pub fn user_key(&self, user: u32) -> &str {
        &self.user_keys[user as usize]
    }

    pub fn item_key(&self, item: ItemId) -> &str {
        &self.item_keys[item.index()]
    }

    pub fn item_keys(&self) -> &[String] {
        &self.item_keys
    }

    pub fn user_keys(&self) -> &[String] {
        &self.user_keys
    }

    pub fn has_timestamps(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(|e| e.timestamp.is_some())
    }

    pub fn item_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_items];
        for e in &self.entries {
            d[e.item as usize] += 1;
        }
        d
    }

    pub fn user_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_users];
        for e in &self.entries {
            d[e.user as usize] += 1;
        }
        d
    }

    /// Items of every user, in entry order.
    pub fn user_items(&self) -> Vec<Vec<ItemId>> {
        let mut rows = vec![Vec::new(); self.n_users];
        for e in &self.entries {
            rows[e.user as usize].push(ItemId(e.item));
        }
        rows
    }

    /// Users of every item, ascending.
    pub fn item_users(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_items];
        for e in &self.entries {
            cols[e.item as usize].push(e.user);
        }
        for c in &mut cols {
            c.sort_unstable();
        }
        cols
    }

    /// Same users and items with only the entries accepted by `keep`.
    pub fn filter_entries(&self, mut keep: impl FnMut(&Interaction) -> bool) -> Self {
        InteractionMatrix {
            n_users: self.n_users,
            n_items: self.n_items,
            entries: self.entries.iter().copied().filter(|e| keep(e)).collect(),
            user_keys: self.user_keys.clone(),
            item_keys: self.item_keys.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_ids_are_densified_and_pairs_deduplicated() {
        let m = InteractionMatrix::from_raw(
            vec![
                ("u9".to_string(), "a".to_string(), Some(5)),
                ("u9".to_string(), "b".to_string(), Some(6)),
                ("u1".to_string(), "a".to_string(), Some(7)),
                ("u9".to_string(), "a".to_string(), Some(2)),
            ],
            None,
        )
        .unwrap();
        assert_eq!((m.n_users(), m.n_items(), m.len()), (2, 2, 3));
        assert_eq!(m.entries()[0].timestamp, Some(2));
        assert_eq!(m.user_key(1), "u1");
        assert_eq!(m.item_degrees(), vec![2, 1]);
    }
}
