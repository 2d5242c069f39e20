use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::InteractionMatrix;
use crate::types::{ItemId, ItemSet};

/// How each user's interactions are ordered before holding out the last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitOrder {
    /// By timestamp; equal timestamps keep input order.
    Timestamp,
    /// Seeded random order, for corpora without timestamps.
    Shuffled { seed: u64 },
}

/// One leave-one-out evaluation case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub user: u32,
    /// Second-latest item: the page the recommendation is shown on.
    pub source: ItemId,
    /// Latest item, held out.
    pub positive: ItemId,
    /// Every interacted item except the positive (includes the source).
    pub history: Vec<ItemId>,
}

impl TestCase {
    pub fn history_set(&self) -> ItemSet {
        self.history.iter().copied().collect()
    }
}

#[derive(Clone, Debug)]
pub struct Split {
    pub cases: Vec<TestCase>,
    /// Users skipped for having fewer than two interactions.
    pub excluded_users: usize,
    /// All interactions except the held-out positives; what providers train on.
    pub train: InteractionMatrix,
}

/// Holds out each user's latest interaction. Uses timestamps when every
/// interaction has one and a seeded shuffle otherwise.
pub fn leave_one_out_split(interactions: &InteractionMatrix, seed: u64) -> Split {
    let order = if interactions.has_timestamps() {
        SplitOrder::Timestamp
    } else {
        SplitOrder::Shuffled { seed }
    };
    leave_one_out_split_with(interactions, order)
}

pub fn leave_one_out_split_with(interactions: &InteractionMatrix, order: SplitOrder) -> Split {
    let mut per_user: Vec<Vec<(Option<i64>, ItemId)>> = vec![Vec::new(); interactions.n_users()];
    for e in interactions.entries() {
        per_user[e.user as usize].push((e.timestamp, ItemId(e.item)));
    }
    let mut rng = match order {
        SplitOrder::Shuffled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        SplitOrder::Timestamp => None,
    };
    let mut cases = Vec::new();
    let mut excluded = 0;
    let mut held_out = vec![None; interactions.n_users()];
    for (user, mut items) in per_user.into_iter().enumerate() {
        match rng.as_mut() {
            Some(rng) => items.shuffle(rng),
            None => items.sort_by_key(|&(ts, _)| ts),
        }
        if items.len() < 2 {
            excluded += 1;
            continue;
        }
        let positive = items[items.len() - 1].1;
        let source = items[items.len() - 2].1;
        held_out[user] = Some(positive);
        cases.push(TestCase {
            user: user as u32,
            source,
            positive,
            history: items[..items.len() - 1].iter().map(|&(_, i)| i).collect(),
        });
    }
    let train = interactions.filter_entries(|e| held_out[e.user as usize] != Some(ItemId(e.item)));
    Split {
        cases,
        excluded_users: excluded,
        train,
    }
}
