use crate::datasets::InteractionMatrix;
use crate::error::{Error, Result};
use crate::oracle::{Backbone, ProviderOracle};
use crate::ranking::{argsort_desc, top_k_desc};
use crate::types::ItemId;

/// Item-item cosine similarity of binary interaction columns. An item with
/// no interactions has similarity 0 to everything, so its list falls back to
/// ascending ids.
#[derive(Clone, Debug)]
pub struct CosineBackbone {
    item_users: Vec<Vec<u32>>,
    user_items: Vec<Vec<u32>>,
}

impl CosineBackbone {
    pub fn new(interactions: &InteractionMatrix) -> Result<Self> {
        if interactions.is_empty() {
            return Err(Error::input("cosine provider needs at least one interaction"));
        }
        let item_users = interactions.item_users();
        let empty = item_users.iter().filter(|u| u.is_empty()).count();
        if empty > 0 {
            log::warn!("{empty} items have no interactions; their similarities are all 0");
        }
        let user_items = interactions
            .user_items()
            .into_iter()
            .map(|row| row.into_iter().map(|i| i.0).collect())
            .collect();
        Ok(CosineBackbone {
            item_users,
            user_items,
        })
    }

    /// Cosine similarity of `source` with every item (the source itself
    /// included).
    pub fn similarities(&self, source: ItemId) -> Vec<f64> {
        let n = self.item_users.len();
        let mut co = vec![0u32; n];
        for &u in &self.item_users[source.index()] {
            for &j in &self.user_items[u as usize] {
                co[j as usize] += 1;
            }
        }
        let ds = self.item_users[source.index()].len() as f64;
        co.iter()
            .zip(&self.item_users)
            .map(|(&c, users)| {
                if c == 0 {
                    0.0
                } else {
                    c as f64 / (ds * users.len() as f64).sqrt()
                }
            })
            .collect()
    }
}

impl Backbone for CosineBackbone {
    fn n_items(&self) -> usize {
        self.item_users.len()
    }

    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId> {
        top_k_desc(&self.similarities(source), k, Some(source))
    }

    fn full_ranking(&self, source: ItemId) -> Option<Vec<ItemId>> {
        let mut order = argsort_desc(&self.similarities(source));
        order.retain(|&i| i != source);
        Some(order)
    }
}

pub fn cosine_provider(interactions: &InteractionMatrix, k: usize) -> Result<ProviderOracle> {
    ProviderOracle::new(CosineBackbone::new(interactions)?, k)
}
