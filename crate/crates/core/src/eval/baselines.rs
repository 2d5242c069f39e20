use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fairness::{fair_greedy_select, FairnessConfig, Selection};
use crate::oracle::Backbone;
use crate::types::{Catalog, ItemId, ItemSet};

/// Fair selection over a seeded uniform permutation of the catalog.
pub fn random_baseline(
    source: ItemId,
    cfg: &FairnessConfig,
    catalog: &Catalog,
    history: &ItemSet,
    seed: u64,
) -> Selection {
    let mut order: Vec<ItemId> = (0..catalog.n_items()).map(ItemId::from).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    fair_greedy_select(order.into_iter().filter(|&i| i != source), history, cfg, catalog)
}

/// Post-hoc fair re-ranking of the backbone's complete ranking. Needs
/// white-box access that the private methods never get.
pub fn oracle_baseline(
    backbone: &dyn Backbone,
    source: ItemId,
    cfg: &FairnessConfig,
    catalog: &Catalog,
    history: &ItemSet,
) -> Result<Selection> {
    let ranking = backbone
        .full_ranking(source)
        .ok_or_else(|| Error::input("backbone does not expose a full ranking"))?;
    Ok(fair_greedy_select(
        ranking.into_iter().filter(|&i| i != source),
        history,
        cfg,
        catalog,
    ))
}
