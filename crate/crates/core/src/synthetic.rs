//! Seeded random providers and catalogs for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::{Backbone, ProviderOracle, TableBackbone};
use crate::ranking::{argsort_desc, top_k_desc};
use crate::types::{Catalog, ItemId};

/// Uniformly random valid top-K lists: K distinct items, never the source.
pub fn random_lists(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<ItemId>>> {
    if n <= k {
        return Err(Error::input(format!("need more than {k} items, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lists = (0..n)
        .map(|i| {
            let mut picks = rand::seq::index::sample(&mut rng, n - 1, k).into_vec();
            picks.iter_mut().for_each(|p| {
                if *p >= i {
                    *p += 1;
                }
            });
            picks.into_iter().map(ItemId::from).collect()
        })
        .collect();
    Ok(lists)
}

/// Lists whose targets concentrate on a few hub items, the shape that
/// starves small groups under a plain provider.
pub fn popularity_biased_lists(n: usize, k: usize, hubs: usize, seed: u64) -> Result<Vec<Vec<ItemId>>> {
    if n <= k || hubs == 0 {
        return Err(Error::input("need n > k and at least one hub"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lists = (0..n)
        .map(|i| {
            let mut list: Vec<ItemId> = Vec::with_capacity(k);
            while list.len() < k {
                let cand = if rng.gen_bool(0.7) {
                    rng.gen_range(0..hubs.min(n))
                } else {
                    rng.gen_range(0..n)
                };
                let id = ItemId::from(cand);
                if cand != i && !list.contains(&id) {
                    list.push(id);
                }
            }
            list
        })
        .collect();
    Ok(lists)
}

pub fn table_oracle(lists: Vec<Vec<ItemId>>, k: usize) -> Result<ProviderOracle> {
    ProviderOracle::new(TableBackbone::new(lists), k)
}

/// Random labels with at least `min_per_group` items in every group.
pub fn random_catalog(n: usize, n_groups: usize, min_per_group: usize, seed: u64) -> Result<Catalog> {
    if n_groups == 0 || n_groups * min_per_group > n {
        return Err(Error::input("cannot place the minimum number of items per group"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<u32> = (0..n)
        .map(|i| {
            if i < n_groups * min_per_group {
                (i / min_per_group) as u32
            } else {
                rng.gen_range(0..n_groups as u32)
            }
        })
        .collect();
    labels.shuffle(&mut rng);
    Catalog::from_labels(&labels, n_groups)
}

/// Dense random item-item scores with a popularity tilt toward the first
/// `hubs` items. Unlike a plain table it exposes the full ranking, so the
/// Oracle baseline can run against it.
#[derive(Clone, Debug)]
pub struct ScoreBackbone {
    n: usize,
    scores: Vec<f64>,
}

impl ScoreBackbone {
    pub fn random(n: usize, hubs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores = (0..n * n)
            .map(|idx| rng.gen::<f64>() + if idx % n < hubs { 1.0 } else { 0.0 })
            .collect();
        ScoreBackbone { n, scores }
    }

    fn row(&self, source: ItemId) -> &[f64] {
        &self.scores[source.index() * self.n..(source.index() + 1) * self.n]
    }
}

impl Backbone for ScoreBackbone {
    fn n_items(&self) -> usize {
        self.n
    }

    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId> {
        top_k_desc(self.row(source), k, Some(source))
    }

    fn full_ranking(&self, source: ItemId) -> Option<Vec<ItemId>> {
        let mut order = argsort_desc(self.row(source));
        order.retain(|&i| i != source);
        Some(order)
    }
}
