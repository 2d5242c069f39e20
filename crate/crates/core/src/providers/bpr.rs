use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datasets::InteractionMatrix;
use crate::error::{Error, Result};
use crate::oracle::{Backbone, ProviderOracle};
use crate::ranking::{argsort_desc, top_k_desc};
use crate::types::ItemId;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BprConfig {
    pub dims: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for BprConfig {
    fn default() -> Self {
        BprConfig {
            dims: 100,
            learning_rate: 0.01,
            regularization: 0.01,
            iterations: 100,
            seed: 0,
        }
    }
}

/// Row-major `n_items x dims` latent item factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemFactors {
    n_items: usize,
    dims: usize,
    data: Vec<f64>,
}

impl ItemFactors {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        if dims == 0 || rows.iter().any(|r| r.len() != dims) {
            return Err(Error::input("factor rows must share a positive dimension"));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::input("factors must be finite"));
        }
        Ok(ItemFactors {
            n_items: rows.len(),
            dims,
            data: rows.concat(),
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, item: ItemId) -> &[f64] {
        &self.data[item.index() * self.dims..(item.index() + 1) * self.dims]
    }

    /// Inner product of `source`'s factor with every item's.
    pub fn similarities(&self, source: ItemId) -> Vec<f64> {
        let q = self.row(source);
        self.data
            .chunks_exact(self.dims)
            .map(|r| dot(q, r))
            .collect()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trained BPR model; user factors are kept for diagnostics.
#[derive(Clone, Debug)]
pub struct BprModel {
    pub users: Vec<f64>,
    pub items: ItemFactors,
}

impl BprModel {
    pub fn score(&self, user: u32, item: ItemId) -> f64 {
        let d = self.items.dims;
        dot(&self.users[user as usize * d..(user as usize + 1) * d], self.items.row(item))
    }

    /// Share of sampled (observed, unobserved) pairs ranked in the right
    /// order for their user. Users who have seen every item are skipped.
    pub fn sampled_auc(&self, interactions: &InteractionMatrix, samples: usize, seed: u64) -> f64 {
        let n_items = interactions.n_items() as u32;
        let rows = interactions.user_items();
        let pairs: Vec<(u32, u32)> = interactions
            .entries()
            .iter()
            .filter(|e| rows[e.user as usize].len() < n_items as usize)
            .map(|e| (e.user, e.item))
            .collect();
        if pairs.is_empty() || samples == 0 {
            return 0.5;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut wins = 0.0;
        for _ in 0..samples {
            let (u, i) = pairs[rng.gen_range(0..pairs.len())];
            let j = loop {
                let j = ItemId(rng.gen_range(0..n_items));
                if !rows[u as usize].contains(&j) {
                    break j;
                }
            };
            let (si, sj) = (self.score(u, ItemId(i)), self.score(u, j));
            wins += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
        }
        wins / samples as f64
    }
}

/// Fits latent factors with SGD on the pairwise BPR objective. Each
/// iteration draws as many `(user, positive, negative)` triples as there are
/// interactions: the pair is a uniformly drawn interaction and the negative
/// is rejection-sampled among the user's unobserved items.
pub fn train_bpr(interactions: &InteractionMatrix, cfg: &BprConfig) -> Result<ItemFactors> {
    train_bpr_model(interactions, cfg).map(|m| m.items)
}

pub fn train_bpr_model(interactions: &InteractionMatrix, cfg: &BprConfig) -> Result<BprModel> {
    if interactions.is_empty() {
        return Err(Error::input("cannot train BPR without interactions"));
    }
    if cfg.dims == 0 {
        return Err(Error::input("BPR needs at least one latent dimension"));
    }
    let n_items = interactions.n_items();
    let d = cfg.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut init = |len: usize| -> Vec<f64> {
        (0..len).map(|_| (rng.gen::<f64>() - 0.5) / d as f64).collect()
    };
    let mut users = init(interactions.n_users() * d);
    let mut items = init(n_items * d);

    let mut positives: Vec<Vec<u32>> = interactions
        .user_items()
        .into_iter()
        .map(|row| row.into_iter().map(|i| i.0).collect())
        .collect();
    for row in &mut positives {
        row.sort_unstable();
    }
    // pairs whose user has seen every item have no negative to sample
    let pairs: Vec<(u32, u32)> = interactions
        .entries()
        .iter()
        .filter(|e| positives[e.user as usize].len() < n_items)
        .map(|e| (e.user, e.item))
        .collect();
    if pairs.is_empty() {
        return Err(Error::input("every user has interacted with every item"));
    }

    let (lr, reg) = (cfg.learning_rate, cfg.regularization);
    let mut grad_u = vec![0.0; d];
    for _ in 0..cfg.iterations {
        for _ in 0..interactions.len() {
            let (u, i) = pairs[rng.gen_range(0..pairs.len())];
            let seen = &positives[u as usize];
            let j = loop {
                let j = rng.gen_range(0..n_items as u32);
                if seen.binary_search(&j).is_err() {
                    break j;
                }
            };
            let (u, i, j) = (u as usize * d, i as usize * d, j as usize * d);
            let x: f64 = (0..d)
                .map(|f| users[u + f] * (items[i + f] - items[j + f]))
                .sum();
            let g = 1.0 / (1.0 + x.exp());
            for f in 0..d {
                let pu = users[u + f];
                let (qi, qj) = (items[i + f], items[j + f]);
                grad_u[f] = g * (qi - qj) - reg * pu;
                items[i + f] += lr * (g * pu - reg * qi);
                items[j + f] += lr * (-g * pu - reg * qj);
            }
            for f in 0..d {
                users[u + f] += lr * grad_u[f];
            }
        }
    }
    Ok(BprModel {
        users,
        items: ItemFactors {
            n_items,
            dims: d,
            data: items,
        },
    })
}

#[derive(Clone, Debug)]
pub struct BprBackbone {
    factors: ItemFactors,
}

impl BprBackbone {
    pub fn new(factors: ItemFactors) -> Self {
        BprBackbone { factors }
    }
}

impl Backbone for BprBackbone {
    fn n_items(&self) -> usize {
        self.factors.n_items
    }

    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId> {
        top_k_desc(&self.factors.similarities(source), k, Some(source))
    }

    fn full_ranking(&self, source: ItemId) -> Option<Vec<ItemId>> {
        let mut order = argsort_desc(&self.factors.similarities(source));
        order.retain(|&i| i != source);
        Some(order)
    }
}

pub fn bpr_provider(factors: ItemFactors, k: usize) -> Result<ProviderOracle> {
    ProviderOracle::new(BprBackbone::new(factors), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Interaction;

    #[test]
    fn inner_product_ranking() {
        let f = ItemFactors::from_rows(vec![
            vec![1.0, 0.0],
            vec![0.9, 0.1],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
        ])
        .unwrap();
        let oracle = bpr_provider(f, 2).unwrap();
        assert_eq!(oracle.query(ItemId(0)).unwrap().items(), &[ItemId(1), ItemId(2)]);
    }

    #[test]
    fn orthonormal_factors_fall_back_to_id_order() {
        let rows = (0..5)
            .map(|i| (0..5).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        let b = BprBackbone::new(ItemFactors::from_rows(rows).unwrap());
        assert_eq!(b.top_k(ItemId(1), 3), vec![ItemId(0), ItemId(2), ItemId(3)]);
    }

    #[test]
    fn duplicated_factor_ranks_first() {
        let b = BprBackbone::new(
            ItemFactors::from_rows(vec![
                vec![0.3, 0.4],
                vec![0.1, 0.1],
                vec![0.3, 0.4],
                vec![0.2, 0.2],
            ])
            .unwrap(),
        );
        assert_eq!(b.top_k(ItemId(0), 1), vec![ItemId(2)]);
    }

    fn blocks() -> InteractionMatrix {
        // two user communities with disjoint item sets
        let mut entries = Vec::new();
        for u in 0..20u32 {
            let base = if u < 10 { 0 } else { 6 };
            for i in 0..5u32 {
                if (u + i) % 4 != 0 {
                    entries.push(Interaction {
                        user: u,
                        item: base + i,
                        timestamp: None,
                    });
                }
            }
        }
        InteractionMatrix::from_entries(20, 12, entries).unwrap()
    }

    #[test]
    fn training_is_seed_deterministic() {
        let cfg = BprConfig {
            dims: 4,
            iterations: 5,
            ..Default::default()
        };
        let a = train_bpr(&blocks(), &cfg).unwrap();
        let b = train_bpr(&blocks(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.n_items(), a.dims()), (12, 4));
    }

    #[test]
    fn training_separates_communities() {
        let m = blocks();
        let cfg = BprConfig {
            dims: 8,
            learning_rate: 0.05,
            iterations: 200,
            ..Default::default()
        };
        let model = train_bpr_model(&m, &cfg).unwrap();
        // user 0 prefers its own block's unseen item 4 over the other block
        assert!(model.score(0, ItemId(4)) > model.score(0, ItemId(8)));
    }

    #[test]
    fn training_raises_sampled_auc() {
        let m = blocks();
        let untrained = train_bpr_model(&m, &BprConfig { dims: 8, iterations: 0, ..Default::default() }).unwrap();
        let trained = train_bpr_model(
            &m,
            &BprConfig { dims: 8, learning_rate: 0.05, iterations: 100, ..Default::default() },
        )
        .unwrap();
        let before = untrained.sampled_auc(&m, 4000, 1);
        let after = trained.sampled_auc(&m, 4000, 1);
        assert!(after > 0.9 && after > before + 0.2, "auc {before} -> {after}");
    }
}
