//! PrivateWalk: on-demand fair recommendation by random walks over provider
//! pages, without building the network.
//!
//! Each of the K slots starts a fresh walk at the source. A hop queries the
//! provider at the current item and moves to a rank drawn with probability
//! proportional to `1 / log(rank + 1)`. The first visited item that is new,
//! outside the history and accepted by the fairness check fills the slot. If
//! the walk runs out of hops, uniformly random items are drawn instead.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{FairnessConfig, GroupTally};
use crate::oracle::ProviderOracle;
use crate::recnet::{rank_weight, LogBase};
use crate::types::{Catalog, ItemId, ItemSet, RecList};

/// Fallback draws per slot, as a multiple of the catalog size.
pub const FALLBACK_DRAWS_PER_ITEM: usize = 50;

/// Provider lists cached within one request.
const MEMO_CAPACITY: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkParams {
    /// Maximum number of hops per slot.
    pub max_len: usize,
    pub seed: u64,
    /// Reuse provider lists already fetched in the same request.
    pub memoize: bool,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            max_len: 100,
            seed: 0,
            memoize: true,
        }
    }
}

impl WalkParams {
    pub fn new(max_len: usize, seed: u64) -> Result<Self> {
        let p = WalkParams {
            max_len,
            seed,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 {
            return Err(Error::input("maximum walk length must be at least 1"));
        }
        Ok(())
    }
}

/// Categorical distribution over ranks `1..=K` with weights `1/log(r+1)`.
#[derive(Clone, Debug)]
pub struct RankSampler {
    dist: WeightedIndex<f64>,
}

impl RankSampler {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("K must be at least 1"));
        }
        let weights: Vec<f64> = (1..=k).map(|r| rank_weight(r, LogBase::Two)).collect();
        let dist = WeightedIndex::new(weights).map_err(|e| Error::input(e.to_string()))?;
        Ok(RankSampler { dist })
    }

    /// A 1-based rank.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng) + 1
    }
}

/// Draws one 1-based rank in `1..=k`.
pub fn sample_next_rank<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<usize> {
    Ok(RankSampler::new(k)?.sample(rng))
}

/// A PrivateWalk list with its cost accounting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkOutcome {
    pub list: RecList,
    /// Provider queries issued for this list.
    pub queries: u64,
    /// Hops taken across all slots.
    pub hops: usize,
    /// Slots filled by the uniform fallback.
    pub fallback_slots: usize,
}

pub fn private_walk_recommend(
    oracle: &ProviderOracle,
    source: ItemId,
    cfg: &FairnessConfig,
    catalog: &Catalog,
    history: &ItemSet,
    params: &WalkParams,
) -> Result<WalkOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    private_walk_with_rng(oracle, source, cfg, catalog, history, params, &mut rng)
}

/// Same as [`private_walk_recommend`] with a caller-owned random stream.
pub fn private_walk_with_rng<R: Rng + ?Sized>(
    oracle: &ProviderOracle,
    source: ItemId,
    cfg: &FairnessConfig,
    catalog: &Catalog,
    history: &ItemSet,
    params: &WalkParams,
    rng: &mut R,
) -> Result<WalkOutcome> {
    params.validate()?;
    let n = oracle.n_items();
    catalog.check_item(source)?;
    if catalog.n_items() != n {
        return Err(Error::input(format!(
            "catalog has {} items but the provider has {n}",
            catalog.n_items()
        )));
    }
    if cfg.n_groups != catalog.n_groups() {
        return Err(Error::input("fairness config and catalog disagree on group count"));
    }
    let blocked = history.len() + usize::from(!history.contains(&source));
    if n < cfg.k + blocked {
        return Err(Error::input(format!(
            "{n} items cannot fill {} slots after excluding {blocked}",
            cfg.k
        )));
    }

    let sampler = RankSampler::new(oracle.k())?;
    let mut memo: HashMap<ItemId, RecList> = HashMap::new();
    let mut queries = 0u64;
    let mut hops = 0usize;
    let mut fallback_slots = 0usize;

    let mut tally = GroupTally::new(cfg, catalog);
    let mut list = RecList::with_capacity(cfg.k);
    let admissible = |item: ItemId, list: &RecList, tally: &GroupTally| {
        item != source && !history.contains(&item) && !list.contains(item) && tally.can_add(item)
    };

    for _ in 0..cfg.k {
        let mut cur = source;
        let mut found = None;
        for _ in 0..params.max_len {
            let rank = sampler.sample(rng);
            let page = match memo.get(&cur) {
                Some(page) => page.clone(),
                None => {
                    let page = oracle.query(cur)?;
                    queries += 1;
                    if params.memoize && memo.len() < MEMO_CAPACITY {
                        memo.insert(cur, page.clone());
                    }
                    page
                }
            };
            hops += 1;
            cur = page.items()[rank - 1];
            if admissible(cur, &list, &tally) {
                found = Some(cur);
                break;
            }
        }
        let item = match found {
            Some(item) => item,
            None => {
                fallback_slots += 1;
                let cap = FALLBACK_DRAWS_PER_ITEM * n;
                (0..cap)
                    .map(|_| ItemId::from(rng.gen_range(0..n)))
                    .find(|&cand| admissible(cand, &list, &tally))
                    .ok_or_else(|| {
                        Error::Infeasible(format!(
                            "no admissible item found in {cap} uniform draws for slot {}",
                            list.len() + 1
                        ))
                    })?
            }
        };
        tally.add(item);
        list.push(item);
    }

    Ok(WalkOutcome {
        list,
        queries,
        hops,
        fallback_slots,
    })
}
