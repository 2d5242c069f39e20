//! Fairness metrics and the constrained greedy selection shared by every
//! fair method.
//!
//! The feasibility test counts the candidate's own slot: after adding the
//! candidate, the total per-group deficit must fit in the slots that remain.
//! With that bound the greedy scan keeps the invariant "every group can still
//! reach `tau`" through the whole list, so the output meets the minimum
//! requirement whenever the candidate pool allows it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Catalog, ItemId, ItemSet, RecList};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessConfig {
    /// List length.
    pub k: usize,
    /// Minimum number of items of every group.
    pub tau: usize,
    pub n_groups: usize,
}

impl FairnessConfig {
    pub fn new(k: usize, tau: usize, n_groups: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("K must be at least 1"));
        }
        if n_groups == 0 {
            return Err(Error::input("at least one group is required"));
        }
        if tau * n_groups > k {
            return Err(Error::input(format!(
                "tau={tau} with {n_groups} groups needs more than K={k} slots"
            )));
        }
        Ok(FairnessConfig { k, tau, n_groups })
    }

    /// The largest admissible tau, `floor(K / |groups|)`.
    pub fn max_tau(k: usize, n_groups: usize) -> usize {
        k / n_groups.max(1)
    }

    /// Lower bound on least ratio guaranteed by the constraint.
    pub fn guaranteed_ratio(&self) -> f64 {
        self.tau as f64 / self.k as f64
    }
}

/// Minimum over all groups of the group's share of `list`.
pub fn least_ratio(list: &RecList, catalog: &Catalog) -> Result<f64> {
    if list.is_empty() {
        return Err(Error::input("least ratio of an empty list"));
    }
    let counts = catalog.tally(list);
    let min = counts.iter().copied().min().unwrap_or(0);
    Ok(min as f64 / list.len() as f64)
}

/// Shannon entropy (base 2) of the group proportions, normalized by
/// `log2 |groups|` so that a perfectly uniform list scores 1.
pub fn entropy(list: &RecList, catalog: &Catalog) -> Result<f64> {
    if list.is_empty() {
        return Err(Error::input("entropy of an empty list"));
    }
    let n_groups = catalog.n_groups();
    if n_groups < 2 {
        return Ok(0.0);
    }
    let len = list.len() as f64;
    let h: f64 = catalog
        .tally(list)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / len;
            -p * p.log2()
        })
        .sum();
    Ok(h / (n_groups as f64).log2())
}

/// Whether `candidate` can join `partial` without making the minimum
/// requirement unreachable in the remaining slots.
pub fn can_add(partial: &RecList, candidate: ItemId, cfg: &FairnessConfig, catalog: &Catalog) -> bool {
    let mut tally = GroupTally::new(cfg, catalog);
    for item in partial {
        tally.add(*item);
    }
    tally.can_add(candidate)
}

/// Running per-group counts of a list under construction.
#[derive(Clone, Debug)]
pub struct GroupTally<'a> {
    cfg: &'a FairnessConfig,
    catalog: &'a Catalog,
    counts: Vec<usize>,
    len: usize,
    deficit: usize,
}

impl<'a> GroupTally<'a> {
    pub fn new(cfg: &'a FairnessConfig, catalog: &'a Catalog) -> Self {
        let n_groups = catalog.n_groups();
        GroupTally {
            cfg,
            catalog,
            counts: vec![0; n_groups],
            len: 0,
            deficit: cfg.tau * n_groups,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len >= self.cfg.k
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn can_add(&self, candidate: ItemId) -> bool {
        if self.is_full() {
            return false;
        }
        let g = self.catalog.group_of(candidate).index();
        let deficit_after = if self.counts[g] < self.cfg.tau {
            self.deficit - 1
        } else {
            self.deficit
        };
        deficit_after < self.cfg.k - self.len
    }

    pub fn add(&mut self, item: ItemId) {
        let g = self.catalog.group_of(item).index();
        if self.counts[g] < self.cfg.tau {
            self.deficit -= 1;
        }
        self.counts[g] += 1;
        self.len += 1;
    }
}

/// Outcome of a constrained greedy scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub list: RecList,
    /// `false` when the candidates ran out before the list reached length K.
    pub feasible: bool,
}

impl Selection {
    pub fn into_result(self) -> Result<RecList> {
        if self.feasible {
            Ok(self.list)
        } else {
            Err(Error::Infeasible(format!(
                "only {} items could be selected under the constraint",
                self.list.len()
            )))
        }
    }
}

/// Scans `candidates` best first and keeps every item that is not excluded
/// and passes [`can_add`], stopping at K items.
pub fn fair_greedy_select<I>(
    candidates: I,
    exclude: &ItemSet,
    cfg: &FairnessConfig,
    catalog: &Catalog,
) -> Selection
where
    I: IntoIterator<Item = ItemId>,
{
    let mut tally = GroupTally::new(cfg, catalog);
    let mut list = RecList::with_capacity(cfg.k);
    for item in candidates {
        if tally.is_full() {
            break;
        }
        if exclude.contains(&item) || list.contains(item) {
            continue;
        }
        if tally.can_add(item) {
            tally.add(item);
            list.push(item);
        }
    }
    let feasible = list.len() == cfg.k;
    Selection { list, feasible }
}
