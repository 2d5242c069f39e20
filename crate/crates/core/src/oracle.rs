//! Black-box access to the provider recommender.
//!
//! A [`Backbone`] is whatever produces the provider's lists; [`ProviderOracle`]
//! wraps one with list validation, an atomic call counter and an optional
//! call budget. Every algorithm in this crate talks to the provider only
//! through [`ProviderOracle::query`].

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::types::{ItemId, RecList};

/// Source of provider recommendations.
pub trait Backbone: Send + Sync {
    fn n_items(&self) -> usize;

    /// The provider's `k` recommendations for `source`, best first. Must not
    /// contain `source`.
    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId>;

    /// The complete ranking of every other item for `source`, best first.
    /// Only white-box backbones expose this; it is what the post-hoc Oracle
    /// baseline consumes and is never available to the private methods.
    fn full_ranking(&self, _source: ItemId) -> Option<Vec<ItemId>> {
        None
    }

    /// Whether concurrent calls are allowed.
    fn reentrant(&self) -> bool {
        true
    }
}

impl<B: Backbone + ?Sized> Backbone for Arc<B> {
    fn n_items(&self) -> usize {
        (**self).n_items()
    }
    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId> {
        (**self).top_k(source, k)
    }
    fn full_ranking(&self, source: ItemId) -> Option<Vec<ItemId>> {
        (**self).full_ranking(source)
    }
    fn reentrant(&self) -> bool {
        (**self).reentrant()
    }
}

/// Provider backbone given as explicit lists, one per item.
#[derive(Clone, Debug)]
pub struct TableBackbone {
    lists: Vec<Vec<ItemId>>,
}

impl TableBackbone {
    pub fn new(lists: Vec<Vec<ItemId>>) -> Self {
        TableBackbone { lists }
    }

    pub fn lists(&self) -> &[Vec<ItemId>] {
        &self.lists
    }
}

impl Backbone for TableBackbone {
    fn n_items(&self) -> usize {
        self.lists.len()
    }

    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId> {
        self.lists[source.index()].iter().take(k).copied().collect()
    }
}

/// Counted, validated access to a provider's top-K lists.
pub struct ProviderOracle {
    backbone: Arc<dyn Backbone>,
    k: usize,
    calls: AtomicU64,
    budget: Option<u64>,
}

impl std::fmt::Debug for ProviderOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProviderOracle")
            .field("n_items", &self.n_items())
            .field("k", &self.k)
            .field("calls", &self.query_count())
            .field("budget", &self.budget)
            .finish()
    }
}

impl ProviderOracle {
    /// Fails when the catalog cannot fill a list of length `k`.
    pub fn new(backbone: impl Backbone + 'static, k: usize) -> Result<Self> {
        Self::from_arc(Arc::new(backbone), k)
    }

    pub fn from_arc(backbone: Arc<dyn Backbone>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("list length K must be at least 1"));
        }
        if backbone.n_items() <= k {
            return Err(Error::input(format!(
                "provider over {} items cannot return lists of length {k}",
                backbone.n_items()
            )));
        }
        Ok(ProviderOracle {
            backbone,
            k,
            calls: AtomicU64::new(0),
            budget: None,
        })
    }

    /// Caps the number of successful queries.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_items(&self) -> usize {
        self.backbone.n_items()
    }

    pub fn reentrant(&self) -> bool {
        self.backbone.reentrant()
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn backbone(&self) -> &Arc<dyn Backbone> {
        &self.backbone
    }

    /// Number of successful `query` calls so far.
    pub fn query_count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset_count(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }

    /// A fresh oracle over the same backbone with its own counter.
    pub fn fork(&self) -> ProviderOracle {
        ProviderOracle {
            backbone: Arc::clone(&self.backbone),
            k: self.k,
            calls: AtomicU64::new(0),
            budget: self.budget,
        }
    }

    /// The provider's list for `source`. Counts exactly one call.
    pub fn query(&self, source: ItemId) -> Result<RecList> {
        let n = self.n_items();
        if source.index() >= n {
            return Err(Error::input(format!(
                "source item {source} out of range for {n} items"
            )));
        }
        self.reserve_call()?;
        let items = self.backbone.top_k(source, self.k);
        validate_list(source, &items, self.k, n)?;
        Ok(RecList::from_items(items).expect("validated"))
    }

    fn reserve_call(&self) -> Result<()> {
        match self.budget {
            None => {
                self.calls.fetch_add(1, Ordering::SeqCst);
                Ok(())
            }
            Some(budget) => self
                .calls
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| {
                    (c < budget).then_some(c + 1)
                })
                .map(|_| ())
                .map_err(|_| Error::BudgetExhausted { budget }),
        }
    }
}

fn validate_list(source: ItemId, items: &[ItemId], k: usize, n: usize) -> Result<()> {
    let malformed = |reason: String| Error::MalformedList {
        source_item: source.0,
        reason,
    };
    if items.len() != k {
        return Err(malformed(format!("expected {k} items, got {}", items.len())));
    }
    let mut seen = vec![false; n];
    for &item in items {
        if item.index() >= n {
            return Err(malformed(format!("item {item} out of range")));
        }
        if item == source {
            return Err(malformed("list contains the source item".into()));
        }
        if std::mem::replace(&mut seen[item.index()], true) {
            return Err(malformed(format!("item {item} appears twice")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize, k: usize) -> TableBackbone {
        TableBackbone::new(
            (0..n)
                .map(|i| (1..=k).map(|d| ItemId(((i + d) % n) as u32)).collect())
                .collect(),
        )
    }

    #[test]
    fn query_is_deterministic_and_counted() {
        let oracle = ProviderOracle::new(ring(6, 2), 2).unwrap();
        let a = oracle.query(ItemId(3)).unwrap();
        let b = oracle.query(ItemId(3)).unwrap();
        assert_eq!(a, b);
        for i in 0..6 {
            oracle.query(ItemId(i)).unwrap();
        }
        assert_eq!(oracle.query_count(), 8);
    }

    #[test]
    fn rejects_catalog_not_larger_than_k() {
        assert!(ProviderOracle::new(ring(3, 2), 3).is_err());
    }

    #[test]
    fn out_of_range_source_is_input_error_and_not_counted() {
        let oracle = ProviderOracle::new(ring(6, 2), 2).unwrap();
        assert!(matches!(oracle.query(ItemId(6)), Err(Error::Input(_))));
        assert_eq!(oracle.query_count(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let oracle = ProviderOracle::new(ring(6, 2), 2).unwrap().with_budget(2);
        oracle.query(ItemId(0)).unwrap();
        oracle.query(ItemId(1)).unwrap();
        assert!(matches!(
            oracle.query(ItemId(2)),
            Err(Error::BudgetExhausted { budget: 2 })
        ));
        assert_eq!(oracle.query_count(), 2);
    }

    #[test]
    fn malformed_lists_fail_loudly() {
        let dup = TableBackbone::new(vec![
            vec![ItemId(1), ItemId(1)],
            vec![ItemId(0), ItemId(2)],
            vec![ItemId(0), ItemId(1)],
        ]);
        let oracle = ProviderOracle::new(dup, 2).unwrap();
        assert!(matches!(
            oracle.query(ItemId(0)),
            Err(Error::MalformedList { .. })
        ));
        let selfref = TableBackbone::new(vec![
            vec![ItemId(0), ItemId(1)],
            vec![ItemId(0), ItemId(2)],
            vec![ItemId(0), ItemId(1)],
        ]);
        let oracle = ProviderOracle::new(selfref, 2).unwrap();
        assert!(oracle.query(ItemId(0)).is_err());
    }
}
