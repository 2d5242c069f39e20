use crate::types::{ItemId, RecList};

/// 1 if the held-out positive is anywhere in the list.
pub fn recall_at_k(list: &RecList, positive: ItemId) -> f64 {
    f64::from(u8::from(list.contains(positive)))
}

/// `1 / log2(rank + 1)` for the single held-out positive; the ideal DCG of
/// one relevant item is 1.
pub fn ndcg_at_k(list: &RecList, positive: ItemId) -> f64 {
    list.rank_of(positive)
        .map_or(0.0, |rank| 1.0 / (rank as f64 + 1.0).log2())
}

/// Fraction of the list sharing the source's class label.
pub fn precision_same_label(list: &RecList, source: ItemId, labels: &[u8]) -> f64 {
    if list.is_empty() {
        return 0.0;
    }
    let want = labels[source.index()];
    let hits = list.iter().filter(|i| labels[i.index()] == want).count();
    hits as f64 / list.len() as f64
}
