//! Score-to-ranking helpers. Ties are broken by ascending `ItemId` everywhere.

use std::cmp::Ordering;

use crate::types::ItemId;

#[inline]
fn desc_then_id(scores: &[f64], a: u32, b: u32) -> Ordering {
    scores[b as usize]
        .total_cmp(&scores[a as usize])
        .then_with(|| a.cmp(&b))
}

/// All item indices ordered by descending score.
pub fn argsort_desc(scores: &[f64]) -> Vec<ItemId> {
    let mut idx: Vec<u32> = (0..scores.len() as u32).collect();
    idx.sort_unstable_by(|&a, &b| desc_then_id(scores, a, b));
    idx.into_iter().map(ItemId).collect()
}

/// Argsort for sparse non-negative score vectors: the positive entries are
/// sorted, the zero entries follow in id order. Same result as
/// [`argsort_desc`] when all scores are `>= 0`.
pub fn argsort_desc_sparse(scores: &[f64]) -> Vec<ItemId> {
    let mut positive = Vec::new();
    let mut zero = Vec::new();
    for (i, &s) in scores.iter().enumerate() {
        debug_assert!(s >= 0.0);
        if s > 0.0 {
            positive.push(i as u32);
        } else {
            zero.push(i as u32);
        }
    }
    positive.sort_unstable_by(|&a, &b| desc_then_id(scores, a, b));
    positive.extend(zero);
    positive.into_iter().map(ItemId).collect()
}

/// The `k` best-scored items, skipping `skip`, best first.
pub fn top_k_desc(scores: &[f64], k: usize, skip: Option<ItemId>) -> Vec<ItemId> {
    let mut idx: Vec<u32> = (0..scores.len() as u32)
        .filter(|&i| Some(ItemId(i)) != skip)
        .collect();
    let k = k.min(idx.len());
    if k == 0 {
        return Vec::new();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, |&a, &b| desc_then_id(scores, a, b));
        idx.truncate(k);
    }
    idx.sort_unstable_by(|&a, &b| desc_then_id(scores, a, b));
    idx.into_iter().map(ItemId).collect()
}
