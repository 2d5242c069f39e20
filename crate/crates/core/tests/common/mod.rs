#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use privrec::synthetic::{random_catalog, random_lists};
use privrec::{Catalog, FairnessConfig, ItemId, ItemSet, LogBase, RecNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense row-normalized adjacency of a network.
pub fn dense(net: &RecNet) -> DMatrix<f64> {
    let n = net.n_items();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for (t, w) in net.out_neighbors(ItemId(i as u32)) {
            a[(i, t.index())] += w;
        }
    }
    a
}

/// (1 - c) * sum_{k=0..=L} (c A^T)^k e_source, accumulated densely.
pub fn dense_truncated(net: &RecNet, source: ItemId, c: f64, steps: usize) -> DVector<f64> {
    let at = dense(net).transpose() * c;
    let mut term = DVector::zeros(net.n_items());
    term[source.index()] = 1.0;
    let mut sum = term.clone();
    for _ in 0..steps {
        term = &at * term;
        sum += &term;
    }
    sum * (1.0 - c)
}

/// Fixed point of S = c A^T S + (1 - c) e_source.
pub fn dense_exact(net: &RecNet, source: ItemId, c: f64) -> DVector<f64> {
    let n = net.n_items();
    let m = DMatrix::identity(n, n) - dense(net).transpose() * c;
    let mut e = DVector::zeros(n);
    e[source.index()] = 1.0 - c;
    m.lu().solve(&e).expect("I - cA^T is invertible for c < 1")
}

/// Whether `partial` can still be completed to a K-list satisfying the
/// constraint using items from `pool`, by counting per group.
pub fn completable(partial: &[ItemId], pool: &[ItemId], cfg: &FairnessConfig, catalog: &Catalog) -> bool {
    let mut have = vec![0usize; catalog.n_groups()];
    for &i in partial {
        have[catalog.group_of(i).index()] += 1;
    }
    let mut avail = vec![0usize; catalog.n_groups()];
    for &i in pool {
        if !partial.contains(&i) {
            avail[catalog.group_of(i).index()] += 1;
        }
    }
    let slots = cfg.k - partial.len();
    let mut need = 0;
    for g in 0..have.len() {
        let d = cfg.tau.saturating_sub(have[g]);
        if d > avail[g] {
            return false;
        }
        need += d;
    }
    need <= slots && pool.iter().filter(|i| !partial.contains(i)).count() >= slots
}

/// Reference greedy: take candidates in order whenever the list stays
/// completable from the remaining admissible pool.
pub fn reference_greedy(order: &[ItemId], exclude: &ItemSet, cfg: &FairnessConfig, catalog: &Catalog) -> Vec<ItemId> {
    let pool: Vec<ItemId> = order.iter().copied().filter(|i| !exclude.contains(i)).collect();
    let mut list = Vec::new();
    for (pos, &c) in pool.iter().enumerate() {
        if list.len() == cfg.k {
            break;
        }
        let mut next = list.clone();
        next.push(c);
        // the items still available after this position
        let mut rest: Vec<ItemId> = next.clone();
        rest.extend_from_slice(&pool[pos + 1..]);
        if completable(&next, &rest, cfg, catalog) {
            list = next;
        }
    }
    list
}

/// Descending by score, ties by ascending id.
pub fn reference_order(scores: &[f64]) -> Vec<ItemId> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    idx.into_iter().map(|i| ItemId(i as u32)).collect()
}

pub struct Instance {
    pub lists: Vec<Vec<ItemId>>,
    pub catalog: Catalog,
    pub net: RecNet,
    pub k: usize,
    pub tau: usize,
}

/// Random network plus catalog with at least `tau + 1` items per group, so
/// the constraint stays satisfiable after excluding the source.
pub fn instance(seed: u64, n: usize, k: usize, tau: usize, n_groups: usize) -> Instance {
    let lists = random_lists(n, k, seed).unwrap();
    let catalog = random_catalog(n, n_groups, tau + 1, seed ^ 0x5eed).unwrap();
    let net = RecNet::from_lists(lists.clone(), k, LogBase::Two).unwrap();
    Instance { lists, catalog, net, k, tau }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_n(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}
