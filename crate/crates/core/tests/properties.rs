mod common;

use common::{instance, rng, random_n};
use privrec::synthetic::{popularity_biased_lists, random_lists, table_oracle};
use privrec::{
    identity_damping_threshold, least_ratio, private_rank_recommend, private_walk_recommend,
    FairnessConfig, ItemId, ItemSet, LogBase, PprParams, RecNet, WalkParams,
};

#[test]
fn both_methods_meet_the_quota_on_random_instances() {
    let mut r = rng(41);
    for case in 0..200u64 {
        let n = random_n(&mut r, 20, 200);
        let groups = random_n(&mut r, 2, 3);
        let tau = random_n(&mut r, 0, 10 / groups);
        let inst = instance(case, n, 10, tau, groups);
        let cfg = FairnessConfig::new(10, tau, groups).unwrap();
        let oracle = table_oracle(inst.lists.clone(), 10).unwrap();
        let src = ItemId(random_n(&mut r, 0, n - 1) as u32);
        let history = ItemSet::new();

        let pr = private_rank_recommend(&inst.net, src, &PprParams::default(), &cfg, &inst.catalog, &history)
            .unwrap();
        assert!(pr.feasible);
        let walk = private_walk_recommend(&oracle, src, &cfg, &inst.catalog, &history, &WalkParams::new(100, case).unwrap())
            .unwrap();
        for list in [&pr.list, &walk.list] {
            assert_eq!(list.len(), 10);
            assert!(!list.contains(src));
            assert!(least_ratio(list, &inst.catalog).unwrap() >= tau as f64 / 10.0, "case {case}");
        }
    }
}

#[test]
fn tiny_damping_reproduces_the_provider() {
    let c = 1e-4;
    assert!(c < identity_damping_threshold(10, LogBase::Two));
    let mut r = rng(7);
    for seed in 0..50u64 {
        let n = random_n(&mut r, 11, 120);
        // biased lists make many items share zero or equal scores
        let lists = if seed % 2 == 0 {
            random_lists(n, 10, seed).unwrap()
        } else {
            popularity_biased_lists(n, 10, 15, seed).unwrap()
        };
        let net = RecNet::from_lists(lists.clone(), 10, LogBase::Two).unwrap();
        let catalog = privrec::synthetic::random_catalog(n, 2, 1, seed).unwrap();
        let cfg = FairnessConfig::new(10, 0, 2).unwrap();
        let params = PprParams::new(c, 10).unwrap();
        for (s, want) in lists.iter().enumerate() {
            let src = ItemId(s as u32);
            let got = private_rank_recommend(&net, src, &params, &cfg, &catalog, &ItemSet::new()).unwrap();
            assert_eq!(got.list.items(), want.as_slice(), "seed {seed} source {s}");
        }
    }
}

#[test]
fn walk_is_fair_and_deterministic_over_seeds() {
    let inst = instance(99, 150, 10, 5, 2);
    let oracle = table_oracle(inst.lists.clone(), 10).unwrap();
    let cfg = FairnessConfig::new(10, 5, 2).unwrap();
    let history: ItemSet = (1..20).map(ItemId).collect();
    for seed in 0..100 {
        let params = WalkParams::new(100, seed).unwrap();
        let a = private_walk_recommend(&oracle, ItemId(0), &cfg, &inst.catalog, &history, &params).unwrap();
        let b = private_walk_recommend(&oracle, ItemId(0), &cfg, &inst.catalog, &history, &params).unwrap();
        assert_eq!(a.list, b.list);
        assert!(least_ratio(&a.list, &inst.catalog).unwrap() >= 0.5);
        assert!(a.list.iter().all(|i| i != ItemId(0) && !history.contains(&i)));
    }
}

#[test]
fn walk_only_reaches_items_reachable_from_the_source() {
    // two disconnected halves; without a quota the walk never leaves its half
    let n = 40;
    let lists: Vec<Vec<ItemId>> = (0..n)
        .map(|i| {
            let base = if i < 20 { 0 } else { 20 };
            (1..=3).map(|d| ItemId((base + (i - base + d) % 20) as u32)).collect()
        })
        .collect();
    let oracle = table_oracle(lists, 3).unwrap();
    let catalog = privrec::synthetic::random_catalog(n, 2, 5, 1).unwrap();
    let cfg = FairnessConfig::new(3, 0, 2).unwrap();
    for seed in 0..50 {
        let out = private_walk_recommend(&oracle, ItemId(0), &cfg, &catalog, &ItemSet::new(), &WalkParams::new(100, seed).unwrap())
            .unwrap();
        assert_eq!(out.fallback_slots, 0);
        assert!(out.list.iter().all(|i| i.0 < 20));
    }
}

#[test]
fn query_accounting() {
    let inst = instance(5, 120, 10, 2, 2);
    let oracle = table_oracle(inst.lists.clone(), 10).unwrap();
    RecNet::build(&oracle).unwrap();
    assert_eq!(oracle.query_count(), 120);

    let cfg = FairnessConfig::new(10, 2, 2).unwrap();
    for (max_len, memoize) in [(1, false), (5, false), (100, false), (100, true)] {
        for seed in 0..20 {
            let fresh = oracle.fork();
            let params = WalkParams { max_len, seed, memoize };
            let out = private_walk_recommend(&fresh, ItemId(3), &cfg, &inst.catalog, &ItemSet::new(), &params).unwrap();
            assert_eq!(out.queries, fresh.query_count());
            assert!(out.queries <= (10 * max_len) as u64);
            if memoize {
                assert!(out.queries <= 120);
            }
        }
    }
}
