//! Fair item-to-item recommendation on top of a black-box provider.
//!
//! The provider is only reachable through [`ProviderOracle`], which hands out
//! its top-K list for a source item and counts every call. [`PrivateRank`]
//! crawls all lists once into a weighted [`RecNet`] and ranks by personalized
//! PageRank; [`private_walk_recommend`] answers a single request with short
//! random walks. Both finish with [`fair_greedy_select`], which guarantees
//! every group at least `tau` slots whenever that is possible.

pub mod datasets;
pub mod error;
pub mod eval;
pub mod fairness;
pub mod oracle;
pub mod privaterank;
pub mod privatewalk;
pub mod providers;
pub mod ranking;
pub mod recnet;
pub mod synthetic;
pub mod types;

pub use error::{Error, Result};
pub use fairness::{
    can_add, entropy, fair_greedy_select, least_ratio, FairnessConfig, GroupTally, Selection,
};
pub use oracle::{Backbone, ProviderOracle, TableBackbone};
pub use privaterank::{
    identity_damping_threshold, ppr, ppr_with_stats, private_rank_recommend, PprParams, PprStats,
    PrivateRank,
};
pub use privatewalk::{
    private_walk_recommend, private_walk_with_rng, sample_next_rank, RankSampler, WalkOutcome,
    WalkParams,
};
pub use recnet::{rank_weight, LogBase, RecNet};
pub use types::{Catalog, GroupId, ItemId, ItemSet, RecList};
