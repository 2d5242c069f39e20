//! Provider backbones: Euclidean k-NN over standardized features, item-item
//! cosine over interaction columns, and inner products of BPR item factors.

mod bpr;
mod cosine;
mod knn;

pub use bpr::{bpr_provider, train_bpr, train_bpr_model, BprBackbone, BprConfig, BprModel, ItemFactors};
pub use cosine::{cosine_provider, CosineBackbone};
pub use knn::{knn_provider, FeatureTable, KnnBackbone, Standardized};
