use std::path::Path;

use log::info;
use privrec::datasets::{
    leave_one_out_split, Attribute, DatasetKind, InteractionMatrix, Manifest, ProcessedDataset,
    TestCase,
};
use privrec::providers::{bpr_provider, cosine_provider, knn_provider, train_bpr, BprConfig};
use privrec::{Catalog, Error, ProviderOracle, Result};

use crate::args::{ProviderKind, RunArgs};

pub struct Loaded {
    pub dataset: ProcessedDataset,
    pub manifest: Manifest,
    pub provider: ProviderKind,
    pub attribute: Attribute,
}

pub fn load(run: &RunArgs) -> Result<Loaded> {
    let (dataset, manifest) = ProcessedDataset::read(&run.data)?;
    let adult = dataset.kind() == DatasetKind::Adult;
    let provider = run
        .provider
        .unwrap_or(if adult { ProviderKind::Knn } else { ProviderKind::Cosine });
    if adult != (provider == ProviderKind::Knn) {
        return Err(Error::Input(format!(
            "provider {} does not apply to {}",
            provider.name(),
            dataset.kind()
        )));
    }
    let attribute = run
        .attribute
        .unwrap_or(if adult { Attribute::Sex } else { Attribute::Popularity });
    dataset.catalog(attribute)?;
    Ok(Loaded { dataset, manifest, provider, attribute })
}

pub fn bpr_config(run: &RunArgs) -> BprConfig {
    BprConfig {
        dims: run.bpr_dims,
        learning_rate: run.bpr_lr,
        regularization: run.bpr_reg,
        iterations: run.bpr_iters,
        seed: run.bpr_seed,
    }
}

/// Provider over interactions (trained on `train`) or over features.
pub fn provider(loaded: &Loaded, train: Option<&InteractionMatrix>, run: &RunArgs) -> Result<ProviderOracle> {
    let oracle = match (&loaded.dataset, loaded.provider) {
        (ProcessedDataset::Features { features, .. }, _) => knn_provider(features, run.topk)?,
        (ProcessedDataset::Interactions { interactions, .. }, kind) => {
            let m = train.unwrap_or(interactions);
            match kind {
                ProviderKind::Cosine => cosine_provider(m, run.topk)?,
                ProviderKind::Bpr => {
                    info!("training BPR on {} interactions", m.len());
                    bpr_provider(train_bpr(m, &bpr_config(run))?, run.topk)?
                }
                ProviderKind::Knn => unreachable!("checked in load"),
            }
        }
    };
    Ok(match run.budget {
        Some(b) => oracle.with_budget(b),
        None => oracle,
    })
}

pub fn catalog(loaded: &Loaded) -> &Catalog {
    loaded.dataset.catalog(loaded.attribute).expect("checked in load")
}

pub fn split(loaded: &Loaded, seed: u64) -> Option<(InteractionMatrix, Vec<TestCase>)> {
    match &loaded.dataset {
        ProcessedDataset::Interactions { interactions, .. } => {
            let s = leave_one_out_split(interactions, seed);
            info!("{} test users, {} excluded", s.cases.len(), s.excluded_users);
            Some((s.train, s.cases))
        }
        ProcessedDataset::Features { .. } => None,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
