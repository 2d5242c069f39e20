//! Personalized PageRank over the recommendation network and the
//! PrivateRank recommender built on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{fair_greedy_select, FairnessConfig, Selection};
use crate::ranking::argsort_desc_sparse;
use crate::recnet::{LogBase, RecNet};
use crate::types::{Catalog, ItemId, ItemSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PprParams {
    /// Damping factor `c`; the walk restarts with probability `1 - c`.
    pub damping: f64,
    /// Number of terms `L` of the truncated series beyond the zeroth.
    pub steps: usize,
}

impl Default for PprParams {
    fn default() -> Self {
        PprParams {
            damping: 0.01,
            steps: 10,
        }
    }
}

impl PprParams {
    pub fn new(damping: f64, steps: usize) -> Result<Self> {
        let p = PprParams { damping, steps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::input(format!(
                "damping factor must lie in (0, 1), got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Work done by one scoring call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PprStats {
    pub products: usize,
    /// Matrix entries read across all products (at most `nnz` per product).
    pub entries_visited: usize,
}

/// Damping below which PrivateRank with `tau = 0` reproduces the provider
/// list exactly, `1 / ((K+1)^2 log^2(K+1))`, in the network's log base.
pub fn identity_damping_threshold(k: usize, base: LogBase) -> f64 {
    let kp1 = k as f64 + 1.0;
    let l = base.log(kp1);
    1.0 / (kp1 * kp1 * l * l)
}

/// Truncated personalized PageRank `(1-c) sum_{k=0..L} (c Ã^T)^k e_source`.
pub fn ppr(net: &RecNet, source: ItemId, params: &PprParams) -> Result<Vec<f64>> {
    ppr_with_stats(net, source, params).map(|(s, _)| s)
}

pub fn ppr_with_stats(net: &RecNet, source: ItemId, params: &PprParams) -> Result<(Vec<f64>, PprStats)> {
    params.validate()?;
    let n = net.n_items();
    if source.index() >= n {
        return Err(Error::input(format!("source item {source} out of range for {n} items")));
    }
    let c = params.damping;
    let mut term = vec![0.0; n];
    term[source.index()] = 1.0;
    let mut next = vec![0.0; n];
    let mut scores = vec![0.0; n];
    scores[source.index()] = 1.0 - c;
    let mut stats = PprStats::default();
    for _ in 0..params.steps {
        net.transpose_mul(&term, &mut next);
        stats.products += 1;
        stats.entries_visited += term.iter().filter(|&&x| x != 0.0).count() * net.k();
        for (s, (t, x)) in scores.iter_mut().zip(term.iter_mut().zip(&next)) {
            *t = c * x;
            *s += (1.0 - c) * *t;
        }
    }
    Ok((scores, stats))
}

/// PrivateRank list for `source`: items in descending PPR order, filtered by
/// `history`, the source itself and the fairness constraint.
pub fn private_rank_recommend(
    net: &RecNet,
    source: ItemId,
    params: &PprParams,
    cfg: &FairnessConfig,
    catalog: &Catalog,
    history: &ItemSet,
) -> Result<Selection> {
    check_inputs(net, cfg, catalog)?;
    let scores = ppr(net, source, params)?;
    let order = argsort_desc_sparse(&scores);
    Ok(fair_greedy_select(
        order.into_iter().filter(|&i| i != source),
        history,
        cfg,
        catalog,
    ))
}

fn check_inputs(net: &RecNet, cfg: &FairnessConfig, catalog: &Catalog) -> Result<()> {
    if catalog.n_items() != net.n_items() {
        return Err(Error::input(format!(
            "catalog has {} items but the network has {}",
            catalog.n_items(),
            net.n_items()
        )));
    }
    if cfg.n_groups != catalog.n_groups() {
        return Err(Error::input(format!(
            "fairness config expects {} groups, catalog has {}",
            cfg.n_groups,
            catalog.n_groups()
        )));
    }
    Ok(())
}

/// A built PrivateRank recommender.
#[derive(Clone, Debug)]
pub struct PrivateRank {
    net: RecNet,
    params: PprParams,
}

impl PrivateRank {
    pub fn new(net: RecNet, params: PprParams) -> Result<Self> {
        params.validate()?;
        Ok(PrivateRank { net, params })
    }

    pub fn network(&self) -> &RecNet {
        &self.net
    }

    pub fn params(&self) -> &PprParams {
        &self.params
    }

    pub fn with_params(&self, params: PprParams) -> Result<PrivateRank> {
        PrivateRank::new(self.net.clone(), params)
    }

    pub fn scores(&self, source: ItemId) -> Result<Vec<f64>> {
        ppr(&self.net, source, &self.params)
    }

    pub fn recommend(
        &self,
        source: ItemId,
        cfg: &FairnessConfig,
        catalog: &Catalog,
        history: &ItemSet,
    ) -> Result<Selection> {
        private_rank_recommend(&self.net, source, &self.params, cfg, catalog, history)
    }
}
