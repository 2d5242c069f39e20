//! The recommendation network: item `i` links to every item on its provider
//! page, weighted by `1 / log(rank + 1)`.
//!
//! Storage is compressed-row with exactly K entries per row, kept in rank
//! order, so a (transposed) matrix-vector product touches `K * n` entries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::ProviderOracle;
use crate::types::{ItemId, RecList};

/// Logarithm used for rank discounting. The normalized network does not
/// depend on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Two,
    Natural,
}

impl LogBase {
    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

/// Raw edge weight of the item at 1-based `rank`.
#[inline]
pub fn rank_weight(rank: usize, base: LogBase) -> f64 {
    1.0 / base.log(rank as f64 + 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecNet {
    n: usize,
    k: usize,
    base: LogBase,
    /// Row `i` occupies `targets[i*k .. (i+1)*k]`, in rank order.
    targets: Vec<ItemId>,
    weights: Vec<f64>,
    normalized: Vec<f64>,
}

impl RecNet {
    /// Queries the oracle once per item. Queries run in parallel only when
    /// the oracle is reentrant.
    pub fn build(oracle: &ProviderOracle) -> Result<Self> {
        Self::build_with_base(oracle, LogBase::Two)
    }

    pub fn build_with_base(oracle: &ProviderOracle, base: LogBase) -> Result<Self> {
        let n = oracle.n_items();
        let lists: Vec<RecList> = if oracle.reentrant() {
            (0..n)
                .into_par_iter()
                .map(|i| oracle.query(ItemId::from(i)))
                .collect::<Result<_>>()?
        } else {
            (0..n)
                .map(|i| oracle.query(ItemId::from(i)))
                .collect::<Result<_>>()?
        };
        Self::from_lists(lists.into_iter().map(RecList::into_inner).collect(), oracle.k(), base)
    }

    /// Assembles the network from one provider list per item.
    pub fn from_lists(lists: Vec<Vec<ItemId>>, k: usize, base: LogBase) -> Result<Self> {
        let n = lists.len();
        if k == 0 || n <= k {
            return Err(Error::input(format!(
                "network over {n} items cannot have {k} links per item"
            )));
        }
        let row_weights: Vec<f64> = (1..=k).map(|r| rank_weight(r, base)).collect();
        let row_sum: f64 = row_weights.iter().sum();
        let row_normalized: Vec<f64> = row_weights.iter().map(|w| w / row_sum).collect();

        let mut targets = Vec::with_capacity(n * k);
        let mut seen = vec![usize::MAX; n];
        for (i, list) in lists.into_iter().enumerate() {
            let malformed = |reason: String| Error::MalformedList {
                source_item: i as u32,
                reason,
            };
            if list.len() != k {
                return Err(malformed(format!("expected {k} items, got {}", list.len())));
            }
            for j in list {
                if j.index() >= n {
                    return Err(malformed(format!("item {j} out of range")));
                }
                if j.index() == i {
                    return Err(malformed("list contains the source item".into()));
                }
                if seen[j.index()] == i {
                    return Err(malformed(format!("item {j} appears twice")));
                }
                seen[j.index()] = i;
                targets.push(j);
            }
        }
        Ok(RecNet {
            n,
            k,
            base,
            targets,
            weights: row_weights.repeat(n),
            normalized: row_normalized.repeat(n),
        })
    }

    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn log_base(&self) -> LogBase {
        self.base
    }

    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    /// Provider list of `item`, in rank order.
    pub fn row(&self, item: ItemId) -> &[ItemId] {
        let start = item.index() * self.k;
        &self.targets[start..start + self.k]
    }

    /// Raw weights `A_i`.
    pub fn raw_weights(&self, item: ItemId) -> &[f64] {
        let start = item.index() * self.k;
        &self.weights[start..start + self.k]
    }

    /// Row-normalized weights of `item`, aligned with [`RecNet::row`].
    pub fn normalized_weights(&self, item: ItemId) -> &[f64] {
        let start = item.index() * self.k;
        &self.normalized[start..start + self.k]
    }

    /// The K `(target, normalized weight)` pairs of `item`, heaviest first.
    pub fn out_neighbors(&self, item: ItemId) -> Vec<(ItemId, f64)> {
        let mut pairs: Vec<(ItemId, f64)> = self
            .row(item)
            .iter()
            .copied()
            .zip(self.normalized_weights(item).iter().copied())
            .collect();
        // rows are stored in rank order, which already is descending weight
        pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
        pairs
    }

    /// `out = Ã^T x`, i.e. `out[j] = sum_i x[i] * Ã[i][j]`.
    pub fn transpose_mul(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        out.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let start = i * self.k;
            let targets = &self.targets[start..start + self.k];
            let weights = &self.normalized[start..start + self.k];
            for (t, w) in targets.iter().zip(weights) {
                out[t.index()] += xi * w;
            }
        }
    }

    /// Writes one `source target rank` line per edge.
    pub fn write_edges(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for i in 0..self.n {
            for (r, t) in self.row(ItemId::from(i)).iter().enumerate() {
                writeln!(out, "{i}\t{t}\t{}", r + 1)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an edge file written by [`RecNet::write_edges`].
    pub fn read_edges(path: &Path, base: LogBase) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut rows: Vec<Vec<(usize, ItemId)>> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
            let Some(&[src, dst, rank]) = parsed.as_deref() else {
                return Err(Error::parse(path, lineno + 1, "expected `source target rank`"));
            };
            if rank == 0 {
                return Err(Error::parse(path, lineno + 1, "ranks are 1-based"));
            }
            if rows.len() <= src {
                rows.resize_with(src + 1, Vec::new);
            }
            rows[src].push((rank, ItemId::from(dst)));
        }
        let k = rows.first().map_or(0, Vec::len);
        let lists = rows
            .into_iter()
            .enumerate()
            .map(|(i, mut row)| {
                row.sort_by_key(|&(rank, _)| rank);
                if row.iter().enumerate().any(|(p, &(rank, _))| rank != p + 1) {
                    return Err(Error::parse(path, 0, format!("ranks of item {i} are not 1..=K")));
                }
                Ok(row.into_iter().map(|(_, t)| t).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_lists(lists, k, base)
    }
}
