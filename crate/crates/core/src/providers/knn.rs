use log::warn;
use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Backbone, ProviderOracle};
use crate::types::ItemId;

/// Real-valued item features, one row per item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    rows: usize,
    data: Vec<f64>,
}

impl FeatureTable {
    pub fn new(columns: Vec<String>, data: Vec<f64>) -> Result<Self> {
        let d = columns.len();
        if d == 0 {
            return Err(Error::input("feature table needs at least one column"));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::input("feature data is not a whole number of rows"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("features must be finite"));
        }
        Ok(FeatureTable {
            rows: data.len() / d,
            columns,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_cols();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.rows, self.n_cols()), &self.data).expect("shape checked")
    }

    /// Zero-mean, unit-variance columns (population variance). Constant
    /// columns carry no distance information and are dropped.
    pub fn standardize(&self) -> Result<Standardized> {
        let x = self.view();
        let mean = x.mean_axis(Axis(0)).ok_or_else(|| Error::input("no rows"))?;
        let std = x.std_axis(Axis(0), 0.0);
        let keep: Vec<usize> = (0..self.n_cols()).filter(|&j| std[j] > 0.0).collect();
        let dropped: Vec<String> = (0..self.n_cols())
            .filter(|j| !keep.contains(j))
            .map(|j| self.columns[j].clone())
            .collect();
        if !dropped.is_empty() {
            warn!("dropping {} zero-variance feature columns: {:?}", dropped.len(), dropped);
        }
        if keep.is_empty() {
            return Err(Error::input("every feature column is constant"));
        }
        let mut z = Array2::zeros((self.rows, keep.len()));
        for (out_j, &j) in keep.iter().enumerate() {
            let col = x.column(j);
            z.column_mut(out_j)
                .zip_mut_with(&col, |o, &v| *o = (v - mean[j]) / std[j]);
        }
        Ok(Standardized {
            data: z,
            dropped,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Standardized {
    pub data: Array2<f64>,
    pub dropped: Vec<String>,
}

/// Euclidean nearest neighbours over standardized features.
///
/// Lists up to the construction K are precomputed with a blocked Gram
/// product; candidates within a small tolerance of the K-th approximate
/// distance are re-ranked by exact distance, so the result matches a direct
/// exact computation.
#[derive(Clone, Debug)]
pub struct KnnBackbone {
    z: Array2<f64>,
    k: usize,
    lists: Vec<Vec<ItemId>>,
}

const BLOCK_ROWS: usize = 256;

impl KnnBackbone {
    pub fn new(features: &FeatureTable, k: usize) -> Result<Self> {
        let n = features.n_rows();
        if n <= k {
            return Err(Error::input(format!("{n} items cannot fill lists of length {k}")));
        }
        let z = features.standardize()?.data;
        let norms: Vec<f64> = z.rows().into_iter().map(|r| r.dot(&r)).collect();
        let mut lists = Vec::with_capacity(n);
        let zt = z.t();
        let mut start = 0;
        while start < n {
            let end = (start + BLOCK_ROWS).min(n);
            let gram = z.slice(s![start..end, ..]).dot(&zt);
            for (b, g) in gram.rows().into_iter().enumerate() {
                let i = start + b;
                let approx: Vec<f64> = g
                    .iter()
                    .zip(&norms)
                    .map(|(&gij, &nj)| norms[i] + nj - 2.0 * gij)
                    .collect();
                lists.push(refine(&z, i, &approx, k));
            }
            start = end;
        }
        Ok(KnnBackbone { z, k, lists })
    }

    pub fn distances(&self, source: ItemId) -> Vec<f64> {
        let q = self.z.row(source.index());
        self.z
            .rows()
            .into_iter()
            .map(|r| exact_sq_dist(q.as_slice().unwrap(), r.as_slice().unwrap()))
            .collect()
    }
}

#[inline]
fn exact_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_distance_then_id(dist: &[f64]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b))
}

fn refine(z: &Array2<f64>, i: usize, approx: &[f64], k: usize) -> Vec<ItemId> {
    let mut idx: Vec<usize> = (0..approx.len()).filter(|&j| j != i).collect();
    idx.select_nth_unstable_by(k - 1, by_distance_then_id(approx));
    let kth = approx[idx[k - 1]];
    let cutoff = kth + 1e-8 * (1.0 + kth.abs());
    let row = z.row(i);
    let q = row.as_slice().unwrap();
    let mut cand: Vec<(f64, usize)> = (0..approx.len())
        .filter(|&j| j != i && approx[j] <= cutoff)
        .map(|j| (exact_sq_dist(q, z.row(j).as_slice().unwrap()), j))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cand.into_iter().take(k).map(|(_, j)| ItemId::from(j)).collect()
}

impl Backbone for KnnBackbone {
    fn n_items(&self) -> usize {
        self.z.nrows()
    }

    fn top_k(&self, source: ItemId, k: usize) -> Vec<ItemId> {
        if k <= self.k {
            return self.lists[source.index()][..k].to_vec();
        }
        let mut order = self.full_ranking(source).unwrap();
        order.truncate(k);
        order
    }

    fn full_ranking(&self, source: ItemId) -> Option<Vec<ItemId>> {
        let dist = self.distances(source);
        let mut idx: Vec<usize> = (0..dist.len()).filter(|&j| j != source.index()).collect();
        idx.sort_unstable_by(by_distance_then_id(&dist));
        Some(idx.into_iter().map(ItemId::from).collect())
    }
}

pub fn knn_provider(features: &FeatureTable, k: usize) -> Result<ProviderOracle> {
    ProviderOracle::new(KnnBackbone::new(features, k)?, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(cols: usize, data: Vec<f64>) -> FeatureTable {
        FeatureTable::new((0..cols).map(|j| format!("f{j}")).collect(), data).unwrap()
    }

    #[test]
    fn one_dimensional_neighbours() {
        let oracle = knn_provider(&table(1, vec![0.0, 1.0, 3.0, 10.0]), 2).unwrap();
        assert_eq!(oracle.query(ItemId(1)).unwrap().items(), &[ItemId(0), ItemId(2)]);
    }

    #[test]
    fn identical_rows_are_mutual_first_neighbours() {
        let t = table(2, vec![0.0, 1.0, 5.0, 2.0, 0.0, 1.0, 9.0, 9.0]);
        let b = KnnBackbone::new(&t, 1).unwrap();
        assert_eq!(b.top_k(ItemId(0), 1), vec![ItemId(2)]);
        assert_eq!(b.top_k(ItemId(2), 1), vec![ItemId(0)]);
    }

    #[test]
    fn constant_columns_are_dropped() {
        let t = table(2, vec![1.0, 7.0, 2.0, 7.0, 4.0, 7.0]);
        let st = t.standardize().unwrap();
        assert_eq!(st.dropped, vec!["f1".to_string()]);
        assert_eq!(st.data.ncols(), 1);
        assert!(st.data.iter().all(|x| x.is_finite()));
    }

    proptest! {
        #[test]
        fn precomputed_lists_match_exact_ranking(
            data in proptest::collection::vec(-3i32..4, 3 * 30),
            k in 1usize..6,
        ) {
            let t = table(3, data.into_iter().map(f64::from).collect());
            prop_assume!(t.standardize().is_ok());
            let b = KnnBackbone::new(&t, k).unwrap();
            for i in 0..30 {
                let full = b.full_ranking(ItemId(i)).unwrap();
                prop_assert_eq!(b.top_k(ItemId(i), k), full[..k].to_vec());
            }
        }

        #[test]
        fn order_invariant_under_affine_column_map(
            data in proptest::collection::vec(-50i32..50, 2 * 20),
            scale in 1i32..7,
            shift in -100i32..100,
        ) {
            let raw: Vec<f64> = data.into_iter().map(f64::from).collect();
            let t = table(2, raw.clone());
            prop_assume!(t.standardize().map(|s| s.dropped.is_empty()).unwrap_or(false));
            let moved: Vec<f64> = raw
                .chunks(2)
                .flat_map(|r| [r[0] * f64::from(scale) + f64::from(shift), r[1]])
                .collect();
            let a = KnnBackbone::new(&t, 3).unwrap();
            let b = KnnBackbone::new(&table(2, moved), 3).unwrap();
            for i in 0..20 {
                let (da, db) = (a.distances(ItemId(i)), b.distances(ItemId(i)));
                for (x, y) in da.iter().zip(&db) {
                    prop_assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }
}
