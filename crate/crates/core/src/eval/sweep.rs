use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::TestCase;
use crate::error::{Error, Result};
use crate::eval::{
    ndcg_at_k, oracle_baseline, precision_same_label, random_baseline, recall_at_k,
    SensitivityRecord, TradeoffRecord,
};
use crate::fairness::{entropy, fair_greedy_select, least_ratio, FairnessConfig, Selection};
use crate::oracle::ProviderOracle;
use crate::privaterank::{ppr, PprParams};
use crate::privatewalk::{private_walk_recommend, WalkParams};
use crate::ranking::argsort_desc_sparse;
use crate::recnet::RecNet;
use crate::types::{Catalog, ItemId, ItemSet, RecList};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Provider,
    PrivateRank,
    PrivateWalk,
    Random,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Provider,
        Method::PrivateRank,
        Method::PrivateWalk,
        Method::Random,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Provider => "provider",
            Method::PrivateRank => "privaterank",
            Method::PrivateWalk => "privatewalk",
            Method::Random => "random",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::input(format!("unknown method `{s}`")))
    }
}

/// What a recommendation list is scored against.
#[derive(Clone, Debug)]
pub enum EvalTask {
    /// Leave-one-out: recall@K and nDCG@K of the held-out positive.
    LeaveOneOut(Vec<TestCase>),
    /// Every source is a page with no history; precision is the share of
    /// recommended items with the source's class label.
    SameLabel { sources: Vec<ItemId>, labels: Vec<u8> },
}

impl EvalTask {
    pub fn len(&self) -> usize {
        match self {
            EvalTask::LeaveOneOut(cases) => cases.len(),
            EvalTask::SameLabel { sources, .. } => sources.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn metric_names(&self, k: usize) -> Vec<String> {
        match self {
            EvalTask::LeaveOneOut(_) => vec![format!("recall@{k}"), format!("ndcg@{k}")],
            EvalTask::SameLabel { .. } => vec![format!("precision@{k}")],
        }
    }

    fn source(&self, idx: usize) -> ItemId {
        match self {
            EvalTask::LeaveOneOut(cases) => cases[idx].source,
            EvalTask::SameLabel { sources, .. } => sources[idx],
        }
    }

    fn history(&self, idx: usize, exclude_history: bool) -> ItemSet {
        match self {
            EvalTask::LeaveOneOut(cases) if exclude_history => cases[idx].history_set(),
            _ => ItemSet::new(),
        }
    }

    fn score(&self, idx: usize, list: &RecList) -> Vec<f64> {
        match self {
            EvalTask::LeaveOneOut(cases) => {
                let pos = cases[idx].positive;
                vec![recall_at_k(list, pos), ndcg_at_k(list, pos)]
            }
            EvalTask::SameLabel { sources, labels } => {
                vec![precision_same_label(list, sources[idx], labels)]
            }
        }
    }
}

/// Seeded sample of `count` distinct sources out of `n`, ascending.
pub fn sample_sources(n: usize, count: usize, seed: u64) -> Vec<ItemId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<ItemId> = sample(&mut rng, n, count.min(n))
        .into_iter()
        .map(ItemId::from)
        .collect();
    v.sort();
    v
}

pub struct SweepContext<'a> {
    /// Provider trained without the held-out positives.
    pub oracle: &'a ProviderOracle,
    pub catalog: &'a Catalog,
    pub task: &'a EvalTask,
    /// Drop the user's history from every fair method's list.
    pub exclude_history: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    /// Empty means `0..=K/|groups|`.
    pub taus: Vec<usize>,
    pub ppr: PprParams,
    pub walk_max_len: usize,
    pub walk_seeds: Vec<u64>,
    pub random_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            methods: Method::ALL.to_vec(),
            taus: Vec::new(),
            ppr: PprParams::default(),
            walk_max_len: 100,
            walk_seeds: (0..5).collect(),
            random_seed: 0,
        }
    }
}

impl SweepConfig {
    fn resolved_taus(&self, k: usize, n_groups: usize) -> Result<Vec<usize>> {
        if self.taus.is_empty() {
            return Ok((0..=FairnessConfig::max_tau(k, n_groups)).collect());
        }
        for &t in &self.taus {
            FairnessConfig::new(k, t, n_groups)?;
        }
        Ok(self.taus.clone())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutput {
    /// Sorted by (method, tau, metric).
    pub records: Vec<TradeoffRecord>,
    /// Standard deviation across walk seeds, keyed by `tau/metric_name`.
    pub walk_metric_std: BTreeMap<String, f64>,
}

impl SweepOutput {
    pub fn get(&self, method: Method, tau: usize, metric_prefix: &str) -> Option<&TradeoffRecord> {
        self.records.iter().find(|r| {
            r.method == method.name() && r.tau == tau && r.metric_name.starts_with(metric_prefix)
        })
    }
}

/// Per-(method, tau) running sums.
#[derive(Clone, Debug, Default)]
struct Cell {
    metric_sums: Vec<f64>,
    cases: usize,
    least_ratio_sum: f64,
    entropy_sum: f64,
    scored_lists: usize,
    infeasible: usize,
}

impl Cell {
    fn add(&mut self, task: &EvalTask, idx: usize, outcome: &Outcome, catalog: &Catalog) {
        self.cases += 1;
        let list = match outcome {
            Outcome::List(sel) => {
                if !sel.feasible {
                    self.infeasible += 1;
                }
                &sel.list
            }
            Outcome::Infeasible => {
                self.infeasible += 1;
                if self.metric_sums.is_empty() {
                    self.metric_sums = vec![0.0; task.metric_names(0).len()];
                }
                return;
            }
        };
        let scores = task.score(idx, list);
        if self.metric_sums.is_empty() {
            self.metric_sums = vec![0.0; scores.len()];
        }
        for (s, v) in self.metric_sums.iter_mut().zip(scores) {
            *s += v;
        }
        if !list.is_empty() {
            self.least_ratio_sum += least_ratio(list, catalog).expect("non-empty");
            self.entropy_sum += entropy(list, catalog).expect("non-empty");
            self.scored_lists += 1;
        }
    }

    fn merge(&mut self, other: Cell) {
        if self.metric_sums.is_empty() {
            self.metric_sums = vec![0.0; other.metric_sums.len()];
        }
        for (a, b) in self.metric_sums.iter_mut().zip(other.metric_sums) {
            *a += b;
        }
        self.cases += other.cases;
        self.least_ratio_sum += other.least_ratio_sum;
        self.entropy_sum += other.entropy_sum;
        self.scored_lists += other.scored_lists;
        self.infeasible += other.infeasible;
    }

    fn metric_means(&self) -> Vec<f64> {
        let n = self.cases.max(1) as f64;
        self.metric_sums.iter().map(|s| s / n).collect()
    }

    fn fairness_means(&self) -> (f64, f64) {
        let n = self.scored_lists.max(1) as f64;
        (self.least_ratio_sum / n, self.entropy_sum / n)
    }
}

enum Outcome {
    List(Selection),
    Infeasible,
}

fn mix_seed(a: u64, b: u64, c: u64) -> u64 {
    // splitmix64 over the combined words
    let mut z = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(c.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Evaluator<'a, 'c> {
    ctx: &'c SweepContext<'a>,
    k: usize,
    n_groups: usize,
}

impl Evaluator<'_, '_> {
    fn cfgs(&self, taus: &[usize]) -> Result<Vec<FairnessConfig>> {
        taus.iter()
            .map(|&t| FairnessConfig::new(self.k, t, self.n_groups))
            .collect()
    }

    /// Runs `per_case` on every case in parallel and folds the per-tau
    /// outcomes into cells.
    fn fold<F>(&self, n_taus: usize, per_case: F) -> Result<Vec<Cell>>
    where
        F: Fn(usize, &ItemSet) -> Result<Vec<Outcome>> + Sync,
    {
        let task = self.ctx.task;
        let catalog = self.ctx.catalog;
        let exclude = self.ctx.exclude_history;
        (0..task.len())
            .into_par_iter()
            .map(|idx| {
                let history = task.history(idx, exclude);
                let outcomes = per_case(idx, &history)?;
                let mut cells = vec![Cell::default(); n_taus];
                for (cell, o) in cells.iter_mut().zip(&outcomes) {
                    cell.add(task, idx, o, catalog);
                }
                Ok(cells)
            })
            .try_reduce(
                || vec![Cell::default(); n_taus],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        x.merge(y);
                    }
                    Ok(a)
                },
            )
    }

    fn provider(&self, n_taus: usize) -> Result<(Vec<Cell>, f64)> {
        let oracle = self.ctx.oracle.fork();
        let cells = self.fold(1, |idx, _| {
            let list = oracle.query(self.ctx.task.source(idx))?;
            Ok(vec![Outcome::List(Selection { list, feasible: true })])
        })?;
        Ok((vec![cells[0].clone(); n_taus], oracle.query_count() as f64))
    }

    fn private_rank(&self, net: &RecNet, params: &PprParams, taus: &[usize]) -> Result<Vec<Cell>> {
        let cfgs = self.cfgs(taus)?;
        self.fold(taus.len(), |idx, history| {
            let source = self.ctx.task.source(idx);
            let order = argsort_desc_sparse(&ppr(net, source, params)?);
            Ok(cfgs
                .iter()
                .map(|cfg| {
                    Outcome::List(fair_greedy_select(
                        order.iter().copied().filter(|&i| i != source),
                        history,
                        cfg,
                        self.ctx.catalog,
                    ))
                })
                .collect())
        })
    }

    fn oracle_method(&self, taus: &[usize]) -> Result<Vec<Cell>> {
        let cfgs = self.cfgs(taus)?;
        let backbone = self.ctx.oracle.backbone();
        self.fold(taus.len(), |idx, history| {
            let source = self.ctx.task.source(idx);
            cfgs.iter()
                .map(|cfg| oracle_baseline(backbone.as_ref(), source, cfg, self.ctx.catalog, history).map(Outcome::List))
                .collect()
        })
    }

    fn random(&self, taus: &[usize], seed: u64) -> Result<Vec<Cell>> {
        let cfgs = self.cfgs(taus)?;
        self.fold(taus.len(), |idx, history| {
            let source = self.ctx.task.source(idx);
            let case_seed = mix_seed(seed, idx as u64, 0);
            Ok(cfgs
                .iter()
                .map(|cfg| Outcome::List(random_baseline(source, cfg, self.ctx.catalog, history, case_seed)))
                .collect())
        })
    }

    /// Cells for one walk seed plus the queries it issued.
    fn private_walk(&self, taus: &[usize], max_len: usize, seed: u64) -> Result<(Vec<Cell>, f64)> {
        let cfgs = self.cfgs(taus)?;
        let oracle = self.ctx.oracle.fork();
        let cells = self.fold(taus.len(), |idx, history| {
            let source = self.ctx.task.source(idx);
            cfgs.iter()
                .zip(taus)
                .map(|(cfg, &tau)| {
                    let params = WalkParams {
                        max_len,
                        seed: mix_seed(seed, idx as u64, tau as u64 + 1),
                        memoize: true,
                    };
                    match private_walk_recommend(&oracle, source, cfg, self.ctx.catalog, history, &params) {
                        Ok(out) => Ok(Outcome::List(Selection { list: out.list, feasible: true })),
                        Err(Error::Infeasible(_)) => Ok(Outcome::Infeasible),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })?;
        Ok((cells, oracle.query_count() as f64))
    }
}

fn records_for(
    method: Method,
    taus: &[usize],
    cells: &[Cell],
    queries: f64,
    metric_names: &[String],
) -> Vec<TradeoffRecord> {
    let mut out = Vec::new();
    for (&tau, cell) in taus.iter().zip(cells) {
        let (lr, h) = cell.fairness_means();
        for (name, value) in metric_names.iter().zip(cell.metric_means()) {
            out.push(TradeoffRecord {
                method: method.name().to_string(),
                tau,
                metric_name: name.clone(),
                metric_value: value,
                least_ratio: lr,
                entropy: h,
                queries,
                infeasible_count: cell.infeasible,
            });
        }
    }
    out
}

fn check_context(ctx: &SweepContext<'_>) -> Result<()> {
    if ctx.catalog.n_items() != ctx.oracle.n_items() {
        return Err(Error::input("catalog and provider disagree on the number of items"));
    }
    if ctx.task.is_empty() {
        return Err(Error::input("nothing to evaluate"));
    }
    Ok(())
}

/// Evaluates every method at every tau. PrivateRank's network is built once
/// (n provider queries) and shared across tau values.
pub fn run_sweep(ctx: &SweepContext<'_>, cfg: &SweepConfig) -> Result<SweepOutput> {
    check_context(ctx)?;
    cfg.ppr.validate()?;
    let k = ctx.oracle.k();
    let n_groups = ctx.catalog.n_groups();
    let taus = cfg.resolved_taus(k, n_groups)?;
    let ev = Evaluator { ctx, k, n_groups };
    let names = ctx.task.metric_names(k);
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();

    let mut output = SweepOutput::default();
    for method in methods {
        let (cells, queries) = match method {
            Method::Provider => ev.provider(taus.len())?,
            Method::PrivateRank => {
                let builder = ctx.oracle.fork();
                let net = RecNet::build(&builder)?;
                (ev.private_rank(&net, &cfg.ppr, &taus)?, builder.query_count() as f64)
            }
            Method::Oracle => (ev.oracle_method(&taus)?, 0.0),
            Method::Random => (ev.random(&taus, cfg.random_seed)?, 0.0),
            Method::PrivateWalk => {
                if cfg.walk_seeds.is_empty() {
                    return Err(Error::input("PrivateWalk needs at least one seed"));
                }
                let runs = cfg
                    .walk_seeds
                    .iter()
                    .map(|&s| ev.private_walk(&taus, cfg.walk_max_len, s))
                    .collect::<Result<Vec<_>>>()?;
                let (cells, std) = average_runs(&runs, &taus, &names);
                output.walk_metric_std.extend(std);
                let queries = runs.iter().map(|r| r.1).sum::<f64>() / runs.len() as f64;
                (cells, queries)
            }
        };
        output
            .records
            .extend(records_for(method, &taus, &cells, queries, &names));
    }
    Ok(output)
}

/// Averages cells across seeds (sums divided by the seed count, which keeps
/// the per-case means exact) and reports per-metric standard deviations.
fn average_runs(
    runs: &[(Vec<Cell>, f64)],
    taus: &[usize],
    names: &[String],
) -> (Vec<Cell>, BTreeMap<String, f64>) {
    let s = runs.len() as f64;
    let mut std = BTreeMap::new();
    let mut cells = Vec::with_capacity(taus.len());
    for (t, &tau) in taus.iter().enumerate() {
        let per_seed: Vec<Vec<f64>> = runs.iter().map(|r| r.0[t].metric_means()).collect();
        for (m, name) in names.iter().enumerate() {
            let vals: Vec<f64> = per_seed.iter().map(|v| v[m]).collect();
            let mean = vals.iter().sum::<f64>() / s;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / s;
            std.insert(format!("{tau}/{name}"), var.sqrt());
        }
        let mut total = Cell::default();
        for r in runs {
            total.merge(r.0[t].clone());
        }
        // the averaged cell: metric and fairness means over all seed-cases
        let mut avg = total.clone();
        avg.infeasible = (total.infeasible as f64 / s).round() as usize;
        cells.push(avg);
    }
    (cells, std)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparameter {
    /// PrivateRank series length `L`.
    Steps,
    /// PrivateRank damping factor `c`.
    Damping,
    /// PrivateWalk maximum walk length.
    WalkMaxLen,
}

impl Hyperparameter {
    pub fn name(self) -> &'static str {
        match self {
            Hyperparameter::Steps => "L",
            Hyperparameter::Damping => "c",
            Hyperparameter::WalkMaxLen => "L_max",
        }
    }

    pub fn method(self) -> Method {
        match self {
            Hyperparameter::Steps | Hyperparameter::Damping => Method::PrivateRank,
            Hyperparameter::WalkMaxLen => Method::PrivateWalk,
        }
    }

    /// Grid used for the sensitivity study.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Hyperparameter::Steps => vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
            Hyperparameter::Damping => vec![1e-4, 1e-3, 1e-2, 1e-1],
            Hyperparameter::WalkMaxLen => vec![10.0, 50.0, 100.0, 200.0],
        }
    }
}

impl FromStr for Hyperparameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "steps" => Ok(Hyperparameter::Steps),
            "c" | "damping" => Ok(Hyperparameter::Damping),
            "L_max" | "lmax" | "walk-max-len" => Ok(Hyperparameter::WalkMaxLen),
            other => Err(Error::input(format!("unknown hyperparameter `{other}`"))),
        }
    }
}

/// Performance of the affected method at full fairness (`tau = K/|groups|`)
/// for every grid value, normalized so the best value is 1. Only the first
/// metric of the task (recall or precision) is reported.
pub fn sensitivity_sweep(
    ctx: &SweepContext<'_>,
    base: &SweepConfig,
    hyper: Hyperparameter,
    values: &[f64],
    network: Option<&RecNet>,
) -> Result<Vec<SensitivityRecord>> {
    check_context(ctx)?;
    let k = ctx.oracle.k();
    let n_groups = ctx.catalog.n_groups();
    let tau = FairnessConfig::max_tau(k, n_groups);
    let ev = Evaluator { ctx, k, n_groups };
    let metric = ctx.task.metric_names(k)[0].clone();

    let owned;
    let net = match (hyper.method(), network) {
        (Method::PrivateRank, Some(net)) => Some(net),
        (Method::PrivateRank, None) => {
            owned = RecNet::build(&ctx.oracle.fork())?;
            Some(&owned)
        }
        _ => None,
    };

    let mut raw = Vec::with_capacity(values.len());
    for &v in values {
        let cell = match hyper {
            Hyperparameter::Steps | Hyperparameter::Damping => {
                let mut p = base.ppr;
                if hyper == Hyperparameter::Steps {
                    p.steps = v as usize;
                } else {
                    p.damping = v;
                }
                p.validate()?;
                ev.private_rank(net.expect("built above"), &p, &[tau])?.remove(0)
            }
            Hyperparameter::WalkMaxLen => {
                if base.walk_seeds.is_empty() {
                    return Err(Error::input("PrivateWalk needs at least one seed"));
                }
                let runs = base
                    .walk_seeds
                    .iter()
                    .map(|&s| ev.private_walk(&[tau], v as usize, s))
                    .collect::<Result<Vec<_>>>()?;
                average_runs(&runs, &[tau], &ctx.task.metric_names(k)).0.remove(0)
            }
        };
        raw.push((v, cell.metric_means()[0], cell.fairness_means().0));
    }
    let best = raw.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(raw
        .into_iter()
        .map(|(value, m, lr)| SensitivityRecord {
            hyperparameter: hyper.name().to_string(),
            value,
            method: hyper.method().name().to_string(),
            metric_name: metric.clone(),
            metric_value: m,
            normalized: if best > 0.0 { m / best } else { 0.0 },
            least_ratio: lr,
        })
        .collect())
}
