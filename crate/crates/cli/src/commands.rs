use std::collections::BTreeMap;
use std::path::Path;

use log::{info, warn};
use privrec::datasets::{audit, ProcessedDataset};
use privrec::eval::{
    oracle_baseline, random_baseline, run_sweep, sample_sources, sensitivity_sweep,
    write_records_csv, write_sensitivity_csv, EvalTask, Hyperparameter, Method, RunManifest,
    SweepConfig, SweepContext,
};
use privrec::{
    entropy, least_ratio, ppr, private_rank_recommend, private_walk_recommend, Error,
    FairnessConfig, ItemId, ItemSet, PprParams, RecNet, Result, Selection, WalkParams,
};

use crate::args::{PrepareArgs, ProviderKind, RecommendArgs, RunArgs, SweepArgs};
use crate::setup::{self, Loaded};

pub fn prepare(args: &PrepareArgs) -> Result<()> {
    let ds = ProcessedDataset::from_raw(args.kind, &args.raw)?;
    // stage next to the target so a failed audit leaves nothing behind
    let parent = args.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    setup::ensure_dir(parent)?;
    let stage = tempfile_dir(parent)?;
    let manifest = ds.write(stage.path())?;
    if let Err(e) = audit(&manifest) {
        if !args.skip_audit {
            return Err(e);
        }
        warn!("{e}");
    }
    if args.out.exists() {
        std::fs::remove_dir_all(&args.out)?;
    }
    std::fs::rename(stage.keep(), &args.out)?;
    println!(
        "{}: {} users, {} items, {} interactions, {} features -> {}",
        manifest.dataset,
        opt(manifest.n_users),
        manifest.n_items,
        opt(manifest.n_interactions),
        opt(manifest.n_features),
        args.out.display()
    );
    for g in &manifest.groups {
        println!("  {}: {:?} {:?}", g.attribute, g.group_names, g.group_sizes);
    }
    println!("manifest digest {}", manifest.digest());
    Ok(())
}

fn opt(v: Option<usize>) -> String {
    v.map_or("-".into(), |v| v.to_string())
}

fn tempfile_dir(parent: &Path) -> Result<tempfile::TempDir> {
    Ok(tempfile::Builder::new().prefix(".privrec-").tempdir_in(parent)?)
}

fn resolve_source(loaded: &Loaded, key: &str) -> Result<ItemId> {
    match &loaded.dataset {
        ProcessedDataset::Interactions { interactions, .. } => interactions
            .item_keys()
            .iter()
            .position(|k| k == key)
            .map(ItemId::from)
            .ok_or_else(|| Error::Input(format!("unknown item `{key}`"))),
        ProcessedDataset::Features { features, .. } => key
            .parse::<usize>()
            .ok()
            .filter(|&i| i < features.n_rows())
            .map(ItemId::from)
            .ok_or_else(|| Error::Input(format!("row `{key}` out of range"))),
    }
}

fn resolve_history(loaded: &Loaded, user: Option<&str>) -> Result<ItemSet> {
    let Some(user) = user else { return Ok(ItemSet::new()) };
    let ProcessedDataset::Interactions { interactions, .. } = &loaded.dataset else {
        return Err(Error::Input("feature datasets have no users".into()));
    };
    let u = interactions
        .user_keys()
        .iter()
        .position(|k| k == user)
        .ok_or_else(|| Error::Input(format!("unknown user `{user}`")))?;
    Ok(interactions
        .entries()
        .iter()
        .filter(|e| e.user as usize == u)
        .map(|e| ItemId(e.item))
        .collect())
}

fn item_label(loaded: &Loaded, item: ItemId) -> String {
    match &loaded.dataset {
        ProcessedDataset::Interactions { interactions, .. } => interactions.item_key(item).to_string(),
        ProcessedDataset::Features { .. } => item.to_string(),
    }
}

fn network(oracle: &privrec::ProviderOracle, cache: Option<&Path>) -> Result<RecNet> {
    if let Some(path) = cache {
        if path.exists() {
            let net = RecNet::read_edges(path, Default::default())?;
            if net.n_items() != oracle.n_items() || net.k() != oracle.k() {
                return Err(Error::Input(format!("{} does not match the provider", path.display())));
            }
            info!("network read from {}", path.display());
            return Ok(net);
        }
    }
    let net = RecNet::build(oracle)?;
    if let Some(path) = cache {
        net.write_edges(path)?;
    }
    Ok(net)
}

fn base_manifest(loaded: &Loaded, run: &RunArgs) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        dataset: loaded.dataset.kind().to_string(),
        dataset_digest: loaded.manifest.digest(),
        provider: loaded.provider.name().to_string(),
        attribute: loaded.attribute.to_string(),
        k: run.topk,
        taus: Vec::new(),
        methods: Vec::new(),
        damping: run.damping,
        ppr_steps: run.ppr_steps,
        walk_max_len: run.walk_max_len,
        walk_seeds: Vec::new(),
        random_seed: 0,
        split_seed: 0,
        bpr: (loaded.provider == ProviderKind::Bpr).then(|| setup::bpr_config(run)),
        exclude_history: true,
        n_sources: 0,
        fairness_aggregation: "mean over evaluated lists".to_string(),
        walk_metric_std: BTreeMap::new(),
        extra: BTreeMap::new(),
    }
}

pub fn recommend(args: &RecommendArgs) -> Result<()> {
    let run = &args.run;
    let loaded = setup::load(run)?;
    let catalog = setup::catalog(&loaded);
    let source = resolve_source(&loaded, &args.source)?;
    let history = resolve_history(&loaded, args.user.as_deref())?;
    let cfg = FairnessConfig::new(run.topk, args.tau, catalog.n_groups())?;
    let params = PprParams::new(run.damping, run.ppr_steps)?;
    let oracle = setup::provider(&loaded, None, run)?;

    let mut scores = None;
    let selection = match args.method {
        Method::Provider => Selection { list: oracle.query(source)?, feasible: true },
        Method::PrivateRank => {
            let net = network(&oracle, args.network_cache.as_deref())?;
            scores = Some(ppr(&net, source, &params)?);
            private_rank_recommend(&net, source, &params, &cfg, catalog, &history)?
        }
        Method::PrivateWalk => {
            let walk = WalkParams::new(run.walk_max_len, args.seed)?;
            let out = private_walk_recommend(&oracle, source, &cfg, catalog, &history, &walk)?;
            Selection { list: out.list, feasible: true }
        }
        Method::Random => random_baseline(source, &cfg, catalog, &history, args.seed),
        Method::Oracle => oracle_baseline(oracle.backbone().as_ref(), source, &cfg, catalog, &history)?,
    };

    println!("rank\titem\tgroup\tscore");
    for (r, item) in selection.list.iter().enumerate() {
        let score = scores.as_ref().map_or("-".into(), |s| format!("{:.6e}", s[item.index()]));
        let group = catalog.group_name(catalog.group_of(item));
        println!("{}\t{}\t{group}\t{score}", r + 1, item_label(&loaded, item));
    }
    if !selection.list.is_empty() {
        let counts = catalog.tally(selection.list.items());
        let parts: Vec<String> = counts
            .iter()
            .enumerate()
            .map(|(g, c)| format!("{}={c}", catalog.group_names()[g]))
            .collect();
        println!(
            "least_ratio={:.4} entropy={:.4} groups: {} provider_queries={}",
            least_ratio(&selection.list, catalog)?,
            entropy(&selection.list, catalog)?,
            parts.join(" "),
            oracle.query_count()
        );
    }

    let mut manifest = base_manifest(&loaded, run);
    manifest.taus = vec![args.tau];
    manifest.methods = vec![args.method.to_string()];
    manifest.walk_seeds = vec![args.seed];
    manifest.random_seed = args.seed;
    manifest.exclude_history = args.user.is_some();
    manifest.n_sources = 1;
    manifest.extra.insert("command".into(), "recommend".into());
    manifest.extra.insert("source".into(), args.source.clone());
    if let Some(u) = &args.user {
        manifest.extra.insert("user".into(), u.clone());
    }
    setup::ensure_dir(&run.out_dir)?;
    manifest.write(&run.out_dir.join("recommend-manifest.json"))?;

    if selection.feasible {
        Ok(())
    } else {
        Err(Error::Infeasible(format!(
            "only {} of {} slots could be filled under tau={}",
            selection.list.len(),
            run.topk,
            args.tau
        )))
    }
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let run = &args.run;
    let loaded = setup::load(run)?;
    let catalog = setup::catalog(&loaded);
    let params = PprParams::new(run.damping, run.ppr_steps)?;

    let split = setup::split(&loaded, args.split_seed);
    let task = match (&split, &loaded.dataset) {
        (Some((_, cases)), _) => EvalTask::LeaveOneOut(cases.clone()),
        (None, ProcessedDataset::Features { labels, features, .. }) => {
            let n = features.n_rows();
            let sources = if args.full {
                (0..n).map(ItemId::from).collect()
            } else {
                sample_sources(n, args.sources, args.source_seed)
            };
            EvalTask::SameLabel { sources, labels: labels.clone() }
        }
        _ => unreachable!("interaction datasets always split"),
    };
    let oracle = setup::provider(&loaded, split.as_ref().map(|s| &s.0), run)?;
    let ctx = SweepContext { oracle: &oracle, catalog, task: &task, exclude_history: !args.include_history };

    let taus = if args.taus.is_empty() {
        (0..=FairnessConfig::max_tau(run.topk, catalog.n_groups())).collect()
    } else {
        args.taus.clone()
    };
    let methods = if args.methods.is_empty() { Method::ALL.to_vec() } else { args.methods.clone() };

    let mut manifest = base_manifest(&loaded, run);
    manifest.taus = taus.clone();
    manifest.methods = methods.iter().map(|m| m.to_string()).collect();
    manifest.walk_seeds = args.walk_seeds.clone();
    manifest.random_seed = args.random_seed;
    manifest.split_seed = args.split_seed;
    manifest.exclude_history = !args.include_history;
    manifest.n_sources = task.len();
    manifest.extra.insert("command".into(), "sweep".into());
    manifest.extra.insert("source_seed".into(), args.source_seed.to_string());

    // each method is its own cell so one failure does not sink the rest
    let mut records = Vec::new();
    let mut failures: Vec<(String, Error)> = Vec::new();
    for &method in &methods {
        let cfg = SweepConfig {
            methods: vec![method],
            taus: taus.clone(),
            ppr: params,
            walk_max_len: run.walk_max_len,
            walk_seeds: args.walk_seeds.clone(),
            random_seed: args.random_seed,
        };
        info!("sweeping {method}");
        match run_sweep(&ctx, &cfg) {
            Ok(out) => {
                records.extend(out.records);
                manifest.walk_metric_std.extend(out.walk_metric_std);
            }
            Err(e) => failures.push((method.to_string(), e)),
        }
    }

    let mut sensitivity = Vec::new();
    if !args.no_sensitivity {
        let base = SweepConfig {
            ppr: params,
            walk_max_len: run.walk_max_len,
            walk_seeds: args.walk_seeds.clone(),
            random_seed: args.random_seed,
            ..Default::default()
        };
        let net = RecNet::build(&oracle.fork());
        for hyper in [Hyperparameter::Steps, Hyperparameter::Damping, Hyperparameter::WalkMaxLen] {
            info!("sensitivity of {}", hyper.name());
            let net = match (&net, hyper.method()) {
                (Ok(net), Method::PrivateRank) => Some(net),
                (Err(e), Method::PrivateRank) => {
                    failures.push((format!("sensitivity:{}", hyper.name()), clone_error(e)));
                    continue;
                }
                _ => None,
            };
            match sensitivity_sweep(&ctx, &base, hyper, &hyper.default_grid(), net) {
                Ok(recs) => sensitivity.extend(recs),
                Err(e) => failures.push((format!("sensitivity:{}", hyper.name()), e)),
            }
        }
    }

    for (cell, e) in &failures {
        warn!("{cell} failed: {e}");
        manifest.extra.insert(format!("failed:{cell}"), e.to_string());
    }
    records.sort_by(|a, b| {
        let key = |r: &privrec::eval::TradeoffRecord| (r.method.parse::<Method>().ok(), r.tau);
        key(a).cmp(&key(b))
    });
    setup::ensure_dir(&run.out_dir)?;
    write_records_csv(&run.out_dir.join("tradeoff.csv"), &records)?;
    write_sensitivity_csv(&run.out_dir.join("sensitivity.csv"), &sensitivity)?;
    manifest.write(&run.out_dir.join("manifest.json"))?;
    println!(
        "{} trade-off rows, {} sensitivity rows -> {}",
        records.len(),
        sensitivity.len(),
        run.out_dir.display()
    );
    match failures.into_iter().next() {
        None => Ok(()),
        Some((_, e)) => Err(e),
    }
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::BudgetExhausted { budget } => Error::BudgetExhausted { budget: *budget },
        Error::Infeasible(m) => Error::Infeasible(m.clone()),
        other => Error::Input(other.to_string()),
    }
}
