//! The experiment verbs: tree-stats, run, predict, compare, fit-shares.

use crate::config::{scenario_seed, ExperimentConfig, Mode};
use crate::csvio::{
    fmt_f64, CsvAppender, Table, COMPARE_HEADER, COMPARE_METRICS_HEADER, FIT_HEADER,
    LOCALITY_HEADER, PHASES_HEADER, PREDICT_HEADER, RUN_HEADER, TREE_STATS_HEADER, VOLUME_HEADER,
};
use crate::plot::{line_chart, Series};
use crate::scenario::ScenarioState;
use anyhow::{anyhow, bail, Context, Result};
use p2plab_core::cachesim::{analyze, LocalityReport};
use p2plab_core::exec::{
    measure_once, median_phase_times, trace_run, Layout, Measurement, PhaseTimes, Scenario,
};
use p2plab_core::model::{
    default_share_function, fit_log_share, predict_dbim, predict_photons, trend_metrics,
    Component, DbimParams, LocalityInputs, PhotonsParams, Profile, ShareFunction, SpeedupBreakdown,
    VolumeRatios,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct OutPaths {
    pub dir: PathBuf,
}

impl OutPaths {
    pub fn new(dir: &Path) -> Self {
        OutPaths { dir: dir.to_path_buf() }
    }
    pub fn run(&self) -> PathBuf {
        self.dir.join("run.csv")
    }
    pub fn volumes(&self) -> PathBuf {
        self.dir.join("volumes.csv")
    }
    pub fn phases(&self) -> PathBuf {
        self.dir.join("phases.csv")
    }
    pub fn locality(&self) -> PathBuf {
        self.dir.join("locality.csv")
    }
    pub fn predict(&self) -> PathBuf {
        self.dir.join("predict.csv")
    }
    pub fn compare(&self) -> PathBuf {
        self.dir.join("compare.csv")
    }
    pub fn compare_metrics(&self) -> PathBuf {
        self.dir.join("compare_metrics.csv")
    }
    pub fn compare_plot(&self, metric: &str) -> PathBuf {
        self.dir.join(format!("compare_{metric}.svg"))
    }
    pub fn fit(&self) -> PathBuf {
        self.dir.join("fit.csv")
    }
    pub fn tree_stats(&self) -> PathBuf {
        self.dir.join("tree_stats.csv")
    }
}

/// Emit tree statistics over the sweep, one row per (seed, sweep point).
pub fn cmd_tree_stats(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let seed = cfg.require_seed()?;
    let out = OutPaths::new(&cfg.out);
    let mut w = CsvAppender::open(&out.tree_stats(), TREE_STATS_HEADER)?;
    let sweep = cfg.sweep()?;
    for s in 0..cfg.seed_count {
        for (i, &(n, t)) in sweep.iter().enumerate() {
            let sseed = scenario_seed(seed, (s * sweep.len() + i) as u64);
            let mut state = ScenarioState::new(cfg, n, t, sseed)?;
            let scn = state.build(0)?;
            w.append(&[
                cfg.mode.to_string(),
                seed.to_string(),
                sseed.to_string(),
                n.to_string(),
                t.to_string(),
                scn.stats.n_leaves.to_string(),
                scn.stats.n_interactions.to_string(),
                fmt_f64(scn.stats.avg_e2),
                scn.stats.max_e2.to_string(),
                scn.tree.depth_capped.to_string(),
            ])?;
        }
    }
    Ok(out.tree_stats())
}

struct PointRow {
    layout: Layout,
    measurement: Measurement,
    times: PhaseTimes,
    locality: Option<(LocalityReport, LocalityReport)>,
    regime: String,
}

/// Execute both layouts at one sweep point across the configured
/// iterations; returns per-layout rows plus the iteration-0 scenario.
fn run_point(
    cfg: &ExperimentConfig,
    n: usize,
    t: usize,
    sseed: u64,
) -> Result<(Scenario, Vec<PointRow>)> {
    let mut state = ScenarioState::new(cfg, n, t, sseed)?;
    let cache = cfg.cache_config()?;
    let layouts = [Layout::Indexing, Layout::Redundant];

    let mut times: [Vec<PhaseTimes>; 2] = [Vec::new(), Vec::new()];
    let mut first: Vec<Measurement> = Vec::new();
    let mut scenario0 = None;

    for iteration in 0..cfg.iterations {
        let scn = state.build(iteration)?;
        for (li, &layout) in layouts.iter().enumerate() {
            let m = measure_once(&scn, layout).map_err(|e| anyhow!(e))?;
            if iteration == 0 {
                first.push(m.clone());
            }
            // iteration 0 is the warm-up; keep it only when it is all we have
            if iteration > 0 || cfg.iterations == 1 {
                times[li].push(m.times);
            }
        }
        if iteration == 0 {
            scenario0 = Some(scn);
        }
    }
    let scenario0 = scenario0.expect("at least one iteration");

    let mut rows = Vec::new();
    for (li, &layout) in layouts.iter().enumerate() {
        let locality = if cfg.trace {
            let (trace, _) = trace_run(&scenario0, layout).map_err(|e| anyhow!(e))?;
            let full = analyze(&trace, &cache);
            let data = analyze(&trace.data_only(), &cache);
            Some((full, data))
        } else {
            None
        };
        let regime = match (&locality, layout) {
            (Some((full, _)), Layout::Redundant) => {
                if full.group_footprint_max <= cache.capacity {
                    "fits-cache".to_string()
                } else {
                    "exceeds-cache".to_string()
                }
            }
            _ => String::new(),
        };
        rows.push(PointRow {
            layout,
            measurement: first[li].clone(),
            times: median_phase_times(&times[li]),
            locality,
            regime,
        });
    }
    Ok((scenario0, rows))
}

fn locality_fields(loc: &Option<(LocalityReport, LocalityReport)>) -> Vec<String> {
    match loc {
        Some((full, data)) => vec![
            fmt_f64(full.mean_d),
            full.max_d.to_string(),
            fmt_f64(full.mean_v),
            full.max_v.to_string(),
            full.misses.to_string(),
            full.hits.to_string(),
            fmt_f64(full.miss_rate),
            full.group_footprint_max.to_string(),
            fmt_f64(data.mean_d),
            data.max_d.to_string(),
            fmt_f64(data.mean_v),
            data.max_v.to_string(),
            data.misses.to_string(),
            data.hits.to_string(),
            fmt_f64(data.miss_rate),
        ],
        None => vec![String::new(); 15],
    }
}

/// Full sweep: build, pack, execute, trace, cache-simulate and time both
/// layouts at every sweep point. Per-point failures become error rows and
/// the run continues.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let seed = cfg.require_seed()?;
    let out = OutPaths::new(&cfg.out);
    let mut w = CsvAppender::open(&out.run(), RUN_HEADER)?;
    let mut vols = CsvAppender::open(&out.volumes(), VOLUME_HEADER)?;
    let mut phases = CsvAppender::open(&out.phases(), PHASES_HEADER)?;
    let mut locality = CsvAppender::open(&out.locality(), LOCALITY_HEADER)?;
    let sweep = cfg.sweep()?;

    for s in 0..cfg.seed_count {
        for (i, &(n, t)) in sweep.iter().enumerate() {
            let sseed = scenario_seed(seed, (s * sweep.len() + i) as u64);
            let head = |layout: &str| -> Vec<String> {
                vec![
                    cfg.mode.to_string(),
                    seed.to_string(),
                    sseed.to_string(),
                    n.to_string(),
                    String::new(), // level filled below when known
                    t.to_string(),
                    cfg.rf.to_string(),
                    cfg.partitions.to_string(),
                    cfg.batch_size.to_string(),
                    cfg.periodic.to_string(),
                    cfg.generator.to_string(),
                    layout.to_string(),
                ]
            };
            match run_point(cfg, n, t, sseed) {
                Ok((scn, rows)) => {
                    let level = match cfg.mode {
                        Mode::Dbim => scn.tree.levels,
                        Mode::Photons => scn.tree.levels,
                    };
                    let (wl, wr, wp) = scn.interaction_weights();
                    for row in rows {
                        let mut fields = head(&row.layout.to_string());
                        fields[4] = level.to_string();
                        let m = &row.measurement;
                        fields.extend([
                            scn.stats.n_leaves.to_string(),
                            scn.pairs.len().to_string(),
                            scn.stats.n_local.to_string(),
                            scn.stats.n_remote.to_string(),
                            scn.stats.n_periodic.to_string(),
                            wl.to_string(),
                            wr.to_string(),
                            wp.to_string(),
                            fmt_f64(scn.stats.avg_e2),
                            scn.stats.max_e2.to_string(),
                            scn.tree.depth_capped.to_string(),
                            row.times.launches.to_string(),
                            fmt_f64(row.times.collect),
                            fmt_f64(row.times.transfer),
                            fmt_f64(row.times.compute),
                            fmt_f64(row.times.update),
                            m.volume.collect.to_string(),
                            m.volume.transfer.to_string(),
                            m.volume.compute_resident.to_string(),
                            m.volume.update.to_string(),
                        ]);
                        fields.extend(locality_fields(&row.locality));
                        fields.extend([
                            row.regime.clone(),
                            format!("{:016x}", m.forces.checksum()),
                            String::new(),
                        ]);
                        w.append(&fields)?;
                        for (phase, seconds, bytes) in [
                            ("collect", row.times.collect, m.volume.collect),
                            ("transfer", row.times.transfer, m.volume.transfer),
                            ("compute", row.times.compute, m.volume.compute_resident),
                            ("update", row.times.update, m.volume.update),
                        ] {
                            vols.append(&[
                                phase.to_string(),
                                row.layout.to_string(),
                                bytes.to_string(),
                            ])?;
                            phases.append(&[
                                cfg.mode.to_string(),
                                row.layout.to_string(),
                                n.to_string(),
                                level.to_string(),
                                t.to_string(),
                                cfg.rf.to_string(),
                                phase.to_string(),
                                fmt_f64(seconds),
                                row.times.launches.to_string(),
                                bytes.to_string(),
                            ])?;
                        }
                        if let Some((full, data)) = &row.locality {
                            for (label, rep) in [
                                (row.layout.to_string(), full),
                                (format!("{}_data", row.layout), data),
                            ] {
                                locality.append(&[
                                    label,
                                    fmt_f64(rep.mean_d),
                                    rep.max_d.to_string(),
                                    fmt_f64(rep.mean_v),
                                    rep.max_v.to_string(),
                                    rep.misses.to_string(),
                                    rep.hits.to_string(),
                                    fmt_f64(rep.miss_rate),
                                ])?;
                            }
                        }
                    }
                }
                Err(e) => {
                    let mut fields = head("-");
                    fields.extend(vec![String::new(); 35]);
                    fields.push(format!("{e:#}"));
                    w.append(&fields)?;
                }
            }
        }
    }
    Ok(out.run())
}

/// Fitted share curves from the indexing rows of a measured table:
/// share_component(t) = phase seconds / total seconds, fitted as
/// a + b ln t. Falls back to the built-in defaults when the sweep has
/// fewer than two distinct t values.
fn shares_from_measured(table: &Table) -> Result<Option<[ShareFunction; 4]>> {
    let mut points: [Vec<(f64, f64)>; 4] = Default::default();
    for row in &table.rows {
        if table.get(row, "layout")? != "indexing" || !table.get(row, "error")?.is_empty() {
            continue;
        }
        let t = table.get_f64(row, "t")?;
        let phases = [
            table.get_f64(row, "collect_s")?,
            table.get_f64(row, "transfer_s")?,
            table.get_f64(row, "compute_s")?,
            table.get_f64(row, "update_s")?,
        ];
        let total: f64 = phases.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for (c, p) in phases.iter().enumerate() {
            points[c].push((t, p / total));
        }
    }
    let mut distinct: Vec<f64> = points[0].iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Ok(None);
    }
    let comps = [
        Component::Collect,
        Component::Transfer,
        Component::Compute,
        Component::Update,
    ];
    let mut out = Vec::new();
    for (c, pts) in comps.iter().zip(points.iter()) {
        let fit = fit_log_share(pts).map_err(|e| anyhow!(e))?;
        out.push(ShareFunction {
            component: *c,
            a: fit.a,
            b: fit.b,
        });
    }
    Ok(Some([out[0], out[1], out[2], out[3]]))
}

struct MeasuredPoint {
    leafs: f64,
    interactions: f64,
    e2: f64,
    max_e2: f64,
    launches: [f64; 2],
    volumes: [[f64; 4]; 2],
    locality: Option<LocalityInputs>,
    share_local: f64,
    level: u32,
}

type Key = (String, u64, u64, u64);

fn measured_points(table: &Table, cfg: &ExperimentConfig) -> Result<BTreeMap<Key, MeasuredPoint>> {
    let mut grouped: BTreeMap<Key, Vec<&Vec<String>>> = BTreeMap::new();
    for row in &table.rows {
        if !table.get(row, "error")?.is_empty() {
            continue;
        }
        let key = (
            table.get(row, "mode")?.to_string(),
            table.get_f64(row, "n")? as u64,
            table.get_f64(row, "t")? as u64,
            table.get_f64(row, "rf")? as u64,
        );
        grouped.entry(key).or_default().push(row);
    }
    let mut out = BTreeMap::new();
    for (key, rows) in grouped {
        let find = |layout: &str| -> Result<&Vec<String>> {
            rows.iter()
                .find(|r| table.get(r, "layout").map(|l| l == layout).unwrap_or(false))
                .copied()
                .with_context(|| format!("no {layout} row for point {key:?}"))
        };
        let idx = find("indexing")?;
        let red = find("redundant")?;
        let vol = |row: &Vec<String>| -> Result<[f64; 4]> {
            Ok([
                table.get_f64(row, "vol_collect")?,
                table.get_f64(row, "vol_transfer")?,
                table.get_f64(row, "vol_compute")?,
                table.get_f64(row, "vol_update")?,
            ])
        };
        let locality = if !table.get(idx, "mean_d")?.is_empty()
            && !table.get(red, "mean_d")?.is_empty()
        {
            Some(LocalityInputs {
                d_base: table.get_f64(idx, "mean_d")?,
                v_base: table.get_f64(idx, "mean_v")?,
                d_rest: table.get_f64(red, "mean_d")?,
                v_rest: table.get_f64(red, "mean_v")?,
                footprint_rest: table.get_f64(red, "group_footprint")?,
                cache_capacity: cfg.cache_capacity as f64,
            })
        } else {
            None
        };
        let wl = table.get_f64(idx, "inter_local")?;
        let wr = table.get_f64(idx, "inter_remote")?;
        let wp = table.get_f64(idx, "inter_periodic")?;
        let total = (wl + wr + wp).max(1.0);
        out.insert(
            key,
            MeasuredPoint {
                leafs: table.get_f64(idx, "leaves")?,
                interactions: table.get_f64(idx, "pairs")?,
                e2: table.get_f64(idx, "avg_e2")?,
                max_e2: table.get_f64(idx, "max_e2")?,
                launches: [
                    table.get_f64(idx, "launches")?,
                    table.get_f64(red, "launches")?,
                ],
                volumes: [vol(idx)?, vol(red)?],
                locality,
                share_local: (wl / total).clamp(1e-9, 1.0),
                level: table.get_f64(idx, "l")? as u32,
            },
        );
    }
    Ok(out)
}

fn predict_row(w: &mut CsvAppender, mode: &str, n: u64, l: u32, t: u64, rf: usize, b: &SpeedupBreakdown) -> Result<()> {
    w.append(&[
        mode.to_string(),
        n.to_string(),
        l.to_string(),
        t.to_string(),
        rf.to_string(),
        fmt_f64(b.x_collect),
        fmt_f64(b.x_transfer),
        fmt_f64(b.x_compute),
        fmt_f64(b.x_update),
        fmt_f64(b.x_p2p),
        fmt_f64(b.x_total),
        b.regime_string(),
    ])
}

/// Model predictions over the sweep. With a measured table, shares are
/// fitted from it and volume/locality/launch ratios come from the
/// measurements; otherwise the built-in share rows and closed forms are
/// used.
pub fn cmd_predict(cfg: &ExperimentConfig, measured: Option<&Path>) -> Result<PathBuf> {
    let out = OutPaths::new(&cfg.out);
    let mut w = CsvAppender::open(&out.predict(), PREDICT_HEADER)?;

    match cfg.mode {
        Mode::Dbim => {
            for &(n, t) in &cfg.sweep()? {
                let level = crate::scenario::dbim_level(n, t)?;
                let b = predict_dbim(&DbimParams {
                    n: n as u64,
                    level,
                    t: t as u64,
                    rf: cfg.rf as u32,
                    share_p2p: cfg.share_p2p,
                    compute_form: cfg.compute_form,
                })
                .map_err(|e| anyhow!(e))?;
                predict_row(&mut w, "dbim", n as u64, level, t as u64, cfg.rf, &b)?;
            }
        }
        Mode::Photons => {
            let (points, shares) = match measured {
                Some(path) => {
                    let table = Table::read(path)?;
                    (Some(measured_points(&table, cfg)?), shares_from_measured(&table)?)
                }
                None => (None, None),
            };
            match points {
                Some(points) => {
                    for ((mode, n, t, rf), p) in points {
                        let params = PhotonsParams {
                            t,
                            leafs: p.leafs,
                            interactions: p.interactions,
                            e2: p.e2.max(1e-9),
                            max_e2: p.max_e2,
                            launches_indexing: p.launches[0],
                            launches_redundant: p.launches[1],
                            share_local: cfg.share_local.unwrap_or(p.share_local),
                            volumes: Some(VolumeRatios {
                                collect: p.volumes[0][0] / p.volumes[1][0],
                                transfer: p.volumes[0][1] / p.volumes[1][1],
                                update: p.volumes[0][3] / p.volumes[1][3],
                            }),
                            locality: p.locality,
                            calibration: cfg.calibration,
                            shares,
                        };
                        let b = predict_photons(&params).map_err(|e| anyhow!(e))?;
                        predict_row(&mut w, &mode, n, p.level, t, rf as usize, &b)?;
                    }
                }
                None => {
                    // static path: build the trees to get the structural
                    // quantities the closed forms need
                    let seed = cfg.require_seed()?;
                    let sweep = cfg.sweep()?;
                    for (i, &(n, t)) in sweep.iter().enumerate() {
                        let sseed = scenario_seed(seed, i as u64);
                        let mut state = ScenarioState::new(cfg, n, t, sseed)?;
                        let scn = state.build(0)?;
                        let (wl, wr, wp) = scn.interaction_weights();
                        let total = (wl + wr + wp).max(1) as f64;
                        let params = PhotonsParams {
                            t: t as u64,
                            leafs: scn.stats.n_leaves as f64,
                            interactions: scn.pairs.len() as f64,
                            e2: scn.stats.avg_e2.max(1e-9),
                            max_e2: scn.stats.max_e2 as f64,
                            launches_indexing: 1.0,
                            launches_redundant: 1.0,
                            share_local: cfg.share_local.unwrap_or(wl as f64 / total).clamp(1e-9, 1.0),
                            volumes: None,
                            locality: None,
                            calibration: cfg.calibration,
                            shares: None,
                        };
                        let b = predict_photons(&params).map_err(|e| anyhow!(e))?;
                        predict_row(&mut w, "photons", n as u64, scn.tree.levels, t as u64, cfg.rf, &b)?;
                    }
                }
            }
        }
    }
    Ok(out.predict())
}

const METRICS: [&str; 5] = ["x_collect", "x_transfer", "x_compute", "x_update", "x_p2p"];

/// Per-key metric values from either schema: a prediction table is read
/// directly; a run table yields measured indexing/redundant time ratios.
fn metric_values(table: &Table) -> Result<BTreeMap<Key, [f64; 5]>> {
    let mut out = BTreeMap::new();
    if table.header.iter().any(|h| h == "x_p2p") {
        for row in &table.rows {
            let key = (
                table.get(row, "mode")?.to_string(),
                table.get_f64(row, "n")? as u64,
                table.get_f64(row, "t")? as u64,
                table.get_f64(row, "rf")? as u64,
            );
            out.insert(
                key,
                [
                    table.get_f64(row, "x_collect")?,
                    table.get_f64(row, "x_transfer")?,
                    table.get_f64(row, "x_compute")?,
                    table.get_f64(row, "x_update")?,
                    table.get_f64(row, "x_p2p")?,
                ],
            );
        }
        return Ok(out);
    }
    if !table.header.iter().any(|h| h == "collect_s") {
        bail!("unrecognized table schema: expected prediction or run columns");
    }
    let mut grouped: BTreeMap<Key, Vec<&Vec<String>>> = BTreeMap::new();
    for row in &table.rows {
        if !table.get(row, "error")?.is_empty() {
            continue;
        }
        let key = (
            table.get(row, "mode")?.to_string(),
            table.get_f64(row, "n")? as u64,
            table.get_f64(row, "t")? as u64,
            table.get_f64(row, "rf")? as u64,
        );
        grouped.entry(key).or_default().push(row);
    }
    for (key, rows) in grouped {
        let find = |layout: &str| -> Result<&Vec<String>> {
            rows.iter()
                .find(|r| table.get(r, "layout").map(|l| l == layout).unwrap_or(false))
                .copied()
                .with_context(|| format!("no {layout} row for point {key:?}"))
        };
        let idx = find("indexing")?;
        let red = find("redundant")?;
        let phase = |row: &Vec<String>, col: &str| table.get_f64(row, col);
        let ratio = |col: &str| -> Result<f64> {
            let a = phase(idx, col)?;
            let b = phase(red, col)?;
            Ok(a / b.max(f64::MIN_POSITIVE))
        };
        let total_idx = phase(idx, "collect_s")?
            + phase(idx, "transfer_s")?
            + phase(idx, "compute_s")?
            + phase(idx, "update_s")?;
        let total_red = phase(red, "collect_s")?
            + phase(red, "transfer_s")?
            + phase(red, "compute_s")?
            + phase(red, "update_s")?;
        out.insert(
            key,
            [
                ratio("collect_s")?,
                ratio("transfer_s")?,
                ratio("compute_s")?,
                ratio("update_s")?,
                total_idx / total_red.max(f64::MIN_POSITIVE),
            ],
        );
    }
    Ok(out)
}

/// Join measured and predicted tables on (mode, n, t, rf), emit the
/// comparison rows, agreement metrics and one chart per metric.
pub fn cmd_compare(cfg: &ExperimentConfig, measured: &Path, predicted: &Path) -> Result<PathBuf> {
    let out = OutPaths::new(&cfg.out);
    let m_table = Table::read(measured)?;
    let p_table = Table::read(predicted)?;
    let m_vals = metric_values(&m_table)?;
    let p_vals = metric_values(&p_table)?;

    let m_keys: Vec<&Key> = m_vals.keys().collect();
    let p_keys: Vec<&Key> = p_vals.keys().collect();
    let missing_p: Vec<&&Key> = m_keys.iter().filter(|k| !p_vals.contains_key(**k)).collect();
    let missing_m: Vec<&&Key> = p_keys.iter().filter(|k| !m_vals.contains_key(**k)).collect();
    if !missing_p.is_empty() || !missing_m.is_empty() {
        bail!(
            "sweep keys do not match.\n  measured-only: {missing_p:?}\n  predicted-only: {missing_m:?}"
        );
    }

    let mut w = CsvAppender::open(&out.compare(), COMPARE_HEADER)?;
    let mut levels: BTreeMap<Key, String> = BTreeMap::new();
    for row in &p_table.rows {
        if let (Ok(mode), Ok(n), Ok(t), Ok(rf), Ok(l)) = (
            p_table.get(row, "mode"),
            p_table.get_f64(row, "n"),
            p_table.get_f64(row, "t"),
            p_table.get_f64(row, "rf"),
            p_table.get(row, "l"),
        ) {
            levels.insert((mode.to_string(), n as u64, t as u64, rf as u64), l.to_string());
        }
    }
    for (key, p) in &p_vals {
        let m = &m_vals[key];
        for (mi, metric) in METRICS.iter().enumerate() {
            w.append(&[
                key.0.clone(),
                key.1.to_string(),
                levels.get(key).cloned().unwrap_or_default(),
                key.2.to_string(),
                key.3.to_string(),
                metric.to_string(),
                fmt_f64(p[mi]),
                fmt_f64(m[mi]),
            ])?;
        }
    }

    let mut mw = CsvAppender::open(&out.compare_metrics(), COMPARE_METRICS_HEADER)?;
    for (mi, metric) in METRICS.iter().enumerate() {
        let pred: Vec<f64> = p_vals.values().map(|v| v[mi]).collect();
        let meas: Vec<f64> = m_vals.values().map(|v| v[mi]).collect();
        // identical series are a perfect match; constant (zero-variance)
        // series leave the correlations undefined and their fields empty
        let (pearson, spearman, err) = if pred == meas {
            ("1.0".to_string(), "1.0".to_string(), "0.0".to_string())
        } else {
            let rel = pred
                .iter()
                .zip(meas.iter())
                .map(|(p, m)| (p - m).abs() / m.abs())
                .sum::<f64>()
                / pred.len().max(1) as f64;
            match trend_metrics(&pred, &meas) {
                Ok(tm) => (
                    fmt_f64(tm.pearson),
                    fmt_f64(tm.spearman),
                    fmt_f64(tm.mean_abs_rel_err),
                ),
                Err(p2plab_core::Error::ZeroVariance) => {
                    (String::new(), String::new(), fmt_f64(rel))
                }
                Err(e) => return Err(anyhow!(e)),
            }
        };
        mw.append(&[metric.to_string(), pearson, spearman, err])?;

        let series = vec![
            Series {
                label: "predicted",
                points: p_vals.iter().map(|(k, v)| (k.2 as f64, v[mi])).collect(),
            },
            Series {
                label: "measured",
                points: m_vals.iter().map(|(k, v)| (k.2 as f64, v[mi])).collect(),
            },
        ];
        line_chart(
            &out.compare_plot(metric),
            &format!("{metric}: predicted vs measured"),
            "t",
            "speedup (indexing / redundant)",
            &series,
            true,
        )?;
    }
    Ok(out.compare())
}

/// Fit share(t) = a + b ln t per runtime component from the indexing rows
/// of a measured table.
pub fn cmd_fit_shares(cfg: &ExperimentConfig, measured: &Path) -> Result<PathBuf> {
    let out = OutPaths::new(&cfg.out);
    let table = Table::read(measured)?;
    let shares = shares_from_measured(&table)?
        .ok_or_else(|| anyhow!("need at least two distinct t values in {}", measured.display()))?;
    let mut points: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &table.rows {
        if table.get(row, "layout")? != "indexing" || !table.get(row, "error")?.is_empty() {
            continue;
        }
        let t = table.get_f64(row, "t")?;
        let phases = [
            ("collect", table.get_f64(row, "collect_s")?),
            ("transfer", table.get_f64(row, "transfer_s")?),
            ("compute", table.get_f64(row, "compute_s")?),
            ("update", table.get_f64(row, "update_s")?),
        ];
        let total: f64 = phases.iter().map(|p| p.1).sum();
        for (name, v) in phases {
            points.entry(name).or_default().push((t, v / total));
        }
    }
    let mut w = CsvAppender::open(&out.fit(), FIT_HEADER)?;
    for f in shares {
        let name = f.component.to_string();
        let fit = fit_log_share(&points[name.as_str()]).map_err(|e| anyhow!(e))?;
        w.append(&[name, fmt_f64(fit.a), fmt_f64(fit.b), fmt_f64(fit.rms)])?;
    }
    Ok(out.fit())
}

/// Built-in share rows, exposed for reports.
pub fn default_share_table(profile: Profile) -> Vec<ShareFunction> {
    let comps: &[Component] = match profile {
        Profile::Dbim => &[Component::Transfer],
        Profile::Photons => &[
            Component::Collect,
            Component::Transfer,
            Component::Compute,
            Component::Update,
            Component::NearField,
        ],
    };
    comps
        .iter()
        .map(|&c| default_share_function(profile, c).expect("built-in rows exist"))
        .collect()
}
