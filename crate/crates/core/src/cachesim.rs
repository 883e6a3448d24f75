//! Trace-driven cache model: per-thread dispersion and volume metrics,
//! a set-associative LRU simulator fed by a lockstep interleaving of the
//! logical threads, and the piecewise locality speedup built from the
//! indexing/redundant ratios.

use crate::error::{Error, Result};

/// Classifies an access for the optional index-read filtering of reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessKind {
    /// Particle tuples, pattern entries, output slots.
    Data,
    /// Neighbor lists, range tables, record headers.
    Index,
}

/// One memory access of a logical thread. Addresses are offsets into the
/// layout's own address space, which is capped at 4 GiB per instance.
#[derive(Clone, Copy, Debug)]
pub struct Access {
    pub addr: u32,
    pub len: u8,
    pub kind: AccessKind,
}

/// Per-logical-thread ordered address streams.
#[derive(Clone, Debug, Default)]
pub struct MemoryTrace {
    threads: Vec<Vec<Access>>,
}

impl MemoryTrace {
    pub fn new(thread_count: usize) -> Self {
        MemoryTrace {
            threads: vec![Vec::new(); thread_count],
        }
    }

    #[inline]
    pub fn record(&mut self, thread: usize, addr: u64, len: u8, kind: AccessKind) {
        assert!(
            addr + len as u64 <= u32::MAX as u64,
            "layout address space exceeds the 4 GiB trace limit"
        );
        self.threads[thread].push(Access {
            addr: addr as u32,
            len,
            kind,
        });
    }

    pub fn thread_count(&self) -> usize {
        self.threads.len()
    }

    pub fn thread(&self, i: usize) -> &[Access] {
        &self.threads[i]
    }

    pub fn total_accesses(&self) -> usize {
        self.threads.iter().map(Vec::len).sum()
    }

    /// Copy of the trace with index reads removed, keeping thread ids.
    pub fn data_only(&self) -> MemoryTrace {
        MemoryTrace {
            threads: self
                .threads
                .iter()
                .map(|t| {
                    t.iter()
                        .copied()
                        .filter(|a| a.kind == AccessKind::Data)
                        .collect()
                })
                .collect(),
        }
    }
}

/// Single-level cache description. `line` must be a power of two and the
/// line count must divide evenly into `ways`-wide sets. `group` is the
/// lockstep width: that many consecutive threads are interleaved
/// round-robin, one access per thread per turn, before the next group runs.
#[derive(Clone, Copy, Debug)]
pub struct CacheConfig {
    pub capacity: u64,
    pub line: u32,
    pub ways: u32,
    pub group: u32,
    unbounded: bool,
}

impl CacheConfig {
    pub fn new(capacity: u64, line: u32, ways: u32, group: u32) -> Result<Self> {
        if !line.is_power_of_two() {
            return Err(Error::InvalidCacheConfig(format!(
                "line size {line} is not a power of two"
            )));
        }
        if capacity == 0 || capacity % line as u64 != 0 {
            return Err(Error::InvalidCacheConfig(format!(
                "capacity {capacity} is not a multiple of the line size {line}"
            )));
        }
        let lines = capacity / line as u64;
        if ways == 0 || lines % ways as u64 != 0 {
            return Err(Error::InvalidCacheConfig(format!(
                "{lines} lines do not split into sets of {ways} ways"
            )));
        }
        if group == 0 {
            return Err(Error::InvalidCacheConfig("group size must be >= 1".into()));
        }
        Ok(CacheConfig {
            capacity,
            line,
            ways,
            group,
            unbounded: false,
        })
    }

    /// Infinite capacity: every line stays resident, so misses are exactly
    /// the cold misses (number of distinct lines touched).
    pub fn unbounded(line: u32, group: u32) -> Result<Self> {
        let mut c = CacheConfig::new(line as u64 * 16, line, 1, group)?;
        c.unbounded = true;
        c.capacity = u64::MAX;
        Ok(c)
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn sets(&self) -> u64 {
        self.capacity / self.line as u64 / self.ways as u64
    }
}

impl Default for CacheConfig {
    /// Generic last-level-like cache: 2 MiB, 128-byte lines, 16-way LRU,
    /// warp-like lockstep width of 32 threads.
    fn default() -> Self {
        CacheConfig::new(2 * 1024 * 1024, 128, 16, 32).unwrap()
    }
}

fn lines_of(access: &Access, line: u32) -> std::ops::RangeInclusive<u64> {
    let first = access.addr as u64 / line as u64;
    let last = (access.addr as u64 + access.len.max(1) as u64 - 1) / line as u64;
    first..=last
}

/// Dispersion per thread: map accesses to line ids and count the maximal
/// runs of consecutive integers among the distinct ids. Depends only on
/// the distinct-line set, not on access order.
pub fn dispersion(trace: &MemoryTrace, line: u32) -> Vec<u64> {
    assert!(line.is_power_of_two(), "line size must be a power of two");
    (0..trace.thread_count())
        .map(|t| {
            let mut ids: Vec<u64> = trace
                .thread(t)
                .iter()
                .flat_map(|a| lines_of(a, line))
                .collect();
            ids.sort_unstable();
            ids.dedup();
            let mut runs = 0u64;
            let mut prev = None;
            for id in ids {
                if prev != Some(id.wrapping_sub(1)) {
                    runs += 1;
                }
                prev = Some(id);
            }
            runs
        })
        .collect()
}

fn interval_union_bytes(mut intervals: Vec<(u64, u64)>) -> u64 {
    intervals.sort_unstable();
    let mut total = 0u64;
    let mut cur: Option<(u64, u64)> = None;
    for (lo, hi) in intervals {
        match cur {
            Some((clo, chi)) if lo <= chi => cur = Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                total += chi - clo;
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
    }
    if let Some((clo, chi)) = cur {
        total += chi - clo;
    }
    total
}

/// Volume per thread: distinct bytes touched (union of access intervals).
pub fn volume(trace: &MemoryTrace) -> Vec<u64> {
    (0..trace.thread_count())
        .map(|t| {
            interval_union_bytes(
                trace
                    .thread(t)
                    .iter()
                    .map(|a| (a.addr as u64, a.addr as u64 + a.len.max(1) as u64))
                    .collect(),
            )
        })
        .collect()
}

/// Distinct bytes touched by each group of `group` consecutive threads.
pub fn group_footprints(trace: &MemoryTrace, group: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < trace.thread_count() {
        let hi = (t + group as usize).min(trace.thread_count());
        let intervals = (t..hi)
            .flat_map(|i| {
                trace
                    .thread(i)
                    .iter()
                    .map(|a| (a.addr as u64, a.addr as u64 + a.len.max(1) as u64))
            })
            .collect();
        out.push(interval_union_bytes(intervals));
        t = hi;
    }
    out
}

struct LruSets {
    // (tag, stamp) per way; tag u64::MAX marks an empty way
    ways: Vec<(u64, u64)>,
    n_sets: u64,
    assoc: usize,
    clock: u64,
}

impl LruSets {
    fn new(n_sets: u64, assoc: usize) -> Self {
        LruSets {
            ways: vec![(u64::MAX, 0); n_sets as usize * assoc],
            n_sets,
            assoc,
            clock: 0,
        }
    }

    /// Returns true on hit.
    fn touch(&mut self, line_id: u64) -> bool {
        self.clock += 1;
        let set = (line_id % self.n_sets) as usize;
        let ways = &mut self.ways[set * self.assoc..(set + 1) * self.assoc];
        let mut victim = 0;
        let mut oldest = u64::MAX;
        for (i, w) in ways.iter_mut().enumerate() {
            if w.0 == line_id {
                w.1 = self.clock;
                return true;
            }
            if w.1 < oldest {
                oldest = w.1;
                victim = i;
            }
        }
        ways[victim] = (line_id, self.clock);
        false
    }
}

/// Replay the trace through a set-associative LRU cache. Threads are
/// partitioned into consecutive groups of `config.group`; within a group
/// the threads advance in lockstep, one access per thread per round-robin
/// turn, and groups run to completion in order. Counting is line-granular:
/// an access spanning k lines counts as k hits/misses.
pub fn simulate_cache(trace: &MemoryTrace, config: &CacheConfig) -> (u64, u64) {
    let mut misses = 0u64;
    let mut hits = 0u64;

    let mut seen = std::collections::HashSet::new();
    let mut lru = if config.unbounded {
        None
    } else {
        Some(LruSets::new(config.sets(), config.ways as usize))
    };

    let mut touch = |line_id: u64| {
        let hit = match &mut lru {
            Some(l) => l.touch(line_id),
            None => !seen.insert(line_id),
        };
        if hit {
            hits += 1;
        } else {
            misses += 1;
        }
    };

    let n = trace.thread_count();
    let mut t0 = 0;
    while t0 < n {
        let t1 = (t0 + config.group as usize).min(n);
        let mut cursors = vec![0usize; t1 - t0];
        let mut live = t1 - t0;
        while live > 0 {
            live = 0;
            for (i, cur) in cursors.iter_mut().enumerate() {
                let stream = trace.thread(t0 + i);
                if *cur < stream.len() {
                    for line in lines_of(&stream[*cur], config.line) {
                        touch(line);
                    }
                    *cur += 1;
                    if *cur < stream.len() {
                        live += 1;
                    }
                }
            }
        }
        t0 = t1;
    }
    (misses, hits)
}

/// Which branch of the piecewise locality rule applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalityRegime {
    /// Restructured data fits in cache: speedup follows D' * V'.
    FitsCache,
    /// Restructured data exceeds cache: speedup follows V' / D'.
    ExceedsCache,
}

impl std::fmt::Display for LocalityRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LocalityRegime::FitsCache => write!(f, "fits-cache"),
            LocalityRegime::ExceedsCache => write!(f, "exceeds-cache"),
        }
    }
}

/// Piecewise locality speedup. D' and V' are the indexing-to-redundant
/// ratios; the regime switches on whether the redundant volume fits the
/// cache capacity. The proportionality constant is fixed at 1.
pub fn locality_speedup(
    d_base: f64,
    v_base: f64,
    d_rest: f64,
    v_rest: f64,
    capacity: f64,
) -> Result<(f64, LocalityRegime)> {
    for (name, v) in [
        ("d_base", d_base),
        ("v_base", v_base),
        ("d_rest", d_rest),
        ("v_rest", v_rest),
        ("capacity", capacity),
    ] {
        if !(v > 0.0) {
            return Err(Error::NonPositive { name, value: v });
        }
    }
    let d_ratio = d_base / d_rest;
    let v_ratio = v_base / v_rest;
    Ok(if v_rest <= capacity {
        (d_ratio * v_ratio, LocalityRegime::FitsCache)
    } else {
        (v_ratio / d_ratio, LocalityRegime::ExceedsCache)
    })
}

/// Locality metrics of one trace under one cache configuration.
#[derive(Clone, Debug)]
pub struct LocalityReport {
    pub per_thread_d: Vec<u64>,
    pub per_thread_v: Vec<u64>,
    pub mean_d: f64,
    pub max_d: u64,
    pub mean_v: f64,
    pub max_v: u64,
    pub misses: u64,
    pub hits: u64,
    pub miss_rate: f64,
    /// Largest distinct-byte footprint of any resident thread group.
    pub group_footprint_max: u64,
}

pub fn analyze(trace: &MemoryTrace, config: &CacheConfig) -> LocalityReport {
    let per_thread_d = dispersion(trace, config.line);
    let per_thread_v = volume(trace);
    let (misses, hits) = simulate_cache(trace, config);
    let nonzero = per_thread_d.iter().filter(|&&d| d > 0).count().max(1) as f64;
    let mean_d = per_thread_d.iter().sum::<u64>() as f64 / nonzero;
    let mean_v = per_thread_v.iter().sum::<u64>() as f64 / nonzero;
    let total = misses + hits;
    LocalityReport {
        mean_d,
        max_d: per_thread_d.iter().copied().max().unwrap_or(0),
        mean_v,
        max_v: per_thread_v.iter().copied().max().unwrap_or(0),
        misses,
        hits,
        miss_rate: if total == 0 {
            0.0
        } else {
            misses as f64 / total as f64
        },
        group_footprint_max: group_footprints(trace, config.group)
            .into_iter()
            .max()
            .unwrap_or(0),
        per_thread_d,
        per_thread_v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_of_lines(lines: &[u64]) -> MemoryTrace {
        let mut t = MemoryTrace::new(1);
        for &l in lines {
            t.record(0, l * 128, 8, AccessKind::Data);
        }
        t
    }

    #[test]
    fn dispersion_counts_runs() {
        assert_eq!(dispersion(&trace_of_lines(&[10, 11, 12]), 128), vec![1]);
        assert_eq!(dispersion(&trace_of_lines(&[10, 12, 14]), 128), vec![3]);
        assert_eq!(dispersion(&MemoryTrace::new(1), 128), vec![0]);
    }

    #[test]
    fn dispersion_ignores_duplicates_and_order() {
        assert_eq!(
            dispersion(&trace_of_lines(&[14, 10, 12, 10, 14]), 128),
            vec![3]
        );
    }

    #[test]
    fn volume_is_interval_union() {
        let mut t = MemoryTrace::new(3);
        t.record(0, 0, 8, AccessKind::Data);
        t.record(1, 0, 8, AccessKind::Data);
        t.record(1, 0, 8, AccessKind::Data);
        t.record(2, 0, 8, AccessKind::Data);
        t.record(2, 4, 8, AccessKind::Data);
        assert_eq!(volume(&t), vec![8, 8, 12]);
    }

    #[test]
    fn lru_hand_cases() {
        // capacity 2 lines, fully associative
        let cfg = CacheConfig::new(256, 128, 2, 1).unwrap();
        // A, A -> 1 miss, 1 hit
        assert_eq!(simulate_cache(&trace_of_lines(&[5, 5]), &cfg), (1, 1));
        // A, B, C, A -> 4 misses (A evicted before reuse)
        assert_eq!(
            simulate_cache(&trace_of_lines(&[1, 2, 3, 1]), &cfg),
            (4, 0)
        );
        // A, B, A -> 2 misses, 1 hit
        assert_eq!(simulate_cache(&trace_of_lines(&[1, 2, 1]), &cfg), (2, 1));
    }

    #[test]
    fn unbounded_counts_cold_misses_only() {
        let cfg = CacheConfig::unbounded(128, 1).unwrap();
        let t = trace_of_lines(&[1, 2, 3, 1, 2, 3, 9]);
        assert_eq!(simulate_cache(&t, &cfg), (4, 3));
    }

    #[test]
    fn access_spanning_lines_counts_each_line() {
        let mut t = MemoryTrace::new(1);
        t.record(0, 120, 16, AccessKind::Data); // crosses the 128-byte boundary
        let cfg = CacheConfig::unbounded(128, 1).unwrap();
        assert_eq!(simulate_cache(&t, &cfg), (2, 0));
        assert_eq!(dispersion(&t, 128), vec![1]);
        assert_eq!(volume(&t), vec![16]);
    }

    #[test]
    fn group_interleave_is_round_robin() {
        // Two threads in one group, lockstep: t0 misses a line, t1 hits it
        // immediately even with a tiny cache.
        let mut t = MemoryTrace::new(2);
        for l in [1u64, 2, 3, 4] {
            t.record(0, l * 128, 8, AccessKind::Data);
            t.record(1, l * 128, 8, AccessKind::Data);
        }
        let tiny = CacheConfig::new(256, 128, 2, 2).unwrap();
        assert_eq!(simulate_cache(&t, &tiny), (4, 4));
        // With groups of 1 the second thread re-misses everything.
        let seq = CacheConfig::new(256, 128, 2, 1).unwrap();
        assert_eq!(simulate_cache(&t, &seq), (8, 0));
    }

    #[test]
    fn locality_speedup_regimes() {
        let (x, r) = locality_speedup(4.0, 100.0, 1.0, 100.0, 1000.0).unwrap();
        assert_eq!(r, LocalityRegime::FitsCache);
        assert!((x - 4.0).abs() < 1e-15);

        let (x, r) = locality_speedup(1.0, 1.0, 1.0, 1.0, 1000.0).unwrap();
        assert_eq!(r, LocalityRegime::FitsCache);
        assert!((x - 1.0).abs() < 1e-15);

        // D' = 2, V' = 0.5, redundant volume exceeds cache -> V'/D' = 0.25
        let (x, r) = locality_speedup(2.0, 1000.0, 1.0, 2000.0, 1500.0).unwrap();
        assert_eq!(r, LocalityRegime::ExceedsCache);
        assert!((x - 0.25).abs() < 1e-15);

        assert!(locality_speedup(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(locality_speedup(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn identity_point_matches_in_both_regimes() {
        let (a, _) = locality_speedup(3.0, 5.0, 3.0, 5.0, 10.0).unwrap();
        let (b, _) = locality_speedup(3.0, 5.0, 3.0, 5.0, 1.0).unwrap();
        assert_eq!(a, 1.0);
        assert_eq!(b, 1.0);
    }

    #[test]
    fn analyze_reports_consistent_totals() {
        let mut t = MemoryTrace::new(2);
        t.record(0, 0, 8, AccessKind::Data);
        t.record(0, 256, 8, AccessKind::Index);
        t.record(1, 1024, 8, AccessKind::Data);
        let cfg = CacheConfig::new(1024, 128, 2, 2).unwrap();
        let rep = analyze(&t, &cfg);
        assert_eq!(rep.misses + rep.hits, 3);
        assert_eq!(rep.per_thread_d, vec![2, 1]);
        assert_eq!(rep.per_thread_v, vec![16, 8]);
        assert_eq!(rep.group_footprint_max, 24);
        let data = analyze(&t.data_only(), &cfg);
        assert_eq!(data.per_thread_d, vec![1, 1]);
    }
}
