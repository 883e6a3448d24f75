//! CSV emission and ingestion with stable schemas. A header check
//! precedes every append; rows are written and flushed one at a time.

use anyhow::{bail, Context, Result};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Column set of the run command, one row per (sweep point, layout).
/// Timing columns end in `_s`; everything else is deterministic for a
/// fixed seed and config.
pub const RUN_HEADER: &str = "mode,seed,scenario_seed,n,l,t,rf,partitions,batch_size,periodic,generator,layout,\
leaves,pairs,pairs_local,pairs_remote,pairs_periodic,inter_local,inter_remote,inter_periodic,\
avg_e2,max_e2,depth_capped,launches,\
collect_s,transfer_s,compute_s,update_s,\
vol_collect,vol_transfer,vol_compute,vol_update,\
mean_d,max_d,mean_v,max_v,misses,hits,miss_rate,group_footprint,\
mean_d_data,max_d_data,mean_v_data,max_v_data,misses_data,hits_data,miss_rate_data,\
regime,force_checksum,error";

/// Prediction columns.
pub const PREDICT_HEADER: &str = "mode,n,l,t,rf,x_collect,x_transfer,x_compute,x_update,x_p2p,x_total,regime";

/// Joined comparison rows.
pub const COMPARE_HEADER: &str = "mode,n,l,t,rf,metric,predicted,measured";

/// Per-metric agreement summary.
pub const COMPARE_METRICS_HEADER: &str = "metric,pearson,spearman,mean_abs_rel_err";

/// Fitted log-share coefficients.
pub const FIT_HEADER: &str = "component,a,b,rms";

/// Tree statistics rows.
pub const TREE_STATS_HEADER: &str =
    "mode,seed,scenario_seed,n,t,leaves,pairs,avg_e2,max_e2,depth_capped";

/// Volume rows (phase, layout, bytes).
pub const VOLUME_HEADER: &str = "phase,layout,bytes";

/// Long-format phase timing rows.
pub const PHASES_HEADER: &str = "mode,layout,N,L,t,rf,phase,seconds,launches,bytes";

/// Long-format locality rows; `layout` carries a `_data` suffix for the
/// index-read-filtered view.
pub const LOCALITY_HEADER: &str = "layout,mean_D,max_D,mean_V,max_V,misses,hits,miss_rate";

/// Append-only CSV writer: creates the file with the header, or verifies
/// the existing header matches before appending.
pub struct CsvAppender {
    file: std::fs::File,
}

impl CsvAppender {
    pub fn open(path: &Path, header: &str) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let exists = path.exists();
        if exists {
            let first = BufReader::new(
                std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?,
            )
            .lines()
            .next()
            .transpose()?
            .unwrap_or_default();
            if first != header {
                bail!(
                    "{} exists with a different header; refusing to append",
                    path.display()
                );
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        if !exists {
            writeln!(file, "{header}")?;
            file.flush()?;
        }
        Ok(CsvAppender { file })
    }

    /// Write one full row and flush, so rows land atomically in order.
    pub fn append(&mut self, fields: &[String]) -> Result<()> {
        let row = fields
            .iter()
            .map(|f| escape(f))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(self.file, "{row}")?;
        self.file.flush()?;
        Ok(())
    }
}

fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// A parsed CSV table with named column access.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_path(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let header = rdr
            .headers()?
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(rec.iter().map(|s| s.to_string()).collect());
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("missing column {name:?}"))
    }

    pub fn get<'a>(&'a self, row: &'a [String], name: &str) -> Result<&'a str> {
        Ok(row[self.column(name)?].as_str())
    }

    pub fn get_f64(&self, row: &[String], name: &str) -> Result<f64> {
        let s = self.get(row, name)?;
        s.parse::<f64>()
            .with_context(|| format!("column {name:?}: bad float {s:?}"))
    }
}

/// Format an f64 with full round-trip precision, deterministically.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
