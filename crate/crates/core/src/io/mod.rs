//! File formats: match and opinion CSVs, the synthetic corpus generator,
//! ledger snapshots and report / plot-data writers.

mod matches;
mod opinions;
mod report;
mod snapshot;
mod synth;

use std::path::Path;

use chrono::NaiveDate;

pub use matches::{parse_matches, read_matches, write_matches, CorpusSummary, MatchCorpus};
pub use opinions::{parse_opinions, read_opinions, write_opinions, OpinionCorpus};
pub use report::{
    render_report, write_backtest, write_sweep, write_trace, BINS_CSV, COMPARISON_CSV, REPORT_JSON,
    REPORT_TXT,
};
pub use snapshot::{load_snapshot, save_snapshot, snapshot_from_str, snapshot_to_string};
pub use synth::{gen_synthetic, SyntheticCorpus};

use crate::engine::Timestamp;
use crate::error::{Error, Result};

/// A row that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: u64,
    pub message: String,
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses an engine time given either as an integer or as `yyyy-mm-dd`.
pub fn parse_time(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(t) = s.parse::<i64>() {
        return (t >= 0).then_some(Timestamp(t));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .map(Timestamp::from_date)
}

pub(crate) fn create_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn open_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}
