use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{create_file, sig9};
use crate::approx::ErrorTrace;
use crate::backtest::{BacktestReport, SweepRun};
use crate::convert::Normalization;
use crate::error::{Error, Result};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const BINS_CSV: &str = "bins.csv";
pub const COMPARISON_CSV: &str = "comparison.csv";

/// Human-readable summary table.
pub fn render_report(r: &BacktestReport) -> String {
    let mut s = String::new();
    let norm = match r.normalization {
        Normalization::Off => "off".to_string(),
        Normalization::Corpus => "corpus".to_string(),
        Normalization::Fixed(b) => format!("fixed [{}, {}]", sig9(b.low), sig9(b.high)),
    };
    let _ = writeln!(s, "strategy       {}", r.strategy);
    let _ = writeln!(s, "nu             {}", sig9(r.nu));
    let _ = writeln!(s, "kappa          {}", sig9(r.kappa));
    let _ = writeln!(s, "epsilon        {}", sig9(r.epsilon));
    let _ = writeln!(s, "gift X         {}", sig9(r.gift));
    let _ = writeln!(s, "normalization  {norm}");
    if let Some(b) = r.bounds {
        let _ = writeln!(s, "bounds         [{}, {}]", sig9(b.low), sig9(b.high));
    }
    let _ = writeln!(s, "matches        {}", r.matches);
    let _ = writeln!(
        s,
        "accuracy       more {} ({}/{})  baseline {} ({}/{})",
        sig9(r.more_accuracy),
        r.more_correct,
        r.matches,
        sig9(r.baseline_accuracy),
        r.baseline_correct,
        r.matches
    );
    if !r.skipped.is_empty() {
        let _ = writeln!(s, "skipped        {}", r.skipped.len());
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>3}  {:<10}  {:>6}  {:>6}  {:>6}  {:>6}  {:>8}  {:>8}  {:>8}",
        "k", "interval", "n", "home", "away", "draw", "F_H", "F_A", "F_D"
    );
    for b in &r.bins {
        let interval = format!(
            "[{:.1}, {:.1}{}",
            b.lower,
            b.upper,
            if b.k == 10 { "]" } else { ")" }
        );
        let _ = writeln!(
            s,
            "{:>3}  {:<10}  {:>6}  {:>6}  {:>6}  {:>6}  {:>8.4}  {:>8.4}  {:>8.4}",
            b.k,
            interval,
            b.counts.total,
            b.counts.home_wins,
            b.counts.away_wins,
            b.counts.draws,
            b.f_home,
            b.f_away,
            b.f_draw
        );
    }
    s
}

fn bins_csv(r: &BacktestReport) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "k",
        "lower",
        "upper",
        "n",
        "home_wins",
        "away_wins",
        "draws",
        "f_home",
        "f_away",
        "f_draw",
    ])?;
    for b in &r.bins {
        wtr.write_record([
            b.k.to_string(),
            sig9(b.lower),
            sig9(b.upper),
            b.counts.total.to_string(),
            b.counts.home_wins.to_string(),
            b.counts.away_wins.to_string(),
            b.counts.draws.to_string(),
            sig9(b.f_home),
            sig9(b.f_away),
            sig9(b.f_draw),
        ])?;
    }
    wtr.into_inner()
        .map_err(|e| Error::io("<buffer>", e.into_error()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    create_file(path)?
        .write_all(bytes)
        .map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `report.txt` and `bins.csv` into `dir`.
pub fn write_backtest(dir: &Path, report: &BacktestReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    write_bytes(&dir.join(REPORT_JSON), json.as_bytes())?;
    write_bytes(&dir.join(REPORT_TXT), render_report(report).as_bytes())?;
    write_bytes(&dir.join(BINS_CSV), &bins_csv(report)?)
}

/// One subdirectory per successful run plus a combined `comparison.csv`.
///
/// Failed runs are logged and left out; their count is returned.
pub fn write_sweep(dir: &Path, runs: &[SweepRun]) -> Result<usize> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "strategy",
        "nu",
        "k",
        "n",
        "f_home",
        "f_away",
        "more_accuracy",
        "baseline_accuracy",
    ])?;
    let mut failed = 0;
    for run in runs {
        let report = match &run.result {
            Ok(r) => r,
            Err(e) => {
                log::error!("{} nu={}: {e}", run.strategy, run.nu);
                failed += 1;
                continue;
            }
        };
        write_backtest(
            &dir.join(format!("{}_nu{}", run.strategy, sig9(run.nu))),
            report,
        )?;
        for b in &report.bins {
            wtr.write_record([
                run.strategy.to_string(),
                sig9(run.nu),
                b.k.to_string(),
                b.counts.total.to_string(),
                sig9(b.f_home),
                sig9(b.f_away),
                sig9(report.more_accuracy),
                sig9(report.baseline_accuracy),
            ])?;
        }
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::io("<buffer>", e.into_error()))?;
    write_bytes(&dir.join(COMPARISON_CSV), &bytes)?;
    Ok(failed)
}

/// `index,mean_emd,min_emd,max_emd` rows.
pub fn write_trace<W: Write>(writer: W, trace: &ErrorTrace) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["index", "mean_emd", "min_emd", "max_emd"])?;
    for p in &trace.points {
        wtr.write_record([
            p.index.to_string(),
            sig9(p.mean_emd),
            sig9(p.min_emd),
            sig9(p.max_emd),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
