use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use csv::{ReaderBuilder, StringRecord, Trim};

use super::{open_file, Rejection};
use crate::convert::MatchResult;
use crate::engine::Timestamp;
use crate::error::{Error, Result};
use crate::predict::Outcome;

const COLUMNS: [&str; 6] = ["date", "season", "home", "away", "home_goals", "away_goals"];

/// Abort when more than this fraction of rows is rejected.
const MAX_REJECT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusSummary {
    pub total: usize,
    pub home_wins: usize,
    pub away_wins: usize,
    pub draws: usize,
}

impl CorpusSummary {
    pub fn of(matches: &[MatchResult]) -> Self {
        let mut s = CorpusSummary {
            total: matches.len(),
            ..Default::default()
        };
        for m in matches {
            match m.outcome() {
                Outcome::HomeWin => s.home_wins += 1,
                Outcome::AwayWin => s.away_wins += 1,
                Outcome::Draw => s.draws += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct MatchCorpus {
    /// Sorted ascending by date, stable within a date.
    pub matches: Vec<MatchResult>,
    pub rejected: Vec<Rejection>,
    pub summary: CorpusSummary,
}

pub fn parse_matches(path: &Path) -> Result<MatchCorpus> {
    read_matches(open_file(path)?, path)
}

/// Reads the match CSV format. `source` only labels diagnostics.
pub fn read_matches<R: Read>(reader: R, source: &Path) -> Result<MatchCorpus> {
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                path: source.to_path_buf(),
                line: 1,
                message: format!("missing column {name:?}"),
            })
    };
    let cols: Vec<usize> = COLUMNS.iter().map(|c| index(c)).collect::<Result<_>>()?;

    let mut matches = Vec::new();
    let mut rejected = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_row(&record, &cols) {
            Ok(m) => matches.push(m),
            Err(message) => {
                log::warn!("{}:{line}: {message}", source.display());
                rejected.push(Rejection { line, message });
            }
        }
    }

    let total = matches.len() + rejected.len();
    if !rejected.is_empty() && rejected.len() as f64 > MAX_REJECT_FRACTION * total as f64 {
        return Err(Error::TooManyRejects {
            path: source.to_path_buf(),
            rejected: rejected.len(),
            total,
        });
    }

    matches.sort_by_key(|m| m.date);
    let summary = CorpusSummary::of(&matches);
    Ok(MatchCorpus {
        matches,
        rejected,
        summary,
    })
}

fn parse_row(record: &StringRecord, cols: &[usize]) -> std::result::Result<MatchResult, String> {
    let field = |i: usize| {
        record
            .get(cols[i])
            .ok_or_else(|| format!("missing {}", COLUMNS[i]))
    };
    let date = NaiveDate::parse_from_str(field(0)?, "%Y-%m-%d")
        .map_err(|e| format!("bad date {:?}: {e}", field(0).unwrap_or_default()))?;
    let season = field(1)?;
    let home = field(2)?;
    let away = field(3)?;
    if home.is_empty() || away.is_empty() {
        return Err("empty team name".to_string());
    }
    let goals = |i: usize| -> std::result::Result<u32, String> {
        let raw = field(i)?;
        raw.parse::<u32>()
            .map_err(|_| format!("{} must be a non-negative integer, got {raw:?}", COLUMNS[i]))
    };
    MatchResult::new(
        Timestamp::from_date(date),
        season,
        home,
        away,
        goals(4)?,
        goals(5)?,
    )
    .map_err(|e| e.to_string())
}

/// Writes matches in the CSV format read by [`parse_matches`].
///
/// Each `comments` entry becomes a leading `# ` line.
pub fn write_matches<W: Write>(
    writer: W,
    matches: &[MatchResult],
    comments: &[String],
) -> Result<()> {
    let mut writer = writer;
    for c in comments {
        writeln!(writer, "# {c}").map_err(|e| Error::io("<output>", e))?;
    }
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COLUMNS)?;
    for m in matches {
        let date = m
            .date
            .to_date()
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_else(|| m.date.to_string());
        wtr.write_record([
            date,
            m.season.clone(),
            m.home.to_string(),
            m.away.to_string(),
            m.home_goals.to_string(),
            m.away_goals.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
