use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{open_file, parse_time, Rejection};
use crate::dist::{Distribution, EvaluationSpace};
use crate::engine::Opinion;
use crate::error::{Error, Result};

const FIXED: [&str; 3] = ["time", "rater", "ratee"];

#[derive(Debug, Clone)]
pub struct OpinionCorpus {
    /// Declared by the header columns after `time,rater,ratee`.
    pub space: Arc<EvaluationSpace>,
    /// Sorted ascending by time, stable within a time.
    pub opinions: Vec<Opinion>,
    pub rejected: Vec<Rejection>,
}

pub fn parse_opinions(path: &Path) -> Result<OpinionCorpus> {
    read_opinions(open_file(path)?, path)
}

/// Reads `time,rater,ratee,<term>,…` rows. A completely empty input yields an
/// empty corpus over the binary space.
pub fn read_opinions<R: Read>(reader: R, source: &Path) -> Result<OpinionCorpus> {
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(OpinionCorpus {
            space: EvaluationSpace::binary(),
            opinions: Vec::new(),
            rejected: Vec::new(),
        });
    }
    let header_error = |message: String| Error::Parse {
        path: source.to_path_buf(),
        line: 1,
        message,
    };
    for (i, name) in FIXED.iter().enumerate() {
        if !headers.get(i).is_some_and(|h| h.eq_ignore_ascii_case(name)) {
            return Err(header_error(format!("column {} must be {name:?}", i + 1)));
        }
    }
    let labels: Vec<&str> = headers.iter().skip(FIXED.len()).collect();
    let space = if labels == ["B", "G"] {
        EvaluationSpace::binary()
    } else {
        EvaluationSpace::new(labels).map_err(|e| header_error(e.to_string()))?
    };

    let mut opinions = Vec::new();
    let mut rejected = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match parse_row(&record, &space) {
            Ok(op) => opinions.push(op),
            Err(message) => {
                log::warn!("{}:{line}: {message}", source.display());
                rejected.push(Rejection { line, message });
            }
        }
    }
    opinions.sort_by_key(|o| o.time);
    Ok(OpinionCorpus {
        space,
        opinions,
        rejected,
    })
}

fn parse_row(
    record: &StringRecord,
    space: &Arc<EvaluationSpace>,
) -> std::result::Result<Opinion, String> {
    let expected = FIXED.len() + space.len();
    if record.len() != expected {
        return Err(format!("expected {expected} fields, got {}", record.len()));
    }
    let time = parse_time(&record[0])
        .ok_or_else(|| format!("bad time {:?}: expected integer or yyyy-mm-dd", &record[0]))?;
    let probs = record
        .iter()
        .skip(FIXED.len())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| format!("bad probability {v:?}"))
        })
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    let value = Distribution::new(space.clone(), probs).map_err(|e| e.to_string())?;
    Opinion::new(&record[1], &record[2], time, value).map_err(|e| e.to_string())
}

/// Writes opinions with shortest round-trip float formatting, so reading the
/// file back reproduces every probability bit for bit.
pub fn write_opinions<W: Write>(
    writer: W,
    space: &EvaluationSpace,
    opinions: &[Opinion],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<&str> = FIXED
        .iter()
        .copied()
        .chain(space.labels().iter().map(String::as_str))
        .collect();
    wtr.write_record(&header)?;
    for op in opinions {
        let mut row = vec![
            op.time.to_string(),
            op.rater.to_string(),
            op.ratee.to_string(),
        ];
        row.extend(op.value.probs().iter().map(|p| p.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}
