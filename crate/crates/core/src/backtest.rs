//! Online replay of a match corpus.
//!
//! For every match the pre-match reputations give a relative strength `r` and
//! a prediction; only afterwards is the score converted into opinions and fed
//! to the ledger. Matches are bucketed into ten relative-strength intervals
//! `[0, 0.1), [0.1, 0.2), …, [0.9, 1.0]` and each bucket reports its home-win
//! frequency `F_H` and away-win frequency `F_A`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convert::{
    compute_norm_bounds, convert, ConversionConfig, MatchResult, NormBounds, Normalization,
    Strategy,
};
use crate::dist::EvaluationSpace;
use crate::engine::{DecayParams, ReputationLedger};
use crate::error::{Error, Result};
use crate::predict::{predict, relative_strength, LeagueTable, Outcome, PredictionConfig};

pub const BIN_COUNT: usize = 10;

/// Relative-strength interval index in `1..=10`.
pub fn bin_of(r: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter {
            name: "relative strength",
            value: r,
            expected: "0 <= r <= 1",
        });
    }
    Ok(((r * BIN_COUNT as f64).floor() as usize + 1).min(BIN_COUNT))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCounts {
    pub total: u64,
    pub home_wins: u64,
    pub away_wins: u64,
    pub draws: u64,
}

impl BinCounts {
    fn record(&mut self, outcome: Outcome) {
        self.total += 1;
        match outcome {
            Outcome::HomeWin => self.home_wins += 1,
            Outcome::AwayWin => self.away_wins += 1,
            Outcome::Draw => self.draws += 1,
        }
    }
}

/// Outcome tallies for the ten relative-strength intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BinStats {
    bins: [BinCounts; BIN_COUNT],
}

impl BinStats {
    pub fn record(&mut self, k: usize, outcome: Outcome) {
        self.bins[k - 1].record(outcome);
    }

    pub fn get(&self, k: usize) -> &BinCounts {
        &self.bins[k - 1]
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|b| b.total).sum()
    }

    /// Report rows for non-empty bins only.
    pub fn rows(&self) -> Vec<BinReport> {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, b)| b.total > 0)
            .map(|(i, b)| {
                let n = b.total as f64;
                BinReport {
                    k: i + 1,
                    lower: i as f64 / BIN_COUNT as f64,
                    upper: (i + 1) as f64 / BIN_COUNT as f64,
                    counts: *b,
                    f_home: b.home_wins as f64 / n,
                    f_away: b.away_wins as f64 / n,
                    f_draw: b.draws as f64 / n,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
    #[serde(flatten)]
    pub counts: BinCounts,
    pub f_home: f64,
    pub f_away: f64,
    pub f_draw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub conversion: ConversionConfig,
    pub decay: DecayParams,
    pub prediction: PredictionConfig,
}

impl BacktestConfig {
    pub fn new(strategy: Strategy, decay: DecayParams) -> Self {
        BacktestConfig {
            conversion: ConversionConfig::new(strategy),
            decay,
            prediction: PredictionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub strategy: Strategy,
    pub nu: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub gift: f64,
    pub normalization: Normalization,
    /// Bounds actually used for GMV normalization, if any.
    pub bounds: Option<NormBounds>,
    pub matches: u64,
    pub bins: Vec<BinReport>,
    pub more_correct: u64,
    pub baseline_correct: u64,
    pub more_accuracy: f64,
    pub baseline_accuracy: f64,
    pub skipped: Vec<String>,
}

/// What was known and predicted before one match was played.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRecord {
    pub rep_home: f64,
    pub rep_away: f64,
    pub r: f64,
    pub bin: usize,
    pub more: Outcome,
    pub baseline: Outcome,
    pub actual: Outcome,
}

pub fn run_backtest(matches: &[MatchResult], cfg: &BacktestConfig) -> Result<BacktestReport> {
    replay(matches, cfg).map(|(report, _)| report)
}

/// Replays `matches` (ascending by date) and returns the report together with
/// the per-match prediction records.
pub fn replay(
    matches: &[MatchResult],
    cfg: &BacktestConfig,
) -> Result<(BacktestReport, Vec<PredictionRecord>)> {
    replay_into(matches, cfg).map(|(report, records, _)| (report, records))
}

/// Like [`replay`], also handing back the ledger as left by the last match.
pub fn replay_into(
    matches: &[MatchResult],
    cfg: &BacktestConfig,
) -> Result<(BacktestReport, Vec<PredictionRecord>, ReputationLedger)> {
    cfg.conversion.validate()?;
    if let Some(i) = matches.windows(2).position(|w| w[1].date < w[0].date) {
        return Err(Error::Unsorted { index: i + 1 });
    }

    let bounds = match (cfg.conversion.strategy, cfg.conversion.normalization) {
        (Strategy::Gmv, Normalization::Corpus) if !matches.is_empty() => {
            Some(compute_norm_bounds(matches, cfg.conversion.gift)?)
        }
        (Strategy::Gmv, Normalization::Fixed(b)) => Some(b),
        _ => None,
    };

    let mut ledger = ReputationLedger::new(EvaluationSpace::binary(), cfg.decay);
    let mut table = LeagueTable::new();
    let mut stats = BinStats::default();
    let mut records = Vec::with_capacity(matches.len());
    let mut skipped = Vec::new();

    for (i, m) in matches.iter().enumerate() {
        let rep_home = ledger.reputation(m.home.as_str(), m.date)?;
        let rep_away = ledger.reputation(m.away.as_str(), m.date)?;
        let r = relative_strength(rep_home, rep_away);
        let bin = bin_of(r)?;
        let record = PredictionRecord {
            rep_home,
            rep_away,
            r,
            bin,
            more: predict(r, &cfg.prediction),
            baseline: table.predict(m),
            actual: m.outcome(),
        };
        stats.record(bin, record.actual);
        records.push(record);
        table.update(m);

        let applied =
            convert(m, &cfg.conversion, bounds.as_ref()).and_then(|(about_home, about_away)| {
                ledger.group_update_simultaneous(&[about_home, about_away])
            });
        if let Err(e) = applied {
            log::warn!("match #{i} ({} vs {}) skipped: {e}", m.home, m.away);
            skipped.push(format!("match {i}: {e}"));
        }
    }

    let more_correct = records.iter().filter(|r| r.more == r.actual).count() as u64;
    let baseline_correct = records.iter().filter(|r| r.baseline == r.actual).count() as u64;
    let n = records.len() as u64;
    let ratio = |c: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let report = BacktestReport {
        strategy: cfg.conversion.strategy,
        nu: cfg.decay.nu(),
        kappa: cfg.decay.kappa(),
        epsilon: cfg.prediction.epsilon(),
        gift: cfg.conversion.gift,
        normalization: cfg.conversion.normalization,
        bounds,
        matches: n,
        bins: stats.rows(),
        more_correct,
        baseline_correct,
        more_accuracy: ratio(more_correct),
        baseline_accuracy: ratio(baseline_correct),
        skipped,
    };
    Ok((report, records, ledger))
}

#[derive(Debug)]
pub struct SweepRun {
    pub strategy: Strategy,
    pub nu: f64,
    pub result: Result<BacktestReport>,
}

/// One isolated backtest per `(strategy, ν)` pair, run in parallel.
///
/// A failing run is reported in its slot and does not stop the others.
pub fn sweep(
    matches: &[MatchResult],
    strategies: &[Strategy],
    nus: &[f64],
    kappa: f64,
    prediction: PredictionConfig,
    gift: f64,
) -> Result<Vec<SweepRun>> {
    if strategies.is_empty() {
        return Err(Error::Empty("strategy grid"));
    }
    if nus.is_empty() {
        return Err(Error::Empty("nu grid"));
    }
    let grid: Vec<(Strategy, f64)> = strategies
        .iter()
        .flat_map(|&s| nus.iter().map(move |&nu| (s, nu)))
        .collect();
    Ok(grid
        .into_par_iter()
        .map(|(strategy, nu)| {
            let result = DecayParams::new(nu, kappa).and_then(|decay| {
                let mut conversion = ConversionConfig::new(strategy);
                conversion.gift = gift;
                run_backtest(
                    matches,
                    &BacktestConfig {
                        conversion,
                        decay,
                        prediction,
                    },
                )
            });
            SweepRun {
                strategy,
                nu,
                result,
            }
        })
        .collect())
}
