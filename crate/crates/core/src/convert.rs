//! Turning match scores into pairs of mutual opinions on the `{B, G}` space.
//!
//! Each match yields an opinion of the away side about the home side and an
//! opinion of the home side about the away side, both stamped with the match
//! date. Three strategies are available:
//!
//! - **Naive**: the winner gets `{B: 0, G: 1}`, the loser `{B: 1, G: 0}`, a draw
//!   gives both sides the flat distribution.
//! - **MV** (margin of victory): good-probability is the share of goals scored.
//! - **GMV** (gifted margin of victory): each side is credited `X` extra goals
//!   before taking the share, optionally rescaled to `[0, 1]` using the
//!   extreme good-probabilities seen over a corpus.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, EvaluationSpace};
use crate::engine::{AgentId, Opinion, Timestamp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub date: Timestamp,
    /// Season label, used to scope league points.
    pub season: String,
    pub home: AgentId,
    pub away: AgentId,
    pub home_goals: u32,
    pub away_goals: u32,
}

impl MatchResult {
    pub fn new(
        date: Timestamp,
        season: impl Into<String>,
        home: impl Into<AgentId>,
        away: impl Into<AgentId>,
        home_goals: u32,
        away_goals: u32,
    ) -> Result<Self> {
        let m = MatchResult {
            date,
            season: season.into(),
            home: home.into(),
            away: away.into(),
            home_goals,
            away_goals,
        };
        if m.home == m.away {
            return Err(Error::SelfMatch(m.home.to_string()));
        }
        Ok(m)
    }

    /// Goal margin from the home side's point of view.
    pub fn margin(&self) -> i64 {
        i64::from(self.home_goals) - i64::from(self.away_goals)
    }

    pub fn outcome(&self) -> crate::predict::Outcome {
        use crate::predict::Outcome;
        match self.margin() {
            m if m > 0 => Outcome::HomeWin,
            0 => Outcome::Draw,
            _ => Outcome::AwayWin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Naive,
    Mv,
    Gmv,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Naive, Strategy::Mv, Strategy::Gmv];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Naive => "naive",
            Strategy::Mv => "mv",
            Strategy::Gmv => "gmv",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Strategy::Naive),
            "mv" => Ok(Strategy::Mv),
            "gmv" => Ok(Strategy::Gmv),
            other => Err(format!(
                "unknown strategy {other:?} (expected naive, mv or gmv)"
            )),
        }
    }
}

/// Where GMV normalization bounds come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Off,
    /// Computed from the whole corpus before replay.
    Corpus,
    Fixed(NormBounds),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionConfig {
    pub strategy: Strategy,
    /// Gift `X` credited to both sides under GMV.
    pub gift: f64,
    pub normalization: Normalization,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        ConversionConfig {
            strategy: Strategy::Gmv,
            gift: 1.0,
            normalization: Normalization::Corpus,
        }
    }
}

impl ConversionConfig {
    pub fn new(strategy: Strategy) -> Self {
        let normalization = if strategy == Strategy::Gmv {
            Normalization::Corpus
        } else {
            Normalization::Off
        };
        ConversionConfig {
            strategy,
            gift: 1.0,
            normalization,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategy == Strategy::Gmv && !(self.gift > 0.0 && self.gift.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gift X",
                value: self.gift,
                expected: "X > 0",
            });
        }
        Ok(())
    }
}

/// Lowest (`m`) and highest (`M`) GMV good-probability over a set of matches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub low: f64,
    pub high: f64,
}

impl NormBounds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(0.0 <= low && low <= high && high <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "normalization bounds",
                value: low,
                expected: "0 <= m <= M <= 1",
            });
        }
        Ok(NormBounds { low, high })
    }
}

/// `(opinion about home, opinion about away)`.
pub type MutualOpinions = (Opinion, Opinion);

fn mutual(m: &MatchResult, home_good: f64, away_good: f64) -> Result<MutualOpinions> {
    let space = EvaluationSpace::binary();
    let about_home = Distribution::new(space.clone(), vec![1.0 - home_good, home_good])?;
    let about_away = Distribution::new(space, vec![1.0 - away_good, away_good])?;
    Ok((
        Opinion::new(m.away.clone(), m.home.clone(), m.date, about_home)?,
        Opinion::new(m.home.clone(), m.away.clone(), m.date, about_away)?,
    ))
}

pub fn convert_naive(m: &MatchResult) -> Result<MutualOpinions> {
    let home_good = match m.margin() {
        d if d > 0 => 1.0,
        0 => 0.5,
        _ => 0.0,
    };
    mutual(m, home_good, 1.0 - home_good)
}

pub fn convert_mv(m: &MatchResult) -> Result<MutualOpinions> {
    let total = f64::from(m.home_goals + m.away_goals);
    if total == 0.0 {
        return mutual(m, 0.5, 0.5);
    }
    let home_good = f64::from(m.home_goals) / total;
    mutual(m, home_good, f64::from(m.away_goals) / total)
}

/// Un-normalized GMV good-probabilities `(home, away)`.
pub fn gmv_probs(m: &MatchResult, gift: f64) -> Result<(f64, f64)> {
    if !(gift > 0.0 && gift.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "gift X",
            value: gift,
            expected: "X > 0",
        });
    }
    let (h, a) = (f64::from(m.home_goals), f64::from(m.away_goals));
    let total = h + a + 2.0 * gift;
    Ok(((h + gift) / total, (a + gift) / total))
}

pub fn convert_gmv(
    m: &MatchResult,
    gift: f64,
    bounds: Option<&NormBounds>,
) -> Result<MutualOpinions> {
    let (mut home_good, mut away_good) = gmv_probs(m, gift)?;
    if let Some(b) = bounds {
        home_good = gmv_normalize(home_good, b);
        away_good = gmv_normalize(away_good, b);
    }
    mutual(m, home_good, away_good)
}

/// Converts with the configured strategy. `bounds` is used by GMV only.
pub fn convert(
    m: &MatchResult,
    cfg: &ConversionConfig,
    bounds: Option<&NormBounds>,
) -> Result<MutualOpinions> {
    match cfg.strategy {
        Strategy::Naive => convert_naive(m),
        Strategy::Mv => convert_mv(m),
        Strategy::Gmv => convert_gmv(m, cfg.gift, bounds),
    }
}

pub fn compute_norm_bounds(matches: &[MatchResult], gift: f64) -> Result<NormBounds> {
    if matches.is_empty() {
        return Err(Error::Empty("match list"));
    }
    let (mut low, mut high) = (f64::INFINITY, f64::NEG_INFINITY);
    for m in matches {
        let (h, a) = gmv_probs(m, gift)?;
        low = low.min(h).min(a);
        high = high.max(h).max(a);
    }
    NormBounds::new(low, high)
}

/// Affine rescale of a GMV good-probability from `[m, M]` to `[0, 1]`.
///
/// Degenerate bounds (`M = m`) yield 0.5; values outside the bounds are clamped.
pub fn gmv_normalize(p_good: f64, bounds: &NormBounds) -> f64 {
    let span = bounds.high - bounds.low;
    if span <= 0.0 {
        return 0.5;
    }
    if p_good < bounds.low || p_good > bounds.high {
        log::warn!(
            "good-probability {p_good} outside normalization bounds [{}, {}], clamping",
            bounds.low,
            bounds.high
        );
    }
    ((p_good - bounds.low) / span).clamp(0.0, 1.0)
}
