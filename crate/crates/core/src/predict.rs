//! Match outcome prediction from reputations, plus the 3/1/0 points baseline.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::convert::MatchResult;
use crate::engine::AgentId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    HomeWin,
    Draw,
    AwayWin,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::HomeWin => "home_win",
            Outcome::Draw => "draw",
            Outcome::AwayWin => "away_win",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionConfig {
    /// Half-width of the draw band around 1/2.
    epsilon: f64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig { epsilon: 0.05 }
    }
}

impl PredictionConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: epsilon,
                expected: "0 < epsilon < 0.5",
            });
        }
        Ok(PredictionConfig { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `R_home / (R_home + R_away)`, or 0.5 when both are zero.
pub fn relative_strength(rep_home: f64, rep_away: f64) -> f64 {
    let total = rep_home + rep_away;
    if total <= 0.0 {
        0.5
    } else {
        rep_home / total
    }
}

pub fn predict(r: f64, cfg: &PredictionConfig) -> Outcome {
    if r > 0.5 + cfg.epsilon {
        Outcome::HomeWin
    } else if r < 0.5 - cfg.epsilon {
        Outcome::AwayWin
    } else {
        Outcome::Draw
    }
}

/// Season-scoped league points under the 3/1/0 scheme.
#[derive(Debug, Clone, Default)]
pub struct LeagueTable {
    points: HashMap<(String, AgentId), u32>,
}

impl LeagueTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn points(&self, season: &str, team: &AgentId) -> u32 {
        self.points
            .get(&(season.to_string(), team.clone()))
            .copied()
            .unwrap_or(0)
    }

    pub fn update(&mut self, m: &MatchResult) {
        let (home, away) = match m.outcome() {
            Outcome::HomeWin => (3, 0),
            Outcome::Draw => (1, 1),
            Outcome::AwayWin => (0, 3),
        };
        *self
            .points
            .entry((m.season.clone(), m.home.clone()))
            .or_default() += home;
        *self
            .points
            .entry((m.season.clone(), m.away.clone()))
            .or_default() += away;
    }

    /// Side with more points this season wins; equal points predict a draw.
    pub fn predict(&self, m: &MatchResult) -> Outcome {
        let home = self.points(&m.season, &m.home);
        let away = self.points(&m.season, &m.away);
        match home.cmp(&away) {
            std::cmp::Ordering::Greater => Outcome::HomeWin,
            std::cmp::Ordering::Less => Outcome::AwayWin,
            std::cmp::Ordering::Equal => Outcome::Draw,
        }
    }

    pub fn season_total(&self, season: &str) -> u32 {
        self.points
            .iter()
            .filter(|((s, _), _)| s == season)
            .map(|(_, p)| p)
            .sum()
    }
}

pub fn baseline_update(table: &mut LeagueTable, m: &MatchResult) {
    table.update(m);
}

pub fn baseline_predict(table: &LeagueTable, m: &MatchResult) -> Outcome {
    table.predict(m)
}
