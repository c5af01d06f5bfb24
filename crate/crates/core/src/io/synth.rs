use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Poisson};

use crate::convert::MatchResult;
use crate::engine::Timestamp;
use crate::error::{Error, Result};

const STRENGTH_SD: f64 = 0.3;
const SEASON_DRIFT_SD: f64 = 0.1;
const HOME_RATE: f64 = 1.2;
const AWAY_RATE: f64 = 0.7;
const FIRST_YEAR: i32 = 2000;

/// A generated corpus together with the header lines that describe its law.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub matches: Vec<MatchResult>,
    pub header: Vec<String>,
}

/// Seeded double round-robin league.
///
/// Every team has a latent strength `s ~ Normal(0, 0.3)` that drifts by
/// `Normal(0, 0.1)` between seasons. A match between home `h` and away `a`
/// draws `home_goals ~ Poisson(1.2 * exp(s_h - s_a))` and
/// `away_goals ~ Poisson(0.7 * exp(s_a - s_h))`. Rounds are one week apart
/// starting on 20 August of each season's first year.
pub fn gen_synthetic(teams: usize, seasons: usize, seed: u64) -> Result<SyntheticCorpus> {
    if teams < 2 {
        return Err(Error::InvalidParameter {
            name: "teams",
            value: teams as f64,
            expected: ">= 2",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strength = Normal::new(0.0, STRENGTH_SD).expect("valid sd");
    let drift = Normal::new(0.0, SEASON_DRIFT_SD).expect("valid sd");
    let names: Vec<String> = (1..=teams).map(|i| format!("Club {i:02}")).collect();
    let mut strengths: Vec<f64> = (0..teams).map(|_| strength.sample(&mut rng)).collect();

    let rounds = round_robin(teams);
    let mut matches = Vec::with_capacity(seasons * teams * (teams - 1));
    for season in 0..seasons {
        if season > 0 {
            strengths
                .iter_mut()
                .for_each(|s| *s += drift.sample(&mut rng));
        }
        let year = FIRST_YEAR + season as i32;
        let label = format!("{year}-{:02}", (year + 1) % 100);
        let start = NaiveDate::from_ymd_opt(year, 8, 20).expect("valid date");

        let legs = [false, true];
        for (leg, &swap) in legs.iter().enumerate() {
            for (r, round) in rounds.iter().enumerate() {
                let week = (leg * rounds.len() + r) as u64;
                let date = start + Days::new(7 * week);
                for &(a, b) in round {
                    let (h, w) = if swap { (b, a) } else { (a, b) };
                    let diff = strengths[h] - strengths[w];
                    let hg = poisson(&mut rng, HOME_RATE * diff.exp());
                    let ag = poisson(&mut rng, AWAY_RATE * (-diff).exp());
                    matches.push(MatchResult::new(
                        Timestamp::from_date(date),
                        label.clone(),
                        names[h].clone(),
                        names[w].clone(),
                        hg,
                        ag,
                    )?);
                }
            }
        }
    }

    let header = vec![
        format!("synthetic league: {teams} teams, {seasons} seasons, seed {seed}"),
        format!(
            "strength ~ Normal(0, {STRENGTH_SD}) per team, drifting by Normal(0, {SEASON_DRIFT_SD}) each season"
        ),
        format!(
            "home_goals ~ Poisson({HOME_RATE} * exp(s_home - s_away)), away_goals ~ Poisson({AWAY_RATE} * exp(s_away - s_home))"
        ),
        "double round robin, one round per week from 20 August".to_string(),
    ];
    Ok(SyntheticCorpus { matches, header })
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u32 {
    let lambda = lambda.clamp(1e-6, 50.0);
    Poisson::new(lambda).expect("positive rate").sample(rng) as u32
}

/// Circle-method pairings; an odd team count gets a bye.
fn round_robin(teams: usize) -> Vec<Vec<(usize, usize)>> {
    let n = teams + teams % 2;
    let mut ring: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(n - 1);
    for r in 0..n - 1 {
        let mut pairs = Vec::with_capacity(n / 2);
        for i in 0..n / 2 {
            let (a, b) = (ring[i], ring[n - 1 - i]);
            if a >= teams || b >= teams {
                continue;
            }
            // Alternate the fixed team's venue so home games are balanced.
            if i == 0 && r % 2 == 1 {
                pairs.push((b, a));
            } else {
                pairs.push((a, b));
            }
        }
        rounds.push(pairs);
        ring[1..].rotate_right(1);
    }
    rounds
}

#[cfg(test)]
mod tests {
    use std::collections::{HashMap, HashSet};

    use super::*;
    use crate::predict::Outcome;

    #[test]
    fn four_teams_one_season() {
        let c = gen_synthetic(4, 1, 7).unwrap();
        assert_eq!(c.matches.len(), 12);
        let pairs: HashSet<(&str, &str)> = c
            .matches
            .iter()
            .map(|m| (m.home.as_str(), m.away.as_str()))
            .collect();
        assert_eq!(pairs.len(), 12);
        assert!(c.matches.windows(2).all(|w| w[0].date <= w[1].date));
        assert!(c.matches.iter().all(|m| m.season == "2000-01"));
    }

    #[test]
    fn odd_team_count() {
        let c = gen_synthetic(5, 2, 1).unwrap();
        assert_eq!(c.matches.len(), 2 * 5 * 4);
        assert_eq!(c.matches.last().unwrap().season, "2001-02");
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            gen_synthetic(6, 3, 11).unwrap(),
            gen_synthetic(6, 3, 11).unwrap()
        );
        assert_ne!(
            gen_synthetic(6, 3, 11).unwrap(),
            gen_synthetic(6, 3, 12).unwrap()
        );
    }

    #[test]
    fn too_few_teams() {
        assert!(gen_synthetic(1, 1, 0).is_err());
    }

    #[test]
    fn stronger_side_wins_head_to_head() {
        let c = gen_synthetic(20, 10, 2024).unwrap();
        assert_eq!(c.matches.len(), 3800);

        // Rank by total goal difference, a proxy for the hidden strength.
        let mut gd: HashMap<&str, i64> = HashMap::new();
        for m in &c.matches {
            *gd.entry(m.home.as_str()).or_default() += m.margin();
            *gd.entry(m.away.as_str()).or_default() -= m.margin();
        }
        let strongest = gd.iter().max_by_key(|(_, v)| **v).unwrap().0.to_string();
        let weakest = gd.iter().min_by_key(|(_, v)| **v).unwrap().0.to_string();
        let (mut played, mut won) = (0, 0);
        for m in &c.matches {
            let side = if m.home.as_str() == strongest && m.away.as_str() == weakest {
                Outcome::HomeWin
            } else if m.home.as_str() == weakest && m.away.as_str() == strongest {
                Outcome::AwayWin
            } else {
                continue;
            };
            played += 1;
            won += usize::from(m.outcome() == side);
        }
        assert_eq!(played, 20);
        assert!(won as f64 / played as f64 > 0.5, "{won}/{played}");
    }
}
