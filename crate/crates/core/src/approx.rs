//! Monte-Carlo study of how far the O(1) running aggregate drifts from the
//! exact certainty-weighted aggregate.
//!
//! A single agent receives `opinions_per_year` random opinions per simulated
//! year from fresh, never-rated raters. After every opinion both aggregates
//! are computed and their EMD recorded; the trace averages over repeats.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, EvaluationSpace};
use crate::engine::{
    group_exact, reputation_of, DecayParams, Opinion, ReputationLedger, Timestamp,
};
use crate::error::{Error, Result};

const RATEE: &str = "alpha";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub opinions_per_year: u32,
    pub years: u32,
    pub decay: DecayParams,
    pub repeats: u32,
    pub seed: u64,
    pub space_size: usize,
    /// Engine time units per simulated year.
    pub ticks_per_year: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            opinions_per_year: 10,
            years: 6,
            decay: DecayParams::new(0.98, 5.0).expect("valid"),
            repeats: 20,
            seed: 1,
            space_size: 2,
            ticks_per_year: 365,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("opinions per year", self.opinions_per_year),
            ("years", self.years),
            ("repeats", self.repeats),
            ("ticks per year", self.ticks_per_year),
        ];
        for (name, value) in checks {
            if value == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    expected: "> 0",
                });
            }
        }
        if self.space_size < 2 {
            return Err(Error::SpaceTooSmall(self.space_size));
        }
        Ok(())
    }

    pub fn opinion_count(&self) -> usize {
        self.opinions_per_year as usize * self.years as usize
    }

    fn space(&self) -> Result<Arc<EvaluationSpace>> {
        if self.space_size == 2 {
            Ok(EvaluationSpace::binary())
        } else {
            EvaluationSpace::new((1..=self.space_size).map(|i| format!("e{i}")))
        }
    }
}

/// Random opinion stream for one repeat.
///
/// Components are drawn i.i.d. uniform on `[0, 1)` and normalized. Opinions
/// are evenly spaced inside each year. Each repeat reads its own ChaCha
/// stream of the configured seed.
pub fn gen_random_opinions(cfg: &ExperimentConfig, repeat: u32) -> Result<Vec<Opinion>> {
    cfg.validate()?;
    let space = cfg.space()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::from(repeat));

    let per_year = u64::from(cfg.opinions_per_year);
    let ticks = u64::from(cfg.ticks_per_year);
    (0..cfg.opinion_count() as u64)
        .map(|i| {
            let mut v: Vec<f64> = (0..space.len()).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = v.iter().sum();
            if sum > 0.0 {
                v.iter_mut().for_each(|x| *x /= sum);
            } else {
                v = Distribution::flat(&space).probs().to_vec();
            }
            let time = Timestamp((i * ticks / per_year) as i64);
            Opinion::new(
                format!("rater{i}"),
                RATEE,
                time,
                Distribution::new(space.clone(), v)?,
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// 1-based number of opinions seen.
    pub index: usize,
    pub mean_emd: f64,
    pub min_emd: f64,
    pub max_emd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    pub points: Vec<TracePoint>,
}

impl ErrorTrace {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_emd).collect()
    }
}

/// EMD between exact and running aggregate after each opinion of one repeat.
pub fn repeat_errors(cfg: &ExperimentConfig, repeat: u32) -> Result<Vec<f64>> {
    let opinions = gen_random_opinions(cfg, repeat)?;
    let space = cfg.space()?;
    let fresh_reliability = reputation_of(&Distribution::flat(&space));

    let mut ledger = ReputationLedger::new(space.clone(), cfg.decay);
    let mut errors = Vec::with_capacity(opinions.len());
    for (k, op) in opinions.iter().enumerate() {
        ledger.group_update(op)?;
        let approx = ledger.group_opinion(RATEE, op.time)?;
        let exact = group_exact(&space, &opinions[..=k], op.time, &cfg.decay, |_| {
            fresh_reliability
        })?;
        errors.push(exact.emd(&approx)?);
    }
    Ok(errors)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ErrorTrace> {
    cfg.validate()?;
    let per_repeat: Vec<Vec<f64>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| repeat_errors(cfg, r))
        .collect::<Result<_>>()?;

    let points = (0..cfg.opinion_count())
        .map(|i| {
            let column = per_repeat.iter().map(|errs| errs[i]);
            let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for e in column {
                sum += e;
                min = min.min(e);
                max = max.max(e);
            }
            TracePoint {
                index: i + 1,
                mean_emd: sum / per_repeat.len() as f64,
                min_emd: min,
                max_emd: max,
            }
        })
        .collect();
    Ok(ErrorTrace { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(per_year: u32, years: u32, nu: f64, kappa: f64, repeats: u32) -> ExperimentConfig {
        ExperimentConfig {
            opinions_per_year: per_year,
            years,
            decay: DecayParams::new(nu, kappa).unwrap(),
            repeats,
            seed: 42,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn stream_shape() {
        let c = cfg(4, 15, 0.98, 5.0, 1);
        let ops = gen_random_opinions(&c, 0).unwrap();
        assert_eq!(ops.len(), 60);
        assert!(ops.windows(2).all(|w| w[0].time < w[1].time));
        assert!(ops.last().unwrap().time.0 < 15 * 365);
        assert!(ops.last().unwrap().time.0 >= 14 * 365);
        assert!(ops.iter().all(|o| o.ratee.as_str() == RATEE));
        assert_eq!(gen_random_opinions(&c, 0).unwrap(), ops);
        assert_ne!(gen_random_opinions(&c, 1).unwrap(), ops);
    }

    #[test]
    fn sampler_is_symmetric() {
        let c = cfg(100, 100, 0.98, 5.0, 1);
        let ops = gen_random_opinions(&c, 3).unwrap();
        let mean: f64 = ops.iter().map(|o| o.value.top_prob()).sum::<f64>() / ops.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn zero_nu_gives_zero_trace() {
        let trace = run_experiment(&cfg(10, 6, 0.0, 5.0, 5)).unwrap();
        assert_eq!(trace.points.len(), 60);
        assert!(trace.points.iter().all(|p| p.max_emd <= 1e-12));
    }

    #[test]
    fn first_index_is_exact_and_values_bounded() {
        for (nu, kappa) in [(0.98, 5.0), (0.5, 30.0), (1.0, 1.0)] {
            let trace = run_experiment(&cfg(10, 6, nu, kappa, 4)).unwrap();
            assert!(trace.points[0].max_emd < 1e-12);
            for p in &trace.points {
                assert!(0.0 <= p.min_emd && p.min_emd <= p.mean_emd + 1e-15);
                assert!(p.mean_emd <= p.max_emd + 1e-15 && p.max_emd <= 1.0);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let c = cfg(10, 3, 0.9, 5.0, 6);
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }

    #[test]
    fn more_repeats_narrow_the_band() {
        // The band is the min..max spread, which can only widen as repeats are
        // added; what shrinks is the spread of the mean across seeds.
        let spread_of_means = |repeats: u32| {
            let means: Vec<f64> = (0..8)
                .map(|seed| {
                    let c = ExperimentConfig {
                        seed,
                        ..cfg(10, 2, 0.98, 5.0, repeats)
                    };
                    run_experiment(&c).unwrap().points[10].mean_emd
                })
                .collect();
            let m = means.iter().sum::<f64>() / means.len() as f64;
            (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / means.len() as f64).sqrt()
        };
        assert!(spread_of_means(50) < spread_of_means(5));
    }

    #[test]
    fn rejects_bad_config() {
        let c = ExperimentConfig {
            repeats: 0,
            ..ExperimentConfig::default()
        };
        assert!(run_experiment(&c).is_err());
        let c = ExperimentConfig {
            space_size: 1,
            ..ExperimentConfig::default()
        };
        assert!(gen_random_opinions(&c, 0).is_err());
    }
}
