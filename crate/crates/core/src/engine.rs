//! The reputation engine: opinions, information decay, reliability review,
//! certainty weighting and group-opinion aggregation.
//!
//! Two aggregators are provided:
//!
//! - [`ReputationLedger`] keeps one decayed running aggregate per agent and
//!   folds each new opinion into it in constant time, weighting the old
//!   aggregate by `n · I(group)` and the newcomer by `I(opinion)`.
//! - [`group_exact`] recomputes the certainty-weighted average of every
//!   individually decayed opinion. It is linear in the history and serves as
//!   the reference the ledger is measured against.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::dist::{weighted_mean, Distribution, EvaluationSpace};
use crate::error::{Error, Result};

/// Certainties at or below this are treated as "no information".
pub const ZERO_CERTAINTY: f64 = 1e-12;

/// Engine time in integer units (days for date-based inputs).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    /// Days since 0001-01-01 (proleptic Gregorian), so every modern date is positive.
    pub fn from_date(date: NaiveDate) -> Self {
        Timestamp(i64::from(date.num_days_from_ce()))
    }

    pub fn to_date(self) -> Option<NaiveDate> {
        i32::try_from(self.0)
            .ok()
            .and_then(NaiveDate::from_num_days_from_ce_opt)
    }

    pub fn elapsed_since(self, earlier: Timestamp) -> Result<f64> {
        if self < earlier {
            return Err(Error::TimeTravel {
                from: earlier,
                to: self,
            });
        }
        Ok((self.0 - earlier.0) as f64)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId(s.to_string())
    }
}

impl From<String> for AgentId {
    fn from(s: String) -> Self {
        AgentId(s)
    }
}

impl Borrow<str> for AgentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An assessment by `rater` of `ratee` made at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Opinion {
    pub rater: AgentId,
    pub ratee: AgentId,
    pub time: Timestamp,
    pub value: Distribution,
}

impl Opinion {
    pub fn new(
        rater: impl Into<AgentId>,
        ratee: impl Into<AgentId>,
        time: Timestamp,
        value: Distribution,
    ) -> Result<Self> {
        let op = Opinion {
            rater: rater.into(),
            ratee: ratee.into(),
            time,
            value,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rater == self.ratee {
            return Err(Error::SelfRating(self.rater.to_string()));
        }
        if self.time.0 < 0 {
            return Err(Error::InvalidParameter {
                name: "opinion time",
                value: self.time.0 as f64,
                expected: "t >= 0",
            });
        }
        Ok(())
    }
}

/// Decay rate `ν` and grace period / pace `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    nu: f64,
    kappa: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams {
            nu: 0.6,
            kappa: 365.0,
        }
    }
}

impl DecayParams {
    pub fn new(nu: f64, kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
                expected: "0 <= nu <= 1",
            });
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: kappa,
                expected: "kappa > 0",
            });
        }
        Ok(DecayParams { nu, kappa })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Exponent `Δ`: zero inside the grace period, `1 + elapsed/κ` after it.
    pub fn exponent(&self, elapsed: f64) -> f64 {
        if elapsed < self.kappa {
            0.0
        } else {
            1.0 + elapsed / self.kappa
        }
    }

    /// Weight `ν^Δ` kept by a distribution after `elapsed` time units.
    pub fn retention(&self, elapsed: f64) -> f64 {
        let delta = self.exponent(elapsed);
        if delta == 0.0 {
            1.0
        } else {
            self.nu.powf(delta)
        }
    }
}

/// Decays `d` from `from` to `to`: `ν^Δ · d + (1 - ν^Δ) · F`.
pub fn decay(
    d: &Distribution,
    from: Timestamp,
    to: Timestamp,
    params: &DecayParams,
) -> Result<Distribution> {
    let kept = params.retention(to.elapsed_since(from)?);
    if kept == 1.0 {
        return Ok(d.clone());
    }
    d.mix(kept, &Distribution::flat(d.space()))
}

/// Information value `H(F) - H(d)`: zero for flat, `ln n` for a point mass.
pub fn certainty(d: &Distribution) -> f64 {
    ((d.len() as f64).ln() - d.entropy()).max(0.0)
}

/// Pulls an opinion toward flat in proportion to its author's unreliability.
pub fn review(opinion: &Distribution, reliability: f64) -> Result<Distribution> {
    if !(0.0..=1.0).contains(&reliability) {
        return Err(Error::InvalidParameter {
            name: "reliability",
            value: reliability,
            expected: "0 <= R <= 1",
        });
    }
    opinion.mix(reliability, &Distribution::flat(opinion.space()))
}

/// `1 - emd(d, T)`.
pub fn reputation_of(d: &Distribution) -> f64 {
    let target = Distribution::target(d.space());
    1.0 - d.emd(&target).expect("same space")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOpinionState {
    pub dist: Distribution,
    /// Number of opinions folded into `dist`.
    pub count: u64,
    pub last_update: Timestamp,
}

impl GroupOpinionState {
    pub fn initial(space: &Arc<EvaluationSpace>) -> Self {
        GroupOpinionState {
            dist: Distribution::flat(space),
            count: 0,
            last_update: Timestamp(0),
        }
    }
}

/// What a single [`ReputationLedger::group_update`] did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateOutcome {
    /// Rater reliability used to review the opinion.
    pub reliability: f64,
    /// Ratee reputation right after the update.
    pub reputation: f64,
    /// False when the reviewed opinion carried no information and was skipped.
    pub counted: bool,
}

/// Per-agent running group opinions, updated in O(1) per opinion.
#[derive(Debug, Clone)]
pub struct ReputationLedger {
    space: Arc<EvaluationSpace>,
    params: DecayParams,
    states: HashMap<AgentId, GroupOpinionState>,
}

impl ReputationLedger {
    pub fn new(space: Arc<EvaluationSpace>, params: DecayParams) -> Self {
        ReputationLedger {
            space,
            params,
            states: HashMap::new(),
        }
    }

    pub fn space(&self) -> &Arc<EvaluationSpace> {
        &self.space
    }

    pub fn params(&self) -> &DecayParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, agent: &str) -> Option<&GroupOpinionState> {
        self.states.get(agent)
    }

    /// States sorted by agent id.
    pub fn states(&self) -> Vec<(&AgentId, &GroupOpinionState)> {
        let mut all: Vec<_> = self.states.iter().collect();
        all.sort_by(|a, b| a.0.cmp(b.0));
        all
    }

    /// Installs a state verbatim (used when restoring snapshots).
    pub fn insert_state(&mut self, agent: AgentId, state: GroupOpinionState) -> Result<()> {
        if **state.dist.space() != *self.space {
            return Err(Error::SpaceMismatch);
        }
        self.states.insert(agent, state);
        Ok(())
    }

    /// Group opinion about `agent` decayed to `t`; flat for unknown agents.
    pub fn group_opinion(&self, agent: &str, t: Timestamp) -> Result<Distribution> {
        match self.states.get(agent) {
            Some(s) => decay(&s.dist, s.last_update, t, &self.params),
            None => Ok(Distribution::flat(&self.space)),
        }
    }

    pub fn reputation(&self, agent: &str, t: Timestamp) -> Result<f64> {
        self.group_opinion(agent, t).map(|d| reputation_of(&d))
    }

    /// Folds one opinion in, reading the rater's reliability from its current state.
    pub fn group_update(&mut self, op: &Opinion) -> Result<UpdateOutcome> {
        self.check(op)?;
        let reliability = self.reputation(op.rater.as_str(), op.time)?;
        self.update_with_reliability(op, reliability)
    }

    /// Applies opinions that happen at the same instant (both sides of a match).
    ///
    /// Every rater reliability is read before any state changes, so the
    /// outcome does not depend on the order of `ops`.
    pub fn group_update_simultaneous(&mut self, ops: &[Opinion]) -> Result<Vec<UpdateOutcome>> {
        let mut reliabilities = Vec::with_capacity(ops.len());
        for op in ops {
            self.check(op)?;
            reliabilities.push(self.reputation(op.rater.as_str(), op.time)?);
        }
        ops.iter()
            .zip(reliabilities)
            .map(|(op, r)| self.update_with_reliability(op, r))
            .collect()
    }

    /// Folds one opinion in with an externally fixed rater reliability.
    pub fn update_with_reliability(
        &mut self,
        op: &Opinion,
        reliability: f64,
    ) -> Result<UpdateOutcome> {
        self.check(op)?;
        let reviewed = review(&op.value, reliability)?;
        let prior = match self.states.get(op.ratee.as_str()) {
            Some(s) => s.clone(),
            None => GroupOpinionState::initial(&self.space),
        };
        let decayed = decay(&prior.dist, prior.last_update, op.time, &self.params)?;

        let opinion_weight = certainty(&reviewed);
        let group_weight = prior.count as f64 * certainty(&decayed);
        let (dist, count, counted) = if opinion_weight <= ZERO_CERTAINTY {
            (decayed, prior.count, false)
        } else {
            let merged = weighted_mean(&[(&decayed, group_weight), (&reviewed, opinion_weight)])?
                .expect("opinion weight is positive");
            (merged, prior.count + 1, true)
        };

        let reputation = reputation_of(&dist);
        self.states.insert(
            op.ratee.clone(),
            GroupOpinionState {
                dist,
                count,
                last_update: op.time,
            },
        );
        Ok(UpdateOutcome {
            reliability,
            reputation,
            counted,
        })
    }

    fn check(&self, op: &Opinion) -> Result<()> {
        op.validate()?;
        if **op.value.space() != *self.space {
            return Err(Error::SpaceMismatch);
        }
        if let Some(s) = self.states.get(op.ratee.as_str()) {
            op.time.elapsed_since(s.last_update)?;
        }
        if let Some(s) = self.states.get(op.rater.as_str()) {
            op.time.elapsed_since(s.last_update)?;
        }
        Ok(())
    }

    /// Replays an opinion database in ascending time order.
    ///
    /// Equal timestamps keep their input order. Records that fail validation
    /// are reported in [`OdbRun::rejected`] and skipped.
    pub fn process(&mut self, opinions: &[Opinion]) -> OdbRun {
        let mut order: Vec<usize> = (0..opinions.len()).collect();
        order.sort_by_key(|&i| opinions[i].time);

        let mut run = OdbRun::default();
        for i in order {
            let op = &opinions[i];
            match self.group_update(op) {
                Ok(outcome) => run.trace.push(TraceStep {
                    input_index: i,
                    ratee: op.ratee.clone(),
                    time: op.time,
                    reputation: outcome.reputation,
                }),
                Err(e) => {
                    log::warn!("opinion #{i} rejected: {e}");
                    run.rejected.push((i, e.to_string()));
                }
            }
        }
        run
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub input_index: usize,
    pub ratee: AgentId,
    pub time: Timestamp,
    pub reputation: f64,
}

#[derive(Debug, Default, Clone)]
pub struct OdbRun {
    pub trace: Vec<TraceStep>,
    /// `(input index, diagnostic)` for each skipped record.
    pub rejected: Vec<(usize, String)>,
}

/// Runs the ascending-time driver over `opinions` on a fresh ledger.
pub fn process_odb(
    space: Arc<EvaluationSpace>,
    params: DecayParams,
    opinions: &[Opinion],
) -> (ReputationLedger, OdbRun) {
    let mut ledger = ReputationLedger::new(space, params);
    let run = ledger.process(opinions);
    (ledger, run)
}

/// Reference group opinion at `t`: every opinion is reviewed with the
/// reliability supplied by `reliability`, decayed individually to `t`, and
/// averaged with its own certainty as weight. Flat when nothing carries weight.
pub fn group_exact<F>(
    space: &Arc<EvaluationSpace>,
    opinions: &[Opinion],
    t: Timestamp,
    params: &DecayParams,
    reliability: F,
) -> Result<Distribution>
where
    F: Fn(&Opinion) -> f64,
{
    let mut decayed = Vec::with_capacity(opinions.len());
    for op in opinions {
        if **op.value.space() != **space {
            return Err(Error::SpaceMismatch);
        }
        let reviewed = review(&op.value, reliability(op))?;
        let d = decay(&reviewed, op.time, t, params)?;
        let w = certainty(&d);
        decayed.push((d, w));
    }
    let parts: Vec<(&Distribution, f64)> = decayed.iter().map(|(d, w)| (d, *w)).collect();
    Ok(weighted_mean(&parts)?.unwrap_or_else(|| Distribution::flat(space)))
}
