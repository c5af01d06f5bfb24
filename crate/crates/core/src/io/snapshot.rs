use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::create_file;
use crate::dist::{Distribution, EvaluationSpace};
use crate::engine::{AgentId, DecayParams, GroupOpinionState, ReputationLedger, Timestamp};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Snapshot {
    labels: Vec<String>,
    nu: f64,
    kappa: f64,
    agents: Vec<AgentRow>,
}

#[derive(Serialize, Deserialize)]
struct AgentRow {
    agent: AgentId,
    probs: Vec<f64>,
    count: u64,
    last_update: Timestamp,
}

/// Pretty JSON with agents sorted by id; floats use shortest round-trip form.
pub fn snapshot_to_string(ledger: &ReputationLedger) -> Result<String> {
    let snap = Snapshot {
        labels: ledger.space().labels().to_vec(),
        nu: ledger.params().nu(),
        kappa: ledger.params().kappa(),
        agents: ledger
            .states()
            .into_iter()
            .map(|(agent, s)| AgentRow {
                agent: agent.clone(),
                probs: s.dist.probs().to_vec(),
                count: s.count,
                last_update: s.last_update,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&snap)?;
    text.push('\n');
    Ok(text)
}

pub fn snapshot_from_str(text: &str) -> Result<ReputationLedger> {
    let snap: Snapshot = serde_json::from_str(text)?;
    let space = if snap.labels == ["B", "G"] {
        EvaluationSpace::binary()
    } else {
        EvaluationSpace::new(snap.labels)?
    };
    let mut ledger = ReputationLedger::new(space.clone(), DecayParams::new(snap.nu, snap.kappa)?);
    for row in snap.agents {
        let state = GroupOpinionState {
            dist: Distribution::new(space.clone(), row.probs)?,
            count: row.count,
            last_update: row.last_update,
        };
        ledger.insert_state(row.agent, state)?;
    }
    Ok(ledger)
}

pub fn save_snapshot(path: &Path, ledger: &ReputationLedger) -> Result<()> {
    let text = snapshot_to_string(ledger)?;
    create_file(path)?
        .write_all(text.as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<ReputationLedger> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    snapshot_from_str(&text)
}
