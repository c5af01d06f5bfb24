//! A reputation engine that keeps, for every agent, a decaying and
//! certainty-weighted group opinion over an ordered evaluation space, plus
//! the tooling to backtest it on football results.
//!
//! Opinions are discrete distributions ([`dist::Distribution`]). The
//! [`engine::ReputationLedger`] folds each incoming opinion into the ratee's
//! running group opinion in constant time; an agent's reputation is one minus
//! the earth mover's distance from that opinion to the ideal point mass on the
//! top term.
//!
//! ```
//! use more_core::dist::{Distribution, EvaluationSpace};
//! use more_core::engine::{DecayParams, Opinion, ReputationLedger, Timestamp};
//!
//! let space = EvaluationSpace::binary();
//! let mut ledger = ReputationLedger::new(space.clone(), DecayParams::default());
//! let good = Distribution::new(space, vec![0.1, 0.9]).unwrap();
//! ledger.group_update(&Opinion::new("alice", "bob", Timestamp(10), good).unwrap()).unwrap();
//! assert!(ledger.reputation("bob", Timestamp(10)).unwrap() > 0.5);
//! ```

pub mod approx;
pub mod backtest;
pub mod convert;
pub mod dist;
pub mod engine;
pub mod error;
pub mod io;
pub mod predict;

pub use dist::{Distribution, EvaluationSpace};
pub use engine::{AgentId, DecayParams, Opinion, ReputationLedger, Timestamp};
pub use error::{Error, Result};
