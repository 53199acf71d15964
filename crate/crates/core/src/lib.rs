//! Counterfactual responsibility in sequential decision-making mechanisms.
//!
//! A mechanism is a sequence of agents, each choosing values for its own
//! Boolean variables after seeing every earlier choice, together with a
//! quantifier-free deontic constraint. This crate decides, for a given
//! mechanism, whether it admits diffusion of responsibility, responsibility
//! gaps, both, or any responsibility at all. Every question is answered two
//! ways: by enumerating action profiles and by evaluating a closed quantified
//! Boolean formula. The formulas can also be exported as QDIMACS.

pub mod classify;
pub mod error;
pub mod fixtures;
pub mod formula;
pub mod mechanism;
pub mod qbf;
pub mod reductions;
pub mod responsibility;

pub use classify::{classify, ClassificationReport, Method, Witness};
pub use error::{Error, Result};
pub use formula::{eval_qbf, evaluate, parse, Formula, Quantifier, Valuation, VarSet};
pub use mechanism::{ActionLabels, ActionProfile, AgentSpec, Mechanism, DEFAULT_PROFILE_BUDGET};
pub use responsibility::{cf, is_responsible, responsible_agents, ResponsibilityVerdict};
