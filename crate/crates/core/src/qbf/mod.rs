//! Export of closed quantified formulas to QDIMACS.
//!
//! The pipeline is [`prenex`] (rename bound variables apart, pull all
//! quantifiers to the front), [`tseitin`] on the quantifier-free matrix, and
//! [`CnfInstance::to_qdimacs`]. [`CnfInstance::evaluate`] decides small
//! instances without an external tool; [`run_external`] hands the text to a
//! solver process.

mod cnf;
mod external;
mod prenex;

pub use cnf::{tseitin, CnfInstance, DEFAULT_CNF_BUDGET};
pub use external::{run_external, SolverConfig, SOLVER_ENV};
pub use prenex::{prenex, PrenexQbf};

use crate::error::Result;
use crate::formula::Formula;

/// Prenex form followed by Tseitin conversion.
pub fn to_cnf(f: &Formula) -> Result<CnfInstance> {
    CnfInstance::from_prenex(&prenex(f)?)
}

pub fn to_qdimacs(f: &Formula) -> Result<String> {
    Ok(to_cnf(f)?.to_qdimacs())
}
