//! Counterfactual responsibility.
//!
//! Agent `i` is responsible under a profile when the constraint is violated
//! and, with every earlier agent's choice fixed, `i` had some action that
//! would have satisfied the constraint whatever the later agents did. The
//! formula `cf(m, i)` states the second condition symbolically; the two
//! paths are computed independently and compared.
//!
//! Agent indices are 0-based throughout.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{eval_qbf, Formula};
use crate::mechanism::{ActionProfile, BitTuple, Mechanism, DEFAULT_PROFILE_BUDGET};

/// `∃v_i ∀v_{i+1} … ∀v_{n-1} γ`, free in the variables of agents before `i`.
pub fn cf(m: &Mechanism, i: usize) -> Result<Formula> {
    m.agent(i)?;
    Ok(cf_unchecked(m, i))
}

pub(crate) fn cf_unchecked(m: &Mechanism, i: usize) -> Formula {
    Formula::exists(
        m.vars(i).clone(),
        Formula::forall(m.vars_of(i + 1..m.n()), m.constraint().clone()),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponsibilityVerdict {
    pub profile: ActionProfile,
    /// The constraint evaluates to 0 under `profile`.
    pub violates: bool,
    /// Responsible agents, ascending.
    pub responsible: Vec<usize>,
    /// One strategy per responsible agent (same order): the least tuple
    /// that forces the constraint.
    pub witnesses: Vec<ActionProfileTuple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionProfileTuple {
    pub agent: usize,
    #[serde(with = "bits_serde")]
    pub tuple: BitTuple,
}

mod bits_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        bits.iter().map(|&b| u8::from(b)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        Vec::<u8>::deserialize(d)?
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(serde::de::Error::custom("bit must be 0 or 1")),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Also evaluate `(¬γ ∧ cf_i)[p]` and fail on disagreement.
    pub cross_check: bool,
    /// Maximum number of bits any single enumeration may sweep.
    pub budget: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            cross_check: true,
            budget: DEFAULT_PROFILE_BUDGET,
        }
    }
}

fn unpack_tuple(value: u64, len: usize) -> BitTuple {
    (0..len).map(|k| value >> (len - 1 - k) & 1 == 1).collect()
}

/// Least tuple of agent `i` forcing the constraint given the earlier agents'
/// choices in `packed`, by enumeration.
fn forcing_tuple(m: &Mechanism, i: usize, packed: u64) -> Option<u64> {
    let len = m.vars(i).len();
    let shift = m.field_shift(i);
    let prefix = packed >> (shift as usize + len) << (shift as usize + len);
    (0..1u64 << len).find(|&t| {
        let base = prefix | t << shift;
        (0..1u64 << shift).all(|rest| m.eval_packed(base | rest))
    })
}

fn suffix_bits(m: &Mechanism, i: usize) -> usize {
    m.field_shift(i) as usize + m.vars(i).len()
}

/// Whether agent `i` is responsible under `p`; on success returns the least
/// forcing tuple as witness.
pub fn is_responsible(m: &Mechanism, p: &ActionProfile, i: usize) -> Result<Option<BitTuple>> {
    is_responsible_with(m, p, i, DEFAULT_PROFILE_BUDGET)
}

pub fn is_responsible_with(
    m: &Mechanism,
    p: &ActionProfile,
    i: usize,
    budget: usize,
) -> Result<Option<BitTuple>> {
    m.agent(i)?;
    let packed = m.pack(p)?;
    let needed = suffix_bits(m, i);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    if m.eval_packed(packed) {
        return Ok(None);
    }
    Ok(forcing_tuple(m, i, packed).map(|t| unpack_tuple(t, m.vars(i).len())))
}

/// Evaluates `(¬γ ∧ cf_i)[p]` as a closed formula.
pub fn cf_formula_value(m: &Mechanism, p: &ActionProfile, i: usize) -> Result<bool> {
    let f = Formula::and(Formula::not(m.constraint().clone()), cf(m, i)?);
    let mut map = HashMap::new();
    crate::formula::check_len(m.n(), p.len())?;
    for (a, t) in m.agents().iter().zip(p.tuples()) {
        crate::formula::check_len(a.vars.len(), t.len())?;
        for (v, &b) in a.vars.iter().zip(t) {
            map.insert(v.as_str(), b);
        }
    }
    eval_qbf(&f.substitute_map(&map))
}

pub fn responsible_agents(m: &Mechanism, p: &ActionProfile) -> Result<ResponsibilityVerdict> {
    responsible_agents_with(m, p, Options::default())
}

pub fn responsible_agents_with(
    m: &Mechanism,
    p: &ActionProfile,
    opts: Options,
) -> Result<ResponsibilityVerdict> {
    let violates = !m.constraint_value(p)?;
    let mut responsible = Vec::new();
    let mut witnesses = Vec::new();
    for i in 0..m.n() {
        let direct = is_responsible_with(m, p, i, opts.budget)?;
        if opts.cross_check {
            let symbolic = cf_formula_value(m, p, i)?;
            if symbolic != direct.is_some() {
                return Err(Error::Divergence {
                    class: format!("responsibility of agent {i}"),
                    brute: direct.is_some(),
                    qbf: symbolic,
                    details: format!("profile {p}\nmechanism {}", m.to_json()),
                });
            }
        }
        if let Some(t) = direct {
            responsible.push(i);
            witnesses.push(ActionProfileTuple { agent: i, tuple: t });
        }
    }
    Ok(ResponsibilityVerdict {
        profile: p.clone(),
        violates,
        responsible,
        witnesses,
    })
}

/// For every agent and every choice of the earlier agents, the least forcing
/// tuple (if any). Built in `O(n · 2^bits)` and queried per profile in
/// `O(n)`.
pub struct StrategyTable {
    tables: Vec<Vec<u64>>,
    shifts: Vec<u32>,
}

const NO_STRATEGY: u64 = u64::MAX;

impl StrategyTable {
    pub fn build(m: &Mechanism, budget: usize) -> Result<Self> {
        m.check_budget(budget)?;
        let mut tables = Vec::with_capacity(m.n());
        let mut shifts = Vec::with_capacity(m.n());
        for i in 0..m.n() {
            let shift = m.field_shift(i);
            let low = shift as usize + m.vars(i).len();
            let prefixes = 1u64 << (m.total_bits() - low);
            tables.push(
                (0..prefixes)
                    .map(|pre| forcing_tuple(m, i, pre << low).unwrap_or(NO_STRATEGY))
                    .collect(),
            );
            shifts.push(low as u32);
        }
        Ok(StrategyTable { tables, shifts })
    }

    /// Least forcing tuple of agent `i` given the prefix of `packed`,
    /// regardless of whether `packed` violates the constraint.
    pub fn strategy(&self, i: usize, packed: u64) -> Option<u64> {
        let t = self.tables[i][(packed >> self.shifts[i]) as usize];
        (t != NO_STRATEGY).then_some(t)
    }

    pub fn can_force(&self, i: usize, packed: u64) -> bool {
        self.strategy(i, packed).is_some()
    }
}
