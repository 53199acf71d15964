//! Sequential decision-making mechanisms.
//!
//! A [`Mechanism`] lists its agents in decision order. Each agent owns an
//! ordered set of Boolean variables (its action is a tuple over them) and the
//! deontic constraint is a quantifier-free formula over the union of those
//! sets. Value 0 of the constraint marks an impermissible outcome.
//!
//! Agents with an empty variable set are allowed; they have exactly one
//! action, the empty tuple.
//!
//! Internally the constraint is also compiled to a small circuit over a packed
//! `u64` assignment. Flat variable `j` (agents in order, variables in order)
//! lives at bit `total - 1 - j`, so counting upward from zero enumerates
//! profiles lexicographically by agent and then by bit, and every agent's
//! tuple is a contiguous bit field with its first variable most significant.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{check_len, is_identifier, Formula, VarSet};

/// Default cap on the total number of bits swept by brute-force checks.
pub const DEFAULT_PROFILE_BUDGET: usize = 22;

/// Hard cap imposed by the packed `u64` profile representation.
pub const MAX_PROFILE_BITS: usize = 63;

pub type BitTuple = Vec<bool>;

/// Action labels for one agent. Each label maps to one or more encodings;
/// the first is canonical, the rest are alternative bit patterns that decode
/// to the same action.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionLabels(IndexMap<String, Vec<BitTuple>>);

impl ActionLabels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: impl Into<String>, encodings: Vec<BitTuple>) -> &mut Self {
        self.0.insert(label.into(), encodings);
        self
    }

    /// Canonical encoding of `label`.
    pub fn encode(&self, label: &str) -> Option<&BitTuple> {
        self.0.get(label).and_then(|e| e.first())
    }

    pub fn decode(&self, bits: &[bool]) -> Option<&str> {
        self.0
            .iter()
            .find(|(_, encs)| encs.iter().any(|e| e.as_slice() == bits))
            .map(|(l, _)| l.as_str())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[BitTuple])> {
        self.0.iter().map(|(l, e)| (l.as_str(), e.as_slice()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EncodingRepr {
    One(Vec<u8>),
    Many(Vec<Vec<u8>>),
}

fn bits_from_u8(raw: Vec<u8>) -> std::result::Result<BitTuple, String> {
    raw.into_iter()
        .map(|b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(format!("bit value {other} is not 0 or 1")),
        })
        .collect()
}

fn bits_to_u8(bits: &[bool]) -> Vec<u8> {
    bits.iter().map(|&b| u8::from(b)).collect()
}

impl Serialize for ActionLabels {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: IndexMap<&str, EncodingRepr> = self
            .0
            .iter()
            .map(|(l, encs)| {
                let repr = if encs.len() == 1 {
                    EncodingRepr::One(bits_to_u8(&encs[0]))
                } else {
                    EncodingRepr::Many(encs.iter().map(|e| bits_to_u8(e)).collect())
                };
                (l.as_str(), repr)
            })
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ActionLabels {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = IndexMap::<String, EncodingRepr>::deserialize(d)?;
        let mut out = ActionLabels::new();
        for (label, repr) in raw {
            let encs = match repr {
                EncodingRepr::One(bits) => vec![bits_from_u8(bits)],
                EncodingRepr::Many(list) => list.into_iter().map(bits_from_u8).collect(),
            };
            let encs: Vec<BitTuple> = encs
                .into_iter()
                .collect::<std::result::Result<_, _>>()
                .map_err(serde::de::Error::custom)?;
            out.insert(label, encs);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub name: String,
    pub vars: VarSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<ActionLabels>,
}

impl AgentSpec {
    pub fn new(name: impl Into<String>, vars: VarSet) -> Self {
        AgentSpec {
            name: name.into(),
            vars,
            actions: None,
        }
    }

    pub fn with_actions(mut self, actions: ActionLabels) -> Self {
        self.actions = Some(actions);
        self
    }

    /// Human-readable name of an action tuple: its label when one decodes it,
    /// the raw bits otherwise.
    pub fn describe(&self, bits: &[bool]) -> String {
        self.actions
            .as_ref()
            .and_then(|a| a.decode(bits))
            .map(str::to_string)
            .unwrap_or_else(|| bit_string(bits))
    }
}

pub(crate) fn bit_string(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "-".into();
    }
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// One Boolean tuple per agent, in agent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActionProfile(pub Vec<BitTuple>);

impl ActionProfile {
    pub fn new(tuples: Vec<BitTuple>) -> Self {
        ActionProfile(tuples)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tuples(&self) -> &[BitTuple] {
        &self.0
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| bit_string(t)).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for ActionProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<Vec<u8>> = self.0.iter().map(|t| bits_to_u8(t)).collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ActionProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<u8>>::deserialize(d)?;
        raw.into_iter()
            .map(bits_from_u8)
            .collect::<std::result::Result<_, _>>()
            .map(ActionProfile)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
enum Gate {
    Const(bool),
    Var(u32),
    Not(Box<Gate>),
    And(Box<Gate>, Box<Gate>),
    Or(Box<Gate>, Box<Gate>),
    Implies(Box<Gate>, Box<Gate>),
}

impl Gate {
    fn compile(f: &Formula, shift: &HashMap<&str, u32>) -> Gate {
        match f {
            Formula::Const(c) => Gate::Const(*c),
            Formula::Var(v) => Gate::Var(shift[v.as_str()]),
            Formula::Not(a) => Gate::Not(Box::new(Gate::compile(a, shift))),
            Formula::And(a, b) => Gate::And(
                Box::new(Gate::compile(a, shift)),
                Box::new(Gate::compile(b, shift)),
            ),
            Formula::Or(a, b) => Gate::Or(
                Box::new(Gate::compile(a, shift)),
                Box::new(Gate::compile(b, shift)),
            ),
            Formula::Implies(a, b) => Gate::Implies(
                Box::new(Gate::compile(a, shift)),
                Box::new(Gate::compile(b, shift)),
            ),
            Formula::Quant(..) => unreachable!("constraint is validated quantifier-free"),
        }
    }

    fn eval(&self, bits: u64) -> bool {
        match self {
            Gate::Const(c) => *c,
            Gate::Var(s) => bits >> s & 1 == 1,
            Gate::Not(a) => !a.eval(bits),
            Gate::And(a, b) => a.eval(bits) && b.eval(bits),
            Gate::Or(a, b) => a.eval(bits) || b.eval(bits),
            Gate::Implies(a, b) => !a.eval(bits) || b.eval(bits),
        }
    }
}

/// The tuple (n, v, γ), validated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MechanismFile", into = "MechanismFile")]
pub struct Mechanism {
    agents: Vec<AgentSpec>,
    constraint: Formula,
    offsets: Vec<usize>,
    total_bits: usize,
    circuit: Gate,
}

impl PartialEq for Mechanism {
    fn eq(&self, other: &Self) -> bool {
        self.agents == other.agents && self.constraint == other.constraint
    }
}

impl Eq for Mechanism {}

/// On-disk JSON shape of a mechanism.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismFile {
    pub agents: Vec<AgentSpec>,
    pub constraint: String,
}

impl TryFrom<MechanismFile> for Mechanism {
    type Error = Error;
    fn try_from(file: MechanismFile) -> Result<Self> {
        let constraint = crate::formula::parse(&file.constraint)?;
        Mechanism::new(file.agents, constraint)
    }
}

impl From<Mechanism> for MechanismFile {
    fn from(m: Mechanism) -> Self {
        MechanismFile {
            constraint: m.constraint.to_string(),
            agents: m.agents,
        }
    }
}

impl Mechanism {
    pub fn new(agents: Vec<AgentSpec>, constraint: Formula) -> Result<Self> {
        let mut owner: HashMap<&str, usize> = HashMap::new();
        for (i, a) in agents.iter().enumerate() {
            for v in &a.vars {
                if !is_identifier(v) {
                    return Err(Error::InvalidName(v.clone()));
                }
                if let Some(&j) = owner.get(v.as_str()) {
                    return Err(Error::OverlappingVariables {
                        var: v.clone(),
                        first: agents[j].name.clone(),
                        second: a.name.clone(),
                    });
                }
                owner.insert(v, i);
            }
            if let Some(actions) = &a.actions {
                for (label, encs) in actions.iter() {
                    if encs.is_empty() {
                        return Err(Error::InvalidAction {
                            agent: a.name.clone(),
                            message: format!("label `{label}` has no encoding"),
                        });
                    }
                    if let Some(bad) = encs.iter().find(|e| e.len() != a.vars.len()) {
                        return Err(Error::InvalidAction {
                            agent: a.name.clone(),
                            message: format!(
                                "label `{label}` has {} bits, agent has {} variables",
                                bad.len(),
                                a.vars.len()
                            ),
                        });
                    }
                }
            }
        }
        if !constraint.is_quantifier_free() {
            return Err(Error::UnexpectedQuantifier);
        }
        if let Some(v) = constraint.free_vars().iter().find(|v| !owner.contains_key(v.as_str())) {
            return Err(Error::UnknownVariable(v.clone()));
        }

        let mut offsets = Vec::with_capacity(agents.len());
        let mut total_bits = 0;
        for a in &agents {
            offsets.push(total_bits);
            total_bits += a.vars.len();
        }
        let mut shift = HashMap::new();
        let mut j = 0;
        for a in &agents {
            for v in &a.vars {
                // positions past 64 never reach a packed evaluation
                shift.insert(v.as_str(), total_bits.saturating_sub(1 + j).min(63) as u32);
                j += 1;
            }
        }
        let circuit = Gate::compile(&constraint, &shift);
        Ok(Mechanism {
            agents,
            constraint,
            offsets,
            total_bits,
            circuit,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MechanismFile = serde_json::from_str(text)?;
        Mechanism::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mechanism serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> Result<&AgentSpec> {
        self.agents.get(i).ok_or(Error::AgentOutOfRange {
            index: i,
            agents: self.agents.len(),
        })
    }

    /// Number of agents, n.
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn constraint(&self) -> &Formula {
        &self.constraint
    }

    pub fn vars(&self, i: usize) -> &VarSet {
        &self.agents[i].vars
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    /// Concatenation of the variable sets of agents in `range`.
    pub fn vars_of(&self, range: std::ops::Range<usize>) -> VarSet {
        VarSet::new(
            self.agents[range]
                .iter()
                .flat_map(|a| a.vars.iter().cloned()),
        )
        .expect("agent variable sets are disjoint")
    }

    pub fn check_budget(&self, budget: usize) -> Result<()> {
        let budget = budget.min(MAX_PROFILE_BITS);
        if self.total_bits > budget {
            return Err(Error::BudgetExceeded {
                needed: self.total_bits,
                budget,
            });
        }
        Ok(())
    }

    /// Shift of agent `i`'s bit field in a packed assignment. Agents after
    /// `i` occupy exactly the bits below it.
    pub(crate) fn field_shift(&self, i: usize) -> u32 {
        (self.total_bits - self.offsets[i] - self.agents[i].vars.len()) as u32
    }

    pub(crate) fn eval_packed(&self, bits: u64) -> bool {
        self.circuit.eval(bits)
    }

    fn check_arity(&self, p: &ActionProfile) -> Result<()> {
        check_len(self.n(), p.len())?;
        for (a, t) in self.agents.iter().zip(p.tuples()) {
            check_len(a.vars.len(), t.len())?;
        }
        Ok(())
    }

    /// Packs a profile; requires `total_bits <= 63`.
    pub fn pack(&self, p: &ActionProfile) -> Result<u64> {
        self.check_budget(MAX_PROFILE_BITS)?;
        self.check_arity(p)?;
        Ok(p.tuples()
            .iter()
            .flatten()
            .fold(0u64, |acc, &b| acc << 1 | u64::from(b)))
    }

    pub fn unpack(&self, bits: u64) -> ActionProfile {
        let mut j = 0;
        let tuples = self
            .agents
            .iter()
            .map(|a| {
                let t = (0..a.vars.len())
                    .map(|k| bits >> (self.total_bits - 1 - (j + k)) & 1 == 1)
                    .collect();
                j += a.vars.len();
                t
            })
            .collect();
        ActionProfile(tuples)
    }

    /// All profiles, each exactly once, lexicographic by agent then bit.
    pub fn enumerate_profiles(
        &self,
        budget: usize,
    ) -> Result<impl Iterator<Item = ActionProfile> + '_> {
        self.check_budget(budget)?;
        Ok((0u64..1u64 << self.total_bits).map(move |b| self.unpack(b)))
    }

    /// Value of the constraint under `p`.
    pub fn constraint_value(&self, p: &ActionProfile) -> Result<bool> {
        self.check_arity(p)?;
        if self.total_bits <= MAX_PROFILE_BITS {
            return Ok(self.eval_packed(self.pack(p)?));
        }
        let mut val = crate::formula::Valuation::new();
        for (a, t) in self.agents.iter().zip(p.tuples()) {
            val.extend_tuple(&a.vars, t)?;
        }
        crate::formula::evaluate(&self.constraint, &val)
    }

    /// The partial mechanism after the first `k` agents chose `prefix`.
    pub fn partial(&self, k: usize, prefix: &[BitTuple]) -> Result<Mechanism> {
        if k > self.n() {
            return Err(Error::AgentOutOfRange {
                index: k,
                agents: self.n(),
            });
        }
        check_len(k, prefix.len())?;
        let mut map = HashMap::new();
        for (a, t) in self.agents[..k].iter().zip(prefix) {
            check_len(a.vars.len(), t.len())?;
            for (v, &b) in a.vars.iter().zip(t) {
                map.insert(v.as_str(), b);
            }
        }
        let constraint = self.constraint.substitute_map(&map);
        Mechanism::new(self.agents[k..].to_vec(), constraint)
    }

    /// Same variable sets and constraint with agents listed as
    /// `perm[0], perm[1], ...` (indices into the current order).
    pub fn reorder(&self, perm: &[usize]) -> Result<Mechanism> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::NotAPermutation(n));
        }
        for &i in perm {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::NotAPermutation(n));
            }
        }
        let agents = perm.iter().map(|&i| self.agents[i].clone()).collect();
        Mechanism::new(agents, self.constraint.clone())
    }

    /// Canonical encodings of one action label per agent.
    pub fn profile_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<ActionProfile> {
        check_len(self.n(), labels.len())?;
        self.agents
            .iter()
            .zip(labels)
            .map(|(a, l)| {
                let l = l.as_ref();
                let actions = a
                    .actions
                    .as_ref()
                    .ok_or_else(|| Error::MissingActions(a.name.clone()))?;
                actions
                    .encode(l)
                    .cloned()
                    .ok_or_else(|| Error::UnknownLabel {
                        agent: a.name.clone(),
                        label: l.to_string(),
                    })
            })
            .collect::<Result<_>>()
            .map(ActionProfile)
    }

    /// Parses a comma-separated profile where each item is either a bit
    /// string of the agent's arity (`0`, `10`, or empty for no variables) or
    /// an action label.
    pub fn parse_profile(&self, spec: &str) -> Result<ActionProfile> {
        let items: Vec<&str> = if self.n() == 0 && spec.trim().is_empty() {
            Vec::new()
        } else {
            spec.split(',').map(str::trim).collect()
        };
        check_len(self.n(), items.len())?;
        items
            .into_iter()
            .enumerate()
            .map(|(i, item)| self.parse_tuple(i, item))
            .collect::<Result<_>>()
            .map(ActionProfile)
    }

    /// Parses one agent's action: a bit string of its arity or a label.
    pub fn parse_tuple(&self, i: usize, item: &str) -> Result<BitTuple> {
        let a = self.agent(i)?;
        let item = item.trim();
        if item.len() == a.vars.len() && item.chars().all(|c| c == '0' || c == '1') {
            return Ok(item.chars().map(|c| c == '1').collect());
        }
        let actions = a.actions.as_ref().ok_or_else(|| Error::InvalidAction {
            agent: a.name.clone(),
            message: format!(
                "`{item}` is not a {}-bit tuple and the agent has no labels",
                a.vars.len()
            ),
        })?;
        actions
            .encode(item)
            .cloned()
            .ok_or_else(|| Error::UnknownLabel {
                agent: a.name.clone(),
                label: item.to_string(),
            })
    }

    /// One description per agent: label when available, bits otherwise.
    pub fn describe_profile(&self, p: &ActionProfile) -> Vec<String> {
        self.agents
            .iter()
            .zip(p.tuples())
            .map(|(a, t)| a.describe(t))
            .collect()
    }
}
