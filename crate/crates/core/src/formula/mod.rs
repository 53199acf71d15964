//! Boolean and quantified Boolean formulas.
//!
//! A [`Formula`] is an ordinary tree: constants, variables, the four
//! connectives `!`, `&`, `|`, `->`, and universal/existential blocks over an
//! ordered list of distinct variables. Everything here is immutable and pure.

mod eval;
mod parse;
mod render;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eval::{
    eval_qbf, evaluate, semantically_equivalent, semantically_equivalent_with_budget,
    DEFAULT_EQUIVALENCE_BUDGET,
};
pub use parse::parse;

/// Words that can never name a variable.
pub const RESERVED_WORDS: [&str; 4] = ["T", "F", "forall", "exists"];

/// Returns true if `name` is a syntactically valid, non-reserved identifier.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED_WORDS.contains(&name)
}

/// An ordered list of distinct variable names.
///
/// Order matters: a Boolean tuple is paired with a `VarSet` position by
/// position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct VarSet(Vec<String>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = HashSet::with_capacity(names.len());
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateVariable(n.clone()));
            }
        }
        Ok(VarSet(names))
    }

    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// Concatenation; fails if the two sets share a name.
    pub fn concat(&self, other: &VarSet) -> Result<VarSet> {
        VarSet::new(self.0.iter().chain(other.0.iter()).cloned())
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

impl<'de> Deserialize<'de> for VarSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        VarSet::new(names).map_err(serde::de::Error::custom)
    }
}

impl<'a> IntoIterator for &'a VarSet {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(", "))
    }
}

/// A finite assignment of Boolean values to variable names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(HashMap<String, bool>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: bool) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.0.get(name).copied()
    }

    /// Pairs `vars` with `bits` positionally.
    pub fn from_tuple(vars: &VarSet, bits: &[bool]) -> Result<Self> {
        let mut v = Valuation::new();
        v.extend_tuple(vars, bits)?;
        Ok(v)
    }

    pub fn extend_tuple(&mut self, vars: &VarSet, bits: &[bool]) -> Result<()> {
        check_len(vars.len(), bits.len())?;
        for (name, &b) in vars.iter().zip(bits) {
            self.0.insert(name.clone(), b);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, bool)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (S, bool)>>(iter: I) -> Self {
        Valuation(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn flip(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Var(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Invariant: the block is non-empty. Use [`Formula::quantify`] to build.
    Quant(Quantifier, VarSet, Box<Formula>),
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

impl Formula {
    pub const TRUE: Formula = Formula::Const(true);
    pub const FALSE: Formula = Formula::Const(false);

    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Quantifies `body` over `vars`; an empty block returns `body` unchanged.
    pub fn quantify(q: Quantifier, vars: VarSet, body: Formula) -> Self {
        if vars.is_empty() {
            body
        } else {
            Formula::Quant(q, vars, Box::new(body))
        }
    }

    pub fn forall(vars: VarSet, body: Formula) -> Self {
        Self::quantify(Quantifier::Forall, vars, body)
    }

    pub fn exists(vars: VarSet, body: Formula) -> Self {
        Self::quantify(Quantifier::Exists, vars, body)
    }

    /// Left-nested conjunction; `T` when empty.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::TRUE)
    }

    /// Left-nested disjunction; `F` when empty.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::FALSE)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Var(_) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Quant(..) => false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 1,
            Formula::Not(a) | Formula::Quant(_, _, a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Variables occurring free, in order of first occurrence.
    pub fn free_vars(&self) -> VarSet {
        fn go<'a>(
            f: &'a Formula,
            bound: &mut Vec<&'a str>,
            seen: &mut HashSet<&'a str>,
            out: &mut Vec<String>,
        ) {
            match f {
                Formula::Const(_) => {}
                Formula::Var(v) => {
                    if !bound.contains(&v.as_str()) && seen.insert(v) {
                        out.push(v.clone());
                    }
                }
                Formula::Not(a) => go(a, bound, seen, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, seen, out);
                    go(b, bound, seen, out);
                }
                Formula::Quant(_, vars, body) => {
                    let depth = bound.len();
                    bound.extend(vars.iter().map(String::as_str));
                    go(body, bound, seen, out);
                    bound.truncate(depth);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut HashSet::new(), &mut out);
        VarSet(out)
    }

    /// All variable names appearing anywhere, free or bound, including binders.
    pub fn all_names(&self) -> HashSet<String> {
        fn go(f: &Formula, out: &mut HashSet<String>) {
            match f {
                Formula::Const(_) => {}
                Formula::Var(v) => {
                    out.insert(v.clone());
                }
                Formula::Not(a) => go(a, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Quant(_, vars, body) => {
                    out.extend(vars.iter().cloned());
                    go(body, out);
                }
            }
        }
        let mut out = HashSet::new();
        go(self, &mut out);
        out
    }

    /// Total number of variables bound by quantifier blocks (with multiplicity).
    pub fn bound_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 0,
            Formula::Not(a) => a.bound_count(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.bound_count() + b.bound_count()
            }
            Formula::Quant(_, vars, body) => vars.len() + body.bound_count(),
        }
    }

    /// Replaces every free occurrence of `vars[j]` by the constant `bits[j]`.
    pub fn substitute(&self, bits: &[bool], vars: &VarSet) -> Result<Formula> {
        check_len(vars.len(), bits.len())?;
        let map: HashMap<&str, bool> = vars.iter().map(String::as_str).zip(bits.iter().copied()).collect();
        Ok(self.substitute_map(&map))
    }

    pub(crate) fn substitute_map(&self, map: &HashMap<&str, bool>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Const(c) => Formula::Const(*c),
            Formula::Var(v) => match map.get(v.as_str()) {
                Some(&b) => Formula::Const(b),
                None => Formula::Var(v.clone()),
            },
            Formula::Not(a) => Formula::not(a.substitute_map(map)),
            Formula::And(a, b) => Formula::and(a.substitute_map(map), b.substitute_map(map)),
            Formula::Or(a, b) => Formula::or(a.substitute_map(map), b.substitute_map(map)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute_map(map), b.substitute_map(map))
            }
            Formula::Quant(q, vars, body) => {
                // bound occurrences are untouched
                let inner: HashMap<&str, bool> = map
                    .iter()
                    .filter(|(k, _)| !vars.contains(k))
                    .map(|(k, v)| (*k, *v))
                    .collect();
                Formula::Quant(*q, vars.clone(), Box::new(body.substitute_map(&inner)))
            }
        }
    }

    /// Simultaneous positional renaming of the free occurrences of `old[j]`
    /// into `new[j]`.
    pub fn rename(&self, new: &VarSet, old: &VarSet) -> Result<Formula> {
        check_len(old.len(), new.len())?;
        let map: HashMap<&str, &str> = old
            .iter()
            .map(String::as_str)
            .zip(new.iter().map(String::as_str))
            .collect();
        self.rename_map(&map, &mut Vec::new())
    }

    fn rename_map<'a>(&'a self, map: &HashMap<&str, &str>, bound: &mut Vec<&'a str>) -> Result<Formula> {
        Ok(match self {
            Formula::Const(c) => Formula::Const(*c),
            Formula::Var(v) => match map.get(v.as_str()) {
                Some(&to) if !bound.contains(&v.as_str()) => {
                    if to != v && bound.contains(&to) {
                        return Err(Error::VariableCapture(to.to_string()));
                    }
                    Formula::Var(to.to_string())
                }
                _ => Formula::Var(v.clone()),
            },
            Formula::Not(a) => Formula::not(a.rename_map(map, bound)?),
            Formula::And(a, b) => Formula::and(a.rename_map(map, bound)?, b.rename_map(map, bound)?),
            Formula::Or(a, b) => Formula::or(a.rename_map(map, bound)?, b.rename_map(map, bound)?),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_map(map, bound)?, b.rename_map(map, bound)?)
            }
            Formula::Quant(q, vars, body) => {
                let depth = bound.len();
                bound.extend(vars.iter().map(String::as_str));
                let inner = body.rename_map(map, bound);
                bound.truncate(depth);
                Formula::Quant(*q, vars.clone(), Box::new(inner?))
            }
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render::write_formula(f, self)
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
