//! Membership in the four classes of mechanisms.
//!
//! * DF: no violating profile has two or more responsible agents.
//! * GF: no violating profile has zero responsible agents.
//! * RF: no agent is ever responsible.
//! * GDF: every violating profile has exactly one responsible agent.
//!
//! Each class is decided by a sweep over all profiles and by evaluating a
//! closed quantified formula; [`classify`] can run both and compare.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{eval_qbf, Formula, VarSet};
use crate::mechanism::{ActionProfile, Mechanism};
use crate::responsibility::{cf_unchecked, StrategyTable};

/// Suffix appended to variable names to form the primed copies in `rf_k`.
pub const PRIME_SUFFIX: &str = "__p";

/// Largest agent count accepted by [`orders`].
pub const MAX_ORDER_AGENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Df,
    Gf,
    Rf,
    Gdf,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::Df, Class::Gf, Class::Rf, Class::Gdf];

    pub fn name(self) -> &'static str {
        match self {
            Class::Df => "DF",
            Class::Gf => "GF",
            Class::Rf => "RF",
            Class::Gdf => "GDF",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "df" => Ok(Class::Df),
            "gf" => Ok(Class::Gf),
            "rf" => Ok(Class::Rf),
            "gdf" => Ok(Class::Gdf),
            _ => Err(format!("unknown class `{s}` (expected df, gf, rf or gdf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Qbf,
    Both,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "brute" => Ok(Method::Brute),
            "qbf" => Ok(Method::Qbf),
            "both" => Ok(Method::Both),
            _ => Err(format!("unknown method `{s}` (expected brute, qbf or both)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Qbf => "qbf",
            Method::Both => "both",
        })
    }
}

/// A counterexample to membership.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A violating profile with (at least) these two responsible agents.
    Diffusion {
        profile: ActionProfile,
        agents: [usize; 2],
    },
    /// A violating profile with nobody responsible.
    Gap { profile: ActionProfile },
    /// A profile under which `agent` is responsible.
    Responsible { profile: ActionProfile, agent: usize },
}

impl Witness {
    pub fn profile(&self) -> &ActionProfile {
        match self {
            Witness::Diffusion { profile, .. }
            | Witness::Gap { profile }
            | Witness::Responsible { profile, .. } => profile,
        }
    }

    /// One-line description using action labels where the mechanism has
    /// them.
    pub fn describe(&self, m: &Mechanism) -> String {
        let shown = m.describe_profile(self.profile()).join(", ");
        let name = |i: usize| m.agents()[i].name.as_str();
        match self {
            Witness::Diffusion { agents: [a, b], .. } => {
                format!("({shown}): {} and {} both responsible", name(*a), name(*b))
            }
            Witness::Gap { .. } => format!("({shown}): violation with nobody responsible"),
            Witness::Responsible { agent, .. } => format!("({shown}): {} responsible", name(*agent)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub member: bool,
    pub witness: Option<Witness>,
}

impl Check {
    fn from_witness(witness: Option<Witness>) -> Self {
        Check {
            member: witness.is_none(),
            witness,
        }
    }
}

/// First counterexample of each kind, in profile order.
struct Sweep {
    diffusion: Option<Witness>,
    gap: Option<Witness>,
    responsible: Option<Witness>,
    not_gdf: Option<Witness>,
}

fn sweep(m: &Mechanism, budget: usize) -> Result<Sweep> {
    let table = StrategyTable::build(m, budget)?;
    let mut s = Sweep {
        diffusion: None,
        gap: None,
        responsible: None,
        not_gdf: None,
    };
    for bits in 0..1u64 << m.total_bits() {
        if m.eval_packed(bits) {
            continue;
        }
        let mut who = (0..m.n()).filter(|&i| table.can_force(i, bits));
        let first = who.next();
        let second = first.and_then(|_| who.next());
        let profile = || m.unpack(bits);
        match (first, second) {
            (None, _) => {
                if s.gap.is_none() {
                    s.gap = Some(Witness::Gap { profile: profile() });
                }
            }
            (Some(a), Some(b)) => {
                if s.diffusion.is_none() {
                    s.diffusion = Some(Witness::Diffusion {
                        profile: profile(),
                        agents: [a, b],
                    });
                }
            }
            (Some(_), None) => {}
        }
        if let (Some(agent), None) = (first, &s.responsible) {
            s.responsible = Some(Witness::Responsible {
                profile: profile(),
                agent,
            });
        }
        if s.not_gdf.is_none() {
            s.not_gdf = s.gap.clone().or_else(|| s.diffusion.clone());
        }
        if s.diffusion.is_some() && s.gap.is_some() && s.responsible.is_some() {
            break;
        }
    }
    Ok(s)
}

pub fn check_df_brute(m: &Mechanism, budget: usize) -> Result<Check> {
    Ok(Check::from_witness(sweep(m, budget)?.diffusion))
}

pub fn check_gf_brute(m: &Mechanism, budget: usize) -> Result<Check> {
    Ok(Check::from_witness(sweep(m, budget)?.gap))
}

pub fn check_rf_brute(m: &Mechanism, budget: usize) -> Result<Check> {
    Ok(Check::from_witness(sweep(m, budget)?.responsible))
}

pub fn check_gdf_brute(m: &Mechanism, budget: usize) -> Result<Check> {
    Ok(Check::from_witness(sweep(m, budget)?.not_gdf))
}

fn all_vars(m: &Mechanism) -> VarSet {
    m.vars_of(0..m.n())
}

/// `∀v (⋁_{i<j} (cf_i ∧ cf_j) → γ)`. Each unordered pair appears once.
pub fn df_formula(m: &Mechanism) -> Formula {
    let pairs = (0..m.n())
        .tuple_combinations()
        .map(|(i, j)| Formula::and(cf_unchecked(m, i), cf_unchecked(m, j)));
    Formula::forall(
        all_vars(m),
        Formula::implies(Formula::disjunction(pairs), m.constraint().clone()),
    )
}

/// `∀v (¬γ → ⋁_i cf_i)`.
pub fn gf_formula(m: &Mechanism) -> Formula {
    Formula::forall(
        all_vars(m),
        Formula::implies(
            Formula::not(m.constraint().clone()),
            Formula::disjunction((0..m.n()).map(|i| cf_unchecked(m, i))),
        ),
    )
}

fn check_k(m: &Mechanism, k: usize) -> Result<()> {
    if k > m.n() {
        return Err(Error::AgentOutOfRange {
            index: k,
            agents: m.n(),
        });
    }
    Ok(())
}

/// `∀v_k … ∀v_{n-1} ∀v'_k … ∀v'_{n-1} (γ → γ⟨v'/v⟩)`, free in the variables
/// of the first `k` agents. Primed copies are named `<var>__p`.
pub fn rf_formula(m: &Mechanism, k: usize) -> Result<Formula> {
    check_k(m, k)?;
    let suffix = m.vars_of(k..m.n());
    let taken = all_vars(m);
    let primed = VarSet::new(suffix.iter().map(|v| format!("{v}{PRIME_SUFFIX}")))?;
    if let Some(clash) = primed.iter().find(|p| taken.contains(p)) {
        return Err(Error::FreshCollision(clash.clone()));
    }
    let gamma = m.constraint();
    let body = Formula::implies(gamma.clone(), gamma.rename(&primed, &suffix)?);
    Ok(Formula::forall(suffix, Formula::forall(primed, body)))
}

/// Backward induction: `gdf_n = γ` and, for `k < n`,
/// `gdf_k = (C ∧ ∀v_k rf_{k+1}) ∨ (¬C ∧ ∀v_k gdf_{k+1})` with
/// `C = ∃v_k ∀v_{k+1} … ∀v_{n-1} γ`. Free in the variables of the first `k`
/// agents. Each level embeds the next one once.
pub fn gdf_formula(m: &Mechanism, k: usize) -> Result<Formula> {
    check_k(m, k)?;
    let mut g = m.constraint().clone();
    for j in (k..m.n()).rev() {
        let c = cf_unchecked(m, j);
        let vj = m.vars(j).clone();
        let green = Formula::and(c.clone(), Formula::forall(vj.clone(), rf_formula(m, j + 1)?));
        let plain = Formula::and(Formula::not(c), Formula::forall(vj, g));
        g = Formula::or(green, plain);
    }
    Ok(g)
}

pub fn class_formula(m: &Mechanism, class: Class) -> Result<Formula> {
    match class {
        Class::Df => Ok(df_formula(m)),
        Class::Gf => Ok(gf_formula(m)),
        Class::Rf => rf_formula(m, 0),
        Class::Gdf => gdf_formula(m, 0),
    }
}

/// Naive expansion of the class formulas costs roughly the square of the
/// profile count, so the bit budget is charged twice.
fn check_qbf_budget(m: &Mechanism, budget: usize) -> Result<()> {
    let needed = 2 * m.total_bits();
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

pub fn check_qbf(m: &Mechanism, class: Class, budget: usize) -> Result<bool> {
    check_qbf_budget(m, budget)?;
    eval_qbf(&class_formula(m, class)?)
}

/// GDF decided through the layer recursion: if the first agent can force
/// the constraint, the mechanism is in GDF iff every one-step partial
/// mechanism is in RF; otherwise iff every one-step partial mechanism is in
/// GDF. A mechanism without agents is in GDF iff its constraint holds.
pub fn check_gdf_recursive(m: &Mechanism, budget: usize) -> Result<bool> {
    m.check_budget(budget)?;
    gdf_rec(m, budget)
}

fn gdf_rec(m: &Mechanism, budget: usize) -> Result<bool> {
    if m.n() == 0 {
        return Ok(m.eval_packed(0));
    }
    let len = m.vars(0).len();
    let rest = m.total_bits() - len;
    let green = (0..1u64 << len).any(|t| (0..1u64 << rest).all(|c| m.eval_packed(t << rest | c)));
    for t in 0..1u64 << len {
        let s: Vec<bool> = (0..len).map(|k| t >> (len - 1 - k) & 1 == 1).collect();
        let sub = m.partial(1, &[s])?;
        let ok = if green {
            check_rf_brute(&sub, budget)?.member
        } else {
            gdf_rec(&sub, budget)?
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub member: bool,
    pub witness: Option<Witness>,
    pub method: Method,
    pub elapsed_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub agents: Vec<String>,
    pub total_bits: usize,
    pub method: Method,
    pub df: ClassVerdict,
    pub gf: ClassVerdict,
    pub rf: ClassVerdict,
    pub gdf: ClassVerdict,
    pub elapsed_us: u64,
}

impl ClassificationReport {
    pub fn verdict(&self, class: Class) -> &ClassVerdict {
        match class {
            Class::Df => &self.df,
            Class::Gf => &self.gf,
            Class::Rf => &self.rf,
            Class::Gdf => &self.gdf,
        }
    }

    pub fn member(&self, class: Class) -> bool {
        self.verdict(class).member
    }
}

fn micros(start: Instant) -> u64 {
    start.elapsed().as_micros() as u64
}

fn divergence(m: &Mechanism, class: Class, brute: bool, qbf: bool) -> Error {
    let formula = class_formula(m, class)
        .map(|f| f.to_string())
        .unwrap_or_else(|e| e.to_string());
    Error::Divergence {
        class: class.name().into(),
        brute,
        qbf,
        details: format!("mechanism:\n{}\nformula:\n{formula}", m.to_json()),
    }
}

/// Decides all four classes. With [`Method::Both`] the brute-force and
/// formula verdicts must agree, otherwise [`Error::Divergence`] is returned
/// carrying the mechanism and the formula.
pub fn classify(m: &Mechanism, method: Method, budget: usize) -> Result<ClassificationReport> {
    let start = Instant::now();
    let brute = if method != Method::Qbf {
        let t = Instant::now();
        let s = sweep(m, budget)?;
        Some((s, micros(t)))
    } else {
        None
    };
    if method != Method::Brute {
        check_qbf_budget(m, budget)?;
    }
    // the sweep is shared, so its time is split evenly across classes
    let shared = brute.as_ref().map_or(0, |(_, us)| us / 4);
    let mut verdicts = Vec::with_capacity(4);
    for class in Class::ALL {
        let brute_check = brute.as_ref().map(|(s, _)| {
            Check::from_witness(match class {
                Class::Df => s.diffusion.clone(),
                Class::Gf => s.gap.clone(),
                Class::Rf => s.responsible.clone(),
                Class::Gdf => s.not_gdf.clone(),
            })
        });
        let t = Instant::now();
        let qbf = if method != Method::Brute {
            Some(eval_qbf(&class_formula(m, class)?)?)
        } else {
            None
        };
        let elapsed_us = micros(t) + shared;
        let (member, witness) = match (brute_check, qbf) {
            (Some(b), Some(q)) if b.member != q => return Err(divergence(m, class, b.member, q)),
            (Some(b), _) => (b.member, b.witness),
            (None, Some(q)) => (q, None),
            (None, None) => unreachable!("some method always runs"),
        };
        verdicts.push(ClassVerdict {
            member,
            witness,
            method,
            elapsed_us,
        });
    }
    let mut it = verdicts.into_iter();
    let mut next = || it.next().expect("four verdicts");
    Ok(ClassificationReport {
        agents: m.agents().iter().map(|a| a.name.clone()).collect(),
        total_bits: m.total_bits(),
        method,
        df: next(),
        gf: next(),
        rf: next(),
        gdf: next(),
        elapsed_us: micros(start),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRow {
    /// `perm[j]` is the original index of the agent deciding `j`-th.
    pub perm: Vec<usize>,
    pub names: Vec<String>,
    pub report: ClassificationReport,
}

/// Classifies the mechanism under every decision order.
pub fn orders(m: &Mechanism, method: Method, budget: usize) -> Result<Vec<OrderRow>> {
    if m.n() > MAX_ORDER_AGENTS {
        return Err(Error::TooManyOrders {
            agents: m.n(),
            max: MAX_ORDER_AGENTS,
        });
    }
    (0..m.n())
        .permutations(m.n())
        .map(|perm| {
            let r = m.reorder(&perm)?;
            Ok(OrderRow {
                names: r.agents().iter().map(|a| a.name.clone()).collect(),
                report: classify(&r, method, budget)?,
                perm,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse;
    use crate::mechanism::{AgentSpec, DEFAULT_PROFILE_BUDGET as B};

    fn profile(items: &[&str]) -> ActionProfile {
        ActionProfile(items.iter().map(|s| s.chars().map(|c| c == '1').collect()).collect())
    }

    fn one_agent(gamma: &str) -> Mechanism {
        Mechanism::new(vec![AgentSpec::new("a", VarSet::new(["p"]).unwrap())], parse(gamma).unwrap()).unwrap()
    }

    #[test]
    fn df_brute() {
        assert_eq!(
            check_df_brute(&fixtures::pollution(), B).unwrap(),
            Check {
                member: false,
                witness: Some(Witness::Diffusion {
                    profile: profile(&["1", "1"]),
                    agents: [0, 1]
                })
            }
        );
        assert!(check_df_brute(&fixtures::yellow_light(), B).unwrap().member);
        assert!(check_df_brute(&fixtures::trivial(false), B).unwrap().member);
    }

    #[test]
    fn gf_brute() {
        for m in [fixtures::clemency(), fixtures::clemency_governor_first()] {
            let c = check_gf_brute(&m, B).unwrap();
            assert_eq!(c.witness, Some(Witness::Gap { profile: profile(&["0", "0"]) }));
        }
        assert!(check_gf_brute(&fixtures::pollution(), B).unwrap().member);
        assert!(check_gf_brute(&fixtures::salsa_order("bca").unwrap(), B).unwrap().member);
    }

    #[test]
    fn rf_brute() {
        let c = check_rf_brute(&fixtures::clemency(), B).unwrap();
        assert!(!c.member);
        // the governor is responsible under (1,0)
        assert!(
            fixtures::clemency().enumerate_profiles(B).unwrap().any(|p| p == profile(&["1", "0"])
                && crate::is_responsible(&fixtures::clemency(), &p, 1).unwrap().is_some())
        );
        assert_eq!(
            c.witness,
            Some(Witness::Responsible {
                profile: profile(&["1", "0"]),
                agent: 1
            })
        );
        assert!(check_rf_brute(&one_agent("T"), B).unwrap().member);
        assert!(check_rf_brute(&one_agent("F"), B).unwrap().member);
    }

    #[test]
    fn gdf_brute() {
        assert!(check_gdf_brute(&fixtures::yellow_light(), B).unwrap().member);
        let abc = check_gdf_brute(&fixtures::salsa(), B).unwrap();
        assert!(matches!(abc.witness, Some(Witness::Diffusion { .. })));
        assert!(check_gdf_brute(&fixtures::salsa_order("bca").unwrap(), B).unwrap().member);
    }

    #[test]
    fn formulas_match_brute_on_fixtures() {
        assert!(!eval_qbf(&df_formula(&fixtures::pollution())).unwrap());
        assert!(eval_qbf(&df_formula(&fixtures::yellow_light())).unwrap());
        assert_eq!(df_formula(&one_agent("p")), parse("forall p . F -> p").unwrap());
        assert!(eval_qbf(&df_formula(&one_agent("p"))).unwrap());

        assert!(!eval_qbf(&gf_formula(&fixtures::clemency())).unwrap());
        assert!(eval_qbf(&gf_formula(&fixtures::pollution())).unwrap());
        assert!(eval_qbf(&gf_formula(&fixtures::trivial(true))).unwrap());
        assert!(!eval_qbf(&gf_formula(&fixtures::trivial(false))).unwrap());

        assert!(!eval_qbf(&rf_formula(&fixtures::clemency(), 0).unwrap()).unwrap());
        assert!(eval_qbf(&rf_formula(&one_agent("T"), 0).unwrap()).unwrap());

        assert!(eval_qbf(&gdf_formula(&fixtures::yellow_light(), 0).unwrap()).unwrap());
        assert!(!eval_qbf(&gdf_formula(&fixtures::salsa(), 0).unwrap()).unwrap());
    }

    #[test]
    fn rf_at_n_is_tautology_shape() {
        let m = fixtures::clemency();
        assert_eq!(rf_formula(&m, 2).unwrap(), parse("b & g -> b & g").unwrap());
        assert_eq!(
            rf_formula(&m, 1).unwrap(),
            parse("forall g . forall g__p . b & g -> b & g__p").unwrap()
        );
        assert_eq!(rf_formula(&m, 1).unwrap().free_vars().as_slice(), ["b"]);
        assert!(matches!(rf_formula(&m, 3), Err(Error::AgentOutOfRange { .. })));
    }

    #[test]
    fn rf_detects_prime_collision() {
        let m = Mechanism::new(
            vec![
                AgentSpec::new("a", VarSet::new(["p"]).unwrap()),
                AgentSpec::new("b", VarSet::new(["p__p"]).unwrap()),
            ],
            parse("p & p__p").unwrap(),
        )
        .unwrap();
        assert_eq!(rf_formula(&m, 0), Err(Error::FreshCollision("p__p".into())));
    }

    #[test]
    fn gdf_base_case_and_free_vars() {
        let m = fixtures::salsa();
        assert_eq!(gdf_formula(&m, 3).unwrap(), *m.constraint());
        assert_eq!(gdf_formula(&m, 1).unwrap().free_vars().as_slice(), ["a1", "a2"]);
        assert!(gdf_formula(&m, 0).unwrap().is_closed());
    }

    #[test]
    fn classify_examples() {
        let r = classify(&fixtures::yellow_light(), Method::Both, B).unwrap();
        assert_eq!(
            [r.df.member, r.gf.member, r.gdf.member, r.rf.member],
            [true, true, true, false]
        );
        let r = classify(&fixtures::clemency(), Method::Both, B).unwrap();
        assert_eq!(
            [r.df.member, r.gf.member, r.gdf.member, r.rf.member],
            [true, false, false, false]
        );
        let r = classify(&fixtures::trivial(false), Method::Both, B).unwrap();
        assert_eq!(
            [r.df.member, r.gf.member, r.gdf.member, r.rf.member],
            [true, false, false, true]
        );
        assert_eq!(r.gf.witness, Some(Witness::Gap { profile: ActionProfile(vec![]) }));
    }

    #[test]
    fn qbf_only_has_no_witness() {
        let r = classify(&fixtures::pollution(), Method::Qbf, B).unwrap();
        assert!(!r.df.member);
        assert_eq!(r.df.witness, None);
        assert_eq!(r.df.method, Method::Qbf);
    }

    #[test]
    fn report_json_round_trip() {
        let r = classify(&fixtures::salsa(), Method::Both, B).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.find("\"df\"").unwrap() < text.find("\"gdf\"").unwrap());
        let back: ClassificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn budgets() {
        assert!(matches!(
            classify(&fixtures::salsa(), Method::Brute, 5),
            Err(Error::BudgetExceeded { needed: 6, budget: 5 })
        ));
        assert!(matches!(
            classify(&fixtures::salsa(), Method::Qbf, 11),
            Err(Error::BudgetExceeded { needed: 12, budget: 11 })
        ));
    }

    #[test]
    fn recursive_gdf_on_fixtures() {
        for f in fixtures::all() {
            assert_eq!(
                check_gdf_recursive(&f.mechanism, B).unwrap(),
                check_gdf_brute(&f.mechanism, B).unwrap().member,
                "{}",
                f.file
            );
        }
    }

    #[test]
    fn salsa_orders() {
        let rows = orders(&fixtures::salsa(), Method::Brute, B).unwrap();
        assert_eq!(rows.len(), 6);
        let gdf: Vec<String> = rows
            .iter()
            .filter(|r| r.report.gdf.member)
            .map(|r| r.names.iter().map(|n| &n[..1]).collect())
            .collect();
        assert_eq!(gdf, ["BCA", "CBA"]);

        let rows = orders(&fixtures::clemency(), Method::Both, B).unwrap();
        assert!(rows.iter().all(|r| !r.report.gf.member));
        assert_eq!(orders(&one_agent("p"), Method::Both, B).unwrap().len(), 1);
    }
}
