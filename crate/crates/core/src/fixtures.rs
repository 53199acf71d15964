//! The narrative mechanisms, built in code with their canonical encodings,
//! plus the small exhaustive family used by the cross-check suites.
//!
//! The same mechanisms ship as JSON under `mechanisms/` at the workspace
//! root; a test keeps the two in sync.

use crate::formula::{Formula, VarSet};
use crate::mechanism::{ActionLabels, AgentSpec, Mechanism};

pub struct Fixture {
    /// File name under `mechanisms/`.
    pub file: &'static str,
    pub mechanism: Mechanism,
}

fn vs(names: &[&str]) -> VarSet {
    VarSet::new(names.iter().copied()).expect("distinct names")
}

fn v(name: &str) -> Formula {
    Formula::var(name)
}

fn labels(pairs: &[(&str, &[&[bool]])]) -> ActionLabels {
    let mut out = ActionLabels::new();
    for (label, encs) in pairs {
        out.insert(*label, encs.iter().map(|e| e.to_vec()).collect());
    }
    out
}

/// Uncle and lorry driver at a yellow light; `u` = uncle brakes,
/// `l` = lorry brakes. Collision iff the uncle brakes.
pub fn yellow_light() -> Mechanism {
    let act = || labels(&[("brake", &[&[true]]), ("continue", &[&[false]])]);
    Mechanism::new(
        vec![
            AgentSpec::new("uncle", vs(&["u"])).with_actions(act()),
            AgentSpec::new("lorry", vs(&["l"])).with_actions(act()),
        ],
        Formula::not(v("u")),
    )
    .expect("valid fixture")
}

/// Two factories; the fish die iff both pollute. 1 = pollute.
pub fn pollution() -> Mechanism {
    let act = || labels(&[("pollute", &[&[true]]), ("dont_pollute", &[&[false]])]);
    Mechanism::new(
        vec![
            AgentSpec::new("A", vs(&["va"])).with_actions(act()),
            AgentSpec::new("B", vs(&["vb"])).with_actions(act()),
        ],
        Formula::not(Formula::and(v("va"), v("vb"))),
    )
    .expect("valid fixture")
}

fn clemency_agents() -> [AgentSpec; 2] {
    [
        AgentSpec::new("board", vs(&["b"])).with_actions(labels(&[
            ("dont_support", &[&[false]]),
            ("support", &[&[true]]),
        ])),
        AgentSpec::new("governor", vs(&["g"])).with_actions(labels(&[
            ("dont_grant", &[&[false]]),
            ("grant", &[&[true]]),
        ])),
    ]
}

/// Parole board then governor; clemency needs both.
pub fn clemency() -> Mechanism {
    Mechanism::new(clemency_agents().to_vec(), Formula::and(v("b"), v("g"))).expect("valid fixture")
}

/// Governor decides first.
pub fn clemency_governor_first() -> Mechanism {
    clemency().reorder(&[1, 0]).expect("valid permutation")
}

const SALSA_DANCERS: [(&str, &str, &str); 3] =
    [("Ann", "a1", "a2"), ("Bob", "b1", "b2"), ("Charles", "c1", "c2")];

// colour predicates over a dancer's two bits; (1,1) is a second encoding of blue
fn red(x1: &str, x2: &str) -> Formula {
    Formula::and(Formula::not(v(x1)), Formula::not(v(x2)))
}

fn white(x1: &str, x2: &str) -> Formula {
    Formula::and(Formula::not(v(x1)), v(x2))
}

fn blue(x1: &str, _x2: &str) -> Formula {
    v(x1)
}

fn same_colour(p: (&str, &str), q: (&str, &str)) -> Formula {
    Formula::disjunction([
        Formula::and(red(p.0, p.1), red(q.0, q.1)),
        Formula::and(white(p.0, p.1), white(q.0, q.1)),
        Formula::and(blue(p.0, p.1), blue(q.0, q.1)),
    ])
}

/// Ann, Bob and Charles pick shirt colours; Ann must match at least one
/// partner. Agents listed in order Ann, Bob, Charles.
pub fn salsa() -> Mechanism {
    let agents = SALSA_DANCERS
        .iter()
        .map(|&(name, x1, x2)| {
            AgentSpec::new(name, vs(&[x1, x2])).with_actions(labels(&[
                ("red", &[&[false, false]]),
                ("white", &[&[false, true]]),
                ("blue", &[&[true, false], &[true, true]]),
            ]))
        })
        .collect();
    let gamma = Formula::or(
        same_colour(("a1", "a2"), ("b1", "b2")),
        same_colour(("a1", "a2"), ("c1", "c2")),
    );
    Mechanism::new(agents, gamma).expect("valid fixture")
}

/// Salsa with the dancers in the order given by initials, e.g. `"bca"`.
pub fn salsa_order(order: &str) -> Option<Mechanism> {
    let perm: Vec<usize> = order
        .chars()
        .map(|c| "abc".find(c.to_ascii_lowercase()))
        .collect::<Option<_>>()?;
    salsa().reorder(&perm).ok()
}

pub fn trivial(value: bool) -> Mechanism {
    Mechanism::new(vec![], Formula::Const(value)).expect("valid fixture")
}

pub fn all() -> Vec<Fixture> {
    let salsa = |o| salsa_order(o).expect("valid order");
    vec![
        Fixture { file: "yellow.json", mechanism: yellow_light() },
        Fixture { file: "pollution.json", mechanism: pollution() },
        Fixture { file: "clemency.json", mechanism: clemency() },
        Fixture { file: "clemency_governor_first.json", mechanism: clemency_governor_first() },
        Fixture { file: "salsa_abc.json", mechanism: salsa("abc") },
        Fixture { file: "salsa_bac.json", mechanism: salsa("bac") },
        Fixture { file: "salsa_bca.json", mechanism: salsa("bca") },
        Fixture { file: "salsa_cba.json", mechanism: salsa("cba") },
        Fixture { file: "trivial_true.json", mechanism: trivial(true) },
        Fixture { file: "trivial_false.json", mechanism: trivial(false) },
    ]
}

/// Disjunction of the minterms selected by `table`: row `r` (first variable
/// most significant) is a model iff bit `r` of `table` is set.
pub fn truth_table_formula(vars: &VarSet, table: u64) -> Formula {
    let n = vars.len();
    Formula::disjunction((0..1u64 << n).filter(|r| table >> r & 1 == 1).map(|row| {
        Formula::conjunction(vars.iter().enumerate().map(|(j, name)| {
            if row >> (n - 1 - j) & 1 == 1 {
                Formula::var(name.as_str())
            } else {
                Formula::not(Formula::var(name.as_str()))
            }
        }))
    }))
}

/// Every mechanism with two one-bit agents and any constraint (16), and
/// every mechanism over three bits split 1+1+1, 1+2 or 2+1 with any
/// constraint (3 x 256).
pub fn exhaustive_family() -> Vec<Mechanism> {
    let splits: [&[&[&str]]; 4] = [
        &[&["p"], &["q"]],
        &[&["p"], &["q"], &["r"]],
        &[&["p"], &["q", "r"]],
        &[&["p", "q"], &["r"]],
    ];
    let mut out = Vec::new();
    for split in splits {
        let all: Vec<&str> = split.iter().flat_map(|a| a.iter().copied()).collect();
        let vars = vs(&all);
        for table in 0..1u64 << (1 << all.len()) {
            let agents = split
                .iter()
                .enumerate()
                .map(|(i, names)| AgentSpec::new(format!("agent{}", i + 1), vs(names)))
                .collect();
            out.push(
                Mechanism::new(agents, truth_table_formula(&vars, table)).expect("valid family member"),
            );
        }
    }
    out
}
