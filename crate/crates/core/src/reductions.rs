//! Instance generators mapping quantified sentences to mechanisms.
//!
//! * [`df_instance`]: `∀x∃yφ` is true iff the generated mechanism is in DF.
//! * [`gf_instance`]: `∀x∃y∀zφ` is true iff the generated mechanism is in GF.
//! * [`gdf_instance`]: `∀x∃yφ` is true iff the generated mechanism is in GDF.
//!
//! The extra variables the constructions need are the reserved names in
//! [`FRESH_NAMES`], which may not appear in the source formula.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{check_df_brute, check_gdf_brute, check_gf_brute, Class};
use crate::error::{Error, Result};
use crate::formula::{eval_qbf, Formula, VarSet};
use crate::mechanism::{AgentSpec, Mechanism};

pub const FRESH_NAMES: [&str; 4] = ["_z1", "_z2", "_t", "_z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionKind {
    Df,
    Gf,
    Gdf,
}

impl ReductionKind {
    pub fn class(self) -> Class {
        match self {
            ReductionKind::Df => Class::Df,
            ReductionKind::Gf => Class::Gf,
            ReductionKind::Gdf => Class::Gdf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReductionKind::Df => "df",
            ReductionKind::Gf => "gf",
            ReductionKind::Gdf => "gdf",
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "df" => Ok(ReductionKind::Df),
            "gf" => Ok(ReductionKind::Gf),
            "gdf" => Ok(ReductionKind::Gdf),
            _ => Err(format!("unknown reduction `{s}` (expected df, gf or gdf)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionInstance {
    pub kind: ReductionKind,
    pub phi: Formula,
    /// Variable blocks of the sentence, outermost first (`x, y` or
    /// `x, y, z`).
    pub blocks: Vec<VarSet>,
    pub fresh: Vec<String>,
    pub sentence: Formula,
    pub mechanism: Mechanism,
    /// Truth of `sentence`, hence the mechanism's expected membership.
    pub expected: bool,
}

impl ReductionInstance {
    /// Membership of the generated mechanism by profile enumeration.
    pub fn brute_membership(&self, budget: usize) -> Result<bool> {
        let m = &self.mechanism;
        Ok(match self.kind {
            ReductionKind::Df => check_df_brute(m, budget)?.member,
            ReductionKind::Gf => check_gf_brute(m, budget)?.member,
            ReductionKind::Gdf => check_gdf_brute(m, budget)?.member,
        })
    }
}

fn validate(phi: &Formula, blocks: &[&VarSet]) -> Result<()> {
    if !phi.is_quantifier_free() {
        return Err(Error::UnexpectedQuantifier);
    }
    let mut all: Vec<&str> = Vec::new();
    for b in blocks {
        for v in b.iter() {
            if FRESH_NAMES.contains(&v.as_str()) {
                return Err(Error::InvalidPartition(format!("`{v}` is reserved for fresh variables")));
            }
            if all.contains(&v.as_str()) {
                return Err(Error::InvalidPartition(format!("`{v}` appears in two blocks")));
            }
            all.push(v);
        }
    }
    for v in phi.free_vars().iter() {
        if FRESH_NAMES.contains(&v.as_str()) {
            return Err(Error::InvalidPartition(format!("`{v}` is reserved for fresh variables")));
        }
        if !all.contains(&v.as_str()) {
            return Err(Error::InvalidPartition(format!("`{v}` is not assigned to any block")));
        }
    }
    Ok(())
}

fn with_fresh(vars: &VarSet, fresh: &str) -> VarSet {
    VarSet::new(vars.iter().cloned().chain([fresh.to_string()])).expect("fresh name is reserved")
}

fn agents(blocks: Vec<VarSet>) -> Vec<AgentSpec> {
    blocks
        .into_iter()
        .enumerate()
        .map(|(i, vars)| AgentSpec::new(format!("agent{}", i + 1), vars))
        .collect()
}

/// Two agents with `v1 = x ++ [_z1]`, `v2 = y ++ [_z2]` and
/// `γ = (¬φ ∧ _z1) ∨ _z2`.
pub fn df_instance(phi: &Formula, x: &VarSet, y: &VarSet) -> Result<ReductionInstance> {
    validate(phi, &[x, y])?;
    let gamma = Formula::or(
        Formula::and(Formula::not(phi.clone()), Formula::var("_z1")),
        Formula::var("_z2"),
    );
    let mechanism = Mechanism::new(agents(vec![with_fresh(x, "_z1"), with_fresh(y, "_z2")]), gamma)?;
    let sentence = Formula::forall(x.clone(), Formula::exists(y.clone(), phi.clone()));
    Ok(ReductionInstance {
        kind: ReductionKind::Df,
        phi: phi.clone(),
        blocks: vec![x.clone(), y.clone()],
        fresh: vec!["_z1".into(), "_z2".into()],
        expected: eval_qbf(&sentence)?,
        sentence,
        mechanism,
    })
}

/// Three agents with `v1 = x`, `v2 = y ++ [_t]`, `v3 = z` and `γ = φ ∧ _t`.
pub fn gf_instance(phi: &Formula, x: &VarSet, y: &VarSet, z: &VarSet) -> Result<ReductionInstance> {
    validate(phi, &[x, y, z])?;
    let gamma = Formula::and(phi.clone(), Formula::var("_t"));
    let mechanism = Mechanism::new(agents(vec![x.clone(), with_fresh(y, "_t"), z.clone()]), gamma)?;
    let sentence = Formula::forall(
        x.clone(),
        Formula::exists(y.clone(), Formula::forall(z.clone(), phi.clone())),
    );
    Ok(ReductionInstance {
        kind: ReductionKind::Gf,
        phi: phi.clone(),
        blocks: vec![x.clone(), y.clone(), z.clone()],
        fresh: vec!["_t".into()],
        expected: eval_qbf(&sentence)?,
        sentence,
        mechanism,
    })
}

/// Two agents with `v1 = x`, `v2 = y ++ [_z]` and `γ = φ ∧ _z`.
pub fn gdf_instance(phi: &Formula, x: &VarSet, y: &VarSet) -> Result<ReductionInstance> {
    validate(phi, &[x, y])?;
    let gamma = Formula::and(phi.clone(), Formula::var("_z"));
    let mechanism = Mechanism::new(agents(vec![x.clone(), with_fresh(y, "_z")]), gamma)?;
    let sentence = Formula::forall(x.clone(), Formula::exists(y.clone(), phi.clone()));
    Ok(ReductionInstance {
        kind: ReductionKind::Gdf,
        phi: phi.clone(),
        blocks: vec![x.clone(), y.clone()],
        fresh: vec!["_z".into()],
        expected: eval_qbf(&sentence)?,
        sentence,
        mechanism,
    })
}

/// Dispatches on `kind`; `blocks` must have 3 entries for GF and 2
/// otherwise.
pub fn instance(kind: ReductionKind, phi: &Formula, blocks: &[VarSet]) -> Result<ReductionInstance> {
    match (kind, blocks) {
        (ReductionKind::Df, [x, y]) => df_instance(phi, x, y),
        (ReductionKind::Gdf, [x, y]) => gdf_instance(phi, x, y),
        (ReductionKind::Gf, [x, y, z]) => gf_instance(phi, x, y, z),
        _ => Err(Error::InvalidPartition(format!(
            "{kind} reduction takes {} blocks, got {}",
            if kind == ReductionKind::Gf { 3 } else { 2 },
            blocks.len()
        ))),
    }
}

/// Variables `v1..v<nvars>`.
pub fn standard_vars(nvars: usize) -> VarSet {
    VarSet::new((1..=nvars).map(|i| format!("v{i}"))).expect("distinct names")
}

/// Deterministic random quantifier-free formula over `v1..v<nvars>` with at
/// most `size` connective nodes.
pub fn random_formula(seed: u64, nvars: usize, size: usize) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(&mut rng, nvars, size)
}

fn grow(rng: &mut ChaCha8Rng, nvars: usize, size: usize) -> Formula {
    if size == 0 {
        return if nvars == 0 || rng.gen_ratio(1, 10) {
            Formula::Const(rng.gen())
        } else {
            Formula::var(format!("v{}", rng.gen_range(1..=nvars)))
        };
    }
    let op = rng.gen_range(0..4);
    if op == 0 {
        return Formula::not(grow(rng, nvars, size - 1));
    }
    let left = rng.gen_range(0..size);
    let a = grow(rng, nvars, left);
    let b = grow(rng, nvars, size - 1 - left);
    match op {
        1 => Formula::and(a, b),
        2 => Formula::or(a, b),
        _ => Formula::implies(a, b),
    }
}

/// Splits `vars` into `parts` blocks, each variable landing in a uniformly
/// random block.
pub fn random_partition(seed: u64, vars: &VarSet, parts: usize) -> Vec<VarSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = vec![Vec::new(); parts];
    if parts > 0 {
        for v in vars {
            blocks[rng.gen_range(0..parts)].push(v.clone());
        }
    }
    blocks
        .into_iter()
        .map(|b| VarSet::new(b).expect("subset of a VarSet"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{evaluate, parse, Valuation};
    use crate::responsibility::is_responsible;
    use crate::DEFAULT_PROFILE_BUDGET as B;

    fn vs(names: &[&str]) -> VarSet {
        VarSet::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn df_examples() {
        let i = df_instance(&parse("y1").unwrap(), &vs(&["x1"]), &vs(&["y1"])).unwrap();
        assert!(i.expected);
        assert!(i.brute_membership(B).unwrap());
        assert_eq!(i.mechanism.vars(0).as_slice(), ["x1", "_z1"]);

        let i = df_instance(&parse("x1 & !x1").unwrap(), &vs(&["x1"]), &vs(&[])).unwrap();
        assert!(!i.expected);
        let c = check_df_brute(&i.mechanism, B).unwrap();
        assert!(!c.member);
        // the diffusion witness has both fresh bits at 0
        let p = c.witness.unwrap().profile().clone();
        assert_eq!((p.0[0].last(), p.0[1].last()), (Some(&false), Some(&false)));

        let i = df_instance(&Formula::TRUE, &vs(&[]), &vs(&[])).unwrap();
        assert!(i.expected && i.brute_membership(B).unwrap());
    }

    #[test]
    fn df_first_agent_never_responsible_when_true() {
        let i = df_instance(&parse("x1 -> y1").unwrap(), &vs(&["x1"]), &vs(&["y1"])).unwrap();
        assert!(i.expected);
        for p in i.mechanism.enumerate_profiles(B).unwrap() {
            assert_eq!(is_responsible(&i.mechanism, &p, 0).unwrap(), None);
        }
    }

    #[test]
    fn gf_examples() {
        let (x, y, z) = (vs(&["x1"]), vs(&["y1"]), vs(&["z1"]));
        let i = gf_instance(&parse("y1").unwrap(), &x, &y, &z).unwrap();
        assert!(i.expected && i.brute_membership(B).unwrap());

        let i = gf_instance(&parse("z1").unwrap(), &x, &y, &z).unwrap();
        assert!(!i.expected);
        let c = check_gf_brute(&i.mechanism, B).unwrap();
        assert!(!c.member);
        let p = c.witness.unwrap().profile().clone();
        assert_eq!(p.0[1].last(), Some(&false));

        let i = gf_instance(&Formula::FALSE, &x, &y, &z).unwrap();
        assert!(!i.expected && !i.brute_membership(B).unwrap());
    }

    #[test]
    fn gdf_examples() {
        let i = gdf_instance(&parse("y1").unwrap(), &vs(&["x1"]), &vs(&["y1"])).unwrap();
        assert!(i.expected && i.brute_membership(B).unwrap());

        let i = gdf_instance(&parse("!x1").unwrap(), &vs(&["x1"]), &vs(&["y1"])).unwrap();
        assert!(!i.expected && !i.brute_membership(B).unwrap());

        let i = gdf_instance(&Formula::TRUE, &vs(&[]), &vs(&[])).unwrap();
        assert_eq!(i.mechanism.constraint(), &parse("T & _z").unwrap());
        assert!(i.expected && i.brute_membership(B).unwrap());
    }

    #[test]
    fn partition_errors() {
        let phi = parse("x1 & y1").unwrap();
        assert!(matches!(
            df_instance(&phi, &vs(&["x1"]), &vs(&[])),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            df_instance(&phi, &vs(&["x1", "y1"]), &vs(&["y1"])),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            gdf_instance(&parse("_z").unwrap(), &vs(&[]), &vs(&["_z"])),
            Err(Error::InvalidPartition(_))
        ));
        assert!(matches!(
            instance(ReductionKind::Gf, &phi, &[vs(&["x1"]), vs(&["y1"])]),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn random_formulas() {
        assert!(matches!(random_formula(0, 0, 0), Formula::Const(_)));
        assert_eq!(
            random_formula(42, 5, 12).to_string(),
            random_formula(42, 5, 12).to_string()
        );
        let f = random_formula(7, 4, 10);
        assert!(f.size() <= 21);
        let vars = standard_vars(4);
        for row in 0u32..16 {
            let bits: Vec<bool> = (0..4).map(|j| row >> (3 - j) & 1 == 1).collect();
            let val = Valuation::from_tuple(&vars, &bits).unwrap();
            let closed = f.substitute(&bits, &vars).unwrap();
            assert_eq!(eval_qbf(&closed).unwrap(), evaluate(&f, &val).unwrap());
        }
    }

    #[test]
    fn random_partitions_cover() {
        let vars = standard_vars(6);
        let parts = random_partition(3, &vars, 3);
        assert_eq!(parts.len(), 3);
        assert_eq!(parts.iter().map(VarSet::len).sum::<usize>(), 6);
        assert_eq!(parts, random_partition(3, &vars, 3));
    }
}
