use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::formula::{Formula, Quantifier, VarSet};

/// A closed formula as a quantifier prefix over a quantifier-free matrix.
/// Adjacent blocks always have different quantifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrenexQbf {
    pub prefix: Vec<(Quantifier, VarSet)>,
    pub matrix: Formula,
}

impl PrenexQbf {
    pub fn to_formula(&self) -> Formula {
        self.prefix
            .iter()
            .rev()
            .fold(self.matrix.clone(), |body, (q, vars)| {
                Formula::quantify(*q, vars.clone(), body)
            })
    }

    pub fn var_count(&self) -> usize {
        self.prefix.iter().map(|(_, v)| v.len()).sum()
    }
}

struct Renamer {
    taken: HashSet<String>,
    counter: usize,
}

impl Renamer {
    fn fresh(&mut self, base: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{base}__{}", self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    /// Gives every quantifier block variable a name bound nowhere else. The
    /// first binder of a name keeps it.
    fn apart(&mut self, f: &Formula, scope: &mut Vec<(String, String)>, bound: &mut HashSet<String>) -> Formula {
        match f {
            Formula::Const(c) => Formula::Const(*c),
            Formula::Var(v) => match scope.iter().rev().find(|(from, _)| from == v) {
                Some((_, to)) => Formula::Var(to.clone()),
                None => Formula::Var(v.clone()),
            },
            Formula::Not(a) => Formula::not(self.apart(a, scope, bound)),
            Formula::And(a, b) => Formula::and(self.apart(a, scope, bound), self.apart(b, scope, bound)),
            Formula::Or(a, b) => Formula::or(self.apart(a, scope, bound), self.apart(b, scope, bound)),
            Formula::Implies(a, b) => {
                Formula::implies(self.apart(a, scope, bound), self.apart(b, scope, bound))
            }
            Formula::Quant(q, vars, body) => {
                let depth = scope.len();
                let mut names = Vec::with_capacity(vars.len());
                for v in vars {
                    let to = if bound.insert(v.clone()) { v.clone() } else { self.fresh(v) };
                    bound.insert(to.clone());
                    scope.push((v.clone(), to.clone()));
                    names.push(to);
                }
                let inner = self.apart(body, scope, bound);
                scope.truncate(depth);
                Formula::Quant(*q, VarSet::new(names).expect("fresh names are distinct"), Box::new(inner))
            }
        }
    }
}

type Prefix = Vec<(Quantifier, String)>;

fn flip(prefix: Prefix) -> Prefix {
    prefix.into_iter().map(|(q, v)| (q.flip(), v)).collect()
}

/// Pulls quantifiers out of a formula whose bound names are pairwise
/// distinct and disjoint from everything else. Implications become
/// disjunctions first so negation is the only polarity switch.
fn pull(f: &Formula) -> (Prefix, Formula) {
    match f {
        Formula::Const(_) | Formula::Var(_) => (Vec::new(), f.clone()),
        Formula::Not(a) => {
            let (p, m) = pull(a);
            (flip(p), Formula::not(m))
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (mut pa, ma) = pull(a);
            let (pb, mb) = pull(b);
            pa.extend(pb);
            let m = if matches!(f, Formula::And(..)) {
                Formula::and(ma, mb)
            } else {
                Formula::or(ma, mb)
            };
            (pa, m)
        }
        Formula::Implies(a, b) => pull(&Formula::or(Formula::not((**a).clone()), (**b).clone())),
        Formula::Quant(q, vars, body) => {
            let (pb, mb) = pull(body);
            let mut p: Prefix = vars.iter().map(|v| (*q, v.clone())).collect();
            p.extend(pb);
            (p, mb)
        }
    }
}

/// Equivalent prenex form of a closed formula.
pub fn prenex(f: &Formula) -> Result<PrenexQbf> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_vec()));
    }
    let mut renamer = Renamer {
        taken: f.all_names(),
        counter: 0,
    };
    let apart = renamer.apart(f, &mut Vec::new(), &mut HashSet::new());
    let (flat, matrix) = pull(&apart);
    let mut prefix: Vec<(Quantifier, Vec<String>)> = Vec::new();
    for (q, v) in flat {
        match prefix.last_mut() {
            Some((last, names)) if *last == q => names.push(v),
            _ => prefix.push((q, vec![v])),
        }
    }
    let prefix = prefix
        .into_iter()
        .map(|(q, names)| (q, VarSet::new(names).expect("renamed apart")))
        .collect();
    Ok(PrenexQbf { prefix, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{df_formula, gdf_formula};
    use crate::fixtures;
    use crate::formula::{eval_qbf, parse};
    use std::collections::HashMap;

    fn names_of(p: &PrenexQbf) -> HashMap<String, Quantifier> {
        p.prefix
            .iter()
            .flat_map(|(q, vs)| vs.iter().map(move |v| (v.clone(), *q)))
            .collect()
    }

    #[test]
    fn already_prenex_is_unchanged() {
        let f = parse("forall p . exists q . (p -> q) & (q -> p)").unwrap();
        let p = prenex(&f).unwrap();
        assert_eq!(p.prefix.len(), 2);
        assert_eq!(p.prefix[0].1.as_slice(), ["p"]);
        assert!(p.matrix.is_quantifier_free());
        assert!(eval_qbf(&p.to_formula()).unwrap());
    }

    #[test]
    fn flips_under_negation_and_implication() {
        let f = parse("!(forall p . p) -> (exists q . q)").unwrap();
        let p = prenex(&f).unwrap();
        // !(forall p. p) on the left of -> is positive again: forall p
        assert_eq!(p.prefix[0].0, Quantifier::Forall);
        assert_eq!(eval_qbf(&p.to_formula()).unwrap(), eval_qbf(&f).unwrap());
    }

    #[test]
    fn renames_rebound_variables_apart() {
        let f = parse("(forall p . p) | (exists p . !p)").unwrap();
        let p = prenex(&f).unwrap();
        assert_eq!(p.var_count(), 2);
        let names = names_of(&p);
        assert!(names.contains_key("p"));
        assert!(names.contains_key("p__1"));
        assert!(eval_qbf(&p.to_formula()).unwrap());
    }

    #[test]
    fn merges_adjacent_blocks() {
        let f = parse("forall a . (forall b . a | b) & (forall c . c | !c)").unwrap();
        let p = prenex(&f).unwrap();
        assert_eq!(p.prefix.len(), 1);
        assert_eq!(p.prefix[0].1.as_slice(), ["a", "b", "c"]);
    }

    #[test]
    fn fixtures_preserve_truth() {
        let df = df_formula(&fixtures::pollution());
        let p = prenex(&df).unwrap();
        assert_eq!(p.prefix[0].0, Quantifier::Forall);
        assert_eq!(&p.prefix[0].1.as_slice()[..2], ["va", "vb"]);
        assert!(!eval_qbf(&p.to_formula()).unwrap());

        let gdf = gdf_formula(&fixtures::yellow_light(), 0).unwrap();
        assert!(eval_qbf(&prenex(&gdf).unwrap().to_formula()).unwrap());
    }

    #[test]
    fn rejects_open_formula() {
        assert_eq!(
            prenex(&parse("forall p . p & q").unwrap()),
            Err(Error::FreeVariables(vec!["q".into()]))
        );
    }
}
