use super::{Formula, Quantifier, Valuation, VarSet};
use crate::error::{Error, Result};

/// Default cap on free plus bound variables for [`semantically_equivalent`].
pub const DEFAULT_EQUIVALENCE_BUDGET: usize = 20;

/// Standard Boolean semantics of a quantifier-free formula.
pub fn evaluate(f: &Formula, val: &Valuation) -> Result<bool> {
    Ok(match f {
        Formula::Const(c) => *c,
        Formula::Var(v) => val
            .get(v)
            .ok_or_else(|| Error::UnboundVariable(v.clone()))?,
        Formula::Not(a) => !evaluate(a, val)?,
        Formula::And(a, b) => evaluate(a, val)? && evaluate(b, val)?,
        Formula::Or(a, b) => evaluate(a, val)? || evaluate(b, val)?,
        Formula::Implies(a, b) => !evaluate(a, val)? || evaluate(b, val)?,
        Formula::Quant(..) => return Err(Error::UnexpectedQuantifier),
    })
}

/// Truth value of a closed quantified Boolean formula by naive expansion:
/// a universal block is the conjunction over both values of each bound
/// variable, an existential block the disjunction.
pub fn eval_qbf(f: &Formula) -> Result<bool> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free.into_vec()));
    }
    eval_in(f, &mut Vec::new(), &Valuation::new())
}

/// Evaluates `f` with bound variables held on `env` (innermost last) and
/// free variables looked up in `outer`.
pub(crate) fn eval_in<'a>(
    f: &'a Formula,
    env: &mut Vec<(&'a str, bool)>,
    outer: &Valuation,
) -> Result<bool> {
    Ok(match f {
        Formula::Const(c) => *c,
        Formula::Var(v) => match env.iter().rev().find(|(n, _)| *n == v) {
            Some(&(_, b)) => b,
            None => outer
                .get(v)
                .ok_or_else(|| Error::UnboundVariable(v.clone()))?,
        },
        Formula::Not(a) => !eval_in(a, env, outer)?,
        Formula::And(a, b) => eval_in(a, env, outer)? && eval_in(b, env, outer)?,
        Formula::Or(a, b) => eval_in(a, env, outer)? || eval_in(b, env, outer)?,
        Formula::Implies(a, b) => !eval_in(a, env, outer)? || eval_in(b, env, outer)?,
        Formula::Quant(q, vars, body) => expand(*q, vars.as_slice(), body, env, outer)?,
    })
}

fn expand<'a>(
    q: Quantifier,
    vars: &'a [String],
    body: &'a Formula,
    env: &mut Vec<(&'a str, bool)>,
    outer: &Valuation,
) -> Result<bool> {
    let Some((first, rest)) = vars.split_first() else {
        return eval_in(body, env, outer);
    };
    // forall: stop at the first false branch; exists: at the first true one
    let short_circuit = q == Quantifier::Exists;
    for value in [false, true] {
        env.push((first, value));
        let r = expand(q, rest, body, env, outer);
        env.pop();
        if r? == short_circuit {
            return Ok(short_circuit);
        }
    }
    Ok(!short_circuit)
}

/// Whether `f` and `g` agree under every valuation of their free variables,
/// with the default enumeration budget.
pub fn semantically_equivalent(f: &Formula, g: &Formula) -> Result<bool> {
    semantically_equivalent_with_budget(f, g, DEFAULT_EQUIVALENCE_BUDGET)
}

pub fn semantically_equivalent_with_budget(f: &Formula, g: &Formula, budget: usize) -> Result<bool> {
    let mut names = f.free_vars().into_vec();
    for v in &g.free_vars() {
        if !names.contains(v) {
            names.push(v.clone());
        }
    }
    let needed = names.len() + f.bound_count().max(g.bound_count());
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let vars = VarSet::new(names)?;
    let mut bits = vec![false; vars.len()];
    for row in 0u64..(1u64 << vars.len()) {
        for (j, b) in bits.iter_mut().enumerate() {
            *b = row >> (vars.len() - 1 - j) & 1 == 1;
        }
        let val = Valuation::from_tuple(&vars, &bits)?;
        if eval_in(f, &mut Vec::new(), &val)? != eval_in(g, &mut Vec::new(), &val)? {
            return Ok(false);
        }
    }
    Ok(true)
}
