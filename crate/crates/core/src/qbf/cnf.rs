use std::collections::HashMap;
use std::fmt::Write;

use super::prenex::PrenexQbf;
use crate::error::{Error, Result};
use crate::formula::{Formula, Quantifier};

/// Default cap on the number of variables [`CnfInstance::evaluate`] expands
/// (everything outside the innermost existential block).
pub const DEFAULT_CNF_BUDGET: usize = 20;

/// A prenex CNF instance with integer variable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfInstance {
    /// `names[id - 1]`; auxiliaries have an empty name.
    pub names: Vec<String>,
    pub prefix: Vec<(Quantifier, Vec<u32>)>,
    pub clauses: Vec<Vec<i32>>,
    /// Tseitin variables, all in the innermost existential block.
    pub aux: Vec<u32>,
}

struct Encoder<'a> {
    ids: &'a HashMap<String, u32>,
    next: u32,
    clauses: Vec<Vec<i32>>,
    aux: Vec<u32>,
}

impl Encoder<'_> {
    fn fresh(&mut self) -> i32 {
        let id = self.next;
        self.next += 1;
        self.aux.push(id);
        id as i32
    }

    /// Literal equivalent to `f`, adding defining clauses for every
    /// non-literal node.
    fn lit(&mut self, f: &Formula) -> i32 {
        match f {
            Formula::Var(v) => self.ids[v.as_str()] as i32,
            Formula::Not(a) => -self.lit(a),
            Formula::Const(c) => {
                let x = self.fresh();
                self.clauses.push(vec![if *c { x } else { -x }]);
                x
            }
            Formula::And(a, b) => {
                let (la, lb) = (self.lit(a), self.lit(b));
                let x = self.fresh();
                self.clauses.extend([vec![-x, la], vec![-x, lb], vec![x, -la, -lb]]);
                x
            }
            Formula::Or(a, b) => {
                let (la, lb) = (self.lit(a), self.lit(b));
                let x = self.fresh();
                self.clauses.extend([vec![x, -la], vec![x, -lb], vec![-x, la, lb]]);
                x
            }
            Formula::Implies(a, b) => {
                let (la, lb) = (self.lit(a), self.lit(b));
                let x = self.fresh();
                self.clauses.extend([vec![x, la], vec![x, -lb], vec![-x, -la, lb]]);
                x
            }
            Formula::Quant(..) => unreachable!("matrix is quantifier-free"),
        }
    }
}

fn encode(matrix: &Formula, ids: &HashMap<String, u32>, next: u32) -> (Vec<Vec<i32>>, Vec<u32>) {
    let mut enc = Encoder {
        ids,
        next,
        clauses: Vec::new(),
        aux: Vec::new(),
    };
    let root = enc.lit(matrix);
    enc.clauses.push(vec![root]);
    (enc.clauses, enc.aux)
}

/// Tseitin conversion of a quantifier-free formula on its own. The free
/// variables get ids `1..=k` in first-occurrence order and everything is
/// placed in one existential block, so the instance is satisfiable exactly
/// when the formula is.
pub fn tseitin(matrix: &Formula) -> Result<CnfInstance> {
    if !matrix.is_quantifier_free() {
        return Err(Error::UnexpectedQuantifier);
    }
    let names = matrix.free_vars().into_vec();
    let ids: HashMap<String, u32> = names.iter().cloned().zip(1..).collect();
    let (clauses, aux) = encode(matrix, &ids, names.len() as u32 + 1);
    let mut all: Vec<u32> = (1..=names.len() as u32).collect();
    all.extend(&aux);
    let mut names = names;
    names.extend(aux.iter().map(|_| String::new()));
    let prefix = if all.is_empty() { Vec::new() } else { vec![(Quantifier::Exists, all)] };
    Ok(CnfInstance {
        names,
        prefix,
        clauses,
        aux,
    })
}

impl CnfInstance {
    pub fn from_prenex(p: &PrenexQbf) -> Result<Self> {
        let mut names = Vec::new();
        let mut ids = HashMap::new();
        let mut prefix = Vec::new();
        for (q, vars) in &p.prefix {
            let block: Vec<u32> = vars
                .iter()
                .map(|v| {
                    names.push(v.clone());
                    ids.insert(v.clone(), names.len() as u32);
                    names.len() as u32
                })
                .collect();
            prefix.push((*q, block));
        }
        if let Some(v) = p.matrix.free_vars().iter().find(|v| !ids.contains_key(v.as_str())) {
            return Err(Error::FreeVariables(vec![v.clone()]));
        }
        let (clauses, aux) = encode(&p.matrix, &ids, names.len() as u32 + 1);
        names.extend(aux.iter().map(|_| String::new()));
        if !aux.is_empty() {
            match prefix.last_mut() {
                Some((Quantifier::Exists, block)) => block.extend(&aux),
                _ => prefix.push((Quantifier::Exists, aux.clone())),
            }
        }
        Ok(CnfInstance {
            names,
            prefix,
            clauses,
            aux,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32 + 1)
    }

    pub fn to_qdimacs(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            if !name.is_empty() {
                writeln!(out, "c map {name} {}", i + 1).unwrap();
            }
        }
        writeln!(out, "p cnf {} {}", self.names.len(), self.clauses.len()).unwrap();
        for (q, block) in &self.prefix {
            out.push(match q {
                Quantifier::Forall => 'a',
                Quantifier::Exists => 'e',
            });
            for id in block {
                write!(out, " {id}").unwrap();
            }
            out.push_str(" 0\n");
        }
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ").unwrap();
            }
            out.push_str("0\n");
        }
        out
    }

    /// Parses QDIMACS text. `c map <name> <id>` comments restore names;
    /// unnamed variables of the innermost existential block are taken as
    /// auxiliaries.
    pub fn parse_qdimacs(text: &str) -> Result<Self> {
        let err = |line: usize, message: &str| Error::Qdimacs {
            line,
            message: message.to_string(),
        };
        let mut mapped: Vec<(String, u32, usize)> = Vec::new();
        let mut header: Option<(usize, usize)> = None;
        let mut prefix: Vec<(Quantifier, Vec<u32>)> = Vec::new();
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut words = trimmed.split_whitespace();
            let first = words.next().expect("non-empty line");
            match first {
                "c" => {
                    if words.next() == Some("map") {
                        let (Some(name), Some(id), None) = (words.next(), words.next(), words.next()) else {
                            return Err(err(line, "expected `c map <name> <id>`"));
                        };
                        let id = id.parse().map_err(|_| err(line, "bad variable id"))?;
                        mapped.push((name.to_string(), id, line));
                    }
                }
                "p" => {
                    if header.is_some() {
                        return Err(err(line, "second problem line"));
                    }
                    let rest: Vec<&str> = words.collect();
                    let ["cnf", v, c] = rest.as_slice() else {
                        return Err(err(line, "expected `p cnf <vars> <clauses>`"));
                    };
                    let v = v.parse().map_err(|_| err(line, "bad variable count"))?;
                    let c = c.parse().map_err(|_| err(line, "bad clause count"))?;
                    header = Some((v, c));
                }
                "a" | "e" => {
                    let Some((nv, _)) = header else {
                        return Err(err(line, "quantifier line before problem line"));
                    };
                    if !clauses.is_empty() || !current.is_empty() {
                        return Err(err(line, "quantifier line after clauses"));
                    }
                    let q = if first == "a" { Quantifier::Forall } else { Quantifier::Exists };
                    let nums = words
                        .map(|w| w.parse::<u32>().map_err(|_| err(line, "bad variable id")))
                        .collect::<Result<Vec<_>>>()?;
                    let Some((&0, ids)) = nums.split_last() else {
                        return Err(err(line, "quantifier line must end with 0"));
                    };
                    if ids.iter().any(|&id| id == 0 || id as usize > nv) {
                        return Err(err(line, "variable id out of range"));
                    }
                    if let Some((last, _)) = prefix.last() {
                        if *last == q {
                            return Err(err(line, "quantifier blocks must alternate"));
                        }
                    }
                    prefix.push((q, ids.to_vec()));
                }
                _ => {
                    let Some((nv, _)) = header else {
                        return Err(err(line, "clause before problem line"));
                    };
                    for w in trimmed.split_whitespace() {
                        let lit: i32 = w.parse().map_err(|_| err(line, "bad literal"))?;
                        if lit == 0 {
                            clauses.push(std::mem::take(&mut current));
                        } else if lit.unsigned_abs() as usize > nv {
                            return Err(err(line, "literal out of range"));
                        } else {
                            current.push(lit);
                        }
                    }
                }
            }
        }
        let Some((nv, nc)) = header else {
            return Err(err(text.lines().count(), "missing problem line"));
        };
        if !current.is_empty() {
            return Err(err(text.lines().count(), "unterminated clause"));
        }
        if clauses.len() != nc {
            return Err(err(text.lines().count(), "clause count does not match header"));
        }
        let mut seen = vec![false; nv + 1];
        for (_, block) in &prefix {
            for &id in block {
                if std::mem::replace(&mut seen[id as usize], true) {
                    return Err(err(0, "variable quantified twice"));
                }
            }
        }
        let mut names = vec![String::new(); nv];
        for (name, id, line) in mapped {
            if id == 0 || id as usize > nv {
                return Err(err(line, "mapped id out of range"));
            }
            names[id as usize - 1] = name;
        }
        let aux = match prefix.last() {
            Some((Quantifier::Exists, block)) => block
                .iter()
                .copied()
                .filter(|&id| names[id as usize - 1].is_empty())
                .collect(),
            _ => Vec::new(),
        };
        Ok(CnfInstance {
            names,
            prefix,
            clauses,
            aux,
        })
    }

    /// Truth of the instance by expanding every variable outside the
    /// innermost existential block and running a small DPLL search on the
    /// rest. Variables in no block count as outermost existentials.
    pub fn evaluate(&self, budget: usize) -> Result<bool> {
        let mut quantified = vec![false; self.names.len() + 1];
        for (_, block) in &self.prefix {
            for &id in block {
                quantified[id as usize] = true;
            }
        }
        let mut order: Vec<(Quantifier, u32)> = (1..=self.names.len() as u32)
            .filter(|&id| !quantified[id as usize])
            .map(|id| (Quantifier::Exists, id))
            .collect();
        let inner = match self.prefix.last() {
            Some((Quantifier::Exists, _)) => self.prefix.len() - 1,
            _ => self.prefix.len(),
        };
        for (q, block) in &self.prefix[..inner] {
            order.extend(block.iter().map(|&id| (*q, id)));
        }
        if order.len() > budget {
            return Err(Error::BudgetExceeded {
                needed: order.len(),
                budget,
            });
        }
        let mut assign = vec![0i8; self.names.len() + 1];
        Ok(self.expand(&order, &mut assign))
    }

    fn expand(&self, order: &[(Quantifier, u32)], assign: &mut Vec<i8>) -> bool {
        let Some((&(q, id), rest)) = order.split_first() else {
            return dpll(&self.clauses, assign);
        };
        let stop = q == Quantifier::Exists;
        for v in [-1i8, 1] {
            assign[id as usize] = v;
            let r = self.expand(rest, assign);
            assign[id as usize] = 0;
            if r == stop {
                return stop;
            }
        }
        !stop
    }

    /// Satisfiability of the clauses with the given literals forced true,
    /// ignoring the prefix.
    pub fn satisfiable_with(&self, assumptions: &[i32]) -> bool {
        let mut assign = vec![0i8; self.names.len() + 1];
        for &l in assumptions {
            assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
        }
        dpll(&self.clauses, &mut assign)
    }
}

fn value(assign: &[i8], lit: i32) -> Option<bool> {
    match assign[lit.unsigned_abs() as usize] {
        0 => None,
        v => Some((v > 0) == (lit > 0)),
    }
}

fn dpll(clauses: &[Vec<i32>], assign: &mut Vec<i8>) -> bool {
    let mut trail = Vec::new();
    let undo = |trail: &[u32], assign: &mut Vec<i8>| {
        for &v in trail {
            assign[v as usize] = 0;
        }
    };
    // unit propagation
    loop {
        let mut changed = false;
        for c in clauses {
            let mut open = None;
            let mut count = 0;
            let mut sat = false;
            for &l in c {
                match value(assign, l) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        count += 1;
                        open = Some(l);
                    }
                }
            }
            if sat {
                continue;
            }
            match (count, open) {
                (0, _) => {
                    undo(&trail, assign);
                    return false;
                }
                (1, Some(l)) => {
                    assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 };
                    trail.push(l.unsigned_abs());
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let branch = clauses.iter().find_map(|c| {
        if c.iter().any(|&l| value(assign, l) == Some(true)) {
            None
        } else {
            c.iter().copied().find(|&l| value(assign, l).is_none())
        }
    });
    let Some(lit) = branch else {
        undo(&trail, assign);
        return true;
    };
    let var = lit.unsigned_abs() as usize;
    for v in [lit.signum() as i8, -(lit.signum() as i8)] {
        assign[var] = v;
        if dpll(clauses, assign) {
            assign[var] = 0;
            undo(&trail, assign);
            return true;
        }
    }
    assign[var] = 0;
    undo(&trail, assign);
    false
}
