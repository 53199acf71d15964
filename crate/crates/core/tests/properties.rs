use proptest::prelude::*;
use proptest::sample::subsequence;

use respmech::formula::{eval_qbf, evaluate, parse, Formula, Quantifier, Valuation, VarSet};
use respmech::mechanism::{ActionProfile, AgentSpec, Mechanism};
use respmech::qbf::{prenex, tseitin, to_cnf, DEFAULT_CNF_BUDGET};

const POOL: [&str; 5] = ["a", "b", "c", "d", "e"];

fn vs(names: &[&str]) -> VarSet {
    VarSet::new(names.iter().copied()).unwrap()
}

fn leaf() -> impl Strategy<Value = Formula> {
    prop_oneof![
        1 => any::<bool>().prop_map(Formula::Const),
        4 => proptest::sample::select(&POOL[..]).prop_map(Formula::var),
    ]
}

fn qf_formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn quantifier() -> impl Strategy<Value = Quantifier> {
    prop_oneof![Just(Quantifier::Forall), Just(Quantifier::Exists)]
}

fn any_formula() -> impl Strategy<Value = Formula> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (quantifier(), subsequence(&POOL[..], 1..=3), inner)
                .prop_map(|(q, vars, body)| Formula::quantify(q, vs(&vars), body)),
        ]
    })
}

/// Closes `f` by quantifying its free variables.
fn closed_formula() -> impl Strategy<Value = Formula> {
    (any_formula(), quantifier()).prop_map(|(f, q)| {
        let free = f.free_vars();
        Formula::quantify(q, free, f)
    })
}

fn valuation() -> impl Strategy<Value = Vec<bool>> {
    proptest::collection::vec(any::<bool>(), POOL.len())
}

fn val_of(bits: &[bool]) -> Valuation {
    POOL.iter().copied().zip(bits.iter().copied()).collect()
}

/// Truth by substitution: each quantified variable is replaced by both
/// constants and the results combined.
fn oracle(f: &Formula) -> bool {
    match f {
        Formula::Const(c) => *c,
        Formula::Var(v) => panic!("free variable {v}"),
        Formula::Not(a) => !oracle(a),
        Formula::And(a, b) => oracle(a) && oracle(b),
        Formula::Or(a, b) => oracle(a) || oracle(b),
        Formula::Implies(a, b) => !oracle(a) || oracle(b),
        Formula::Quant(q, vars, body) => {
            let (first, rest) = vars.as_slice().split_first().unwrap();
            let inner = Formula::quantify(*q, VarSet::new(rest.to_vec()).unwrap(), (**body).clone());
            let one = vs(&[first.as_str()]);
            let lo = oracle(&inner.substitute(&[false], &one).unwrap());
            let hi = oracle(&inner.substitute(&[true], &one).unwrap());
            match q {
                Quantifier::Forall => lo && hi,
                Quantifier::Exists => lo || hi,
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(f in any_formula()) {
        let text = f.to_string();
        prop_assert_eq!(parse(&text).unwrap(), f);
    }

    #[test]
    fn substitution_soundness(f in qf_formula(), bits in valuation(), split in subsequence(&POOL[..], 0..=5)) {
        let vars = vs(&split);
        let sbits: Vec<bool> = split.iter().map(|v| bits[POOL.iter().position(|p| p == v).unwrap()]).collect();
        let g = f.substitute(&sbits, &vars).unwrap();
        let w = val_of(&bits);
        prop_assert_eq!(evaluate(&g, &w).unwrap(), evaluate(&f, &w).unwrap());
    }

    #[test]
    fn renaming_soundness(f in qf_formula(), bits in valuation()) {
        let old = vs(&POOL);
        let new = VarSet::new(POOL.iter().map(|v| format!("{v}_new"))).unwrap();
        let g = f.rename(&new, &old).unwrap();
        let renamed: Valuation = new.iter().map(String::as_str).zip(bits.iter().copied()).collect();
        prop_assert_eq!(evaluate(&g, &renamed).unwrap(), evaluate(&f, &val_of(&bits)).unwrap());
    }

    #[test]
    fn substitution_commutes_on_disjoint_sets(f in any_formula(), bits in valuation(), cut in 0usize..=5) {
        let (vi, vj) = POOL.split_at(cut);
        let (si, sj) = bits.split_at(cut);
        let (vi, vj) = (vs(vi), vs(vj));
        let ij = f.substitute(si, &vi).unwrap().substitute(sj, &vj).unwrap();
        let ji = f.substitute(sj, &vj).unwrap().substitute(si, &vi).unwrap();
        prop_assert_eq!(ij, ji);
    }

    #[test]
    fn eval_qbf_matches_substitution_oracle(f in closed_formula()) {
        prop_assume!(f.bound_count() <= 10);
        prop_assert_eq!(eval_qbf(&f).unwrap(), oracle(&f));
    }

    #[test]
    fn prenex_preserves_truth(f in closed_formula()) {
        prop_assume!(f.bound_count() <= 10);
        let p = prenex(&f).unwrap();
        prop_assert!(p.matrix.is_quantifier_free());
        for w in p.prefix.windows(2) {
            prop_assert_ne!(w[0].0, w[1].0);
        }
        prop_assert_eq!(eval_qbf(&p.to_formula()).unwrap(), eval_qbf(&f).unwrap());
        let cnf = to_cnf(&f).unwrap();
        prop_assert_eq!(cnf.evaluate(DEFAULT_CNF_BUDGET).unwrap(), eval_qbf(&f).unwrap());
    }

    #[test]
    fn tseitin_projection(f in qf_formula()) {
        let c = tseitin(&f).unwrap();
        let vars = f.free_vars();
        for row in 0u32..1 << vars.len() {
            let bits: Vec<bool> = (0..vars.len()).map(|j| row >> (vars.len() - 1 - j) & 1 == 1).collect();
            let lits: Vec<i32> = bits.iter().zip(1..).map(|(&b, id)| if b { id } else { -id }).collect();
            let expected = evaluate(&f, &Valuation::from_tuple(&vars, &bits).unwrap()).unwrap();
            prop_assert_eq!(c.satisfiable_with(&lits), expected);
        }
    }
}

/// A mechanism over POOL with a random split into agents.
fn mechanism() -> impl Strategy<Value = Mechanism> {
    (qf_formula(), proptest::collection::vec(0usize..3, POOL.len()), 1usize..=3).prop_map(|(gamma, owner, n)| {
        let agents = (0..n)
            .map(|i| {
                let vars: Vec<&str> = POOL.iter().zip(&owner).filter(|(_, &o)| o % n == i).map(|(v, _)| *v).collect();
                AgentSpec::new(format!("agent{i}"), vs(&vars))
            })
            .collect();
        Mechanism::new(agents, gamma).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_then_suffix_equals_whole(m in mechanism()) {
        prop_assert_eq!(&m.partial(0, &[]).unwrap(), &m);
        for p in m.enumerate_profiles(10).unwrap() {
            let whole = m.constraint_value(&p).unwrap();
            for k in 0..=m.n() {
                let sub = m.partial(k, &p.tuples()[..k]).unwrap();
                let rest = ActionProfile::new(p.tuples()[k..].to_vec());
                prop_assert_eq!(sub.constraint_value(&rest).unwrap(), whole);
            }
        }
    }

    #[test]
    fn reorder_preserves_violations(m in mechanism(), seed in any::<u64>()) {
        let n = m.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(seed as usize % n.max(1));
        let r = m.reorder(&perm).unwrap();
        let mut inverse = vec![0; n];
        for (j, &i) in perm.iter().enumerate() {
            inverse[i] = j;
        }
        prop_assert_eq!(&r.reorder(&inverse).unwrap(), &m);
        for p in m.enumerate_profiles(10).unwrap() {
            let permuted = ActionProfile::new(perm.iter().map(|&i| p.tuples()[i].clone()).collect());
            prop_assert_eq!(r.constraint_value(&permuted).unwrap(), m.constraint_value(&p).unwrap());
        }
    }

    #[test]
    fn mechanism_json_round_trip(m in mechanism()) {
        prop_assert_eq!(Mechanism::from_json(&m.to_json()).unwrap(), m);
    }
}
