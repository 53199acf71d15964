use std::fmt::{self, Write};

use super::Formula;

// Binding strength; higher binds tighter.
const QUANT: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const ATOM: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Const(_) | Formula::Var(_) => ATOM,
        Formula::Not(_) => NOT,
        Formula::And(..) => AND,
        Formula::Or(..) => OR,
        Formula::Implies(..) => IMPLIES,
        Formula::Quant(..) => QUANT,
    }
}

fn child<W: Write>(out: &mut W, f: &Formula, parens: bool) -> fmt::Result {
    if parens {
        out.write_char('(')?;
        write_formula(out, f)?;
        out.write_char(')')
    } else {
        write_formula(out, f)
    }
}

/// Writes `f` with the minimum parentheses needed for [`super::parse`] to
/// rebuild the same tree. Quantified subformulas are always parenthesized
/// when they are an operand.
pub(super) fn write_formula<W: Write>(out: &mut W, f: &Formula) -> fmt::Result {
    match f {
        Formula::Const(true) => out.write_char('T'),
        Formula::Const(false) => out.write_char('F'),
        Formula::Var(v) => out.write_str(v),
        Formula::Not(a) => {
            out.write_char('!')?;
            child(out, a, prec(a) < NOT)
        }
        Formula::And(a, b) => {
            child(out, a, prec(a) < AND)?;
            out.write_str(" & ")?;
            child(out, b, prec(b) <= AND)
        }
        Formula::Or(a, b) => {
            child(out, a, prec(a) < OR)?;
            out.write_str(" | ")?;
            child(out, b, prec(b) <= OR)
        }
        Formula::Implies(a, b) => {
            child(out, a, prec(a) <= IMPLIES)?;
            out.write_str(" -> ")?;
            child(out, b, prec(b) < IMPLIES)
        }
        Formula::Quant(q, vars, body) => {
            out.write_str(q.keyword())?;
            for v in vars {
                out.write_char(' ')?;
                out.write_str(v)?;
            }
            out.write_str(" . ")?;
            write_formula(out, body)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::parse;

    #[test]
    fn minimal_parentheses() {
        for (src, shown) in [
            ("!(va & vb)", "!(va & vb)"),
            ("a -> (b -> c)", "a -> b -> c"),
            ("(a -> b) -> c", "(a -> b) -> c"),
            ("a | (b | c)", "a | (b | c)"),
            ("(a | b) | c", "a | b | c"),
            ("a & b | c", "a & b | c"),
            ("a & (b | c)", "a & (b | c)"),
            ("!!a", "!!a"),
            ("forall p . exists q . p -> q", "forall p . exists q . p -> q"),
            ("!(forall p . p) & q", "!(forall p . p) & q"),
            ("a -> (forall p . p)", "a -> (forall p . p)"),
        ] {
            let f = parse(src).unwrap();
            assert_eq!(f.to_string(), shown, "rendering {src}");
            assert_eq!(parse(shown).unwrap(), f);
        }
    }
}
