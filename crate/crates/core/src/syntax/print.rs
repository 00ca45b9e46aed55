use std::fmt;

use super::term::Term;

/// Canonical concrete rendering; `parse(print(t))` gives `t` back.
pub fn print(t: &Term) -> String {
    t.to_string()
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Lam(x, b) => write!(f, "\\{x}. {b}"),
            Term::Pi(x, a, b) => write!(f, "({x} : {a}) -> {b}"),
            _ => application(self, f),
        }
    }
}

fn application(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::App(fun, arg) => {
            match **fun {
                Term::Lam(..) | Term::Pi(..) => write!(f, "({fun})")?,
                _ => application(fun, f)?,
            }
            write!(f, "({arg})")
        }
        _ => atom(t, f),
    }
}

fn atom(t: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(x) | Term::DefRef(x) => f.write_str(x),
        Term::Nat => f.write_str("Nat"),
        Term::Zero => f.write_str("zero"),
        Term::Succ(a) => write!(f, "succ({a})"),
        Term::Refl(a) => write!(f, "refl({a})"),
        Term::EqRec(a, b) => write!(f, "eqrec({a}, {b})"),
        Term::Id(a, b, c) => write!(f, "Eq({a}, {b}, {c})"),
        Term::NatRec(a, b, c) => write!(f, "natrec({a}, {b}, {c})"),
        Term::Lam(..) | Term::Pi(..) | Term::App(..) => write!(f, "({t})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse, Env};

    #[test]
    fn canonical_spacing() {
        let t = Term::app(Term::lam("x", Term::var("x")), Term::Zero);
        assert_eq!(print(&t), "(\\x. x)(zero)");
        assert_eq!(print(&Term::pi("x", Term::Nat, Term::Nat)), "(x : Nat) -> Nat");
        assert_eq!(print(&Term::id(Term::Nat, Term::Zero, Term::Zero)), "Eq(Nat, zero, zero)");
        assert_eq!(
            print(&Term::natrec(Term::Zero, Term::Nat, Term::lam("x", Term::app(Term::var("x"), Term::var("x"))))),
            "natrec(zero, Nat, \\x. x(x))"
        );
    }

    #[test]
    fn nested_binders_round_trip() {
        let env = Env::new();
        for src in [
            "\\x. \\y. x(y)(x)",
            "(f : (x : Nat) -> Nat) -> Eq(Nat, f(zero), zero)",
            "((x : Nat) -> Nat)(zero)",
            "(\\x. x)(\\y. y)(zero)",
            "f(\\x. x)",
            "eqrec(refl(zero), succ(zero))",
        ] {
            let t = parse(src, &env).unwrap();
            assert_eq!(print(&t), src);
            assert!(alpha_eq(&parse(&print(&t), &env).unwrap(), &t));
        }
    }
}
