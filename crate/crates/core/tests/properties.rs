use proptest::prelude::*;
use senseref::machine::{eval, is_value, step, EvalResult, StepResult};
use senseref::oracle::{alpha_eq_oracle, generate_members, normalize_oracle, substitute_oracle, EnumSpec, OracleResult, ReferenceChecker, Tri};
use senseref::semantics::{Budget, Checker, Judgment};
use senseref::sense::{sense_eq, SenseMode};
use senseref::syntax::{alpha_eq, parse, print, substitute, Env, Term};

const FUEL: u64 = 2_000;

fn name() -> impl Strategy<Value = String> {
    prop_oneof![Just("x"), Just("y"), Just("z")].prop_map(String::from)
}

/// Terms over every constructor with variables drawn from a small pool, so
/// shadowing and capture situations come up often.
fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        name().prop_map(Term::Var),
        Just(Term::Nat),
        Just(Term::Zero),
        (0u64..4).prop_map(Term::numeral),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (name(), inner.clone()).prop_map(|(x, b)| Term::lam(x, b)),
            (name(), inner.clone(), inner.clone()).prop_map(|(x, a, b)| Term::pi(x, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, l, r)| Term::id(a, l, r)),
            inner.clone().prop_map(Term::refl),
            (inner.clone(), inner.clone()).prop_map(|(s, b)| Term::eqrec(s, b)),
            inner.clone().prop_map(Term::succ),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(s, b, c)| Term::natrec(s, b, c)),
        ]
    })
}

fn close(t: Term) -> Term {
    t.free_vars().iter().fold(t, |acc, x| substitute(&acc, x, &Term::Zero))
}

fn closed_term() -> impl Strategy<Value = Term> {
    term().prop_map(close)
}

// Renames every binder, so the result is α-equal but rarely identical.
fn rename(t: &Term, k: &mut usize) -> Term {
    let mut fresh = |x: &str| {
        *k += 1;
        format!("{x}{k}")
    };
    match t {
        Term::Lam(x, b) => {
            let y = fresh(x);
            let b = substitute(b, x, &Term::var(y.clone()));
            Term::lam(y, rename(&b, k))
        }
        Term::Pi(x, a, b) => {
            let y = fresh(x);
            let b = substitute(b, x, &Term::var(y.clone()));
            let a = rename(a, k);
            Term::pi(y, a, rename(&b, k))
        }
        Term::App(a, b) => Term::app(rename(a, k), rename(b, k)),
        Term::EqRec(a, b) => Term::eqrec(rename(a, k), rename(b, k)),
        Term::Refl(a) => Term::refl(rename(a, k)),
        Term::Succ(a) => Term::succ(rename(a, k)),
        Term::Id(a, b, c) => Term::id(rename(a, k), rename(b, k), rename(c, k)),
        Term::NatRec(a, b, c) => Term::natrec(rename(a, k), rename(b, k), rename(c, k)),
        other => other.clone(),
    }
}

fn small_budget() -> Budget {
    Budget {
        fuel: FUEL,
        instance_size: 3,
        samples: 0,
        seed: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(t in term()) {
        let back = parse(&print(&t), &Env::new()).unwrap();
        prop_assert!(alpha_eq(&back, &t), "{} reparsed as {}", t, back);
    }

    #[test]
    fn renaming_preserves_alpha_class(t in term()) {
        let r = rename(&t, &mut 0);
        prop_assert!(alpha_eq(&t, &r));
        prop_assert!(alpha_eq_oracle(&t, &r));
        prop_assert_eq!(t.free_vars(), r.free_vars());
    }

    #[test]
    fn substitution_agrees_with_oracle(t in term(), x in name(), v in term()) {
        let named = substitute(&t, &x, &v);
        let nameless = substitute_oracle(&t, &x, &v);
        prop_assert!(alpha_eq(&named, &nameless), "{} vs {}", named, nameless);
        // Substitution respects α-equivalence of its inputs.
        let again = substitute(&rename(&t, &mut 0), &x, &rename(&v, &mut 100));
        prop_assert!(alpha_eq(&named, &again));
    }

    #[test]
    fn substituting_an_absent_variable_is_identity(t in closed_term(), v in term()) {
        prop_assert_eq!(substitute(&t, "x", &v), t);
    }

    #[test]
    fn step_is_deterministic(t in closed_term()) {
        let env = Env::new();
        let a = step(&t, &env).unwrap();
        let b = step(&t, &env).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a == StepResult::Value, is_value(&t).unwrap());
    }

    #[test]
    fn eval_agrees_with_oracle(t in closed_term()) {
        let env = Env::new();
        let m = eval(&t, &env, FUEL).unwrap();
        let o = normalize_oracle(&t, &env, FUEL).unwrap();
        match (&m, &o) {
            (EvalResult::Evaluated { value, steps }, OracleResult::Value { value: ov, steps: os }) => {
                prop_assert!(alpha_eq(value, ov));
                prop_assert_eq!(steps, os);
            }
            (EvalResult::FuelExhausted { .. }, OracleResult::Exhausted { .. }) => {}
            (EvalResult::StuckAt { steps, .. }, OracleResult::Stuck { steps: os }) => prop_assert_eq!(steps, os),
            _ => prop_assert!(false, "machine {} vs oracle {:?}", m, o),
        }
    }

    #[test]
    fn eval_respects_alpha(t in closed_term()) {
        let env = Env::new();
        let a = eval(&t, &env, FUEL).unwrap();
        let b = eval(&rename(&t, &mut 0), &env, FUEL).unwrap();
        prop_assert_eq!(a.steps(), b.steps());
        match (a.value(), b.value()) {
            (Some(x), Some(y)) => prop_assert!(alpha_eq(x, y)),
            (None, None) => {}
            _ => prop_assert!(false, "{} vs {}", a, b),
        }
    }

    #[test]
    fn same_sense_implies_same_reference(t in closed_term()) {
        let env = Env::new();
        let r = rename(&t, &mut 0);
        prop_assert!(sense_eq(&t, &r, &env, SenseMode::Defn, FUEL).unwrap().is_holds());
        let (a, b) = (eval(&t, &env, FUEL).unwrap(), eval(&r, &env, FUEL).unwrap());
        if let (Some(x), Some(y)) = (a.value(), b.value()) {
            prop_assert!(alpha_eq(x, y));
        }
    }

    #[test]
    fn defn_sense_implies_trace_sense(a in closed_term(), b in closed_term()) {
        let env = Env::new();
        for (x, y) in [(&a, &b), (&a, &rename(&a, &mut 0))] {
            if sense_eq(x, y, &env, SenseMode::Defn, FUEL).unwrap().is_holds() {
                let tr = sense_eq(x, y, &env, SenseMode::Trace, FUEL).unwrap();
                prop_assert!(!tr.is_fails(), "{} ~ {} by DEFN but not TRACE", x, y);
            }
        }
    }

    #[test]
    fn membership_implies_termination(a in closed_term(), ty in prop_oneof![
        Just("Nat"), Just("Nat -> Nat"), Just("Eq(Nat, zero, zero)"), Just("Eq(Nat -> Nat, \\x. x, \\y. y)"),
    ]) {
        let env = Env::new();
        let ty = parse(ty, &env).unwrap();
        let checker = Checker::new(&env, small_budget());
        if checker.check_member(&a, &ty).unwrap().is_holds() {
            let terminated = matches!(eval(&a, &env, FUEL).unwrap(), EvalResult::Evaluated { .. });
            prop_assert!(terminated, "{} is a member of {} without a value", a, ty);
        }
    }

    #[test]
    fn term_eq_is_symmetric_and_alpha_invariant(a in closed_term(), b in closed_term()) {
        let env = Env::new();
        let checker = Checker::new(&env, small_budget());
        for ty in [Term::Nat, parse("Nat -> Nat", &env).unwrap()] {
            let ab = checker.check_term_eq(&a, &b, &ty).unwrap();
            let ba = checker.check_term_eq(&b, &a, &ty).unwrap();
            prop_assert_eq!(ab.tag(), ba.tag());
            let renamed = checker.check_term_eq(&rename(&a, &mut 0), &rename(&b, &mut 50), &ty).unwrap();
            prop_assert_eq!(ab.tag(), renamed.tag());
        }
    }

    #[test]
    fn checker_agrees_with_reference(a in closed_term(), b in closed_term()) {
        let env = Env::new();
        let budget = small_budget();
        let checker = Checker::new(&env, budget);
        let reference = ReferenceChecker::new(&env, budget);
        for ty in [Term::Nat, parse("Nat -> Nat", &env).unwrap(), parse("Eq(Nat, 1, 1)", &env).unwrap()] {
            let mine = checker.check_term_eq(&a, &b, &ty).unwrap();
            let theirs = reference.term_eq(&a, &b, &ty).unwrap();
            let expected = match mine.tag() { "HOLDS" => Tri::Holds, "FAILS" => Tri::Fails, _ => Tri::Unknown };
            prop_assert_eq!(expected, theirs, "{}", Judgment::TermEq(a.clone(), b.clone(), ty.clone()));
        }
    }
}

#[test]
fn generated_members_are_sound() {
    let env = Env::new();
    let spec = EnumSpec { fuel: FUEL, ..EnumSpec::new(5) };
    let budget = Budget { instance_size: 5, ..small_budget() };
    let checker = Checker::new(&env, budget);
    let reference = ReferenceChecker::new(&env, budget);
    for ty in ["Nat", "Nat -> Nat", "(x : Nat) -> Eq(Nat, x, x)", "Eq(Nat, 2, 2)", "Eq(Nat -> Nat, \\x. x, \\y. y)"] {
        let ty = parse(ty, &env).unwrap();
        let members = generate_members(&ty, &spec, &env).unwrap();
        assert!(!members.is_empty(), "{ty} has no generated members");
        for m in &members {
            assert!(checker.check_member(m, &ty).unwrap().is_holds(), "{m} : {ty}");
            assert_eq!(reference.member(m, &ty).unwrap(), Tri::Holds, "{m} : {ty}");
        }
    }
}

#[test]
fn term_eq_is_an_equivalence_on_small_terms() {
    let env = Env::new();
    let checker = Checker::new(&env, small_budget());
    let corpus = senseref::oracle::enumerate_closed(&EnumSpec::new(4));
    for ty in [Term::Nat, parse("Nat -> Nat", &env).unwrap()] {
        let members: Vec<&Term> = corpus
            .iter()
            .filter(|t| checker.check_member(t, &ty).unwrap().is_holds())
            .collect();
        assert!(members.len() > 3, "{ty}");
        let eq: Vec<Vec<bool>> = members
            .iter()
            .map(|a| members.iter().map(|b| checker.check_term_eq(a, b, &ty).unwrap().is_holds()).collect())
            .collect();
        let n = members.len();
        for i in 0..n {
            assert!(eq[i][i], "{} not reflexive", members[i]);
            for j in 0..n {
                assert_eq!(eq[i][j], eq[j][i], "{} / {}", members[i], members[j]);
                for k in 0..n {
                    if eq[i][j] && eq[j][k] {
                        assert!(eq[i][k], "{} / {} / {}", members[i], members[j], members[k]);
                    }
                }
            }
        }
    }
}
