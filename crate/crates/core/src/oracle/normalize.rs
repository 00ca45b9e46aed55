//! Reference evaluator on a nameless representation. It shares nothing with
//! the machine except the input syntax: definitions are unfolded eagerly,
//! substitution works on indices, and evaluation is big-step.

use crate::syntax::{Env, EnvError, Name, Term};

use super::enumerate::binder_name;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Db {
    Var(usize),
    Free(Name),
    Pi(Box<Db>, Box<Db>),
    Lam(Box<Db>),
    App(Box<Db>, Box<Db>),
    Id(Box<Db>, Box<Db>, Box<Db>),
    Refl(Box<Db>),
    EqRec(Box<Db>, Box<Db>),
    Nat,
    Zero,
    Succ(Box<Db>),
    NatRec(Box<Db>, Box<Db>, Box<Db>),
}

use Db::*;

fn b(d: Db) -> Box<Db> {
    Box::new(d)
}

fn to_db(t: &Term, scope: &mut Vec<Name>) -> Db {
    match t {
        Term::Var(x) => match scope.iter().rposition(|y| y == x) {
            Some(i) => Var(scope.len() - 1 - i),
            None => Free(x.clone()),
        },
        Term::DefRef(n) => unreachable!("definition {n} survived unfolding"),
        Term::Pi(x, a, body) => {
            let a = to_db(a, scope);
            scope.push(x.clone());
            let body = to_db(body, scope);
            scope.pop();
            Pi(b(a), b(body))
        }
        Term::Lam(x, body) => {
            scope.push(x.clone());
            let body = to_db(body, scope);
            scope.pop();
            Lam(b(body))
        }
        Term::App(f, a) => App(b(to_db(f, scope)), b(to_db(a, scope))),
        Term::Id(a, l, r) => Id(b(to_db(a, scope)), b(to_db(l, scope)), b(to_db(r, scope))),
        Term::Refl(a) => Refl(b(to_db(a, scope))),
        Term::EqRec(s, br) => EqRec(b(to_db(s, scope)), b(to_db(br, scope))),
        Term::Nat => Nat,
        Term::Zero => Zero,
        Term::Succ(a) => Succ(b(to_db(a, scope))),
        Term::NatRec(s, z, st) => NatRec(b(to_db(s, scope)), b(to_db(z, scope)), b(to_db(st, scope))),
    }
}

// Binders are named by depth, skipping names that occur free.
fn from_db(d: &Db, depth: usize, names: &mut Vec<Name>, free: &[Name]) -> Term {
    let fresh = |names: &Vec<Name>| {
        let mut level = depth;
        loop {
            let n = binder_name(level);
            if !free.contains(&n) && !names.contains(&n) {
                return n;
            }
            level += 1;
        }
    };
    match d {
        Var(i) => Term::Var(names[names.len() - 1 - i].clone()),
        Free(x) => Term::Var(x.clone()),
        Pi(a, body) => {
            let a = from_db(a, depth, names, free);
            let x = fresh(names);
            names.push(x.clone());
            let body = from_db(body, depth + 1, names, free);
            names.pop();
            Term::pi(x, a, body)
        }
        Lam(body) => {
            let x = fresh(names);
            names.push(x.clone());
            let body = from_db(body, depth + 1, names, free);
            names.pop();
            Term::lam(x, body)
        }
        App(f, a) => Term::app(from_db(f, depth, names, free), from_db(a, depth, names, free)),
        Id(a, l, r) => Term::id(
            from_db(a, depth, names, free),
            from_db(l, depth, names, free),
            from_db(r, depth, names, free),
        ),
        Refl(a) => Term::refl(from_db(a, depth, names, free)),
        EqRec(s, br) => Term::eqrec(from_db(s, depth, names, free), from_db(br, depth, names, free)),
        Nat => Term::Nat,
        Zero => Term::Zero,
        Succ(a) => Term::succ(from_db(a, depth, names, free)),
        NatRec(s, z, st) => Term::natrec(
            from_db(s, depth, names, free),
            from_db(z, depth, names, free),
            from_db(st, depth, names, free),
        ),
    }
}

/// Adds `by` to every index at or above `cutoff`.
fn shift(d: &Db, by: isize, cutoff: usize) -> Db {
    let s = |x: &Db, c| b(shift(x, by, c));
    match d {
        Var(i) if *i >= cutoff => Var((*i as isize + by) as usize),
        Var(_) | Free(_) | Nat | Zero => d.clone(),
        Pi(a, body) => Pi(s(a, cutoff), s(body, cutoff + 1)),
        Lam(body) => Lam(s(body, cutoff + 1)),
        App(f, a) => App(s(f, cutoff), s(a, cutoff)),
        Id(a, l, r) => Id(s(a, cutoff), s(l, cutoff), s(r, cutoff)),
        Refl(a) => Refl(s(a, cutoff)),
        EqRec(x, y) => EqRec(s(x, cutoff), s(y, cutoff)),
        Succ(a) => Succ(s(a, cutoff)),
        NatRec(x, y, z) => NatRec(s(x, cutoff), s(y, cutoff), s(z, cutoff)),
    }
}

/// Replaces index `j` by `v`, lowering the indices above it.
fn subst(d: &Db, j: usize, v: &Db) -> Db {
    let s = |x: &Db, k| b(subst(x, k, &shift(v, (k - j) as isize, 0)));
    match d {
        Var(i) if *i == j => v.clone(),
        Var(i) if *i > j => Var(i - 1),
        Var(_) | Free(_) | Nat | Zero => d.clone(),
        Pi(a, body) => Pi(b(subst(a, j, v)), s(body, j + 1)),
        Lam(body) => Lam(s(body, j + 1)),
        App(f, a) => App(b(subst(f, j, v)), b(subst(a, j, v))),
        Id(a, l, r) => Id(b(subst(a, j, v)), b(subst(l, j, v)), b(subst(r, j, v))),
        Refl(a) => Refl(b(subst(a, j, v))),
        EqRec(x, y) => EqRec(b(subst(x, j, v)), b(subst(y, j, v))),
        Succ(a) => Succ(b(subst(a, j, v))),
        NatRec(x, y, z) => NatRec(b(subst(x, j, v)), b(subst(y, j, v)), b(subst(z, j, v))),
    }
}

fn occurs(d: &Db, j: usize) -> bool {
    match d {
        Var(i) => *i == j,
        Free(_) | Nat | Zero => false,
        Pi(a, body) => occurs(a, j) || occurs(body, j + 1),
        Lam(body) => occurs(body, j + 1),
        App(x, y) | EqRec(x, y) => occurs(x, j) || occurs(y, j),
        Refl(a) | Succ(a) => occurs(a, j),
        Id(x, y, z) | NatRec(x, y, z) => occurs(x, j) || occurs(y, j) || occurs(z, j),
    }
}

#[derive(Debug)]
enum Halt {
    Fuel,
    Stuck,
}

struct Run {
    fuel: u64,
    steps: u64,
}

impl Run {
    fn tick(&mut self) -> Result<(), Halt> {
        if self.steps == self.fuel {
            return Err(Halt::Fuel);
        }
        self.steps += 1;
        Ok(())
    }

    fn whnf(&mut self, mut d: Db) -> Result<Db, Halt> {
        loop {
            d = match d {
                Lam(body) => match *body {
                    App(f, a) if *a == Var(0) && !occurs(&f, 0) => {
                        self.tick()?;
                        shift(&f, -1, 0)
                    }
                    body => return Ok(Lam(b(body))),
                },
                App(f, a) => match self.whnf(*f)? {
                    Lam(body) => {
                        self.tick()?;
                        subst(&body, 0, &a)
                    }
                    _ => return Err(Halt::Stuck),
                },
                EqRec(s, br) => match self.whnf(*s)? {
                    Refl(_) => {
                        self.tick()?;
                        *br
                    }
                    _ => return Err(Halt::Stuck),
                },
                NatRec(s, z, st) => match self.whnf(*s)? {
                    Zero => {
                        self.tick()?;
                        *z
                    }
                    Succ(p) => {
                        self.tick()?;
                        App(b(App(st.clone(), p.clone())), b(NatRec(p, z, st)))
                    }
                    _ => return Err(Halt::Stuck),
                },
                Var(_) | Free(_) => return Err(Halt::Stuck),
                v => return Ok(v),
            }
        }
    }
}

/// Outcome of the reference evaluator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleResult {
    Value { value: Term, steps: u64 },
    Exhausted { fuel: u64 },
    Stuck { steps: u64 },
}

impl OracleResult {
    pub fn value(&self) -> Option<&Term> {
        match self {
            OracleResult::Value { value, .. } => Some(value),
            _ => None,
        }
    }
}

fn readback(d: &Db, t: &Term) -> Term {
    let free: Vec<Name> = t.free_vars().into_iter().collect();
    from_db(d, 0, &mut Vec::new(), &free)
}

/// Weak head evaluation to a canonical form, counting transitions the same
/// way the machine does (definition unfolding is free).
pub fn normalize_oracle(t: &Term, env: &Env, fuel: u64) -> Result<OracleResult, EnvError> {
    let t = env.unfold(t)?;
    let mut run = Run { fuel, steps: 0 };
    Ok(match run.whnf(to_db(&t, &mut Vec::new())) {
        Ok(v) => OracleResult::Value {
            value: readback(&v, &t),
            steps: run.steps,
        },
        Err(Halt::Fuel) => OracleResult::Exhausted { fuel },
        Err(Halt::Stuck) => OracleResult::Stuck { steps: run.steps },
    })
}

/// Like [`normalize_oracle`] but also evaluates under `succ` and `refl`,
/// sharing one fuel budget.
pub fn normalize_deep(t: &Term, env: &Env, fuel: u64) -> Result<OracleResult, EnvError> {
    let t = env.unfold(t)?;
    let mut run = Run { fuel, steps: 0 };
    let mut layers: Vec<fn(Box<Db>) -> Db> = Vec::new();
    let mut cur = to_db(&t, &mut Vec::new());
    let v = loop {
        match run.whnf(cur) {
            Ok(Succ(p)) => {
                layers.push(Succ);
                cur = *p;
            }
            Ok(Refl(p)) => {
                layers.push(Refl);
                cur = *p;
            }
            Ok(v) => break v,
            Err(Halt::Fuel) => return Ok(OracleResult::Exhausted { fuel }),
            Err(Halt::Stuck) => return Ok(OracleResult::Stuck { steps: run.steps }),
        }
    };
    let v = layers.into_iter().rev().fold(v, |acc, wrap| wrap(b(acc)));
    Ok(OracleResult::Value {
        value: readback(&v, &t),
        steps: run.steps,
    })
}

/// Nameless α-equivalence, independent of the syntax module's.
pub fn alpha_eq_oracle(a: &Term, c: &Term) -> bool {
    to_db(a, &mut Vec::new()) == to_db(c, &mut Vec::new())
}

/// Substitution through the nameless representation, read back with
/// canonical binder names.
pub fn substitute_oracle(body: &Term, x: &str, v: &Term) -> Term {
    let d = to_db(body, &mut vec![x.to_string()]);
    let r = subst(&d, 0, &to_db(v, &mut Vec::new()));
    let mut free = body.free_vars();
    free.remove(x);
    free.extend(v.free_vars());
    let free: Vec<Name> = free.into_iter().collect();
    from_db(&r, 0, &mut Vec::new(), &free)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse};

    fn t(s: &str) -> Term {
        parse(s, &Env::new()).unwrap()
    }

    #[test]
    fn matches_basic_rules() {
        let env = Env::new();
        let r = normalize_oracle(&t("(\\x. refl(x))(zero)"), &env, 10).unwrap();
        assert_eq!(r, OracleResult::Value { value: t("refl(zero)"), steps: 1 });
        let r = normalize_oracle(&t("\\y. (\\x. succ(x))(y)"), &env, 10).unwrap();
        assert!(alpha_eq(r.value().unwrap(), &t("\\x. succ(x)")));
        let omega = t("(\\x. x(x))(\\x. x(x))");
        assert_eq!(normalize_oracle(&omega, &env, 50).unwrap(), OracleResult::Exhausted { fuel: 50 });
        assert!(matches!(normalize_oracle(&t("zero(zero)"), &env, 5).unwrap(), OracleResult::Stuck { .. }));
    }

    #[test]
    fn deep_normalization_of_addition() {
        let mut env = Env::new();
        crate::syntax::parse_definitions(
            "def add := \\m. \\n. natrec(m, n, \\k. \\r. succ(r));",
            &mut env,
        )
        .unwrap();
        let r = normalize_deep(&parse("add(2)(3)", &env).unwrap(), &env, 1000).unwrap();
        assert_eq!(r.value(), Some(&Term::numeral(5)));
    }

    #[test]
    fn nameless_alpha_and_substitution() {
        assert!(alpha_eq_oracle(&t("\\x. \\y. x"), &t("\\a. \\b. a")));
        assert!(!alpha_eq_oracle(&t("\\x. \\y. x"), &t("\\a. \\b. b")));
        let s = substitute_oracle(&t("\\y. x(y)"), "x", &t("y"));
        assert!(alpha_eq(&s, &t("\\z. y(z)")));
        assert!(s.has_free("y"));
    }
}
