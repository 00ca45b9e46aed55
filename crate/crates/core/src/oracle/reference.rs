//! Type-directed equality decided with the nameless evaluator and its own
//! instance generation. Mirrors the meaning explanations rule by rule so
//! that its verdicts can be compared one-for-one with the checker's.

use std::cell::RefCell;
use std::collections::HashMap;

use super::enumerate::{binder_name, Enumerator};
use super::normalize::{alpha_eq_oracle, normalize_oracle, substitute_oracle, OracleResult};
use crate::semantics::Budget;
use crate::syntax::{Env, EnvError, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    Holds,
    Fails,
    Unknown,
}

impl Tri {
    pub fn tag(self) -> &'static str {
        match self {
            Tri::Holds => "HOLDS",
            Tri::Fails => "FAILS",
            Tri::Unknown => "UNKNOWN",
        }
    }
}

// A failure anywhere decides a conjunction; otherwise an unknown does.
#[derive(Default)]
struct All {
    unknown: bool,
}

impl All {
    fn add(&mut self, t: Tri) -> Option<Tri> {
        match t {
            Tri::Fails => Some(Tri::Fails),
            Tri::Unknown => {
                self.unknown = true;
                None
            }
            Tri::Holds => None,
        }
    }

    fn finish(self) -> Tri {
        if self.unknown {
            Tri::Unknown
        } else {
            Tri::Holds
        }
    }
}

macro_rules! all {
    ($acc:expr, $t:expr) => {
        if let Some(f) = $acc.add($t) {
            return Ok(f);
        }
    };
}

enum Whnf {
    Value(Term),
    Decided(Tri),
}

macro_rules! whnf {
    ($self:ident, $t:expr) => {
        match $self.whnf($t)? {
            Whnf::Value(v) => v,
            Whnf::Decided(d) => return Ok(d),
        }
    };
}

fn is_type(t: &Term) -> bool {
    matches!(t, Term::Nat | Term::Pi(..) | Term::Id(..))
}

pub struct ReferenceChecker<'e> {
    env: &'e Env,
    budget: Budget,
    members: RefCell<HashMap<Term, Vec<Term>>>,
}

type R = Result<Tri, EnvError>;

impl<'e> ReferenceChecker<'e> {
    pub fn new(env: &'e Env, budget: Budget) -> Self {
        ReferenceChecker {
            env,
            budget,
            members: RefCell::new(HashMap::new()),
        }
    }

    fn whnf(&self, t: &Term) -> Result<Whnf, EnvError> {
        Ok(match normalize_oracle(t, self.env, self.budget.fuel)? {
            OracleResult::Value { value, .. } => Whnf::Value(value),
            OracleResult::Exhausted { .. } => Whnf::Decided(Tri::Unknown),
            OracleResult::Stuck { .. } => Whnf::Decided(Tri::Fails),
        })
    }

    pub fn type_eq(&self, a: &Term, b: &Term) -> R {
        let va = whnf!(self, a);
        let vb = whnf!(self, b);
        match (&va, &vb) {
            (Term::Nat, Term::Nat) => Ok(Tri::Holds),
            (Term::Pi(x, d1, c1), Term::Pi(y, d2, c2)) => {
                let mut acc = All::default();
                all!(acc, self.type_eq(d1, d2)?);
                let dom = whnf!(self, d1);
                if !is_type(&dom) {
                    return Ok(Tri::Fails);
                }
                for v in self.members(&dom)? {
                    all!(acc, self.type_eq(&substitute_oracle(c1, x, &v), &substitute_oracle(c2, y, &v))?);
                }
                Ok(acc.finish())
            }
            (Term::Id(t1, l1, r1), Term::Id(t2, l2, r2)) => {
                let mut acc = All::default();
                all!(acc, self.type_eq(t1, t2)?);
                all!(acc, self.term_eq(l1, l2, t1)?);
                all!(acc, self.term_eq(r1, r2, t1)?);
                Ok(acc.finish())
            }
            _ => Ok(Tri::Fails),
        }
    }

    pub fn member(&self, a: &Term, ty: &Term) -> R {
        self.term_eq(a, a, ty)
    }

    pub fn term_eq(&self, a: &Term, b: &Term, ty: &Term) -> R {
        let tv = whnf!(self, ty);
        if !is_type(&tv) {
            return Ok(Tri::Fails);
        }
        self.term_eq_at(a, b, &tv)
    }

    fn term_eq_at(&self, a: &Term, b: &Term, tv: &Term) -> R {
        let va = whnf!(self, a);
        let vb = whnf!(self, b);
        match (tv, &va, &vb) {
            (Term::Nat, Term::Zero, Term::Zero) => Ok(Tri::Holds),
            (Term::Nat, Term::Succ(m), Term::Succ(n)) => self.term_eq_at(m, n, tv),
            (Term::Id(bt, l, r), Term::Refl(c), Term::Refl(d)) => {
                let mut obligations: Vec<(&Term, &Term)> = Vec::new();
                for p in [(&**c, &**d), (&**c, &**l), (&**d, &**r), (&**l, &**r)] {
                    if !obligations.contains(&p) {
                        obligations.push(p);
                    }
                }
                let mut acc = All::default();
                for (x, y) in obligations {
                    all!(acc, self.term_eq(x, y, bt)?);
                }
                Ok(acc.finish())
            }
            (Term::Pi(x, bt, ct), Term::Lam(y, m), Term::Lam(z, n)) => {
                let dom = whnf!(self, bt);
                if !is_type(&dom) {
                    return Ok(Tri::Fails);
                }
                let mut acc = All::default();
                for v in self.members(&dom)? {
                    all!(
                        acc,
                        self.term_eq(
                            &substitute_oracle(m, y, &v),
                            &substitute_oracle(n, z, &v),
                            &substitute_oracle(ct, x, &v),
                        )?
                    );
                }
                Ok(acc.finish())
            }
            _ => Ok(Tri::Fails),
        }
    }

    /// Closed members of the canonical type `tv` up to the instance bound.
    pub fn members(&self, tv: &Term) -> Result<Vec<Term>, EnvError> {
        if let Some(hit) = self.members.borrow().get(tv) {
            return Ok(hit.clone());
        }
        let bound = self.budget.instance_size;
        let out = match tv {
            Term::Nat => (0..bound as u64).map(Term::numeral).collect(),
            _ => {
                let candidates: Vec<Term> = match tv {
                    Term::Id(_, l, r) if alpha_eq_oracle(l, r) => vec![Term::refl((**l).clone())],
                    Term::Id(_, l, r) => vec![Term::refl((**l).clone()), Term::refl((**r).clone())],
                    _ => Enumerator::shared()
                        .up_to(bound.saturating_sub(1), 1)
                        .into_iter()
                        .map(|b| Term::lam(binder_name(0), b))
                        .collect(),
                };
                let mut out = Vec::new();
                for c in candidates {
                    if self.term_eq_at(&c, &c, tv)? == Tri::Holds {
                        out.push(c);
                    }
                }
                out
            }
        };
        self.members.borrow_mut().insert(tv.clone(), out.clone());
        Ok(out)
    }
}

/// `a == b : A` decided through the reference evaluator.
pub fn equal_by_normalization(a: &Term, b: &Term, ty: &Term, env: &Env, budget: Budget) -> Result<Tri, EnvError> {
    ReferenceChecker::new(env, budget).term_eq(a, b, ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> Term {
        parse(s, &Env::new()).unwrap()
    }

    #[test]
    fn basic_verdicts() {
        let env = Env::new();
        let b = Budget {
            instance_size: 4,
            ..Budget::default()
        };
        assert_eq!(equal_by_normalization(&t("(\\x. x)(1)"), &t("1"), &Term::Nat, &env, b).unwrap(), Tri::Holds);
        assert_eq!(equal_by_normalization(&t("zero"), &t("1"), &Term::Nat, &env, b).unwrap(), Tri::Fails);
        let ext = equal_by_normalization(
            &t("\\x. natrec(x, zero, \\k. \\r. succ(r))"),
            &t("\\x. x"),
            &t("Nat -> Nat"),
            &env,
            b,
        );
        assert_eq!(ext.unwrap(), Tri::Holds);
        let omega = t("(\\x. x(x))(\\x. x(x))");
        let b = Budget { fuel: 50, ..b };
        assert_eq!(equal_by_normalization(&omega, &omega, &Term::Nat, &env, b).unwrap(), Tri::Unknown);
    }
}
