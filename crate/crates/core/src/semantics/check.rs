use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{conj, Budget, Conjunction, Context, FailureKind, Judgment, SemanticsError, Verdict};
use crate::machine::{eval, eval_open, EvalResult, MachineError, OpenEval};
use crate::oracle::enumerate::{binder_name, Enumerator};
use crate::oracle::sample;
use crate::syntax::{alpha_eq, substitute, Env, Name, Term};

type Check = Result<Verdict, MachineError>;

/// Either a canonical form or the verdict that evaluation already decided.
type Valued = Result<Term, Verdict>;

macro_rules! value {
    ($self:ident, $t:expr, $j:expr) => {
        match $self.value_of($t, $j)? {
            Ok(v) => v,
            Err(verdict) => return Ok(verdict),
        }
    };
}

fn is_type_value(t: &Term) -> bool {
    matches!(t, Term::Nat | Term::Pi(..) | Term::Id(..))
}

/// Extensional comparison of two types by their bounded member sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniqueByTerms {
    /// Same enumerated members in both directions.
    pub extensional: Verdict,
    /// The ordinary type equality, for contrast.
    pub intensional: Verdict,
}

/// Bounded semi-decision procedures for the judgment forms, with caches
/// for generated instances.
pub struct Checker<'e> {
    env: &'e Env,
    budget: Budget,
    members: Mutex<HashMap<Term, Arc<Vec<Term>>>>,
    corpus: OnceLock<Arc<Vec<(Term, EvalResult)>>>,
}

impl<'e> Checker<'e> {
    pub fn new(env: &'e Env, budget: Budget) -> Self {
        Checker {
            env,
            budget,
            members: Mutex::new(HashMap::new()),
            corpus: OnceLock::new(),
        }
    }

    pub fn env(&self) -> &Env {
        self.env
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    fn value_of(&self, t: &Term, j: &Judgment) -> Result<Valued, MachineError> {
        Ok(match eval(t, self.env, self.budget.fuel)? {
            EvalResult::Evaluated { value, .. } => Ok(value),
            EvalResult::FuelExhausted { .. } => Err(Verdict::unknown(
                self.budget,
                format!("evaluation of {t} exhausted fuel"),
            )),
            EvalResult::StuckAt { term, reason, .. } => {
                Err(Verdict::mismatch(j, format!("{t} is stuck at {term}: {reason}")))
            }
        })
    }

    /// `A == B type`.
    pub fn check_type_eq(&self, a: &Term, b: &Term) -> Result<Verdict, SemanticsError> {
        Ok(self.type_eq(a, b)?)
    }

    /// `A type`.
    pub fn check_is_type(&self, a: &Term) -> Result<Verdict, SemanticsError> {
        Ok(self.type_eq(a, a)?)
    }

    /// `a == b : A`. Errors if `A` does not evaluate to a canonical type.
    pub fn check_term_eq(&self, a: &Term, b: &Term, ty: &Term) -> Result<Verdict, SemanticsError> {
        let j = Judgment::TermEq(a.clone(), b.clone(), ty.clone());
        let tv = match self.value_of(ty, &j)? {
            Ok(tv) if is_type_value(&tv) => tv,
            Ok(_) => return Err(SemanticsError::NotACanonicalType(ty.clone())),
            Err(v @ Verdict::Unknown(_)) => return Ok(v),
            Err(_) => return Err(SemanticsError::NotACanonicalType(ty.clone())),
        };
        Ok(self.term_eq_at(a, b, &tv, &j)?)
    }

    /// `a : A`.
    pub fn check_member(&self, a: &Term, ty: &Term) -> Result<Verdict, SemanticsError> {
        self.check_term_eq(a, a, ty)
    }

    /// A categorical judgment of any form.
    pub fn check_judgment(&self, j: &Judgment) -> Result<Verdict, SemanticsError> {
        match j {
            Judgment::TypeEq(a, b) => self.check_type_eq(a, b),
            Judgment::IsType(a) => self.check_is_type(a),
            Judgment::TermEq(a, b, ty) => self.check_term_eq(a, b, ty),
            Judgment::Member(a, ty) => self.check_member(a, ty),
        }
    }

    fn type_eq(&self, a: &Term, b: &Term) -> Check {
        let j = Judgment::TypeEq(a.clone(), b.clone());
        let va = value!(self, a, &j);
        let vb = if a == b { va.clone() } else { value!(self, b, &j) };
        match (&va, &vb) {
            (Term::Nat, Term::Nat) => Ok(Verdict::holds()),
            (Term::Pi(x, d1, c1), Term::Pi(y, d2, c2)) => {
                let mut acc = Conjunction::bounded();
                conj!(acc, self.type_eq(d1, d2)?);
                let inst = match self.instances(d1, &j)? {
                    Ok(inst) => inst,
                    Err(v) => return Ok(v),
                };
                if inst.is_empty() {
                    acc.mark_vacuous();
                }
                for v in inst.iter() {
                    let r = self.type_eq(&substitute(c1, x, v), &substitute(c2, y, v))?;
                    conj!(acc, r.under_instance(x, v));
                }
                Ok(acc.finish())
            }
            (Term::Id(t1, l1, r1), Term::Id(t2, l2, r2)) => {
                let mut acc = Conjunction::default();
                conj!(acc, self.type_eq(t1, t2)?);
                conj!(acc, self.term_eq(l1, l2, t1)?);
                conj!(acc, self.term_eq(r1, r2, t1)?);
                Ok(acc.finish())
            }
            _ => {
                let why = match (is_type_value(&va), is_type_value(&vb)) {
                    (false, _) => format!("{va} is not a canonical type"),
                    (_, false) => format!("{vb} is not a canonical type"),
                    _ => format!("canonical types {va} and {vb} have different forms"),
                };
                Ok(Verdict::mismatch(&j, why))
            }
        }
    }

    fn term_eq(&self, a: &Term, b: &Term, ty: &Term) -> Check {
        let j = Judgment::TermEq(a.clone(), b.clone(), ty.clone());
        let tv = value!(self, ty, &j);
        if !is_type_value(&tv) {
            return Ok(Verdict::mismatch(&j, format!("{ty} is not a canonical type")));
        }
        self.term_eq_at(a, b, &tv, &j)
    }

    fn term_eq_at(&self, a: &Term, b: &Term, tv: &Term, j: &Judgment) -> Check {
        let va = value!(self, a, j);
        let vb = if a == b { va.clone() } else { value!(self, b, j) };
        self.term_eq_values(va, vb, tv, j)
    }

    // `va` and `vb` are canonical forms, `tv` a canonical type.
    fn term_eq_values(&self, va: Term, vb: Term, tv: &Term, j: &Judgment) -> Check {
        match tv {
            Term::Nat => self.nat_eq(va, vb, j),
            Term::Id(bt, l, r) => match (&va, &vb) {
                (Term::Refl(c), Term::Refl(d)) => {
                    let mut obligations: Vec<(&Term, &Term)> = vec![(c, d), (c, l), (d, r), (l, r)];
                    let mut seen = HashSet::new();
                    obligations.retain(|p| seen.insert(*p));
                    let mut acc = Conjunction::default();
                    for (x, y) in obligations {
                        conj!(acc, self.term_eq(x, y, bt)?);
                    }
                    Ok(acc.finish())
                }
                _ => Ok(Verdict::mismatch(j, format!("{va} and {vb} are not both refl at {tv}"))),
            },
            Term::Pi(x, bt, ct) => match (&va, &vb) {
                (Term::Lam(y, m), Term::Lam(z, n)) => {
                    let inst = match self.instances(bt, j)? {
                        Ok(inst) => inst,
                        Err(v) => return Ok(v),
                    };
                    let mut acc = Conjunction::bounded();
                    if inst.is_empty() {
                        acc.mark_vacuous();
                    }
                    for v in inst.iter() {
                        let r = self.term_eq(&substitute(m, y, v), &substitute(n, z, v), &substitute(ct, x, v))?;
                        conj!(acc, r.under_instance(x, v));
                    }
                    Ok(acc.finish())
                }
                _ => Ok(Verdict::mismatch(j, format!("{va} and {vb} are not both functions at {tv}"))),
            },
            _ => unreachable!("{tv} is not a canonical type"),
        }
    }

    fn nat_eq(&self, mut va: Term, mut vb: Term, j: &Judgment) -> Check {
        loop {
            match (va, vb) {
                (Term::Zero, Term::Zero) => return Ok(Verdict::holds()),
                (Term::Succ(m), Term::Succ(n)) => {
                    va = value!(self, &m, j);
                    vb = if m == n { va.clone() } else { value!(self, &n, j) };
                }
                (x, y) => {
                    let why = match (&x, &y) {
                        (Term::Zero | Term::Succ(_), Term::Zero | Term::Succ(_)) => {
                            format!("different numerals: {x} vs {y}")
                        }
                        (Term::Zero | Term::Succ(_), _) => format!("{y} is not a canonical natural number"),
                        _ => format!("{x} is not a canonical natural number"),
                    };
                    return Ok(Verdict::mismatch(j, why));
                }
            }
        }
    }

    // Closed instances used for the Π rules.
    fn instances(&self, ty: &Term, j: &Judgment) -> Result<Result<Arc<Vec<Term>>, Verdict>, MachineError> {
        let tv = match self.value_of(ty, j)? {
            Ok(tv) => tv,
            Err(v) => return Ok(Err(v)),
        };
        if !is_type_value(&tv) {
            return Ok(Err(Verdict::mismatch(j, format!("domain {ty} is not a canonical type"))));
        }
        Ok(Ok(self.members_of_value(&tv)?))
    }

    /// Enumerated closed members of `ty` of size at most the budget's
    /// instance bound, in enumeration order.
    pub fn members(&self, ty: &Term) -> Result<Arc<Vec<Term>>, SemanticsError> {
        match eval(ty, self.env, self.budget.fuel)? {
            EvalResult::Evaluated { value, .. } if is_type_value(&value) => Ok(self.members_of_value(&value)?),
            _ => Err(SemanticsError::NotACanonicalType(ty.clone())),
        }
    }

    fn members_of_value(&self, tv: &Term) -> Result<Arc<Vec<Term>>, MachineError> {
        if let Some(hit) = self.members.lock().unwrap().get(tv) {
            return Ok(hit.clone());
        }
        let bound = self.budget.instance_size;
        let candidates: Vec<Term> = match tv {
            Term::Nat => (0..bound as u64).map(Term::numeral).collect(),
            Term::Id(_, l, r) => {
                let mut c = vec![Term::refl((**l).clone())];
                if !alpha_eq(l, r) {
                    c.push(Term::refl((**r).clone()));
                }
                c
            }
            Term::Pi(..) => Enumerator::shared()
                .up_to(bound.saturating_sub(1), 1)
                .into_iter()
                .map(|body| Term::lam(binder_name(0), body))
                .collect(),
            _ => unreachable!("{tv} is not a canonical type"),
        };
        let members = Arc::new(self.filter_members(candidates, tv)?);
        self.members.lock().unwrap().insert(tv.clone(), members.clone());
        Ok(members)
    }

    fn filter_members(&self, candidates: Vec<Term>, tv: &Term) -> Result<Vec<Term>, MachineError> {
        if let Term::Nat = tv {
            return Ok(candidates);
        }
        let mut out = Vec::new();
        for c in candidates {
            let j = Judgment::Member(c.clone(), tv.clone());
            if self.term_eq_at(&c, &c, tv, &j)?.is_holds() {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// `x1 : A1, ..., xn : An |- J`, checked over enumerated members of each
    /// hypothesis plus seeded random samples. A `Holds` here is always a
    /// bounded claim.
    pub fn check_hypothetical(&self, ctx: &Context, j: &Judgment) -> Result<Verdict, SemanticsError> {
        ctx.check_scope(j)?;
        let mut names = HashSet::new();
        if let Some((x, _)) = ctx.0.iter().find(|(x, _)| !names.insert(x.as_str())) {
            return Err(SemanticsError::Scope(format!("`{x}` is bound twice")));
        }
        if ctx.is_empty() {
            return self.check_judgment(j);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.budget.seed);
        let v = self.hyp(&ctx.0, j, &mut rng)?;
        Ok(match v {
            Verdict::Holds(mut e) => {
                e.bounded = true;
                if e.vacuous && e.checked == 0 {
                    e.notes.push("vacuous: a hypothesis has no closed instances".into());
                }
                if let Some(n) = self.open_level_note(j) {
                    e.notes.push(n);
                }
                Verdict::Holds(e)
            }
            other => other,
        })
    }

    fn hyp(&self, hyps: &[(Name, Term)], j: &Judgment, rng: &mut ChaCha8Rng) -> Check {
        let Some(((x, ty), rest)) = hyps.split_first() else {
            return match j.as_equality() {
                Judgment::TypeEq(a, b) => self.type_eq(&a, &b),
                Judgment::TermEq(a, b, t) => self.term_eq(&a, &b, &t),
                _ => unreachable!(),
            };
        };
        let insts = match self.hypothesis_instances(x, ty, j, rng)? {
            Ok(i) => i,
            Err(v) => return Ok(v),
        };
        let mut acc = Conjunction::bounded();
        if insts.is_empty() {
            acc.mark_vacuous();
        }
        for v in &insts {
            let rest: Vec<(Name, Term)> = rest.iter().map(|(y, t)| (y.clone(), substitute(t, x, v))).collect();
            let r = self.hyp(&rest, &j.substitute(x, v), rng)?;
            conj!(acc, r.under_instance(x, v));
        }
        Ok(acc.finish())
    }

    fn hypothesis_instances(
        &self,
        x: &str,
        ty: &Term,
        j: &Judgment,
        rng: &mut ChaCha8Rng,
    ) -> Result<Result<Vec<Term>, Verdict>, MachineError> {
        let tv = match self.value_of(ty, j)? {
            Ok(tv) if is_type_value(&tv) => tv,
            Ok(tv) => {
                return Ok(Err(Verdict::fails(
                    FailureKind::Precondition,
                    Some(Judgment::IsType(ty.clone())),
                    format!("hypothesis {x} : {ty} is not a type ({tv} is not canonical)"),
                )))
            }
            Err(v) => return Ok(Err(v)),
        };
        let mut out: Vec<Term> = self.members_of_value(&tv)?.as_ref().clone();
        let mut seen: HashSet<Term> = out.iter().cloned().collect();
        let want = self.budget.samples;
        let drawn = sample::candidates(&tv, rng, want * 4, self.budget.instance_size);
        let mut added = 0;
        for c in drawn {
            if added == want {
                break;
            }
            if seen.contains(&c) {
                continue;
            }
            let mj = Judgment::Member(c.clone(), tv.clone());
            if self.term_eq_at(&c, &c, &tv, &mj)?.is_holds() {
                seen.insert(c.clone());
                out.push(c);
                added += 1;
            }
        }
        Ok(Ok(out))
    }

    fn open_level_note(&self, j: &Judgment) -> Option<String> {
        let (a, b) = match j {
            Judgment::TermEq(a, b, _) | Judgment::TypeEq(a, b) => (a, b),
            _ => return None,
        };
        let ea = eval_open(a, self.env, self.budget.fuel).ok()?;
        let eb = eval_open(b, self.env, self.budget.fuel).ok()?;
        let comparable = !matches!(ea, OpenEval::Exhausted(_)) && !matches!(eb, OpenEval::Exhausted(_));
        if comparable && alpha_eq(ea.term(), eb.term()) {
            return Some("open level: both sides compute to the same form".into());
        }
        let describe = |e: &OpenEval| match e {
            OpenEval::Value(t) => format!("value {t}"),
            OpenEval::Blocked { term, var } => format!("{term} blocked on `{var}`"),
            OpenEval::Stuck(t) => format!("stuck at {t}"),
            OpenEval::Exhausted(_) => "fuel exhausted".to_string(),
        };
        Some(format!(
            "no open-level evaluation step applies (lhs: {}; rhs: {})",
            describe(&ea),
            describe(&eb)
        ))
    }

    /// If `p : Eq(A, a, b)` then `a == b : A`.
    pub fn check_reflection(&self, p: &Term, a: &Term, b: &Term, ty: &Term) -> Result<Verdict, SemanticsError> {
        let id = Term::id(ty.clone(), a.clone(), b.clone());
        match self.check_member(p, &id)? {
            Verdict::Fails(c) => {
                return Ok(Verdict::Fails(super::Counterexample {
                    kind: FailureKind::Precondition,
                    mismatch: format!("precondition {p} : {id} fails: {}", c.mismatch),
                    ..c
                }))
            }
            u @ Verdict::Unknown(_) => return Ok(u),
            Verdict::Holds(_) => {}
        }
        Ok(match self.term_eq(a, b, ty)? {
            Verdict::Fails(c) => Verdict::Fails(super::Counterexample {
                kind: FailureKind::Violation,
                mismatch: format!("{p} : {id} holds but {a} == {b} : {ty} fails: {}", c.mismatch),
                ..c
            }),
            v => v.with_note(format!("{p} : {id} reflected to {a} == {b} : {ty}")),
        })
    }

    /// Closed terms up to the instance bound together with how they
    /// evaluate. Built once per checker.
    pub fn corpus(&self) -> Arc<Vec<(Term, EvalResult)>> {
        self.corpus
            .get_or_init(|| {
                let terms = Enumerator::shared().closed(self.budget.instance_size);
                Arc::new(
                    terms
                        .into_iter()
                        .map(|t| {
                            let r = eval(&t, self.env, self.budget.fuel).expect("enumerated terms are closed");
                            (t, r)
                        })
                        .collect(),
                )
            })
            .clone()
    }

    /// Every enumerated `p : Eq(A, a, a)` satisfies `p == refl(a) : Eq(A, a, a)`.
    pub fn check_axiom_k(&self, ty: &Term, a: &Term) -> Result<Verdict, SemanticsError> {
        match self.check_member(a, ty)? {
            Verdict::Fails(c) => {
                return Ok(Verdict::Fails(super::Counterexample {
                    kind: FailureKind::Precondition,
                    mismatch: format!("precondition {a} : {ty} fails: {}", c.mismatch),
                    ..c
                }))
            }
            u @ Verdict::Unknown(_) => return Ok(u),
            Verdict::Holds(_) => {}
        }
        let id = Term::id(ty.clone(), a.clone(), a.clone());
        let refl = Term::refl(a.clone());
        let corpus = self.corpus();
        let mut acc = Conjunction::bounded();
        let (mut proofs, mut unevaluated) = (0, 0);
        for (p, r) in corpus.iter() {
            let EvalResult::Evaluated { value, .. } = r else {
                // Without a canonical form a term cannot be a member.
                unevaluated += usize::from(matches!(r, EvalResult::FuelExhausted { .. }));
                continue;
            };
            let j = Judgment::Member(p.clone(), id.clone());
            match self.term_eq_values(value.clone(), value.clone(), &id, &j)? {
                Verdict::Holds(_) => {}
                Verdict::Fails(_) => continue,
                Verdict::Unknown(u) => {
                    acc.add(Verdict::Unknown(u).under_instance("p", p));
                    continue;
                }
            }
            proofs += 1;
            let kj = Judgment::TermEq(p.clone(), refl.clone(), id.clone());
            let vr = match self.value_of(&refl, &kj)? {
                Ok(v) => v,
                Err(v) => return Ok(v.under_instance("p", p)),
            };
            let r = match self.term_eq_values(value.clone(), vr, &id, &kj)? {
                Verdict::Fails(c) => Verdict::Fails(super::Counterexample {
                    kind: FailureKind::Violation,
                    ..c
                }),
                v => v,
            };
            conj!(acc, r.under_instance("p", p));
        }
        let mut note = format!(
            "{proofs} of {} enumerated closed terms are members of {id}; each equals {refl}",
            corpus.len()
        );
        if unevaluated > 0 {
            note.push_str(&format!(" ({unevaluated} exhausted fuel and cannot be members)"));
        }
        Ok(acc.finish().with_note(note))
    }

    /// Compares `A` and `B` by their enumerated members, alongside the
    /// ordinary type equality.
    pub fn check_unique_by_terms(&self, a: &Term, b: &Term) -> Result<UniqueByTerms, SemanticsError> {
        let ma = self.members(a)?;
        let mb = self.members(b)?;
        let mut acc = Conjunction::bounded();
        for (from, to, xs) in [(a, b, &ma), (b, a, &mb)] {
            for m in xs.iter() {
                match self.check_member(m, to)? {
                    Verdict::Fails(c) => {
                        let failed = Verdict::Fails(super::Counterexample {
                            instance: vec![("m".into(), m.clone())],
                            mismatch: format!("{m} is a member of {from} but not of {to}: {}", c.mismatch),
                            ..c
                        });
                        return Ok(UniqueByTerms {
                            extensional: failed,
                            intensional: self.check_type_eq(a, b)?,
                        });
                    }
                    v => {
                        acc.add(v.under_instance("m", m));
                    }
                }
            }
        }
        let extensional = acc.finish().with_note(format!(
            "{} and {} enumerated members agree",
            ma.len(),
            mb.len()
        ));
        Ok(UniqueByTerms {
            extensional,
            intensional: self.check_type_eq(a, b)?,
        })
    }
}
