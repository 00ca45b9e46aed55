//! Small-step operational semantics over closed terms.
//!
//! Evaluation is weak: the only congruence positions are the head of an
//! application and the scrutinee of `eqrec`/`natrec`. Definition references
//! in head position unfold one level as a separate, uncounted action.

use std::fmt;

use thiserror::Error;

use crate::syntax::{substitute, Env, EnvError, Name, Term};

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("term is not closed; free variables: {}", .0.join(", "))]
    OpenTerm(Vec<Name>),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Outcome of a single transition attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Value,
    StepsTo(Term),
    /// A head definition reference was replaced by its body. Not a
    /// computation step.
    Unfolds(Term),
    Stuck(String),
}

/// Outcome of fuel-bounded evaluation. `steps` counts transitions only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalResult {
    Evaluated { value: Term, steps: u64 },
    FuelExhausted { last: Term, fuel: u64 },
    StuckAt { term: Term, steps: u64, reason: String },
}

impl EvalResult {
    pub fn value(&self) -> Option<&Term> {
        match self {
            EvalResult::Evaluated { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn into_value(self) -> Option<Term> {
        match self {
            EvalResult::Evaluated { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            EvalResult::Evaluated { steps, .. } | EvalResult::StuckAt { steps, .. } => *steps,
            EvalResult::FuelExhausted { fuel, .. } => *fuel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Start,
    Step,
    Unfold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub kind: EntryKind,
    pub term: Term,
}

/// The materialised transition sequence of an evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub terminal: EvalResult,
}

impl Trace {
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.entries.iter().map(|e| &e.term)
    }

    /// One term per line; transitions are prefixed by `-->` (or `⟼`),
    /// unfoldings by `==>` (or `≝`).
    pub fn render(&self, unicode: bool) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let prefix = match (e.kind, unicode) {
                (EntryKind::Start, _) => "",
                (EntryKind::Step, false) => "--> ",
                (EntryKind::Step, true) => "⟼ ",
                (EntryKind::Unfold, false) => "==> ",
                (EntryKind::Unfold, true) => "≝ ",
            };
            out.push_str(prefix);
            out.push_str(&e.term.to_string());
            out.push('\n');
        }
        out.push_str(&self.terminal.to_string());
        out
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalResult::Evaluated { value, steps } => write!(f, "value {value} after {steps} step(s)"),
            EvalResult::FuelExhausted { fuel, .. } => write!(f, "fuel exhausted after {fuel} step(s)"),
            EvalResult::StuckAt { term, steps, reason } => {
                write!(f, "stuck at {term} after {steps} step(s): {reason}")
            }
        }
    }
}

fn ensure_closed(t: &Term) -> Result<(), MachineError> {
    if t.is_closed() {
        Ok(())
    } else {
        Err(MachineError::OpenTerm(t.free_vars().into_iter().collect()))
    }
}

/// `\x. a(x)` with `x` not free in `a`.
pub(crate) fn eta_contractum(t: &Term) -> Option<&Term> {
    match t {
        Term::Lam(x, body) => match &**body {
            Term::App(a, arg) if matches!(&**arg, Term::Var(y) if y == x) && !a.has_free(x) => Some(a),
            _ => None,
        },
        _ => None,
    }
}

fn is_value_form(t: &Term) -> bool {
    match t {
        Term::Pi(..) | Term::Id(..) | Term::Refl(_) | Term::Nat | Term::Zero | Term::Succ(_) => true,
        Term::Lam(..) => eta_contractum(t).is_none(),
        _ => false,
    }
}

/// Whether `t` is a canonical form. Errors on open terms.
pub fn is_value(t: &Term) -> Result<bool, MachineError> {
    ensure_closed(t)?;
    Ok(is_value_form(t))
}

enum Frame {
    Arg(Term),
    EqRec(Term),
    NatRec(Term, Term),
}

fn plug(mut t: Term, mut frames: Vec<Frame>) -> Term {
    while let Some(fr) = frames.pop() {
        t = match fr {
            Frame::Arg(a) => Term::app(t, a),
            Frame::EqRec(b) => Term::eqrec(t, b),
            Frame::NatRec(b, c) => Term::natrec(t, b, c),
        };
    }
    t
}

pub(crate) enum Reduct {
    Value(Term),
    Step(Term),
    Unfold(Term),
    Stuck(Term, String),
    /// Head is a variable; only reachable for open terms.
    Blocked(Term, Name),
}

// Walks the head spine iteratively so that deeply left-nested terms do not
// exhaust the stack.
pub(crate) fn reduce(t: Term, env: &Env) -> Result<Reduct, EnvError> {
    let mut frames = Vec::new();
    let mut head = t;
    loop {
        match head {
            Term::App(f, a) => {
                frames.push(Frame::Arg(*a));
                head = *f;
            }
            Term::EqRec(s, b) => {
                frames.push(Frame::EqRec(*b));
                head = *s;
            }
            Term::NatRec(s, b, c) => {
                frames.push(Frame::NatRec(*b, *c));
                head = *s;
            }
            other => {
                head = other;
                break;
            }
        }
    }
    match head {
        Term::DefRef(n) => {
            let body = env.lookup(&n)?.clone();
            return Ok(Reduct::Unfold(plug(body, frames)));
        }
        Term::Var(x) => {
            let t = plug(Term::Var(x.clone()), frames);
            return Ok(Reduct::Blocked(t, x));
        }
        Term::Lam(..) if eta_contractum(&head).is_some() => {
            let Term::Lam(_, body) = head else { unreachable!() };
            let Term::App(a, _) = *body else { unreachable!() };
            return Ok(Reduct::Step(plug(*a, frames)));
        }
        _ => {}
    }
    let Some(frame) = frames.pop() else {
        return Ok(Reduct::Value(head));
    };
    let next = match (head, frame) {
        (Term::Lam(x, body), Frame::Arg(arg)) => substitute(&body, &x, &arg),
        (Term::Refl(_), Frame::EqRec(branch)) => branch,
        (Term::Zero, Frame::NatRec(base, _)) => base,
        (Term::Succ(pred), Frame::NatRec(base, step)) => {
            let rec = Term::natrec((*pred).clone(), base, step.clone());
            Term::app(Term::app(step, *pred), rec)
        }
        (head, frame) => {
            let reason = match &frame {
                Frame::Arg(_) => format!("{head} is not a function"),
                Frame::EqRec(_) => format!("eqrec scrutinee {head} is not refl"),
                Frame::NatRec(..) => format!("natrec scrutinee {head} is not a numeral"),
            };
            frames.push(frame);
            return Ok(Reduct::Stuck(plug(head, frames), reason));
        }
    };
    Ok(Reduct::Step(plug(next, frames)))
}

/// One transition of a closed term.
pub fn step(t: &Term, env: &Env) -> Result<StepResult, MachineError> {
    ensure_closed(t)?;
    Ok(match reduce(t.clone(), env)? {
        Reduct::Value(_) => StepResult::Value,
        Reduct::Step(n) => StepResult::StepsTo(n),
        Reduct::Unfold(n) => StepResult::Unfolds(n),
        Reduct::Stuck(_, r) => StepResult::Stuck(r),
        Reduct::Blocked(_, x) => unreachable!("closed term blocked on {x}"),
    })
}

fn run(
    t: Term,
    env: &Env,
    fuel: u64,
    mut observe: impl FnMut(EntryKind, &Term),
) -> Result<EvalResult, MachineError> {
    let mut t = t;
    let mut steps = 0;
    observe(EntryKind::Start, &t);
    loop {
        let snapshot = (steps == fuel).then(|| t.clone());
        match reduce(t, env)? {
            Reduct::Value(v) => return Ok(EvalResult::Evaluated { value: v, steps }),
            Reduct::Unfold(n) => {
                observe(EntryKind::Unfold, &n);
                t = n;
            }
            Reduct::Step(n) => {
                if let Some(last) = snapshot {
                    return Ok(EvalResult::FuelExhausted { last, fuel });
                }
                steps += 1;
                observe(EntryKind::Step, &n);
                t = n;
            }
            Reduct::Stuck(term, reason) => return Ok(EvalResult::StuckAt { term, steps, reason }),
            Reduct::Blocked(..) => unreachable!("closed term blocked"),
        }
    }
}

/// Iterates [`step`] at most `fuel` times.
pub fn eval(t: &Term, env: &Env, fuel: u64) -> Result<EvalResult, MachineError> {
    ensure_closed(t)?;
    run(t.clone(), env, fuel, |_, _| {})
}

/// Like [`eval`] but records every intermediate term.
pub fn trace_of(t: &Term, env: &Env, fuel: u64) -> Result<Trace, MachineError> {
    ensure_closed(t)?;
    let mut entries = Vec::new();
    let terminal = run(t.clone(), env, fuel, |kind, term| {
        entries.push(TraceEntry { kind, term: term.clone() })
    })?;
    Ok(Trace { entries, terminal })
}

/// Where evaluation of a possibly open term ends up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpenEval {
    Value(Term),
    /// No rule applies because the head is the free variable `var`.
    Blocked { term: Term, var: Name },
    Stuck(Term),
    Exhausted(Term),
}

impl OpenEval {
    pub fn term(&self) -> &Term {
        match self {
            OpenEval::Value(t) | OpenEval::Stuck(t) | OpenEval::Exhausted(t) => t,
            OpenEval::Blocked { term, .. } => term,
        }
    }
}

/// Runs the same rules on an open term, stopping when the head is a free
/// variable. Used to show how an open judgment fails to compute.
pub fn eval_open(t: &Term, env: &Env, fuel: u64) -> Result<OpenEval, EnvError> {
    let mut t = t.clone();
    let mut steps = 0;
    loop {
        let snapshot = (steps == fuel).then(|| t.clone());
        match reduce(t, env)? {
            Reduct::Value(v) => return Ok(OpenEval::Value(v)),
            Reduct::Unfold(n) => t = n,
            Reduct::Step(n) => {
                if let Some(last) = snapshot {
                    return Ok(OpenEval::Exhausted(last));
                }
                steps += 1;
                t = n;
            }
            Reduct::Stuck(s, _) => return Ok(OpenEval::Stuck(s)),
            Reduct::Blocked(term, var) => return Ok(OpenEval::Blocked { term, var }),
        }
    }
}

/// Evaluates to a value and then keeps evaluating the arguments of `succ`
/// and `refl`, so numerals come out as `succ^n(zero)`. Each evaluation
/// gets the full `fuel`.
pub fn eval_data(t: &Term, env: &Env, fuel: u64) -> Result<EvalResult, MachineError> {
    let mut total = 0;
    let mut wrappers = Vec::new();
    let mut cur = t.clone();
    loop {
        match eval(&cur, env, fuel)? {
            EvalResult::Evaluated { value, steps } => {
                total += steps;
                match value {
                    Term::Succ(p) => {
                        wrappers.push(Term::succ as fn(Term) -> Term);
                        cur = *p;
                    }
                    Term::Refl(p) => {
                        wrappers.push(Term::refl as fn(Term) -> Term);
                        cur = *p;
                    }
                    v => {
                        let value = wrappers.into_iter().rev().fold(v, |acc, w| w(acc));
                        return Ok(EvalResult::Evaluated { value, steps: total });
                    }
                }
            }
            other => return Ok(other),
        }
    }
}
