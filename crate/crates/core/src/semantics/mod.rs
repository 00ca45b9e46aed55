//! Meaning explanations: the judgment forms are explained by how closed
//! terms evaluate to canonical forms. Quantification over all closed
//! instances is replaced by bounded enumeration plus seeded sampling, so
//! every check yields a three-valued [`Verdict`].

mod check;

use std::fmt;

use thiserror::Error;

use crate::machine::{MachineError, DEFAULT_FUEL};
use crate::syntax::{substitute, Env, Name, Term};

pub use check::{Checker, UniqueByTerms};

pub const DEFAULT_INSTANCE_SIZE: usize = 7;
pub const DEFAULT_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("{0} does not evaluate to a canonical type")]
    NotACanonicalType(Term),
    #[error("scope error: {0}")]
    Scope(String),
}

impl From<crate::syntax::EnvError> for SemanticsError {
    fn from(e: crate::syntax::EnvError) -> Self {
        SemanticsError::Machine(MachineError::Env(e))
    }
}

/// Resource bounds for a semi-decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget {
    /// Transition steps allowed per evaluation.
    pub fuel: u64,
    /// Largest AST size of enumerated closed instances.
    pub instance_size: usize,
    /// Extra random instances per hypothesis of a hypothetical judgment.
    pub samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            fuel: DEFAULT_FUEL,
            instance_size: DEFAULT_INSTANCE_SIZE,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fuel={} bound={} samples={} seed={}",
            self.fuel, self.instance_size, self.samples, self.seed
        )
    }
}

/// The four categorical judgment forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Judgment {
    TypeEq(Term, Term),
    TermEq(Term, Term, Term),
    IsType(Term),
    Member(Term, Term),
}

impl Judgment {
    /// Typehood and membership are the reflexive cases of the equalities.
    pub fn as_equality(&self) -> Judgment {
        match self {
            Judgment::IsType(a) => Judgment::TypeEq(a.clone(), a.clone()),
            Judgment::Member(a, ty) => Judgment::TermEq(a.clone(), a.clone(), ty.clone()),
            j => j.clone(),
        }
    }

    fn terms(&self) -> Vec<&Term> {
        match self {
            Judgment::TypeEq(a, b) | Judgment::Member(a, b) => vec![a, b],
            Judgment::TermEq(a, b, c) => vec![a, b, c],
            Judgment::IsType(a) => vec![a],
        }
    }

    pub fn free_vars(&self) -> std::collections::BTreeSet<Name> {
        self.terms().into_iter().flat_map(|t| t.free_vars()).collect()
    }

    pub fn substitute(&self, x: &str, v: &Term) -> Judgment {
        let s = |t: &Term| substitute(t, x, v);
        match self {
            Judgment::TypeEq(a, b) => Judgment::TypeEq(s(a), s(b)),
            Judgment::TermEq(a, b, c) => Judgment::TermEq(s(a), s(b), s(c)),
            Judgment::IsType(a) => Judgment::IsType(s(a)),
            Judgment::Member(a, b) => Judgment::Member(s(a), s(b)),
        }
    }

    pub fn render(&self, unicode: bool) -> String {
        let eq = if unicode { "≡" } else { "==" };
        match self {
            Judgment::TypeEq(a, b) => format!("{a} {eq} {b} type"),
            Judgment::TermEq(a, b, ty) => format!("{a} {eq} {b} : {ty}"),
            Judgment::IsType(a) => format!("{a} type"),
            Judgment::Member(a, ty) => format!("{a} : {ty}"),
        }
    }

    /// A command line that re-checks this judgment.
    pub fn to_command(&self) -> String {
        match self {
            Judgment::TypeEq(a, b) => format!("typeEq {} {}", arg(a), arg(b)),
            Judgment::TermEq(a, b, ty) => format!("termEq {} {} {}", arg(a), arg(b), arg(ty)),
            Judgment::IsType(a) => format!("typeEq {} {}", arg(a), arg(a)),
            Judgment::Member(a, ty) => format!("member {} {}", arg(a), arg(ty)),
        }
    }
}

// Command arguments are separated by spaces, so anything that is not an
// atom-like term gets wrapped.
fn arg(t: &Term) -> String {
    match t {
        Term::Lam(..) | Term::Pi(..) => format!("({t})"),
        _ => t.to_string(),
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// Hypotheses `x1 : A1, ..., xn : An`; each `Ai` may mention earlier `xj`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Context(pub Vec<(Name, Term)>);

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, x: impl Into<Name>, ty: Term) -> Self {
        self.0.push((x.into(), ty));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> Vec<Name> {
        self.0.iter().map(|(x, _)| x.clone()).collect()
    }

    /// Checks that every hypothesis and the judgment mention only earlier
    /// variables.
    pub fn check_scope(&self, j: &Judgment) -> Result<(), SemanticsError> {
        let mut seen: Vec<&str> = Vec::new();
        for (x, ty) in &self.0 {
            if let Some(v) = ty.free_vars().into_iter().find(|v| !seen.contains(&v.as_str())) {
                return Err(SemanticsError::Scope(format!(
                    "hypothesis {x} : {ty} mentions `{v}` before it is introduced"
                )));
            }
            seen.push(x);
        }
        if let Some(v) = j.free_vars().into_iter().find(|v| !seen.contains(&v.as_str())) {
            return Err(SemanticsError::Scope(format!("`{v}` is not bound by the context")));
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|(x, t)| format!("{x} : {t}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// A judgment under hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypothetical {
    pub context: Context,
    pub judgment: Judgment,
}

impl Hypothetical {
    pub fn render(&self, unicode: bool) -> String {
        let turnstile = if unicode { "⊢" } else { "|-" };
        let ctx = self.context.render();
        if ctx.is_empty() {
            format!("{turnstile} {}", self.judgment.render(unicode))
        } else {
            format!("{ctx} {turnstile} {}", self.judgment.render(unicode))
        }
    }

    pub fn to_command(&self) -> String {
        format!("hyp {}", self.render(false))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Evidence {
    /// Number of categorical checks that succeeded.
    pub checked: usize,
    /// Holds only on the enumerated/sampled instances.
    pub bounded: bool,
    /// Some hypothesis had no instances at all.
    pub vacuous: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Canonical forms do not match, or a term is stuck.
    Mismatch,
    /// A precondition of the operation was not met.
    Precondition,
    /// An implication that should be valid was refuted.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: FailureKind,
    /// Closed instances substituted for hypotheses or Π-binders.
    pub instance: Vec<(Name, Term)>,
    /// The closed categorical judgment that failed, when there is one.
    pub judgment: Option<Judgment>,
    pub mismatch: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exhaustion {
    pub budget: Budget,
    pub reason: String,
    pub instance: Vec<(Name, Term)>,
}

/// Three-valued outcome of a semi-decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds(Evidence),
    Fails(Counterexample),
    Unknown(Exhaustion),
}

impl Verdict {
    pub fn holds() -> Verdict {
        Verdict::Holds(Evidence {
            checked: 1,
            ..Evidence::default()
        })
    }

    pub fn fails(kind: FailureKind, judgment: Option<Judgment>, mismatch: impl Into<String>) -> Verdict {
        Verdict::Fails(Counterexample {
            kind,
            instance: Vec::new(),
            judgment,
            mismatch: mismatch.into(),
        })
    }

    pub fn mismatch(judgment: &Judgment, mismatch: impl Into<String>) -> Verdict {
        Verdict::fails(FailureKind::Mismatch, Some(judgment.clone()), mismatch)
    }

    pub fn unknown(budget: Budget, reason: impl Into<String>) -> Verdict {
        Verdict::Unknown(Exhaustion {
            budget,
            reason: reason.into(),
            instance: Vec::new(),
        })
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "HOLDS",
            Verdict::Fails(_) => "FAILS",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn notes(&self) -> &[String] {
        match self {
            Verdict::Holds(e) => &e.notes,
            _ => &[],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Verdict {
        if let Verdict::Holds(e) = &mut self {
            e.notes.push(note.into());
        }
        self
    }

    /// Records that this verdict was reached under `x := v`.
    pub fn under_instance(mut self, x: &str, v: &Term) -> Verdict {
        match &mut self {
            Verdict::Fails(c) => c.instance.insert(0, (x.to_string(), v.clone())),
            Verdict::Unknown(u) => u.instance.insert(0, (x.to_string(), v.clone())),
            Verdict::Holds(_) => {}
        }
        self
    }

    /// Bracketed evidence reference for the one-line report format.
    pub fn evidence_ref(&self) -> String {
        match self {
            Verdict::Holds(e) => {
                let mut parts = vec![format!("checked={}", e.checked)];
                if e.bounded {
                    parts.push("bounded".into());
                }
                if e.vacuous {
                    parts.push("vacuous".into());
                }
                format!("[{}]", parts.join(", "))
            }
            Verdict::Fails(c) => {
                let mut parts = Vec::new();
                if c.kind != FailureKind::Mismatch {
                    parts.push(format!("{:?}", c.kind).to_lowercase());
                }
                if !c.instance.is_empty() {
                    parts.push(format!("instance {}", render_instance(&c.instance)));
                }
                parts.push(c.mismatch.clone());
                format!("[{}]", parts.join("; "))
            }
            Verdict::Unknown(u) => {
                let mut parts = vec![u.reason.clone()];
                if !u.instance.is_empty() {
                    parts.push(format!("instance {}", render_instance(&u.instance)));
                }
                parts.push(u.budget.to_string());
                format!("[{}]", parts.join("; "))
            }
        }
    }
}

pub fn render_instance(inst: &[(Name, Term)]) -> String {
    inst.iter()
        .map(|(x, v)| format!("{x} := {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Conjunction of verdicts: the first failure wins, otherwise any unknown,
/// otherwise holds with the evidence summed.
#[derive(Debug, Default)]
pub(crate) struct Conjunction {
    checked: usize,
    bounded: bool,
    vacuous: bool,
    notes: Vec<String>,
    unknown: Option<Exhaustion>,
}

impl Conjunction {
    pub fn bounded() -> Self {
        Conjunction {
            bounded: true,
            ..Default::default()
        }
    }

    /// Returns the failure to short-circuit on.
    pub fn add(&mut self, v: Verdict) -> Option<Verdict> {
        match v {
            Verdict::Holds(e) => {
                self.checked += e.checked;
                self.bounded |= e.bounded;
                self.vacuous |= e.vacuous;
                for n in e.notes {
                    if !self.notes.contains(&n) {
                        self.notes.push(n);
                    }
                }
                None
            }
            Verdict::Unknown(u) => {
                self.unknown.get_or_insert(u);
                None
            }
            f @ Verdict::Fails(_) => Some(f),
        }
    }

    pub fn mark_vacuous(&mut self) {
        self.vacuous = true;
    }

    pub fn finish(self) -> Verdict {
        match self.unknown {
            Some(u) => Verdict::Unknown(u),
            None => Verdict::Holds(Evidence {
                checked: self.checked,
                bounded: self.bounded,
                vacuous: self.vacuous,
                notes: self.notes,
            }),
        }
    }
}

macro_rules! conj {
    ($acc:expr, $v:expr) => {
        if let Some(f) = $acc.add($v) {
            return Ok(f);
        }
    };
}
pub(crate) use conj;

pub fn check_type_eq(a: &Term, b: &Term, env: &Env, budget: Budget) -> Result<Verdict, SemanticsError> {
    Checker::new(env, budget).check_type_eq(a, b)
}

pub fn check_term_eq(a: &Term, b: &Term, ty: &Term, env: &Env, budget: Budget) -> Result<Verdict, SemanticsError> {
    Checker::new(env, budget).check_term_eq(a, b, ty)
}

pub fn check_member(a: &Term, ty: &Term, env: &Env, budget: Budget) -> Result<Verdict, SemanticsError> {
    Checker::new(env, budget).check_member(a, ty)
}

pub fn check_hypothetical(ctx: &Context, j: &Judgment, env: &Env, budget: Budget) -> Result<Verdict, SemanticsError> {
    Checker::new(env, budget).check_hypothetical(ctx, j)
}

pub fn check_reflection(
    p: &Term,
    a: &Term,
    b: &Term,
    ty: &Term,
    env: &Env,
    budget: Budget,
) -> Result<Verdict, SemanticsError> {
    Checker::new(env, budget).check_reflection(p, a, b, ty)
}

pub fn check_axiom_k(ty: &Term, a: &Term, env: &Env, budget: Budget) -> Result<Verdict, SemanticsError> {
    Checker::new(env, budget).check_axiom_k(ty, a)
}

pub fn check_unique_by_terms(a: &Term, b: &Term, env: &Env, budget: Budget) -> Result<UniqueByTerms, SemanticsError> {
    Checker::new(env, budget).check_unique_by_terms(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_precedence() {
        let mut c = Conjunction::default();
        assert!(c.add(Verdict::holds()).is_none());
        assert!(c.add(Verdict::unknown(Budget::default(), "fuel")).is_none());
        assert!(c.finish().is_unknown());

        let mut c = Conjunction::default();
        c.add(Verdict::unknown(Budget::default(), "fuel"));
        assert!(c.add(Verdict::fails(FailureKind::Mismatch, None, "x")).is_some());

        let mut c = Conjunction::bounded();
        c.add(Verdict::holds());
        c.add(Verdict::holds());
        match c.finish() {
            Verdict::Holds(e) => {
                assert_eq!(e.checked, 2);
                assert!(e.bounded);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn scope_checks() {
        let ctx = Context::new().with("x", Term::Nat).with("p", Term::id(Term::Nat, Term::var("x"), Term::var("x")));
        let j = Judgment::Member(Term::var("p"), Term::id(Term::Nat, Term::var("x"), Term::var("x")));
        assert!(ctx.check_scope(&j).is_ok());
        let bad = Context::new().with("p", Term::id(Term::Nat, Term::var("x"), Term::var("x")));
        assert!(bad.check_scope(&j).is_err());
        assert!(Context::new().check_scope(&Judgment::IsType(Term::var("y"))).is_err());
    }

    #[test]
    fn judgment_rendering() {
        let j = Judgment::TermEq(Term::Zero, Term::numeral(1), Term::Nat);
        assert_eq!(j.render(false), "zero == succ(zero) : Nat");
        assert_eq!(j.render(true), "zero ≡ succ(zero) : Nat");
        assert_eq!(j.to_command(), "termEq zero succ(zero) Nat");
        let j = Judgment::Member(Term::lam("x", Term::var("x")), Term::pi("x", Term::Nat, Term::Nat));
        assert_eq!(j.to_command(), "member (\\x. x) ((x : Nat) -> Nat)");
    }
}
