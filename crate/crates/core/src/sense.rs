//! Sense and reference. A closed term is a program (its sense); the
//! canonical form it evaluates to is its value (its reference). Sense
//! identity is α-equivalence after unfolding definitions, with lockstep
//! trace comparison as a diagnostic; reference identity is judgmental
//! equality.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::machine::{eval, step, EvalResult, MachineError, StepResult};
use crate::semantics::{Budget, Checker, Conjunction, Counterexample, FailureKind, SemanticsError, Verdict};
use crate::syntax::{alpha_eq, parse_closed, substitute, Env, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SenseError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("type mismatch: {term} is not established as a member of {ty}: {reason}")]
    TypeMismatch { term: Term, ty: Term, reason: String },
}

impl From<crate::syntax::EnvError> for SenseError {
    fn from(e: crate::syntax::EnvError) -> Self {
        SenseError::Machine(MachineError::Env(e))
    }
}

/// Where a source text stands between expression, program and referring
/// program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticStatus {
    /// Not a closed well-formed term.
    Expression(String),
    /// A runnable term with no value within fuel.
    Program(Term),
    Referring { term: Term, value: Term },
}

impl SemanticStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            SemanticStatus::Expression(_) => "EXPRESSION",
            SemanticStatus::Program(_) => "PROGRAM",
            SemanticStatus::Referring { .. } => "REFERRING",
        }
    }
}

impl fmt::Display for SemanticStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticStatus::Expression(e) => write!(f, "EXPRESSION ({e})"),
            SemanticStatus::Program(t) => write!(f, "PROGRAM {t} (no value within fuel)"),
            SemanticStatus::Referring { term, value } => write!(f, "REFERRING {term} (value {value})"),
        }
    }
}

pub fn classify(src: &str, env: &Env, fuel: u64) -> SemanticStatus {
    let term = match parse_closed(src, env) {
        Ok(t) => t,
        Err(e) => return SemanticStatus::Expression(e.to_string()),
    };
    match eval(&term, env, fuel) {
        Ok(EvalResult::Evaluated { value, .. }) => SemanticStatus::Referring { term, value },
        Ok(_) => SemanticStatus::Program(term),
        Err(e) => SemanticStatus::Expression(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SenseMode {
    #[default]
    Defn,
    Trace,
}

impl fmt::Display for SenseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SenseMode::Defn => "DEFN",
            SenseMode::Trace => "TRACE",
        })
    }
}

impl FromStr for SenseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "defn" => Ok(SenseMode::Defn),
            "trace" => Ok(SenseMode::Trace),
            other => Err(format!("unknown sense mode `{other}` (expected defn or trace)")),
        }
    }
}

fn mode_note(mode: SenseMode) -> String {
    format!("mode={mode}")
}

/// Same sense. DEFN accepts open terms; TRACE needs closed ones.
pub fn sense_eq(a: &Term, b: &Term, env: &Env, mode: SenseMode, fuel: u64) -> Result<Verdict, SenseError> {
    let ua = env.unfold(a)?;
    let ub = env.unfold(b)?;
    match mode {
        SenseMode::Defn => Ok(if alpha_eq(&ua, &ub) {
            Verdict::holds().with_note(mode_note(mode))
        } else {
            Verdict::fails(FailureKind::Mismatch, None, "not α-equivalent after unfolding definitions")
        }),
        SenseMode::Trace => trace_eq(ua, ub, env, fuel),
    }
}

// Definitions are already unfolded, so no unfold actions occur.
fn trace_eq(mut a: Term, mut b: Term, env: &Env, fuel: u64) -> Result<Verdict, SenseError> {
    for v in [&a, &b] {
        if !v.is_closed() {
            return Err(MachineError::OpenTerm(v.free_vars().into_iter().collect()).into());
        }
    }
    let mut i = 0u64;
    loop {
        if !alpha_eq(&a, &b) {
            return Ok(Verdict::fails(
                FailureKind::Mismatch,
                None,
                format!("traces differ at step {i}: {a} vs {b}"),
            ));
        }
        let (sa, sb) = (step(&a, env)?, step(&b, env)?);
        match (sa, sb) {
            (StepResult::StepsTo(na), StepResult::StepsTo(nb)) | (StepResult::Unfolds(na), StepResult::Unfolds(nb)) => {
                if i == fuel {
                    return Ok(Verdict::unknown(
                        Budget { fuel, ..Budget::default() },
                        format!("traces agree for {fuel} steps"),
                    ));
                }
                i += 1;
                a = na;
                b = nb;
            }
            (StepResult::Value, StepResult::Value) | (StepResult::Stuck(_), StepResult::Stuck(_)) => {
                return Ok(Verdict::Holds(crate::semantics::Evidence {
                    checked: i as usize + 1,
                    notes: vec![mode_note(SenseMode::Trace), format!("traces agree over {i} step(s)")],
                    ..Default::default()
                }))
            }
            _ => return Ok(Verdict::fails(FailureKind::Mismatch, None, format!("traces end differently after {i} step(s)"))),
        }
    }
}

fn sense_note(a: &Term, b: &Term, env: &Env, v: Verdict) -> Verdict {
    if v.is_holds() {
        if let Ok(s) = sense_eq(a, b, env, SenseMode::Defn, 0) {
            return v.with_note(if s.is_holds() {
                "same sense".to_string()
            } else {
                "coreferential but not same sense".to_string()
            });
        }
    }
    v
}

/// Same reference: `a == b : A`.
pub fn coref_terms(a: &Term, b: &Term, ty: &Term, env: &Env, budget: Budget) -> Result<Verdict, SenseError> {
    let v = Checker::new(env, budget).check_term_eq(a, b, ty)?;
    Ok(sense_note(a, b, env, v))
}

/// Same reference for types: `A == B type`.
pub fn coref_types(a: &Term, b: &Term, env: &Env, budget: Budget) -> Result<Verdict, SenseError> {
    let v = Checker::new(env, budget).check_type_eq(a, b)?;
    Ok(sense_note(a, b, env, v))
}

/// Equipollence read as "every realizer of one realizes the other",
/// checked over enumerated members.
pub fn equipollent_types_sundholm(a: &Term, b: &Term, env: &Env, budget: Budget) -> Result<Verdict, SenseError> {
    let r = Checker::new(env, budget).check_unique_by_terms(a, b)?;
    let v = r
        .extensional
        .with_note("this reading yields coreference, not sameness of sense")
        .with_note(format!("type equality: {}", r.intensional.tag()));
    Ok(v)
}

/// Equipollence read computationally: same sense, with a TRACE diagnostic
/// when DEFN fails.
pub fn equipollent_types_computational(a: &Term, b: &Term, env: &Env, fuel: u64) -> Result<Verdict, SenseError> {
    let v = sense_eq(a, b, env, SenseMode::Defn, fuel)?;
    let Verdict::Fails(c) = v else { return Ok(v) };
    let diag = match sense_eq(a, b, env, SenseMode::Trace, fuel) {
        Ok(t @ Verdict::Fails(_)) | Ok(t @ Verdict::Unknown(_)) => match &t {
            Verdict::Fails(tc) => format!("TRACE: {}", tc.mismatch),
            _ => format!("TRACE: {}", t.evidence_ref()),
        },
        Ok(t) => format!("TRACE: {}", t.tag()),
        Err(e) => format!("TRACE unavailable: {e}"),
    };
    Ok(Verdict::Fails(Counterexample {
        mismatch: format!("{}; {diag}", c.mismatch),
        ..c
    }))
}

/// An open type `P` over `var : domain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub var: Name,
    pub domain: Term,
    pub body: Term,
}

impl Family {
    pub fn new(var: impl Into<Name>, domain: Term, body: Term) -> Self {
        Family {
            var: var.into(),
            domain,
            body,
        }
    }

    /// The standard family `x : A. Eq(A, x, x)`.
    pub fn reflexivity(domain: Term) -> Self {
        let body = Term::id(domain.clone(), Term::var("x"), Term::var("x"));
        Family::new("x", domain, body)
    }

    pub fn at(&self, t: &Term) -> Term {
        substitute(&self.body, &self.var, t)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} |- {} type", self.var, self.domain, self.body)
    }
}

/// Terms are equipollent under `family` when its instances at `a` and `b`
/// are equipollent types. Both terms must be members of the domain.
pub fn equipollent_terms(a: &Term, b: &Term, family: &Family, env: &Env, budget: Budget) -> Result<Verdict, SenseError> {
    let checker = Checker::new(env, budget);
    for t in [a, b] {
        match checker.check_member(t, &family.domain)? {
            Verdict::Holds(_) => {}
            other => {
                return Err(SenseError::TypeMismatch {
                    term: t.clone(),
                    ty: family.domain.clone(),
                    reason: other.evidence_ref(),
                })
            }
        }
    }
    let v = equipollent_types_computational(&family.at(a), &family.at(b), env, budget.fuel)?;
    Ok(v.with_note(format!("family {family}")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalEquivalence {
    /// Both directions hold.
    pub verdict: Verdict,
    pub forward: Verdict,
    pub backward: Verdict,
    /// `A == B type`, which logical equivalence does not imply.
    pub coreference: Verdict,
    /// Logically equivalent but not coreferential.
    pub propext_counterexample: bool,
}

pub const PROPEXT_NOTE: &str = "propositional extensionality counterexample: logically equivalent types that are \
     not coreferential; identifying them would be false in the meaning explanations";

/// `f : A -> B` and `g : B -> A`, reported alongside `A == B type`.
pub fn logical_equivalence(
    f: &Term,
    g: &Term,
    a: &Term,
    b: &Term,
    env: &Env,
    budget: Budget,
) -> Result<LogicalEquivalence, SenseError> {
    let checker = Checker::new(env, budget);
    let forward = checker.check_member(f, &Term::arrow(a.clone(), b.clone()))?;
    let backward = checker.check_member(g, &Term::arrow(b.clone(), a.clone()))?;
    let coreference = checker.check_type_eq(a, b)?;
    let mut acc = Conjunction::default();
    let verdict = match acc.add(forward.clone()).or_else(|| acc.add(backward.clone())) {
        Some(fail) => fail,
        None => acc.finish(),
    };
    let propext_counterexample = verdict.is_holds() && coreference.is_fails();
    let verdict = if propext_counterexample {
        verdict.with_note(PROPEXT_NOTE)
    } else {
        verdict.with_note(format!("type equality: {}", coreference.tag()))
    };
    Ok(LogicalEquivalence {
        verdict,
        forward,
        backward,
        coreference,
        propext_counterexample,
    })
}

/// One analysis report block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub query: String,
    pub mode: String,
    pub verdict: Verdict,
    pub evidence: Vec<String>,
}

impl Analysis {
    pub fn new(query: impl Into<String>, mode: impl Into<String>, verdict: Verdict) -> Self {
        Analysis {
            query: query.into(),
            mode: mode.into(),
            verdict,
            evidence: Vec::new(),
        }
    }

    pub fn with_evidence(mut self, e: impl Into<String>) -> Self {
        self.evidence.push(e.into());
        self
    }

    pub fn render_block(&self) -> String {
        let mut out = format!(
            "QUERY: {}\nMODE: {}\nVERDICT: {} {}\n",
            self.query,
            self.mode,
            self.verdict.tag(),
            self.verdict.evidence_ref()
        );
        for e in &self.evidence {
            out.push_str(&format!("EVIDENCE: {e}\n"));
        }
        for n in self.verdict.notes() {
            out.push_str(&format!("NOTES: {n}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_definitions};

    fn env_with_two() -> Env {
        let mut env = Env::new();
        parse_definitions("def two := succ(succ(zero));", &mut env).unwrap();
        env
    }

    fn t(s: &str, env: &Env) -> Term {
        parse(s, env).unwrap()
    }

    fn small() -> Budget {
        Budget {
            instance_size: 4,
            samples: 5,
            ..Budget::default()
        }
    }

    #[test]
    fn classification() {
        let env = Env::new();
        assert_eq!(
            classify("(\\x. refl(x))(zero)", &env, 100),
            SemanticStatus::Referring {
                term: t("(\\x. refl(x))(zero)", &env),
                value: t("refl(zero)", &env)
            }
        );
        assert!(matches!(classify("(\\x. x(x))(\\x. x(x))", &env, 100), SemanticStatus::Program(_)));
        assert!(matches!(classify("succ(", &env, 100), SemanticStatus::Expression(_)));
        assert!(matches!(classify("zero(zero)", &env, 100), SemanticStatus::Program(_)));
    }

    #[test]
    fn sense_equality() {
        let env = env_with_two();
        let id_x = t("\\x. x", &env);
        let id_y = t("\\y. y", &env);
        for mode in [SenseMode::Defn, SenseMode::Trace] {
            let v = sense_eq(&id_x, &id_y, &env, mode, 100).unwrap();
            assert!(v.is_holds());
            assert_eq!(v.notes()[0], format!("mode={mode}"));
            assert!(sense_eq(&t("(\\x. x)(zero)", &env), &Term::Zero, &env, mode, 100).unwrap().is_fails());
        }
        assert!(sense_eq(&t("two", &env), &Term::numeral(2), &env, SenseMode::Defn, 0).unwrap().is_holds());
        let omega = t("(\\x. x(x))(\\x. x(x))", &env);
        assert!(sense_eq(&omega, &omega, &env, SenseMode::Trace, 50).unwrap().is_unknown());
        assert!(matches!(
            sense_eq(&Term::var("x"), &Term::var("x"), &env, SenseMode::Trace, 5),
            Err(SenseError::Machine(MachineError::OpenTerm(_)))
        ));
    }

    #[test]
    fn coreference() {
        let env = Env::new();
        let v = coref_terms(&t("(\\x. x)(zero)", &env), &Term::Zero, &Term::Nat, &env, small()).unwrap();
        assert!(v.is_holds());
        assert!(v.notes().iter().any(|n| n == "coreferential but not same sense"));
        let z = t("natrec(zero, zero, \\k. \\r. succ(r))", &env);
        assert!(coref_terms(&Term::Zero, &z, &Term::Nat, &env, small()).unwrap().is_holds());
        assert!(coref_terms(&Term::Zero, &Term::numeral(1), &Term::Nat, &env, small()).unwrap().is_fails());
        let a = t("(\\x. x)(Nat)", &env);
        let b = t("natrec(zero, Nat, \\x. x(x))", &env);
        assert!(coref_types(&a, &b, &env, small()).unwrap().is_holds());
        assert!(sense_eq(&a, &b, &env, SenseMode::Defn, 0).unwrap().is_fails());
        assert!(coref_types(&t("(x : Nat) -> Nat", &env), &Term::Nat, &env, small()).unwrap().is_fails());
    }

    #[test]
    fn equipollence() {
        let env = env_with_two();
        let b = small();
        let nat2 = t("natrec(zero, Nat, \\x. x(x))", &env);
        assert!(equipollent_types_sundholm(&Term::Nat, &nat2, &env, b).unwrap().is_holds());
        let Verdict::Fails(c) = equipollent_types_sundholm(&Term::Nat, &t("(x : Nat) -> Nat", &env), &env, b).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.instance, vec![("m".to_string(), Term::Zero)]);

        assert!(equipollent_types_computational(&Term::Nat, &Term::Nat, &env, 100).unwrap().is_holds());
        let v = equipollent_types_computational(&t("(\\x. x)(Nat)", &env), &Term::Nat, &env, 100).unwrap();
        let Verdict::Fails(c) = v else { panic!() };
        assert!(c.mismatch.contains("TRACE: traces differ at step 0"));
        let a1 = t("(x : Nat) -> Eq(Nat, x, x)", &env);
        let a2 = t("(y : Nat) -> Eq(Nat, y, y)", &env);
        assert!(equipollent_types_computational(&a1, &a2, &env, 100).unwrap().is_holds());

        let fam = Family::reflexivity(Term::Nat);
        assert!(equipollent_terms(&Term::Zero, &Term::Zero, &fam, &env, b).unwrap().is_holds());
        assert!(equipollent_terms(&t("two", &env), &Term::numeral(2), &fam, &env, b).unwrap().is_holds());
        assert!(equipollent_terms(&t("(\\x. x)(zero)", &env), &Term::Zero, &fam, &env, b).unwrap().is_fails());
        assert!(matches!(
            equipollent_terms(&Term::Nat, &Term::Zero, &fam, &env, b),
            Err(SenseError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn logical_equivalence_examples() {
        let env = Env::new();
        let b = small();
        let f = t("\\n. \\m. n", &env);
        let g = t("\\h. h(zero)", &env);
        let r = logical_equivalence(&f, &g, &Term::Nat, &t("(x : Nat) -> Nat", &env), &env, b).unwrap();
        assert!(r.verdict.is_holds());
        assert!(r.coreference.is_fails());
        assert!(r.propext_counterexample);
        assert!(r.verdict.notes().iter().any(|n| n.contains("would be false in the meaning explanations")));

        let id = t("\\x. x", &env);
        let r = logical_equivalence(&id, &id, &Term::Nat, &Term::Nat, &env, b).unwrap();
        assert!(r.verdict.is_holds() && r.coreference.is_holds() && !r.propext_counterexample);
        let r = logical_equivalence(&Term::Zero, &id, &Term::Nat, &Term::Nat, &env, b).unwrap();
        assert!(r.verdict.is_fails());
    }

    #[test]
    fn analysis_block() {
        let a = Analysis::new("senseEq \\x. x \\y. y", "DEFN", Verdict::holds().with_note("mode=DEFN"))
            .with_evidence("trace-1.txt");
        let block = a.render_block();
        assert!(block.starts_with("QUERY: senseEq"));
        assert!(block.contains("\nMODE: DEFN\nVERDICT: HOLDS [checked=1]\nEVIDENCE: trace-1.txt\nNOTES: mode=DEFN\n"));
    }
}
