use std::fmt::Write as _;

use super::normalize::{alpha_eq_oracle, normalize_oracle, OracleResult};
use super::reference::{ReferenceChecker, Tri};
use super::{enumerate_closed, EnumSpec};
use crate::machine::{eval, is_value, step, EvalResult, StepResult};
use crate::semantics::{Budget, Checker, FailureKind, Verdict};
use crate::syntax::{Env, Term};

/// Largest type and member size used by the equality comparison, and the
/// largest size used for term pairs. These keep the quadratic part small.
const EQ_TYPE_SIZE: usize = 4;
const EQ_PAIR_SIZE: usize = 3;
const EQ_INSTANCE_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub check: &'static str,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub term: String,
    pub check: &'static str,
    pub verdict: String,
}

/// Outcome of [`differential_suite`].
#[derive(Debug, Clone)]
pub struct DiffReport {
    pub spec: EnumSpec,
    pub terms: usize,
    /// Terms whose evaluation ran out of fuel (on both routes).
    pub fuel_exhausted: usize,
    pub tallies: Vec<Tally>,
    /// One line per disagreement.
    pub counterexamples: Vec<String>,
    pub rows: Vec<Row>,
}

impl DiffReport {
    pub fn disagreements(&self) -> usize {
        self.tallies.iter().map(|t| t.failed).sum()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "differential suite: max size {}, constructors {}, fuel {}",
            self.spec.max_size, self.spec.forms, self.spec.fuel
        );
        let _ = writeln!(out, "terms: {}", self.terms);
        let _ = writeln!(out, "fuel exhausted: {}", self.fuel_exhausted);
        for t in &self.tallies {
            let _ = writeln!(out, "{:<14} pass {:>7}  fail {:>4}", t.check, t.passed, t.failed);
        }
        for c in &self.counterexamples {
            let _ = writeln!(out, "counterexample: {c}");
        }
        let _ = write!(out, "disagreements: {}", self.disagreements());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["term", "check", "verdict"]).expect("in-memory write");
        for r in &self.rows {
            w.write_record([r.term.as_str(), r.check, r.verdict.as_str()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

struct Run {
    report: DiffReport,
}

impl Run {
    fn tally(&mut self, check: &'static str) -> usize {
        if let Some(i) = self.report.tallies.iter().position(|t| t.check == check) {
            return i;
        }
        self.report.tallies.push(Tally {
            check,
            passed: 0,
            failed: 0,
        });
        self.report.tallies.len() - 1
    }

    fn record(&mut self, check: &'static str, term: String, ok: bool, verdict: String) {
        let i = self.tally(check);
        if ok {
            self.report.tallies[i].passed += 1;
        } else {
            self.report.tallies[i].failed += 1;
            self.report.counterexamples.push(format!("{check}: {term}: {verdict}"));
        }
        self.report.rows.push(Row { term, check, verdict });
    }
}

fn machine_vs_oracle(m: &EvalResult, o: &OracleResult, env: &Env) -> (bool, String) {
    match (m, o) {
        (EvalResult::Evaluated { value, steps }, OracleResult::Value { value: ov, steps: os }) => {
            let unfolded = env.unfold(value).unwrap_or_else(|_| value.clone());
            let ok = alpha_eq_oracle(&unfolded, ov) && steps == os;
            (ok, if ok { format!("value {value}") } else { format!("machine {value} ({steps}) vs oracle {ov} ({os})") })
        }
        (EvalResult::FuelExhausted { .. }, OracleResult::Exhausted { .. }) => (true, "exhausted".into()),
        (EvalResult::StuckAt { steps, .. }, OracleResult::Stuck { steps: os }) => {
            (steps == os, format!("stuck after {steps}/{os}"))
        }
        (m, o) => (false, format!("machine {m} vs oracle {o:?}")),
    }
}

fn tri_of(v: &Verdict) -> Tri {
    match v {
        Verdict::Holds(_) => Tri::Holds,
        Verdict::Fails(_) => Tri::Fails,
        Verdict::Unknown(_) => Tri::Unknown,
    }
}

/// Runs every cross-check over the closed terms of `spec`.
pub fn differential_suite(spec: &EnumSpec, env: &Env) -> DiffReport {
    let corpus = enumerate_closed(spec);
    let mut run = Run {
        report: DiffReport {
            spec: *spec,
            terms: corpus.len(),
            fuel_exhausted: 0,
            tallies: Vec::new(),
            counterexamples: Vec::new(),
            rows: Vec::new(),
        },
    };
    for name in ["determinism", "eval-oracle", "term-eq", "reflection", "axiom-k"] {
        run.tally(name);
    }

    let mut evaluated = Vec::with_capacity(corpus.len());
    for t in &corpus {
        let s1 = step(t, env).expect("enumerated terms are closed");
        let s2 = step(t, env).expect("enumerated terms are closed");
        let value = is_value(t).expect("enumerated terms are closed");
        let ok = s1 == s2 && (s1 == StepResult::Value) == value;
        let verdict = match &s1 {
            StepResult::Value => "value".to_string(),
            StepResult::StepsTo(_) => "steps".to_string(),
            StepResult::Unfolds(_) => "unfolds".to_string(),
            StepResult::Stuck(_) => "stuck".to_string(),
        };
        run.record("determinism", t.to_string(), ok, verdict);

        let m = eval(t, env, spec.fuel).expect("enumerated terms are closed");
        let o = normalize_oracle(t, env, spec.fuel).expect("enumerated terms have no definitions");
        if matches!(m, EvalResult::FuelExhausted { .. }) {
            run.report.fuel_exhausted += 1;
        }
        let (ok, verdict) = machine_vs_oracle(&m, &o, env);
        run.record("eval-oracle", t.to_string(), ok, verdict);
        evaluated.push((t.clone(), m));
    }

    let budget = Budget {
        fuel: spec.fuel,
        instance_size: EQ_INSTANCE_SIZE,
        samples: 0,
        seed: spec.seed,
    };
    let checker = Checker::new(env, budget);
    let reference = ReferenceChecker::new(env, budget);
    let type_cap = spec.max_size.min(EQ_TYPE_SIZE);
    let types: Vec<&Term> = evaluated
        .iter()
        .filter(|(t, _)| t.size() <= type_cap)
        .filter(|(_, r)| matches!(r.value(), Some(Term::Nat | Term::Pi(..) | Term::Id(..))))
        .map(|(t, _)| t)
        .collect();
    let singles: Vec<&Term> = corpus.iter().filter(|t| t.size() <= type_cap).collect();
    let pair_side: Vec<&Term> = corpus.iter().filter(|t| t.size() <= EQ_PAIR_SIZE.min(spec.max_size)).collect();
    for ty in &types {
        let compare = |a: &Term, b: &Term| {
            let mine = checker.check_term_eq(a, b, ty).expect("types are canonical");
            let theirs = reference.term_eq(a, b, ty).expect("no definitions");
            let label = format!("{a} == {b} : {ty}");
            let ok = tri_of(&mine) == theirs;
            let verdict = if ok {
                mine.tag().to_string()
            } else {
                format!("checker {} vs oracle {}", mine.tag(), theirs.tag())
            };
            (label, ok, verdict)
        };
        let mut results = Vec::new();
        for a in &singles {
            results.push(compare(a, a));
        }
        for a in &pair_side {
            for b in &pair_side {
                if a != b {
                    results.push(compare(a, b));
                }
            }
        }
        for (label, ok, verdict) in results {
            run.record("term-eq", label, ok, verdict);
        }
    }

    let refl_headed: Vec<&Term> = evaluated
        .iter()
        .filter(|(_, r)| matches!(r.value(), Some(Term::Refl(_))))
        .map(|(t, _)| t)
        .collect();
    let k_checker = Checker::new(env, Budget { instance_size: spec.max_size, ..budget });
    for ty in &types {
        let Some(Term::Id(a, l, r)) = evaluated.iter().find(|(t, _)| t == *ty).and_then(|(_, r)| r.value()) else {
            continue;
        };
        for p in &refl_headed {
            let v = checker.check_reflection(p, l, r, a).expect("closed");
            let violation = matches!(&v, Verdict::Fails(c) if c.kind == FailureKind::Violation);
            if matches!(&v, Verdict::Fails(c) if c.kind == FailureKind::Precondition) {
                continue;
            }
            run.record("reflection", format!("{p} : {ty}"), !violation, v.tag().to_string());
        }
        if alpha_eq_oracle(l, r) && checker.check_member(l, a).map(|v| v.is_holds()).unwrap_or(false) {
            let v = k_checker.check_axiom_k(a, l).expect("closed");
            run.record("axiom-k", format!("{ty}"), !v.is_fails(), v.tag().to_string());
        }
    }
    run.report
}
