//! Session state and command execution.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use senseref::machine::{eval_data, is_value, EvalResult, MachineError};
use senseref::oracle::{differential_suite, generate_members, normalize_oracle, EnumSpec, Enumerator, OracleResult};
use senseref::semantics::{Budget, Checker, FailureKind, Hypothetical, Judgment, SemanticsError, Verdict};
use senseref::sense::{self, Analysis, Family, SenseError, SenseMode};
use senseref::syntax::{alpha_eq, parse_definitions, print, substitute, Env, EnvError, ParseError, Term};
use senseref::{eval, step, trace_of, StepResult};

use crate::command::{parse_command, Command, CommandError, FamilyArg, USAGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportStyle {
    #[default]
    Line,
    Block,
}

/// Settings that every command sees.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Config {
    pub budget: Budget,
    pub mode: SenseMode,
    pub extensional: bool,
    pub unicode: bool,
    pub report: ReportStyle,
    /// Directory for replayable evidence files.
    pub evidence: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    /// The command line itself is malformed.
    #[error("syntax error: {0}")]
    Syntax(String),
    /// A `set` with an unknown key or a bad value.
    #[error("config error: {0}")]
    Config(String),
    #[error("error: {0}")]
    Runtime(String),
}

impl SessionError {
    pub fn is_syntax_or_config(&self) -> bool {
        matches!(self, SessionError::Syntax(_) | SessionError::Config(_))
    }
}

impl From<CommandError> for SessionError {
    fn from(e: CommandError) -> Self {
        SessionError::Syntax(e.0)
    }
}

impl From<ParseError> for SessionError {
    fn from(e: ParseError) -> Self {
        SessionError::Syntax(e.to_string())
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for SessionError {
            fn from(e: $t) -> Self {
                SessionError::Runtime(e.to_string())
            }
        }
    )*};
}
runtime_from!(MachineError, SemanticsError, SenseError, EnvError, std::io::Error);

/// What a command produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub verdict: Option<Verdict>,
    /// The term a command computed, compared by `expect <term>`.
    pub value: Option<Term>,
    pub eval: Option<EvalResult>,
    pub quit: bool,
}

impl Outcome {
    fn line(s: impl Into<String>) -> Self {
        Outcome {
            lines: vec![s.into()],
            ..Outcome::default()
        }
    }

    fn valued(s: impl Into<String>, value: Term) -> Self {
        Outcome {
            value: Some(value),
            ..Outcome::line(s)
        }
    }

    pub fn text(&self) -> String {
        self.lines.join("\n")
    }
}

/// The current definitions and settings.
#[derive(Debug, Clone, Default)]
pub struct Session {
    pub env: Env,
    pub config: Config,
    /// Relative paths in `load` and `replay` resolve against this.
    pub base: PathBuf,
}

fn eval_line(r: &EvalResult) -> String {
    match r {
        EvalResult::Evaluated { value, .. } => value.to_string(),
        EvalResult::FuelExhausted { fuel, .. } => format!("exhausted after {fuel} step(s) (FuelExhausted)"),
        EvalResult::StuckAt { term, reason, .. } => format!("stuck at {term}: {reason}"),
    }
}

fn eval_outcome(r: EvalResult) -> Outcome {
    Outcome {
        lines: vec![eval_line(&r)],
        value: r.value().cloned(),
        eval: Some(r),
        ..Outcome::default()
    }
}

fn parse_bool(v: &str) -> Result<bool, SessionError> {
    match v {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        _ => Err(SessionError::Config(format!("expected on or off, found `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, SessionError> {
    v.parse()
        .map_err(|_| SessionError::Config(format!("`{key}` needs a non-negative integer, found `{v}`")))
}

impl Session {
    pub fn new(config: Config) -> Self {
        Session {
            env: Env::new(),
            config,
            base: PathBuf::new(),
        }
    }

    fn budget(&self) -> Budget {
        self.config.budget
    }

    fn fuel(&self) -> u64 {
        self.config.budget.fuel
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn parse(&self, line: &str) -> Result<Command, SessionError> {
        Ok(parse_command(line, &self.env)?)
    }

    /// Parses and runs one command line.
    pub fn run_line(&mut self, line: &str) -> Result<Outcome, SessionError> {
        let cmd = self.parse(line)?;
        self.execute(&cmd, line)
    }

    /// Runs a command, updating the session for the stateful ones. `src`
    /// is the command's text, used for reports and evidence.
    pub fn execute(&mut self, cmd: &Command, src: &str) -> Result<Outcome, SessionError> {
        match cmd {
            Command::Def(text) => {
                let names = parse_definitions(text, &mut self.env)?;
                Ok(Outcome::line(format!("defined {}", names.join(", "))))
            }
            Command::Load(path) => {
                let path = self.resolve(path);
                let text = fs::read_to_string(&path)
                    .map_err(|e| SessionError::Runtime(format!("{}: {e}", path.display())))?;
                let names = parse_definitions(&text, &mut self.env)?;
                Ok(Outcome::line(format!("loaded {} definition(s) from {}", names.len(), path.display())))
            }
            Command::Replay(path) => self.replay(path),
            Command::Set(key, value) => self.set(key, value),
            Command::Quit => Ok(Outcome {
                quit: true,
                ..Outcome::default()
            }),
            other => self.evaluate(other, src),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<Outcome, SessionError> {
        let c = &mut self.config;
        match key {
            "fuel" => c.budget.fuel = parse_num(key, value)?,
            "bound" => c.budget.instance_size = parse_num(key, value)?,
            "samples" => c.budget.samples = parse_num(key, value)?,
            "seed" => c.budget.seed = parse_num(key, value)?,
            "mode" => c.mode = value.parse().map_err(SessionError::Config)?,
            "extensional" => c.extensional = parse_bool(value)?,
            "unicode" => c.unicode = parse_bool(value)?,
            "report" => {
                c.report = match value {
                    "line" => ReportStyle::Line,
                    "block" => ReportStyle::Block,
                    _ => return Err(SessionError::Config(format!("report is line or block, found `{value}`"))),
                }
            }
            "evidence" => c.evidence = (value != "off").then(|| PathBuf::from(value)),
            _ => return Err(SessionError::Config(format!("unknown setting `{key}`"))),
        }
        Ok(Outcome::line(format!("{key} = {value}")))
    }

    fn replay(&self, path: &Path) -> Result<Outcome, SessionError> {
        let path = self.resolve(path);
        let text =
            fs::read_to_string(&path).map_err(|e| SessionError::Runtime(format!("{}: {e}", path.display())))?;
        let mut child = Session::new(Config {
            evidence: None,
            ..self.config.clone()
        });
        child.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let report = crate::batch::run_batch_text(&text, &mut child, false);
        let mut lines: Vec<String> = report.output.lines().map(|l| format!("  {l}")).collect();
        let ok = report.exit_code == 0;
        lines.push(format!("replay {}: exit {}", path.display(), report.exit_code));
        let verdict = if ok {
            Verdict::holds()
        } else {
            Verdict::fails(FailureKind::Mismatch, None, format!("replay exited with {}", report.exit_code))
        };
        Ok(Outcome {
            lines,
            verdict: Some(verdict),
            ..Outcome::default()
        })
    }

    /// Runs a command that does not change the session.
    pub fn evaluate(&self, cmd: &Command, src: &str) -> Result<Outcome, SessionError> {
        let env = &self.env;
        let fuel = self.fuel();
        let budget = self.budget();
        let checker = || Checker::new(env, budget);
        let out = match cmd {
            Command::Eval(t) => eval_outcome(eval(t, env, fuel)?),
            Command::Norm(t) => eval_outcome(eval_data(t, env, fuel)?),
            Command::Step(t) => {
                let (arrow, unfold) = if self.config.unicode { ("⟼", "≝") } else { ("-->", "==>") };
                match step(t, env)? {
                    StepResult::Value => Outcome::line("value"),
                    StepResult::StepsTo(n) => Outcome::valued(format!("{arrow} {n}"), n),
                    StepResult::Unfolds(n) => Outcome::valued(format!("{unfold} {n}"), n),
                    StepResult::Stuck(r) => Outcome::line(format!("stuck: {r}")),
                }
            }
            Command::Trace(t) => {
                let tr = trace_of(t, env, fuel)?;
                Outcome {
                    lines: tr.render(self.config.unicode).lines().map(str::to_string).collect(),
                    value: tr.terminal.value().cloned(),
                    eval: Some(tr.terminal),
                    ..Outcome::default()
                }
            }
            Command::Val(t) => Outcome::line(if is_value(t)? { "value" } else { "not a value" }),
            Command::Classify(src) => Outcome::line(sense::classify(src, env, fuel).to_string()),
            Command::Oracle(t) => match normalize_oracle(t, env, fuel)? {
                OracleResult::Value { value, steps } => {
                    Outcome::valued(format!("{value} (oracle, {steps} step(s))"), value)
                }
                OracleResult::Exhausted { fuel } => Outcome::line(format!("exhausted after {fuel} step(s) (oracle)")),
                OracleResult::Stuck { steps } => Outcome::line(format!("stuck after {steps} step(s) (oracle)")),
            },
            Command::TypeEq(a, b) => {
                let j = Judgment::TypeEq(a.clone(), b.clone());
                let v = checker().check_type_eq(a, b)?;
                let v = if self.config.extensional && v.is_fails() {
                    let u = checker().check_unique_by_terms(a, b)?;
                    if u.extensional.is_holds() {
                        u.extensional
                            .with_note("extensional: intensional check failed; members agree up to bound")
                    } else {
                        v
                    }
                } else {
                    v
                };
                self.verdict(&j.render(self.config.unicode), v, src)?
            }
            Command::TermEq(a, b, ty) => {
                let j = Judgment::TermEq(a.clone(), b.clone(), ty.clone());
                self.verdict(&j.render(self.config.unicode), checker().check_term_eq(a, b, ty)?, src)?
            }
            Command::Member(a, ty) => {
                let j = Judgment::Member(a.clone(), ty.clone());
                self.verdict(&j.render(self.config.unicode), checker().check_member(a, ty)?, src)?
            }
            Command::Hyp(ctx, j) => {
                let v = checker().check_hypothetical(ctx, j)?;
                let h = Hypothetical {
                    context: ctx.clone(),
                    judgment: j.clone(),
                };
                self.verdict(&h.render(self.config.unicode), v, src)?
            }
            Command::Reflect(p, a, b, ty) => {
                let v = checker().check_reflection(p, a, b, ty)?;
                let label = format!("{p} : Eq({ty}, {a}, {b}) implies {}", Judgment::TermEq(a.clone(), b.clone(), ty.clone()).render(self.config.unicode));
                self.verdict(&label, v, src)?
            }
            Command::AxiomK(ty, a) => {
                let v = checker().check_axiom_k(ty, a)?;
                self.verdict(&format!("K at {ty}, {a}"), v, src)?
            }
            Command::Unique(a, b) => {
                if !self.config.extensional {
                    return Err(SessionError::Runtime(
                        "unique compares types extensionally; enable it with `set extensional on` or --extensional"
                            .into(),
                    ));
                }
                let u = checker().check_unique_by_terms(a, b)?;
                let mut out = self.verdict(&format!("{a} and {b} have the same members"), u.extensional, src)?;
                out.lines.push(format!("  intensional: {} {}", u.intensional.tag(), u.intensional.evidence_ref()));
                out
            }
            Command::SenseEq(a, b) => {
                let mode = self.config.mode;
                let v = sense::sense_eq(a, b, env, mode, fuel)?;
                self.verdict_as(&format!("({})", mode_label(mode)), &format!("{a} ~ {b}"), v, src, &mode.to_string())?
            }
            Command::Coref(a, b, ty) => {
                let v = sense::coref_terms(a, b, ty, env, budget)?;
                self.verdict(&Judgment::TermEq(a.clone(), b.clone(), ty.clone()).render(self.config.unicode), v, src)?
            }
            Command::CorefT(a, b) => {
                let v = sense::coref_types(a, b, env, budget)?;
                self.verdict(&Judgment::TypeEq(a.clone(), b.clone()).render(self.config.unicode), v, src)?
            }
            Command::Equip(a, b) => {
                let v = sense::equipollent_types_computational(a, b, env, fuel)?;
                self.verdict(&format!("{a} equipollent to {b} (computational)"), v, src)?
            }
            Command::EquipS(a, b) => {
                let v = sense::equipollent_types_sundholm(a, b, env, budget)?;
                self.verdict(&format!("{a} equipollent to {b} (realizers)"), v, src)?
            }
            Command::EquipT(a, b, fam) => {
                let family = match fam {
                    FamilyArg::Battery(domain) => Family::reflexivity(domain.clone()),
                    FamilyArg::Explicit(f) => f.clone(),
                };
                let v = sense::equipollent_terms(a, b, &family, env, budget)?;
                self.verdict(&format!("{a} equipollent to {b} under {family}"), v, src)?
            }
            Command::LogEq(f, g, a, b) => {
                let r = sense::logical_equivalence(f, g, a, b, env, budget)?;
                let mut out = self.verdict(&format!("{a} <-> {b} via {f}, {g}"), r.verdict, src)?;
                out.lines.push(format!("  forward: {} {}", r.forward.tag(), r.forward.evidence_ref()));
                out.lines.push(format!("  backward: {} {}", r.backward.tag(), r.backward.evidence_ref()));
                out.lines.push(format!("  type equality: {} {}", r.coreference.tag(), r.coreference.evidence_ref()));
                if r.propext_counterexample {
                    out.lines.push("  COUNTEREXAMPLE to propositional extensionality".into());
                }
                out
            }
            Command::Alpha(a, b) => {
                let v = if alpha_eq(a, b) {
                    Verdict::holds()
                } else {
                    Verdict::fails(FailureKind::Mismatch, None, "not α-equivalent")
                };
                self.verdict(&format!("{a} =α {b}"), v, src)?
            }
            Command::Subst(t, x, v) => {
                let r = substitute(t, x, v);
                Outcome::valued(r.to_string(), r)
            }
            Command::Unfold(t) => {
                let r = env.unfold(t)?;
                Outcome::valued(r.to_string(), r)
            }
            Command::Print(t) => Outcome::valued(print(t), t.clone()),
            Command::Enum(n, forms) => {
                let en = Enumerator::new(*forms);
                let terms = en.closed(*n);
                let mut lines: Vec<String> = terms.iter().map(Term::to_string).collect();
                lines.push(format!("{} closed term(s) of size <= {n} over {forms}", terms.len()));
                Outcome::line("").with_lines(lines)
            }
            Command::Members(ty, n) => {
                let spec = EnumSpec {
                    max_size: n.unwrap_or(budget.instance_size),
                    fuel,
                    seed: budget.seed,
                    ..EnumSpec::default()
                };
                let ms = generate_members(ty, &spec, env)?;
                let mut lines: Vec<String> = ms.iter().map(Term::to_string).collect();
                lines.push(format!("{} member(s) of {ty} up to size {}", ms.len(), spec.max_size));
                Outcome::line("").with_lines(lines)
            }
            Command::Diff(n, forms) => {
                let spec = EnumSpec {
                    max_size: *n,
                    forms: *forms,
                    seed: budget.seed,
                    fuel,
                };
                let report = differential_suite(&spec, env);
                if let Some(dir) = &self.config.evidence {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join(format!("diff-{n}.csv")), report.to_csv())?;
                }
                let v = if report.disagreements() == 0 {
                    Verdict::holds()
                } else {
                    Verdict::fails(FailureKind::Violation, None, format!("{} disagreement(s)", report.disagreements()))
                };
                Outcome {
                    lines: report.render_text().lines().map(str::to_string).collect(),
                    verdict: Some(v),
                    ..Outcome::default()
                }
            }
            Command::Defs => {
                let mut lines: Vec<String> = env.iter().map(|(n, b)| format!("def {n} := {b};")).collect();
                if lines.is_empty() {
                    lines.push("no definitions".into());
                }
                Outcome::line("").with_lines(lines)
            }
            Command::Help => Outcome::line("").with_lines(USAGE.iter().map(|(_, u)| u.to_string()).collect()),
            Command::Def(_) | Command::Load(_) | Command::Replay(_) | Command::Set(..) | Command::Quit => {
                return Err(SessionError::Runtime(format!("`{src}` changes the session and must run in order")))
            }
        };
        Ok(out)
    }

    fn verdict(&self, judgment: &str, v: Verdict, src: &str) -> Result<Outcome, SessionError> {
        self.verdict_as("", judgment, v, src, "BOUNDED")
    }

    // The one-line form is `TAG <judgment> [evidence]`; sense queries put
    // their mode where the judgment goes.
    fn verdict_as(&self, head: &str, judgment: &str, v: Verdict, src: &str, mode: &str) -> Result<Outcome, SessionError> {
        let mut lines = Vec::new();
        match self.config.report {
            ReportStyle::Line => {
                let mut first = v.tag().to_string();
                if !head.is_empty() {
                    first.push(' ');
                    first.push_str(head);
                }
                if head.is_empty() || !v.is_holds() {
                    if head.is_empty() {
                        let _ = write!(first, " {judgment}");
                    }
                    let _ = write!(first, " {}", v.evidence_ref());
                }
                lines.push(first);
                for n in v.notes() {
                    if !head.contains(n.as_str()) {
                        lines.push(format!("  note: {n}"));
                    }
                }
            }
            ReportStyle::Block => {
                let block = Analysis::new(judgment, mode, v.clone())
                    .with_evidence(format!("budget {}", self.budget()))
                    .render_block();
                lines.extend(block.lines().map(str::to_string));
            }
        }
        if let Some(dir) = &self.config.evidence {
            let path = self.write_evidence(dir, src, &v)?;
            lines.push(format!("  evidence: {}", path.display()));
        }
        Ok(Outcome {
            lines,
            verdict: Some(v),
            ..Outcome::default()
        })
    }

    /// A batch file that reproduces `v` from a fresh session.
    pub fn evidence_text(&self, src: &str, v: &Verdict) -> String {
        let b = self.budget();
        let mut out = String::from("# replayable evidence\n");
        let _ = writeln!(
            out,
            "set fuel {}\nset bound {}\nset samples {}\nset seed {}\nset mode {}",
            b.fuel,
            b.instance_size,
            b.samples,
            b.seed,
            self.config.mode.to_string().to_ascii_lowercase()
        );
        if self.config.extensional {
            out.push_str("set extensional on\n");
        }
        for (name, body) in self.env.iter() {
            let _ = writeln!(out, "def {name} := {body};");
        }
        let _ = writeln!(out, "{} expect {}", src.trim(), v.tag());
        if let Verdict::Fails(c) = v {
            if let Some(j) = &c.judgment {
                if j.free_vars().is_empty() {
                    let _ = writeln!(out, "{} expect FAILS", j.to_command());
                }
            }
        }
        out
    }

    fn write_evidence(&self, dir: &Path, src: &str, v: &Verdict) -> Result<PathBuf, SessionError> {
        fs::create_dir_all(dir)?;
        let text = self.evidence_text(src, v);
        // Content-addressed names keep reports identical across runs.
        let name = format!("E{:016x}.batch", fnv1a(text.as_bytes()));
        let path = dir.join(name);
        fs::write(&path, text)?;
        Ok(path)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
}

fn mode_label(mode: SenseMode) -> String {
    format!("mode={mode}")
}

impl Outcome {
    fn with_lines(mut self, lines: Vec<String>) -> Self {
        self.lines = lines;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(s: &mut Session, line: &str) -> String {
        s.run_line(line).unwrap().text()
    }

    #[test]
    fn repl_examples() {
        let mut s = Session::default();
        assert_eq!(run(&mut s, "eval (\\x. refl(x))(zero)"), "refl(zero)");
        assert_eq!(run(&mut s, "senseEq \\x.x \\y.y"), "HOLDS (mode=DEFN)");
        assert_eq!(run(&mut s, "val zero"), "value");
        assert_eq!(run(&mut s, "val (\\x. x)(zero)"), "not a value");
    }

    #[test]
    fn verdict_lines() {
        let mut s = Session::default();
        s.config.budget.instance_size = 4;
        assert_eq!(run(&mut s, "termEq zero zero Nat"), "HOLDS zero == zero : Nat [checked=1]");
        assert!(run(&mut s, "termEq zero succ(zero) Nat").starts_with("FAILS zero == succ(zero) : Nat ["));
        run(&mut s, "set unicode on");
        assert!(run(&mut s, "typeEq Nat Nat").starts_with("HOLDS Nat ≡ Nat type"));
        run(&mut s, "set mode trace");
        assert!(run(&mut s, "senseEq zero zero").starts_with("HOLDS (mode=TRACE)"));
        run(&mut s, "set report block");
        let block = run(&mut s, "member zero Nat");
        assert!(block.starts_with("QUERY: zero : Nat\nMODE: BOUNDED\nVERDICT: HOLDS"), "{block}");
    }

    #[test]
    fn settings_and_errors() {
        let mut s = Session::default();
        assert!(matches!(s.run_line("set fuel lots"), Err(SessionError::Config(_))));
        assert!(matches!(s.run_line("set colour red"), Err(SessionError::Config(_))));
        assert!(matches!(s.run_line("eval succ(zero, zero)"), Err(SessionError::Syntax(_))));
        assert!(matches!(s.run_line("termEq zero zero zero"), Err(SessionError::Runtime(_))));
        assert!(matches!(s.run_line("unique Nat Nat"), Err(SessionError::Runtime(_))));
        run(&mut s, "set fuel 10");
        assert_eq!(s.config.budget.fuel, 10);
        assert!(run(&mut s, "eval (\\x. x(x))(\\x. x(x))").starts_with("exhausted after 10"));
    }

    #[test]
    fn definitions() {
        let mut s = Session::default();
        assert_eq!(run(&mut s, "def two := succ(succ(zero));"), "defined two");
        assert_eq!(run(&mut s, "senseEq two succ(succ(zero))"), "HOLDS (mode=DEFN)");
        assert_eq!(run(&mut s, "defs"), "def two := succ(succ(zero));");
        assert_eq!(run(&mut s, "unfold two"), "succ(succ(zero))");
        assert_eq!(run(&mut s, "step two"), "==> succ(succ(zero))");
    }

    #[test]
    fn evidence_replays() {
        let dir = std::env::temp_dir().join(format!("senseref-evidence-{}", std::process::id()));
        let mut s = Session::default();
        s.config.budget.instance_size = 3;
        s.config.evidence = Some(dir.clone());
        run(&mut s, "def one := succ(zero);");
        let out = run(&mut s, "termEq one zero Nat");
        let path = out.lines().find_map(|l| l.trim().strip_prefix("evidence: ")).unwrap().to_string();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("def one := succ(zero);"));
        assert!(text.contains("termEq one zero Nat expect FAILS"));
        s.config.evidence = None;
        let replayed = s.run_line(&format!("replay {path}")).unwrap();
        assert!(replayed.verdict.as_ref().unwrap().is_holds(), "{}", replayed.text());
        let _ = fs::remove_dir_all(dir);
    }
}
