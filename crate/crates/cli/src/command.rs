//! Command-line grammar. Each command is a name followed by its arguments;
//! term arguments are separated by whitespace (an application's `(` must
//! touch the function, so `f (a)` is two arguments).

use std::path::PathBuf;

use senseref::oracle::Forms;
use senseref::semantics::{Context, Judgment};
use senseref::sense::Family;
use senseref::syntax::{Env, Name, ParseError, Parser, Term, Tok};

/// Families used by `equipT`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyArg {
    /// The standard battery over a domain: `x : A |- Eq(A, x, x)`.
    Battery(Term),
    Explicit(Family),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Eval(Term),
    Norm(Term),
    Step(Term),
    Trace(Term),
    Val(Term),
    Classify(String),
    Oracle(Term),
    TypeEq(Term, Term),
    TermEq(Term, Term, Term),
    Member(Term, Term),
    Hyp(Context, Judgment),
    Reflect(Term, Term, Term, Term),
    AxiomK(Term, Term),
    Unique(Term, Term),
    SenseEq(Term, Term),
    Coref(Term, Term, Term),
    CorefT(Term, Term),
    Equip(Term, Term),
    EquipS(Term, Term),
    EquipT(Term, Term, FamilyArg),
    LogEq(Term, Term, Term, Term),
    Alpha(Term, Term),
    Subst(Term, Name, Term),
    Unfold(Term),
    Print(Term),
    Enum(usize, Forms),
    Members(Term, Option<usize>),
    Diff(usize, Forms),
    Def(String),
    Load(PathBuf),
    Replay(PathBuf),
    Defs,
    Set(String, String),
    Help,
    Quit,
}

impl Command {
    /// Commands that change session state and so order everything around
    /// them.
    pub fn is_stateful(&self) -> bool {
        matches!(
            self,
            Command::Def(_) | Command::Load(_) | Command::Replay(_) | Command::Set(..) | Command::Quit
        )
    }
}

/// Every command name with a one-line usage string.
pub const USAGE: &[(&str, &str)] = &[
    ("eval", "eval t               evaluate to a canonical form"),
    ("norm", "norm t               evaluate, also under succ and refl"),
    ("step", "step t               one transition"),
    ("trace", "trace t              every transition"),
    ("val", "val t                is t a canonical form"),
    ("classify", "classify src         expression, program or referring program"),
    ("oracle", "oracle t             evaluate with the reference evaluator"),
    ("typeEq", "typeEq A B           A == B type"),
    ("termEq", "termEq a b A         a == b : A"),
    ("member", "member a A           a : A"),
    ("hyp", "hyp x : A, ... |- J  hypothetical judgment"),
    ("reflect", "reflect p a b A      p : Eq(A, a, b) implies a == b : A"),
    ("axiomK", "axiomK A a           every p : Eq(A, a, a) equals refl(a)"),
    ("unique", "unique A B           compare types by their members (needs extensional)"),
    ("senseEq", "senseEq a b          same sense"),
    ("coref", "coref a b A          same reference at A"),
    ("corefT", "corefT A B           coreferential types"),
    ("equip", "equip A B            equipollent types, computational reading"),
    ("equipS", "equipS A B           equipollent types, realizer reading"),
    ("equipT", "equipT a b A | equipT a b x : A |- P   equipollent terms"),
    ("logeq", "logeq f g A B        f : A -> B and g : B -> A"),
    ("alpha", "alpha a b            α-equivalence"),
    ("subst", "subst t x v          t[v/x]"),
    ("unfold", "unfold t             unfold all definitions"),
    ("print", "print t              canonical printing"),
    ("enum", "enum N [forms]       closed terms up to size N"),
    ("members", "members A [N]        generated members of A"),
    ("diff", "diff N [forms]       differential suite"),
    ("def", "def name := t;       add a definition"),
    ("load", "load FILE            read a definitions file"),
    ("replay", "replay FILE          run a batch or evidence file"),
    ("defs", "defs                 list definitions"),
    ("set", "set KEY VALUE        fuel, bound, samples, seed, mode, extensional, unicode, report, evidence"),
    ("help", "help                 this list"),
    ("quit", "quit                 leave the session"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandError(pub String);

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<ParseError> for CommandError {
    fn from(e: ParseError) -> Self {
        CommandError(e.to_string())
    }
}

fn terms<const N: usize>(src: &str, env: &Env) -> Result<[Term; N], CommandError> {
    let mut p = Parser::new(src, env)?;
    let mut out = Vec::with_capacity(N);
    for _ in 0..N {
        out.push(p.term()?);
    }
    p.expect_end()?;
    Ok(out.try_into().expect("exactly N terms"))
}

fn judgment(p: &mut Parser) -> Result<Judgment, ParseError> {
    let a = p.term()?;
    if p.eat(&Tok::EqEq) {
        let b = p.term()?;
        if p.eat_word("type") {
            return Ok(Judgment::TypeEq(a, b));
        }
        p.expect(Tok::Colon, "`:` or `type`")?;
        return Ok(Judgment::TermEq(a, b, p.term()?));
    }
    if p.eat(&Tok::Colon) {
        return Ok(Judgment::Member(a, p.term()?));
    }
    if p.eat_word("type") {
        return Ok(Judgment::IsType(a));
    }
    Err(p.error(&["`==`", "`:`", "`type`"]))
}

fn hypotheses(p: &mut Parser, ctx: &mut Vec<(Name, Term)>) -> Result<Judgment, ParseError> {
    if p.eat(&Tok::Turnstile) {
        return judgment(p);
    }
    if !ctx.is_empty() {
        p.expect(Tok::Comma, "`,` or `|-`")?;
    }
    let x = p.ident()?;
    p.expect(Tok::Colon, "`:`")?;
    let ty = p.term()?;
    ctx.push((x.clone(), ty));
    p.with_scope(&[x], |p| hypotheses(p, ctx))
}

/// Parses `x1 : A1, ..., xn : An |- J` (the context may be empty).
pub fn parse_hypothetical(src: &str, env: &Env) -> Result<(Context, Judgment), CommandError> {
    let mut p = Parser::new(src, env)?;
    let mut ctx = Vec::new();
    let j = hypotheses(&mut p, &mut ctx)?;
    p.expect_end()?;
    Ok((Context(ctx), j))
}

fn equip_terms(src: &str, env: &Env) -> Result<Command, CommandError> {
    let mut p = Parser::new(src, env)?;
    let a = p.term()?;
    let b = p.term()?;
    let t = p.term()?;
    if !p.eat(&Tok::Colon) {
        p.expect_end()?;
        return Ok(Command::EquipT(a, b, FamilyArg::Battery(t)));
    }
    let Term::Var(x) = t else {
        return Err(CommandError(format!("family variable must be a name, found {t}")));
    };
    let domain = p.term()?;
    p.expect(Tok::Turnstile, "`|-`")?;
    let body = p.with_scope(std::slice::from_ref(&x), |p| p.term())?;
    p.eat_word("type");
    p.expect_end()?;
    Ok(Command::EquipT(a, b, FamilyArg::Explicit(Family::new(x, domain, body))))
}

fn size_and_forms(rest: &str, what: &str) -> Result<(usize, Forms), CommandError> {
    let mut words = rest.split_whitespace();
    let n = words
        .next()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| CommandError(format!("{what} needs a maximum size")))?;
    let forms = match words.next() {
        Some(f) => Forms::parse(f).map_err(CommandError)?,
        None => Forms::ALL,
    };
    if let Some(extra) = words.next() {
        return Err(CommandError(format!("unexpected argument `{extra}`")));
    }
    Ok((n, forms))
}

fn path(rest: &str, what: &str) -> Result<PathBuf, CommandError> {
    if rest.is_empty() {
        return Err(CommandError(format!("{what} needs a file name")));
    }
    Ok(PathBuf::from(rest))
}

/// Parses one command against the definitions currently in scope.
pub fn parse_command(line: &str, env: &Env) -> Result<Command, CommandError> {
    let line = line.trim();
    let (name, rest) = match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    };
    let cmd = match name {
        "eval" => Command::Eval(terms::<1>(rest, env)?[0].clone()),
        "norm" => Command::Norm(terms::<1>(rest, env)?[0].clone()),
        "step" => Command::Step(terms::<1>(rest, env)?[0].clone()),
        "trace" => Command::Trace(terms::<1>(rest, env)?[0].clone()),
        "val" => Command::Val(terms::<1>(rest, env)?[0].clone()),
        "oracle" => Command::Oracle(terms::<1>(rest, env)?[0].clone()),
        "unfold" => Command::Unfold(terms::<1>(rest, env)?[0].clone()),
        "print" => Command::Print(terms::<1>(rest, env)?[0].clone()),
        "classify" => Command::Classify(rest.to_string()),
        "typeEq" => {
            let [a, b] = terms(rest, env)?;
            Command::TypeEq(a, b)
        }
        "termEq" => {
            let [a, b, t] = terms(rest, env)?;
            Command::TermEq(a, b, t)
        }
        "member" => {
            let [a, t] = terms(rest, env)?;
            Command::Member(a, t)
        }
        "hyp" => {
            let (ctx, j) = parse_hypothetical(rest, env)?;
            Command::Hyp(ctx, j)
        }
        "reflect" => {
            let [p, a, b, t] = terms(rest, env)?;
            Command::Reflect(p, a, b, t)
        }
        "axiomK" => {
            let [t, a] = terms(rest, env)?;
            Command::AxiomK(t, a)
        }
        "unique" => {
            let [a, b] = terms(rest, env)?;
            Command::Unique(a, b)
        }
        "senseEq" => {
            let [a, b] = terms(rest, env)?;
            Command::SenseEq(a, b)
        }
        "coref" => {
            let [a, b, t] = terms(rest, env)?;
            Command::Coref(a, b, t)
        }
        "corefT" => {
            let [a, b] = terms(rest, env)?;
            Command::CorefT(a, b)
        }
        "equip" => {
            let [a, b] = terms(rest, env)?;
            Command::Equip(a, b)
        }
        "equipS" => {
            let [a, b] = terms(rest, env)?;
            Command::EquipS(a, b)
        }
        "equipT" => equip_terms(rest, env)?,
        "logeq" => {
            let [f, g, a, b] = terms(rest, env)?;
            Command::LogEq(f, g, a, b)
        }
        "alpha" => {
            let [a, b] = terms(rest, env)?;
            Command::Alpha(a, b)
        }
        "subst" => {
            let mut p = Parser::new(rest, env)?;
            let t = p.term()?;
            let x = p.ident()?;
            let v = p.term()?;
            p.expect_end()?;
            Command::Subst(t, x, v)
        }
        "enum" => {
            let (n, forms) = size_and_forms(rest, "enum")?;
            Command::Enum(n, forms)
        }
        "diff" => {
            let (n, forms) = size_and_forms(rest, "diff")?;
            Command::Diff(n, forms)
        }
        "members" => {
            let mut p = Parser::new(rest, env)?;
            let t = p.term()?;
            let n = match p.peek().clone() {
                Tok::Num(n) => {
                    p.eat(&Tok::Num(n));
                    Some(n as usize)
                }
                _ => None,
            };
            p.expect_end()?;
            Command::Members(t, n)
        }
        "def" => Command::Def(line.to_string()),
        "load" => Command::Load(path(rest, "load")?),
        "replay" => Command::Replay(path(rest, "replay")?),
        "defs" | "help" | "quit" if !rest.is_empty() => {
            return Err(CommandError(format!("`{name}` takes no arguments")));
        }
        "defs" => Command::Defs,
        "help" => Command::Help,
        "quit" | "exit" => Command::Quit,
        "set" => {
            let mut words = rest.split_whitespace();
            match (words.next(), words.next(), words.next()) {
                (Some(k), Some(v), None) => Command::Set(k.to_string(), v.to_string()),
                _ => return Err(CommandError("usage: set KEY VALUE".into())),
            }
        }
        "" => return Err(CommandError("empty command".into())),
        other => return Err(CommandError(format!("unknown command `{other}` (try `help`)"))),
    };
    Ok(cmd)
}
