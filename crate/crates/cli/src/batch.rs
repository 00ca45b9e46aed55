//! Batch files: `def` items and commands, one per line, each optionally
//! followed by `expect HOLDS|FAILS|UNKNOWN|STUCK|ERROR|<word>|<term>`.
//! `def` items may span lines up to their `;`. `#` starts a comment.

use std::fmt::Write as _;

use rayon::prelude::*;
use senseref::machine::{eval_data, EvalResult};
use senseref::syntax::{alpha_eq, parse_closed, Term};

use crate::command::Command;
use crate::session::{Outcome, Session, SessionError};

/// Exit codes of a batch run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_SYNTAX: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub line: usize,
    pub src: String,
    pub expect: Option<String>,
}

/// Splits a batch file into items. Never fails; malformed commands are
/// reported when they run.
pub fn items(text: &str) -> Vec<Item> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some((start, mut acc)) = pending.take() {
            acc.push(' ');
            acc.push_str(line);
            if line.contains(';') {
                out.push(Item { line: start, src: acc, expect: None });
            } else {
                pending = Some((start, acc));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if is_def(line) && !line.contains(';') {
            pending = Some((i + 1, line.to_string()));
            continue;
        }
        let (src, expect) = match line.rfind(" expect ") {
            Some(k) if !is_def(line) => (line[..k].trim().to_string(), Some(line[k + 8..].trim().to_string())),
            _ => (line.to_string(), None),
        };
        out.push(Item { line: i + 1, src, expect });
    }
    if let Some((start, acc)) = pending {
        out.push(Item { line: start, src: acc, expect: None });
    }
    out
}

fn is_def(line: &str) -> bool {
    line == "def" || line.starts_with("def ")
}

/// Output and exit status of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchReport {
    pub output: String,
    /// Diagnostics for stderr.
    pub diagnostics: Vec<String>,
    pub exit_code: i32,
}

#[derive(Default)]
struct Status {
    commands: usize,
    met: usize,
    failed: usize,
    unknown: usize,
    errors: usize,
    syntax: bool,
}

impl Status {
    fn exit_code(&self) -> i32 {
        if self.syntax {
            EXIT_SYNTAX
        } else if self.failed > 0 || self.errors > 0 {
            EXIT_EXPECTATION
        } else if self.unknown > 0 {
            EXIT_UNKNOWN
        } else {
            EXIT_OK
        }
    }
}

fn first_word(o: &Outcome) -> String {
    o.lines
        .iter()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("")
        .to_string()
}

fn describe(r: &Result<Outcome, SessionError>) -> String {
    match r {
        Err(e) => format!("ERROR ({e})"),
        Ok(o) => match (&o.verdict, &o.value) {
            (Some(v), _) => v.tag().to_string(),
            (None, Some(t)) => t.to_string(),
            (None, None) => first_word(o),
        },
    }
}

// Both sides are evaluated through `succ` and `refl` before comparison.
fn same_value(session: &Session, got: &Term, want: &Term) -> bool {
    let env = &session.env;
    let fuel = session.config.budget.fuel;
    let full = |t: &Term| match eval_data(t, env, fuel) {
        Ok(EvalResult::Evaluated { value, .. }) => env.unfold(&value).ok(),
        _ => env.unfold(t).ok(),
    };
    match (full(got), full(want)) {
        (Some(a), Some(b)) => alpha_eq(&a, &b),
        _ => false,
    }
}

/// Whether `result` meets `expect`.
pub fn meets(session: &Session, result: &Result<Outcome, SessionError>, expect: &str) -> bool {
    let tag = expect.to_ascii_uppercase();
    match (tag.as_str(), result) {
        ("ERROR", r) => r.is_err(),
        (_, Err(_)) => false,
        ("HOLDS" | "FAILS", Ok(o)) => o.verdict.as_ref().is_some_and(|v| v.tag() == tag),
        ("UNKNOWN", Ok(o)) => {
            o.verdict.as_ref().is_some_and(|v| v.is_unknown())
                || matches!(o.eval, Some(EvalResult::FuelExhausted { .. }))
        }
        ("STUCK", Ok(o)) => {
            matches!(o.eval, Some(EvalResult::StuckAt { .. })) || first_word(o).eq_ignore_ascii_case("stuck")
        }
        (_, Ok(o)) => match parse_closed(expect, &session.env) {
            Ok(want) => match &o.value {
                Some(got) => same_value(session, got, &want),
                None => first_word(o) == want.to_string(),
            },
            Err(_) => first_word(o).eq_ignore_ascii_case(expect),
        },
    }
}

struct Runner<'s> {
    session: &'s mut Session,
    out: String,
    diagnostics: Vec<String>,
    status: Status,
}

impl Runner<'_> {
    fn report(&mut self, item: &Item, result: Result<Outcome, SessionError>) -> bool {
        let s = &mut self.status;
        s.commands += 1;
        match &item.expect {
            Some(e) => {
                let _ = writeln!(self.out, "> {} expect {e}", item.src);
            }
            None => {
                let _ = writeln!(self.out, "> {}", item.src);
            }
        }
        match &result {
            Ok(o) => {
                for l in &o.lines {
                    let _ = writeln!(self.out, "{l}");
                }
            }
            Err(e) => {
                let _ = writeln!(self.out, "{e}");
                self.diagnostics.push(format!("line {}: {e}", item.line));
            }
        }
        match &item.expect {
            Some(e) if meets(self.session, &result, e) => {
                s.met += 1;
                let _ = writeln!(self.out, "ok: expected {e}");
            }
            Some(e) => {
                s.failed += 1;
                let got = describe(&result);
                let _ = writeln!(self.out, "EXPECTATION FAILED: expected {e}, got {got}");
                self.diagnostics.push(format!("line {}: expected {e}, got {got}", item.line));
                if let Err(err) = &result {
                    s.syntax |= err.is_syntax_or_config();
                }
            }
            None => match &result {
                Err(err) if err.is_syntax_or_config() => s.syntax = true,
                Err(_) => s.errors += 1,
                Ok(o) if o.verdict.as_ref().is_some_and(|v| v.is_unknown()) => s.unknown += 1,
                Ok(_) => {}
            },
        }
        matches!(&result, Ok(o) if o.quit)
    }

    fn run_one(&mut self, item: &Item) -> bool {
        let result = self.session.parse(&item.src).and_then(|cmd| self.session.execute(&cmd, &item.src));
        self.report(item, result)
    }

    fn run(&mut self, items: &[Item], parallel: bool) {
        if !parallel {
            for item in items {
                if self.run_one(item) {
                    return;
                }
            }
            return;
        }
        let mut i = 0;
        while i < items.len() {
            let parsed = self.session.parse(&items[i].src);
            if parsed.as_ref().map_or(true, Command::is_stateful) {
                if self.run_one(&items[i]) {
                    return;
                }
                i += 1;
                continue;
            }
            // A run of commands that leave the session alone.
            let mut j = i + 1;
            while j < items.len() && self.session.parse(&items[j].src).is_ok_and(|c| !c.is_stateful()) {
                j += 1;
            }
            let session: &Session = self.session;
            let results: Vec<Result<Outcome, SessionError>> = items[i..j]
                .par_iter()
                .map(|it| session.parse(&it.src).and_then(|c| session.evaluate(&c, &it.src)))
                .collect();
            for (item, r) in items[i..j].iter().zip(results) {
                self.report(item, r);
            }
            i = j;
        }
    }
}

/// Runs `text` in `session`. Under `parallel`, runs of stateless commands
/// are evaluated concurrently; the report is identical either way.
pub fn run_batch_text(text: &str, session: &mut Session, parallel: bool) -> BatchReport {
    let items = items(text);
    let mut runner = Runner {
        session,
        out: String::new(),
        diagnostics: Vec::new(),
        status: Status::default(),
    };
    runner.run(&items, parallel);
    let s = &runner.status;
    let code = s.exit_code();
    let _ = writeln!(
        runner.out,
        "summary: {} command(s), {} expectation(s) met, {} failed, {} unexpected error(s), {} unknown; exit {code}",
        s.commands, s.met, s.failed, s.errors, s.unknown
    );
    BatchReport {
        output: runner.out,
        diagnostics: runner.diagnostics,
        exit_code: code,
    }
}
