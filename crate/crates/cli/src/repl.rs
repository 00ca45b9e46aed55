//! Interactive loop. Errors are reported inline and the session goes on.

use std::io::{self, BufRead, IsTerminal, Write};

use crate::session::Session;

/// Reads commands from `input` until end of input or `quit`. A `def` that
/// does not end in `;` continues on the next line.
pub fn run_repl(session: &mut Session, input: impl BufRead, out: &mut impl Write, prompt: bool) -> io::Result<()> {
    let mut pending = String::new();
    let mut lines = input.lines();
    loop {
        if prompt {
            write!(out, "{}", if pending.is_empty() { "senseref> " } else { "... " })?;
            out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if !pending.is_empty() {
            pending.push(' ');
            pending.push_str(line);
            if !line.contains(';') {
                continue;
            }
        } else if line.is_empty() {
            continue;
        } else if (line == "def" || line.starts_with("def ")) && !line.contains(';') {
            pending = line.to_string();
            continue;
        } else {
            pending = line.to_string();
        }
        let src = std::mem::take(&mut pending);
        match session.run_line(&src) {
            Ok(o) if o.quit => break,
            Ok(o) => {
                for l in &o.lines {
                    writeln!(out, "{l}")?;
                }
            }
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    Ok(())
}

/// The REPL on standard input and output.
pub fn run_stdio(session: &mut Session) -> io::Result<()> {
    let stdin = io::stdin();
    let prompt = stdin.is_terminal();
    run_repl(session, stdin.lock(), &mut io::stdout().lock(), prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_continues_after_errors() {
        let input = "eval (\\x. refl(x))(zero)\nfrobnicate\ndef two :=\n  succ(succ(zero));\nsenseEq two 3\nquit\nval zero\n";
        let mut out = Vec::new();
        run_repl(&mut Session::default(), input.as_bytes(), &mut out, false).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "refl(zero)");
        assert!(lines[1].starts_with("syntax error: unknown command"));
        assert_eq!(lines[2], "defined two");
        assert!(lines[3].starts_with("FAILS (mode=DEFN)"));
        assert_eq!(lines.len(), 4);
    }
}
