//! Concrete syntax.
//!
//! ```text
//! term := ident | "(" ident ":" term ")" "->" term | term "->" term
//!       | "\" ident "." term | term "(" term ")"
//!       | "Eq(" term "," term "," term ")"
//!       | "refl(" term ")" | "eqrec(" term "," term ")"
//!       | "Nat" | "zero" | "succ(" term ")" | "natrec(" term "," term "," term ")"
//!       | decimal-literal | "(" term ")"
//! ```
//!
//! Application is left-associative and `->` right-associative. The `(` of
//! an application must follow the function without intervening whitespace,
//! so `f (a)` is two juxtaposed terms rather than one application; this is
//! what lets command lines list several terms separated by spaces.
//! Comments run from `#` to the end of the line.

use std::fmt;

use thiserror::Error;

use super::env::{Env, EnvError};
use super::term::{Name, Term};

/// Literals above this are rejected rather than expanded into huge terms.
pub const MAX_LITERAL: u64 = 10_000;

const KEYWORDS: &[&str] = &["Nat", "zero", "succ", "refl", "eqrec", "natrec", "Eq", "def", "type"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {}, found {found}", .expected.join(" or "))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("arity error at {pos}: `{form}` takes {expected} argument(s), found {found}")]
    Arity {
        pos: Pos,
        form: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable `{name}` at {pos}")]
    Unbound { pos: Pos, name: Name },
    #[error("at {pos}: {source}")]
    Definition { pos: Pos, source: EnvError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    Lambda,
    Assign,
    Semi,
    Turnstile,
    EqEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Turnstile => f.write_str("`|-`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
    spaced: bool,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let (mut line, mut col) = (1, 1);
    let mut spaced = true;
    while let Some(&(_, c)) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::CharIndices>| {
            let (_, c) = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            spaced = true;
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            spaced = true;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            match s.parse::<u64>() {
                Ok(n) if n <= MAX_LITERAL => Tok::Num(n),
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        expected: vec![format!("a literal no larger than {MAX_LITERAL}")],
                        found: s,
                    })
                }
            }
        } else {
            bump(&mut chars);
            let next = chars.peek().map(|&(_, c)| c);
            match (c, next) {
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (',', _) => Tok::Comma,
                ('.', _) => Tok::Dot,
                (';', _) => Tok::Semi,
                ('\\', _) => Tok::Lambda,
                ('⊢', _) => Tok::Turnstile,
                ('≡', _) => Tok::EqEq,
                (':', Some('=')) => {
                    bump(&mut chars);
                    Tok::Assign
                }
                (':', _) => Tok::Colon,
                ('-', Some('>')) => {
                    bump(&mut chars);
                    Tok::Arrow
                }
                ('|', Some('-')) => {
                    bump(&mut chars);
                    Tok::Turnstile
                }
                ('=', Some('=')) => {
                    bump(&mut chars);
                    Tok::EqEq
                }
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        expected: vec!["a term".into()],
                        found: format!("`{c}`"),
                    })
                }
            }
        };
        out.push(Token { tok, pos, spaced });
        spaced = false;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
        spaced: true,
    });
    Ok(out)
}

/// Recursive-descent parser over a token stream. Identifiers resolve to
/// bound variables first, then to definitions of `env`, and otherwise
/// parse as free variables.
pub struct Parser<'e> {
    toks: Vec<Token>,
    at: usize,
    env: &'e Env,
    local_defs: Vec<Name>,
    scope: Vec<Name>,
}

impl<'e> Parser<'e> {
    pub fn new(src: &str, env: &'e Env) -> Result<Self, ParseError> {
        Ok(Self {
            toks: lex(src)?,
            at: 0,
            env,
            local_defs: Vec::new(),
            scope: Vec::new(),
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    pub fn at_end(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    pub fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    /// Consumes `tok` if it is next.
    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    /// Consumes a bare keyword-like word such as `type`.
    pub fn eat_word(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == word) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(&["an identifier"])),
        }
    }

    /// Parses with `names` in scope as bound variables.
    pub fn with_scope<T>(
        &mut self,
        names: &[Name],
        f: impl FnOnce(&mut Self) -> Result<T, ParseError>,
    ) -> Result<T, ParseError> {
        let depth = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Tok::Lambda => {
                self.advance();
                let x = self.ident()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.with_scope(std::slice::from_ref(&x), |p| p.term())?;
                Ok(Term::Lam(x, Box::new(body)))
            }
            Tok::LParen if self.is_pi_binder() => {
                self.advance();
                let x = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let dom = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Arrow, "`->`")?;
                let body = self.with_scope(std::slice::from_ref(&x), |p| p.term())?;
                Ok(Term::Pi(x, Box::new(dom), Box::new(body)))
            }
            _ => {
                let lhs = self.application()?;
                if self.eat(&Tok::Arrow) {
                    let rhs = self.term()?;
                    Ok(Term::arrow(lhs, rhs))
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    fn is_pi_binder(&self) -> bool {
        matches!(
            (self.toks.get(self.at + 1), self.toks.get(self.at + 2)),
            (Some(Token { tok: Tok::Ident(_), .. }), Some(Token { tok: Tok::Colon, .. }))
        )
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while *self.peek() == Tok::LParen && !self.toks[self.at].spaced {
            self.advance();
            let arg = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            t = Term::app(t, arg);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(Term::numeral(n))
            }
            Tok::LParen => {
                self.advance();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(s) => {
                self.advance();
                match s.as_str() {
                    "Nat" => Ok(Term::Nat),
                    "zero" => Ok(Term::Zero),
                    "succ" => {
                        let [a] = self.args("succ", pos)?;
                        Ok(Term::succ(a))
                    }
                    "refl" => {
                        let [a] = self.args("refl", pos)?;
                        Ok(Term::refl(a))
                    }
                    "eqrec" => {
                        let [a, b] = self.args("eqrec", pos)?;
                        Ok(Term::eqrec(a, b))
                    }
                    "natrec" => {
                        let [a, b, c] = self.args("natrec", pos)?;
                        Ok(Term::natrec(a, b, c))
                    }
                    "Eq" => {
                        let [a, b, c] = self.args("Eq", pos)?;
                        Ok(Term::id(a, b, c))
                    }
                    "def" | "type" => {
                        self.at -= 1;
                        Err(self.error(&["a term"]))
                    }
                    _ if self.scope.iter().any(|n| *n == s) => Ok(Term::Var(s)),
                    _ if self.env.contains(&s) || self.local_defs.contains(&s) => Ok(Term::DefRef(s)),
                    _ => Ok(Term::Var(s)),
                }
            }
            _ => Err(self.error(&["a term"])),
        }
    }

    fn args<const N: usize>(&mut self, form: &'static str, pos: Pos) -> Result<[Term; N], ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.term()?);
            while self.eat(&Tok::Comma) {
                args.push(self.term()?);
            }
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        let found = args.len();
        args.try_into().map_err(|_| ParseError::Arity {
            pos,
            form,
            expected: N,
            found,
        })
    }

    /// `def name := term;`, added to `env`.
    fn definition(&mut self, env: &mut Env) -> Result<Name, ParseError> {
        if !self.eat_word("def") {
            return Err(self.error(&["`def`"]));
        }
        let pos = self.pos();
        let name = self.ident()?;
        self.expect(Tok::Assign, "`:=`")?;
        let body = self.term()?;
        self.expect(Tok::Semi, "`;`")?;
        env.define(name.clone(), body)
            .map_err(|source| ParseError::Definition { pos, source })?;
        Ok(name)
    }
}

/// Parses exactly one term.
pub fn parse(src: &str, env: &Env) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, env)?;
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

/// Parses one term and rejects free variables.
pub fn parse_closed(src: &str, env: &Env) -> Result<Term, ParseError> {
    let t = parse(src, env)?;
    match t.free_vars().into_iter().next() {
        None => Ok(t),
        Some(name) => Err(ParseError::Unbound {
            pos: Pos { line: 1, col: 1 },
            name,
        }),
    }
}

/// Reads a sequence of `def <name> := <term>;` items into `env`, returning
/// the names defined in order. On error `env` is left unchanged.
pub fn parse_definitions(src: &str, env: &mut Env) -> Result<Vec<Name>, ParseError> {
    let snapshot = env.clone();
    let mut staged = env.clone();
    let mut p = Parser::new(src, &snapshot)?;
    let mut names = Vec::new();
    while !p.at_end() {
        let name = p.definition(&mut staged)?;
        p.local_defs.push(name.clone());
        names.push(name);
    }
    *env = staged;
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse(s, &Env::new()).unwrap()
    }

    #[test]
    fn worked_example_term() {
        assert_eq!(
            p("(\\x. refl(x))(zero)"),
            Term::app(Term::lam("x", Term::refl(Term::var("x"))), Term::Zero)
        );
        assert_eq!(p("Nat"), Term::Nat);
    }

    #[test]
    fn arity_errors() {
        let e = parse("succ(zero, zero)", &Env::new()).unwrap_err();
        assert!(matches!(e, ParseError::Arity { form: "succ", expected: 1, found: 2, .. }));
        let e = parse("eqrec(zero)", &Env::new()).unwrap_err();
        assert!(matches!(e, ParseError::Arity { form: "eqrec", expected: 2, found: 1, .. }));
        let e = parse("succ()", &Env::new()).unwrap_err();
        assert!(matches!(e, ParseError::Arity { found: 0, .. }));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse("succ(", &Env::new()).unwrap_err();
        assert!(matches!(e, ParseError::Syntax { .. }), "{e}");
        let e = parse("\\x x", &Env::new()).unwrap_err();
        match e {
            ParseError::Syntax { pos, expected, .. } => {
                assert_eq!(pos, Pos { line: 1, col: 4 });
                assert_eq!(expected, vec!["`.`".to_string()]);
            }
            other => panic!("{other}"),
        }
        assert!(parse("zero zero", &Env::new()).is_err());
        assert!(parse("@", &Env::new()).is_err());
    }

    #[test]
    fn associativity() {
        let (f, a, b) = (Term::var("f"), Term::var("a"), Term::var("b"));
        assert_eq!(p("f(a)(b)"), Term::app(Term::app(f, a.clone()), b.clone()));
        match p("Nat -> Nat -> Nat") {
            Term::Pi(_, d, r) => {
                assert_eq!(*d, Term::Nat);
                assert!(matches!(*r, Term::Pi(..)));
            }
            t => panic!("{t:?}"),
        }
        assert_eq!(p("(x : Nat) -> Eq(Nat, x, x)"), Term::pi("x", Term::Nat, Term::id(Term::Nat, Term::var("x"), Term::var("x"))));
        let _ = (a, b);
    }

    #[test]
    fn literals_and_comments() {
        assert_eq!(p("3 # three"), Term::numeral(3));
        assert_eq!(p("# leading\nzero"), Term::Zero);
        assert!(parse("99999999", &Env::new()).is_err());
    }

    #[test]
    fn application_needs_adjacent_paren() {
        let env = Env::new();
        let mut parser = Parser::new("f (a) b", &env).unwrap();
        assert_eq!(parser.term().unwrap(), Term::var("f"));
        assert_eq!(parser.term().unwrap(), Term::var("a"));
        assert_eq!(parser.term().unwrap(), Term::var("b"));
        assert!(parser.at_end());
    }

    #[test]
    fn identifiers_resolve_bound_then_definitions() {
        let mut env = Env::new();
        env.define("two", Term::numeral(2)).unwrap();
        assert_eq!(parse("two", &env).unwrap(), Term::def("two"));
        assert_eq!(parse("\\two. two", &env).unwrap(), Term::lam("two", Term::var("two")));
        assert_eq!(parse("y", &env).unwrap(), Term::var("y"));
        assert!(matches!(parse_closed("y", &env), Err(ParseError::Unbound { .. })));
    }

    #[test]
    fn definition_files() {
        let mut env = Env::new();
        let src = "def two := succ(succ(zero));\n# comment\ndef add := \\m.\\n. natrec(m, n, \\k.\\r. succ(r));\ndef four := add(two)(two);";
        let names = parse_definitions(src, &mut env).unwrap();
        assert_eq!(names, vec!["two", "add", "four"]);
        assert_eq!(env.get("four").unwrap(), &Term::apps(Term::def("add"), [Term::def("two"), Term::def("two")]));

        let mut env2 = env.clone();
        assert!(parse_definitions("def five := 5; def two := zero;", &mut env2).is_err());
        assert_eq!(env2.len(), env.len());
        assert!(parse_definitions("def bad := x;", &mut env2).is_err());
    }
}
