//! Abstract and concrete syntax of the object language, α-equivalence,
//! substitution and definitional environments.

mod env;
mod parse;
mod print;
mod term;

pub use env::{Env, EnvError};
pub use parse::{parse, parse_closed, parse_definitions, ParseError, Parser, Pos, Tok, MAX_LITERAL};
pub use print::print;
pub use term::{alpha_eq, fresh_name, substitute, Name, Term};

/// Fully unfolds every definition reference in `t`.
pub fn unfold(t: &Term, env: &Env) -> Result<Term, EnvError> {
    env.unfold(t)
}
