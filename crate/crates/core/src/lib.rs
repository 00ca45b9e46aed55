//! A semantic kernel for a fragment of Martin-Löf type theory with
//! dependent functions, equality types and natural numbers.
//!
//! * [`syntax`]: terms, parsing, printing, α-equivalence, substitution.
//! * [`machine`]: the untyped transition relation and fuel-bounded evaluation.
//! * [`semantics`]: meaning-explanation checkers for the judgment forms.
//! * [`sense`]: sense (program) versus reference (value) analyses.
//! * [`oracle`]: enumeration, an independent normalizer and differential checks.

pub mod machine;
pub mod oracle;
pub mod semantics;
pub mod sense;
pub mod syntax;

pub use machine::{eval, step, trace_of, EvalResult, StepResult, Trace, DEFAULT_FUEL};

pub use semantics::{Budget, Checker, Context, Judgment, Verdict};
pub use syntax::{alpha_eq, parse, print, substitute, unfold, Env, Term};
