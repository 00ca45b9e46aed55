use indexmap::IndexMap;
use thiserror::Error;

use super::term::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("unknown definition `{0}`")]
    UnknownDefinition(Name),
    #[error("`{0}` is already defined")]
    Duplicate(Name),
    #[error("definition `{name}` has free variables: {free}")]
    OpenBody { name: Name, free: String },
}

#[derive(Debug, Clone)]
struct Definition {
    body: Term,
    unfolded: Term,
}

/// Ordered definitional environment. A body may only mention earlier
/// definitions, so unfolding always terminates.
#[derive(Debug, Clone, Default)]
pub struct Env {
    defs: IndexMap<Name, Definition>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `name := body`. The body must be closed and may reference only
    /// names already present.
    pub fn define(&mut self, name: impl Into<Name>, body: Term) -> Result<(), EnvError> {
        let name = name.into();
        if self.defs.contains_key(&name) {
            return Err(EnvError::Duplicate(name));
        }
        let free = body.free_vars();
        if !free.is_empty() {
            let free = free.into_iter().collect::<Vec<_>>().join(", ");
            return Err(EnvError::OpenBody { name, free });
        }
        let unfolded = self.unfold(&body)?;
        self.defs.insert(name, Definition { body, unfolded });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.defs.get(name).map(|d| &d.body)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Definitions in the order they were made.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.defs.iter().map(|(n, d)| (n.as_str(), &d.body))
    }

    /// Replaces every definition reference by its fully unfolded body.
    pub fn unfold(&self, t: &Term) -> Result<Term, EnvError> {
        if !t.mentions_definitions() {
            return Ok(t.clone());
        }
        Ok(match t {
            Term::DefRef(n) => self
                .defs
                .get(n)
                .map(|d| d.unfolded.clone())
                .ok_or_else(|| EnvError::UnknownDefinition(n.clone()))?,
            Term::Var(_) | Term::Nat | Term::Zero => t.clone(),
            Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(self.unfold(b)?)),
            Term::Pi(x, a, b) => Term::Pi(x.clone(), Box::new(self.unfold(a)?), Box::new(self.unfold(b)?)),
            Term::App(a, b) => Term::app(self.unfold(a)?, self.unfold(b)?),
            Term::EqRec(a, b) => Term::eqrec(self.unfold(a)?, self.unfold(b)?),
            Term::Refl(a) => Term::refl(self.unfold(a)?),
            Term::Succ(a) => Term::succ(self.unfold(a)?),
            Term::Id(a, b, c) => Term::id(self.unfold(a)?, self.unfold(b)?, self.unfold(c)?),
            Term::NatRec(a, b, c) => {
                Term::natrec(self.unfold(a)?, self.unfold(b)?, self.unfold(c)?)
            }
        })
    }

    /// One level of unfolding of a single reference.
    pub fn lookup(&self, name: &str) -> Result<&Term, EnvError> {
        self.get(name)
            .ok_or_else(|| EnvError::UnknownDefinition(name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfold_examples() {
        let mut env = Env::new();
        env.define("two", Term::numeral(2)).unwrap();
        assert_eq!(env.unfold(&Term::def("two")).unwrap(), Term::numeral(2));
        assert_eq!(env.unfold(&Term::Zero).unwrap(), Term::Zero);
        assert_eq!(
            Env::new().unfold(&Term::def("missing")),
            Err(EnvError::UnknownDefinition("missing".into()))
        );
    }

    #[test]
    fn nested_definitions_unfold_fully() {
        let mut env = Env::new();
        env.define("one", Term::numeral(1)).unwrap();
        env.define("two", Term::succ(Term::def("one"))).unwrap();
        let t = Term::refl(Term::def("two"));
        let u = env.unfold(&t).unwrap();
        assert_eq!(u, Term::refl(Term::numeral(2)));
        assert_eq!(env.unfold(&u).unwrap(), u);
    }

    #[test]
    fn rejects_bad_definitions() {
        let mut env = Env::new();
        env.define("a", Term::Zero).unwrap();
        assert_eq!(env.define("a", Term::Nat), Err(EnvError::Duplicate("a".into())));
        assert!(matches!(env.define("b", Term::var("y")), Err(EnvError::OpenBody { .. })));
        assert_eq!(
            env.define("c", Term::def("later")),
            Err(EnvError::UnknownDefinition("later".into()))
        );
    }
}
