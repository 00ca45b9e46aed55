//! Brute-force machinery that is independent of the machine and checker:
//! closed-term enumeration, type-directed member generation, a nameless
//! reference evaluator and the differential suite that compares them.

pub mod differential;
pub mod enumerate;
pub mod normalize;
pub mod reference;
pub mod sample;

use crate::machine::DEFAULT_FUEL;
use crate::semantics::{Budget, Checker, SemanticsError};
use crate::syntax::{Env, Term};

pub use differential::{differential_suite, DiffReport};
pub use enumerate::{binder_name, Enumerator, Form, Forms};
pub use normalize::{alpha_eq_oracle, normalize_deep, normalize_oracle, substitute_oracle, OracleResult};
pub use reference::{equal_by_normalization, ReferenceChecker, Tri};

/// What to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumSpec {
    /// Largest AST node count.
    pub max_size: usize,
    pub forms: Forms,
    pub seed: u64,
    /// Fuel for every evaluation made on behalf of the spec.
    pub fuel: u64,
}

impl Default for EnumSpec {
    fn default() -> Self {
        EnumSpec {
            max_size: 5,
            forms: Forms::ALL,
            seed: 0,
            fuel: DEFAULT_FUEL,
        }
    }
}

impl EnumSpec {
    pub fn new(max_size: usize) -> Self {
        EnumSpec {
            max_size,
            ..Self::default()
        }
    }

    pub fn with_forms(self, forms: Forms) -> Self {
        EnumSpec { forms, ..self }
    }

    pub fn budget(&self) -> Budget {
        Budget {
            fuel: self.fuel,
            instance_size: self.max_size,
            seed: self.seed,
            ..Budget::default()
        }
    }
}

/// Every closed term of size at most `spec.max_size` over the selected
/// constructors, smallest first.
pub fn enumerate_closed(spec: &EnumSpec) -> Vec<Term> {
    if spec.forms == Forms::ALL {
        Enumerator::shared().closed(spec.max_size)
    } else {
        Enumerator::new(spec.forms).closed(spec.max_size)
    }
}

/// Closed members of `ty` up to `spec.max_size`. Every result passes the
/// membership check at `spec.fuel`.
pub fn generate_members(ty: &Term, spec: &EnumSpec, env: &Env) -> Result<Vec<Term>, SemanticsError> {
    Ok(Checker::new(env, spec.budget()).members(ty)?.as_ref().clone())
}
