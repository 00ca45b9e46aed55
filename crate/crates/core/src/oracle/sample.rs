use rand::Rng;

use super::enumerate::{binder_name, Form, Forms};
use crate::syntax::Term;

/// Largest numeral drawn when sampling closed naturals.
pub const SAMPLE_NUMERAL_MAX: u64 = 64;

/// A uniformly shaped random term of exactly `size` nodes with `depth`
/// variables in scope, or `None` if the constructor set cannot build one.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, size: usize, depth: usize, forms: Forms) -> Option<Term> {
    const ATTEMPTS: usize = 16;
    (0..ATTEMPTS).find_map(|_| attempt(rng, size, depth, forms))
}

fn attempt<R: Rng + ?Sized>(rng: &mut R, s: usize, d: usize, forms: Forms) -> Option<Term> {
    let feasible: Vec<Form> = Form::ALL
        .into_iter()
        .filter(|&f| forms.contains(f))
        .filter(|&f| match f {
            Form::Var => s == 1 && d > 0,
            Form::Nat | Form::Zero => s == 1,
            Form::Lam | Form::Refl | Form::Succ => s >= 2,
            Form::Pi | Form::App | Form::EqRec => s >= 3,
            Form::Id | Form::NatRec => s >= 4,
        })
        .collect();
    if feasible.is_empty() {
        return None;
    }
    let form = feasible[rng.gen_range(0..feasible.len())];
    let split2 = |rng: &mut R| {
        let i = rng.gen_range(1..s - 1);
        (i, s - 1 - i)
    };
    Some(match form {
        Form::Var => Term::Var(binder_name(rng.gen_range(0..d))),
        Form::Nat => Term::Nat,
        Form::Zero => Term::Zero,
        Form::Lam => Term::lam(binder_name(d), attempt(rng, s - 1, d + 1, forms)?),
        Form::Refl => Term::refl(attempt(rng, s - 1, d, forms)?),
        Form::Succ => Term::succ(attempt(rng, s - 1, d, forms)?),
        Form::Pi => {
            let (i, j) = split2(rng);
            Term::pi(binder_name(d), attempt(rng, i, d, forms)?, attempt(rng, j, d + 1, forms)?)
        }
        Form::App | Form::EqRec => {
            let (i, j) = split2(rng);
            let (a, b) = (attempt(rng, i, d, forms)?, attempt(rng, j, d, forms)?);
            if form == Form::App {
                Term::app(a, b)
            } else {
                Term::eqrec(a, b)
            }
        }
        Form::Id | Form::NatRec => {
            let i = rng.gen_range(1..s - 2);
            let j = rng.gen_range(1..s - 1 - i);
            let k = s - 1 - i - j;
            let (a, b, c) = (attempt(rng, i, d, forms)?, attempt(rng, j, d, forms)?, attempt(rng, k, d, forms)?);
            if form == Form::Id {
                Term::id(a, b, c)
            } else {
                Term::natrec(a, b, c)
            }
        }
    })
}

/// Random closed candidates for membership in the canonical type `ty`.
/// Candidates still have to be checked; functions are drawn a little above
/// the enumeration bound so sampling reaches terms enumeration does not.
pub fn candidates<R: Rng + ?Sized>(ty: &Term, rng: &mut R, n: usize, bound: usize) -> Vec<Term> {
    match ty {
        Term::Nat => (0..n).map(|_| Term::numeral(rng.gen_range(0..=SAMPLE_NUMERAL_MAX))).collect(),
        Term::Pi(..) => (0..n)
            .filter_map(|_| {
                let size = rng.gen_range(bound.max(2)..=bound.max(2) + 3);
                random_term(rng, size, 1, Forms::ALL).map(|b| Term::lam(binder_name(0), b))
            })
            .collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_terms_have_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for size in 1..12 {
            for depth in 0..3 {
                if let Some(t) = random_term(&mut rng, size, depth, Forms::ALL) {
                    assert_eq!(t.size(), size);
                    assert!(t.free_vars().len() <= depth);
                }
            }
        }
        let lam_only = Forms::parse("lam,var").unwrap();
        assert!(random_term(&mut rng, 1, 0, lam_only).is_none());
        assert!(random_term(&mut rng, 2, 0, lam_only).is_some());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let ty = Term::arrow(Term::Nat, Term::Nat);
        let a = candidates(&ty, &mut ChaCha8Rng::seed_from_u64(3), 20, 5);
        let b = candidates(&ty, &mut ChaCha8Rng::seed_from_u64(3), 20, 5);
        assert_eq!(a, b);
        assert!(a.iter().all(Term::is_closed));
        assert!(candidates(&Term::Zero, &mut ChaCha8Rng::seed_from_u64(3), 5, 5).is_empty());
    }
}
