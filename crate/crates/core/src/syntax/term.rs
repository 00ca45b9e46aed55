use std::collections::BTreeSet;

/// Identifier used for variables, binders and definition names.
pub type Name = String;

/// Abstract syntax of the object language. Types are terms too.
///
/// Binders are named; α-equivalence and capture-avoiding substitution are
/// provided by [`alpha_eq`] and [`substitute`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    /// `(x : A) -> B`
    Pi(Name, Box<Term>, Box<Term>),
    /// `\x. a`
    Lam(Name, Box<Term>),
    /// `f(a)`
    App(Box<Term>, Box<Term>),
    /// `Eq(A, a, b)`: type, left endpoint, right endpoint.
    Id(Box<Term>, Box<Term>, Box<Term>),
    Refl(Box<Term>),
    /// `eqrec(scrutinee, branch)`
    EqRec(Box<Term>, Box<Term>),
    Nat,
    Zero,
    Succ(Box<Term>),
    /// `natrec(scrutinee, base, step)`
    NatRec(Box<Term>, Box<Term>, Box<Term>),
    /// Reference to a definition in an [`Env`](super::Env).
    DefRef(Name),
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn def(name: impl Into<Name>) -> Term {
        Term::DefRef(name.into())
    }

    pub fn pi(binder: impl Into<Name>, domain: Term, body: Term) -> Term {
        Term::Pi(binder.into(), Box::new(domain), Box::new(body))
    }

    /// Non-dependent function type `A -> B`, with a binder chosen to be
    /// free in neither side.
    pub fn arrow(domain: Term, codomain: Term) -> Term {
        let mut avoid = codomain.free_vars();
        avoid.extend(domain.free_vars());
        let binder = fresh_name("x", |n| avoid.contains(n));
        Term::pi(binder, domain, codomain)
    }

    pub fn lam(binder: impl Into<Name>, body: Term) -> Term {
        Term::Lam(binder.into(), Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// Left-nested application `f(a1)(a2)...`.
    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    pub fn id(ty: Term, lhs: Term, rhs: Term) -> Term {
        Term::Id(Box::new(ty), Box::new(lhs), Box::new(rhs))
    }

    pub fn refl(arg: Term) -> Term {
        Term::Refl(Box::new(arg))
    }

    pub fn eqrec(scrutinee: Term, branch: Term) -> Term {
        Term::EqRec(Box::new(scrutinee), Box::new(branch))
    }

    pub fn succ(arg: Term) -> Term {
        Term::Succ(Box::new(arg))
    }

    pub fn natrec(scrutinee: Term, base: Term, step: Term) -> Term {
        Term::NatRec(Box::new(scrutinee), Box::new(base), Box::new(step))
    }

    /// The numeral `succ^n(zero)`.
    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Term::Zero, |t, _| Term::succ(t))
    }

    /// Reads a term back as a numeral if it is literally `succ^n(zero)`.
    pub fn as_numeral(&self) -> Option<u64> {
        let mut n = 0;
        let mut t = self;
        loop {
            match t {
                Term::Zero => return Some(n),
                Term::Succ(p) => {
                    n += 1;
                    t = p;
                }
                _ => return None,
            }
        }
    }

    /// Number of AST nodes. Binding constructs count as one node each.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Nat | Term::Zero | Term::DefRef(_) => 1,
            Term::Lam(_, b) | Term::Refl(b) | Term::Succ(b) => 1 + b.size(),
            Term::Pi(_, a, b) | Term::App(a, b) | Term::EqRec(a, b) => 1 + a.size() + b.size(),
            Term::Id(a, b, c) | Term::NatRec(a, b, c) => 1 + a.size() + b.size() + c.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    /// Whether `name` occurs free. Cheaper than building the full set.
    pub fn has_free(&self, name: &str) -> bool {
        match self {
            Term::Var(x) => x == name,
            Term::Nat | Term::Zero | Term::DefRef(_) => false,
            Term::Lam(x, b) => x != name && b.has_free(name),
            Term::Pi(x, a, b) => a.has_free(name) || (x != name && b.has_free(name)),
            Term::App(a, b) | Term::EqRec(a, b) => a.has_free(name) || b.has_free(name),
            Term::Refl(a) | Term::Succ(a) => a.has_free(name),
            Term::Id(a, b, c) | Term::NatRec(a, b, c) => {
                a.has_free(name) || b.has_free(name) || c.has_free(name)
            }
        }
    }

    /// Closed iff no free variables. Definition references do not count.
    pub fn is_closed(&self) -> bool {
        let mut bound = Vec::new();
        is_closed_under(self, &mut bound)
    }

    pub fn mentions_definitions(&self) -> bool {
        match self {
            Term::DefRef(_) => true,
            Term::Var(_) | Term::Nat | Term::Zero => false,
            Term::Lam(_, b) | Term::Refl(b) | Term::Succ(b) => b.mentions_definitions(),
            Term::Pi(_, a, b) | Term::App(a, b) | Term::EqRec(a, b) => {
                a.mentions_definitions() || b.mentions_definitions()
            }
            Term::Id(a, b, c) | Term::NatRec(a, b, c) => {
                a.mentions_definitions() || b.mentions_definitions() || c.mentions_definitions()
            }
        }
    }
}

fn collect_free<'a>(t: &'a Term, bound: &mut Vec<&'a str>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(&x.as_str()) {
                out.insert(x.clone());
            }
        }
        Term::Nat | Term::Zero | Term::DefRef(_) => {}
        Term::Lam(x, b) => {
            bound.push(x);
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::Pi(x, a, b) => {
            collect_free(a, bound, out);
            bound.push(x);
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::App(a, b) | Term::EqRec(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::Refl(a) | Term::Succ(a) => collect_free(a, bound, out),
        Term::Id(a, b, c) | Term::NatRec(a, b, c) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
            collect_free(c, bound, out);
        }
    }
}

fn is_closed_under<'a>(t: &'a Term, bound: &mut Vec<&'a str>) -> bool {
    match t {
        Term::Var(x) => bound.contains(&x.as_str()),
        Term::Nat | Term::Zero | Term::DefRef(_) => true,
        Term::Lam(x, b) => {
            bound.push(x);
            let r = is_closed_under(b, bound);
            bound.pop();
            r
        }
        Term::Pi(x, a, b) => {
            if !is_closed_under(a, bound) {
                return false;
            }
            bound.push(x);
            let r = is_closed_under(b, bound);
            bound.pop();
            r
        }
        Term::App(a, b) | Term::EqRec(a, b) => is_closed_under(a, bound) && is_closed_under(b, bound),
        Term::Refl(a) | Term::Succ(a) => is_closed_under(a, bound),
        Term::Id(a, b, c) | Term::NatRec(a, b, c) => {
            is_closed_under(a, bound) && is_closed_under(b, bound) && is_closed_under(c, bound)
        }
    }
}

/// Picks `base`, or `base1`, `base2`, ... , whichever is first not `taken`.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    if !taken(base) {
        return base.to_string();
    }
    (1u64..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !taken(n))
        .expect("unbounded supply of names")
}

/// Capture-avoiding substitution `body[v/x]`.
pub fn substitute(body: &Term, x: &str, v: &Term) -> Term {
    let fv = v.free_vars();
    subst_rec(body, x, v, &fv)
}

fn subst_rec(t: &Term, x: &str, v: &Term, fv: &BTreeSet<Name>) -> Term {
    if !t.has_free(x) {
        return t.clone();
    }
    match t {
        Term::Var(_) => v.clone(),
        Term::Nat | Term::Zero | Term::DefRef(_) => t.clone(),
        Term::Lam(y, b) => {
            let (y, b) = under_binder(y, b, x, v, fv);
            Term::Lam(y, Box::new(b))
        }
        Term::Pi(y, a, b) => {
            let a = subst_rec(a, x, v, fv);
            if y == x {
                return Term::Pi(y.clone(), Box::new(a), b.clone());
            }
            let (y, b) = under_binder(y, b, x, v, fv);
            Term::Pi(y, Box::new(a), Box::new(b))
        }
        Term::App(a, b) => Term::app(subst_rec(a, x, v, fv), subst_rec(b, x, v, fv)),
        Term::EqRec(a, b) => Term::eqrec(subst_rec(a, x, v, fv), subst_rec(b, x, v, fv)),
        Term::Refl(a) => Term::refl(subst_rec(a, x, v, fv)),
        Term::Succ(a) => Term::succ(subst_rec(a, x, v, fv)),
        Term::Id(a, b, c) => Term::id(
            subst_rec(a, x, v, fv),
            subst_rec(b, x, v, fv),
            subst_rec(c, x, v, fv),
        ),
        Term::NatRec(a, b, c) => Term::natrec(
            subst_rec(a, x, v, fv),
            subst_rec(b, x, v, fv),
            subst_rec(c, x, v, fv),
        ),
    }
}

// Caller guarantees y != x.
fn under_binder(y: &str, body: &Term, x: &str, v: &Term, fv: &BTreeSet<Name>) -> (Name, Term) {
    if fv.contains(y) {
        let taken = |n: &str| n == x || fv.contains(n) || body.has_free(n);
        let y2 = fresh_name(y, taken);
        let renamed = substitute(body, y, &Term::Var(y2.clone()));
        let b = subst_rec(&renamed, x, v, fv);
        (y2, b)
    } else {
        (y.to_string(), subst_rec(body, x, v, fv))
    }
}

/// α-equivalence: equality up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    let mut left = Vec::new();
    let mut right = Vec::new();
    alpha_rec(a, b, &mut left, &mut right)
}

fn alpha_rec<'a>(a: &'a Term, b: &'a Term, la: &mut Vec<&'a str>, lb: &mut Vec<&'a str>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let ix = la.iter().rposition(|n| *n == x.as_str());
            let iy = lb.iter().rposition(|n| *n == y.as_str());
            match (ix, iy) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Nat, Term::Nat) | (Term::Zero, Term::Zero) => true,
        (Term::DefRef(x), Term::DefRef(y)) => x == y,
        (Term::Lam(x, p), Term::Lam(y, q)) => {
            la.push(x);
            lb.push(y);
            let r = alpha_rec(p, q, la, lb);
            la.pop();
            lb.pop();
            r
        }
        (Term::Pi(x, a1, b1), Term::Pi(y, a2, b2)) => {
            if !alpha_rec(a1, a2, la, lb) {
                return false;
            }
            la.push(x);
            lb.push(y);
            let r = alpha_rec(b1, b2, la, lb);
            la.pop();
            lb.pop();
            r
        }
        (Term::App(f1, a1), Term::App(f2, a2)) | (Term::EqRec(f1, a1), Term::EqRec(f2, a2)) => {
            alpha_rec(f1, f2, la, lb) && alpha_rec(a1, a2, la, lb)
        }
        (Term::Refl(p), Term::Refl(q)) | (Term::Succ(p), Term::Succ(q)) => alpha_rec(p, q, la, lb),
        (Term::Id(a1, b1, c1), Term::Id(a2, b2, c2))
        | (Term::NatRec(a1, b1, c1), Term::NatRec(a2, b2, c2)) => {
            alpha_rec(a1, a2, la, lb) && alpha_rec(b1, b2, la, lb) && alpha_rec(c1, c2, la, lb)
        }
        _ => false,
    }
}
