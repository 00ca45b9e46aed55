use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::syntax::{Name, Term};

/// Term constructors, in enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Form {
    Var,
    Pi,
    Lam,
    App,
    Id,
    Refl,
    EqRec,
    Nat,
    Zero,
    Succ,
    NatRec,
}

impl Form {
    pub const ALL: [Form; 11] = [
        Form::Var,
        Form::Pi,
        Form::Lam,
        Form::App,
        Form::Id,
        Form::Refl,
        Form::EqRec,
        Form::Nat,
        Form::Zero,
        Form::Succ,
        Form::NatRec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Form::Var => "var",
            Form::Pi => "pi",
            Form::Lam => "lam",
            Form::App => "app",
            Form::Id => "id",
            Form::Refl => "refl",
            Form::EqRec => "eqrec",
            Form::Nat => "nat",
            Form::Zero => "zero",
            Form::Succ => "succ",
            Form::NatRec => "natrec",
        }
    }

    pub fn from_name(s: &str) -> Option<Form> {
        let s = s.to_ascii_lowercase();
        let s = match s.as_str() {
            "λ" | "lambda" => "lam",
            "π" | "Π" => "pi",
            "eq" => "id",
            other => other,
        };
        Form::ALL.into_iter().find(|f| f.name() == s)
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

/// A set of constructors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Forms(u16);

impl Forms {
    pub const ALL: Forms = Forms((1 << 11) - 1);

    pub fn empty() -> Forms {
        Forms(0)
    }

    pub fn with(self, f: Form) -> Forms {
        Forms(self.0 | f.bit())
    }

    pub fn contains(self, f: Form) -> bool {
        self.0 & f.bit() != 0
    }

    /// Parses a comma-separated list such as `lam,app,var`, or `all`.
    pub fn parse(s: &str) -> Result<Forms, String> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Forms::ALL);
        }
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .try_fold(Forms::empty(), |acc, p| {
                Form::from_name(p)
                    .map(|f| acc.with(f))
                    .ok_or_else(|| format!("unknown constructor `{p}`"))
            })
    }
}

impl FromIterator<Form> for Forms {
    fn from_iter<I: IntoIterator<Item = Form>>(iter: I) -> Self {
        iter.into_iter().fold(Forms::empty(), Forms::with)
    }
}

impl fmt::Display for Forms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Forms::ALL {
            return f.write_str("all");
        }
        let names: Vec<_> = Form::ALL.into_iter().filter(|x| self.contains(*x)).map(Form::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Canonical binder name for a binding depth: `x, y, z, u, v, w, x6, ...`.
pub fn binder_name(level: usize) -> Name {
    const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    NAMES.get(level).map(|s| s.to_string()).unwrap_or_else(|| format!("x{level}"))
}

/// Memoised enumeration of terms by exact size and number of variables in
/// scope. Every variable in scope at depth `d` is named by
/// [`binder_name`] of its level, so distinct outputs are never α-equal.
#[derive(Debug)]
pub struct Enumerator {
    forms: Forms,
    cache: Mutex<HashMap<(usize, usize), Arc<Vec<Term>>>>,
}

impl Enumerator {
    pub fn new(forms: Forms) -> Self {
        Enumerator {
            forms,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Process-wide enumerator over all constructors.
    pub fn shared() -> &'static Enumerator {
        static SHARED: OnceLock<Enumerator> = OnceLock::new();
        SHARED.get_or_init(|| Enumerator::new(Forms::ALL))
    }

    pub fn forms(&self) -> Forms {
        self.forms
    }

    /// All terms of exactly `size` nodes whose free variables are among the
    /// first `depth` canonical names.
    pub fn exact(&self, size: usize, depth: usize) -> Arc<Vec<Term>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&(size, depth)) {
            return hit.clone();
        }
        let terms = Arc::new(self.build(size, depth));
        self.cache.lock().unwrap().insert((size, depth), terms.clone());
        terms
    }

    /// Terms of sizes `1..=max`, smallest first.
    pub fn up_to(&self, max: usize, depth: usize) -> Vec<Term> {
        (1..=max).flat_map(|s| self.exact(s, depth).as_ref().clone()).collect()
    }

    pub fn closed(&self, max: usize) -> Vec<Term> {
        self.up_to(max, 0)
    }

    fn build(&self, s: usize, d: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if s == 0 {
            return out;
        }
        let has = |f| self.forms.contains(f);
        let binder = binder_name(d);
        if s == 1 && has(Form::Var) {
            out.extend((0..d).map(|l| Term::Var(binder_name(l))));
        }
        if s >= 3 && has(Form::Pi) {
            for i in 1..=s - 2 {
                let doms = self.exact(i, d);
                let bodies = self.exact(s - 1 - i, d + 1);
                for a in doms.iter() {
                    for b in bodies.iter() {
                        out.push(Term::pi(binder.clone(), a.clone(), b.clone()));
                    }
                }
            }
        }
        if s >= 2 && has(Form::Lam) {
            out.extend(self.exact(s - 1, d + 1).iter().map(|b| Term::lam(binder.clone(), b.clone())));
        }
        if s >= 3 && has(Form::App) {
            self.pairs(s - 1, d, &mut out, Term::app);
        }
        if s >= 4 && has(Form::Id) {
            self.triples(s - 1, d, &mut out, Term::id);
        }
        if s >= 2 && has(Form::Refl) {
            out.extend(self.exact(s - 1, d).iter().cloned().map(Term::refl));
        }
        if s >= 3 && has(Form::EqRec) {
            self.pairs(s - 1, d, &mut out, Term::eqrec);
        }
        if s == 1 && has(Form::Nat) {
            out.push(Term::Nat);
        }
        if s == 1 && has(Form::Zero) {
            out.push(Term::Zero);
        }
        if s >= 2 && has(Form::Succ) {
            out.extend(self.exact(s - 1, d).iter().cloned().map(Term::succ));
        }
        if s >= 4 && has(Form::NatRec) {
            self.triples(s - 1, d, &mut out, Term::natrec);
        }
        out
    }

    fn pairs(&self, total: usize, d: usize, out: &mut Vec<Term>, mk: fn(Term, Term) -> Term) {
        for i in 1..total {
            let left = self.exact(i, d);
            let right = self.exact(total - i, d);
            for a in left.iter() {
                for b in right.iter() {
                    out.push(mk(a.clone(), b.clone()));
                }
            }
        }
    }

    fn triples(&self, total: usize, d: usize, out: &mut Vec<Term>, mk: fn(Term, Term, Term) -> Term) {
        for i in 1..total {
            for j in 1..total - i {
                let (xs, ys, zs) = (self.exact(i, d), self.exact(j, d), self.exact(total - i - j, d));
                for a in xs.iter() {
                    for b in ys.iter() {
                        for c in zs.iter() {
                            out.push(mk(a.clone(), b.clone(), c.clone()));
                        }
                    }
                }
            }
        }
    }
}
