//! The expression tree and its normalizing constructors.
//!
//! `add`, `mul`, `pow` and `func` assume their arguments are already
//! normalized and return normalized results: sums and products are flat,
//! numeric parts are folded, like terms and equal bases are merged, and
//! products over sums are expanded. `simplify` re-runs them bottom-up.

use super::number::Number;
use super::symbol::Symbol;
use std::collections::{BTreeMap, BTreeSet};
use std::ops;
use std::sync::Arc;

/// Unary functions understood by the parser and evaluator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Num(Number),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Base raised to a constant exponent. Division is `Pow(_, -1)`, square root `Pow(_, 1/2)`.
    Pow(Expr, Number),
    Func(Func, Expr),
}

/// Immutable, cheaply clonable expression.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

// Products with more terms than this are left factored.
const EXPANSION_LIMIT: usize = 4096;
// Largest integer power of a sum that is multiplied out.
const MAX_EXPANDED_POWER: i64 = 6;

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(n: Number) -> Self {
        Expr::from_node(Node::Num(n))
    }

    pub fn int(n: i64) -> Self {
        Expr::num(Number::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::num(Number::ratio(n, d))
    }

    pub fn float(x: f64) -> Self {
        Expr::num(Number::float(x))
    }

    pub fn zero() -> Self {
        Expr::num(Number::ZERO)
    }

    pub fn one() -> Self {
        Expr::num(Number::ONE)
    }

    pub fn sym(s: Symbol) -> Self {
        Expr::from_node(Node::Sym(s))
    }

    pub fn param(name: &str) -> Self {
        Expr::sym(Symbol::param(name))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    /// Normalized sum.
    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut constant = Number::ZERO;
        let mut collected: BTreeMap<Expr, Number> = BTreeMap::new();
        let mut push = |t: &Expr, constant: &mut Number| {
            if let Some(n) = t.as_number() {
                *constant = constant.add(n);
                return;
            }
            let (c, rest) = t.split_coefficient();
            let entry = collected.entry(rest).or_insert(Number::ZERO);
            *entry = entry.add(c);
        };
        for t in terms {
            match t.node() {
                Node::Sum(inner) => inner.iter().for_each(|u| push(u, &mut constant)),
                _ => push(&t, &mut constant),
            }
        }
        let mut out: Vec<Expr> = collected
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(rest, c)| rest.with_coefficient(c))
            .collect();
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(out)),
        }
    }

    /// Normalized product; expands over sums.
    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coeff = Number::ONE;
        let mut powers: BTreeMap<Expr, Number> = BTreeMap::new();
        let mut sums: Vec<Expr> = Vec::new();
        let mut pending: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = pending.pop() {
            match f.node() {
                Node::Num(n) => coeff = coeff.mul(*n),
                Node::Product(inner) => pending.extend(inner.iter().cloned()),
                Node::Sum(_) => sums.push(f.clone()),
                Node::Pow(b, e) => {
                    let entry = powers.entry(b.clone()).or_insert(Number::ZERO);
                    *entry = entry.add(*e);
                }
                _ => {
                    let entry = powers.entry(f.clone()).or_insert(Number::ZERO);
                    *entry = entry.add(Number::ONE);
                }
            }
        }
        if coeff.is_zero() {
            return Expr::zero();
        }
        // Merged exponents can produce numbers, sums or products again.
        let mut factors = Vec::new();
        let mut renormalize = false;
        for (base, e) in powers {
            let p = Expr::pow(base, e);
            match p.node() {
                Node::Num(_) | Node::Sum(_) | Node::Product(_) => renormalize = true,
                _ => {}
            }
            factors.push(p);
        }
        if renormalize {
            let mut all = factors;
            all.push(Expr::num(coeff));
            all.extend(sums);
            return Expr::mul(all);
        }
        let monomial = Expr::build_product(coeff, factors);
        if sums.is_empty() {
            return monomial;
        }
        let size: usize = sums
            .iter()
            .map(|s| match s.node() {
                Node::Sum(t) => t.len(),
                _ => 1,
            })
            .product();
        if size > EXPANSION_LIMIT {
            let mut fs = match monomial.node() {
                Node::Product(v) => v.clone(),
                _ if monomial.is_one() => vec![],
                _ => vec![monomial],
            };
            fs.extend(sums);
            fs.sort();
            return Expr::from_node(Node::Product(fs));
        }
        let mut acc = vec![monomial];
        for s in sums {
            let Node::Sum(terms) = s.node() else {
                unreachable!()
            };
            let mut next = Vec::with_capacity(acc.len() * terms.len());
            for a in &acc {
                for t in terms {
                    next.push(Expr::mul([a.clone(), t.clone()]));
                }
            }
            acc = next;
        }
        Expr::add(acc)
    }

    fn build_product(coeff: Number, mut factors: Vec<Expr>) -> Expr {
        if coeff.is_zero() {
            return Expr::zero();
        }
        factors.sort();
        if factors.is_empty() {
            return Expr::num(coeff);
        }
        if coeff.is_one() && factors.len() == 1 {
            return factors.pop().unwrap();
        }
        if !coeff.is_one() {
            factors.insert(0, Expr::num(coeff));
        }
        Expr::from_node(Node::Product(factors))
    }

    /// Normalized power with constant exponent.
    pub fn pow(base: Expr, exp: Number) -> Expr {
        let exp = match exp {
            Number::Float(x) => Number::float(x),
            r => r,
        };
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        match base.node() {
            Node::Num(b) => match b.pow(exp) {
                Some(v) => Expr::num(v),
                None => Expr::from_node(Node::Pow(base.clone(), exp)),
            },
            Node::Pow(inner, e) if exp.as_integer().is_some() => {
                Expr::pow(inner.clone(), e.mul(exp))
            }
            Node::Product(fs) if exp.as_integer().is_some() => {
                Expr::mul(fs.iter().map(|f| Expr::pow(f.clone(), exp)))
            }
            Node::Sum(_) => match exp.as_integer() {
                Some(n) if (2..=MAX_EXPANDED_POWER).contains(&n) => {
                    Expr::mul(std::iter::repeat_n(base.clone(), n as usize))
                }
                _ => Expr::from_node(Node::Pow(base.clone(), exp)),
            },
            _ => Expr::from_node(Node::Pow(base.clone(), exp)),
        }
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        if let Some(n) = arg.as_number() {
            if n.is_zero() {
                match f {
                    Func::Sin => return Expr::zero(),
                    Func::Cos | Func::Exp => return Expr::one(),
                    Func::Ln => {}
                }
            }
            if f == Func::Ln && n.is_one() {
                return Expr::zero();
            }
            let v = f.apply(n.to_f64());
            if v.is_finite() {
                return Expr::float(v);
            }
        }
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::pow(arg, Number::ratio(1, 2))
    }

    pub fn recip(self) -> Expr {
        Expr::pow(self, Number::MINUS_ONE)
    }

    /// Split off the numeric coefficient of a term: `3*x*y -> (3, x*y)`.
    pub fn split_coefficient(&self) -> (Number, Expr) {
        match self.node() {
            Node::Num(n) => (*n, Expr::one()),
            Node::Product(fs) => match fs[0].as_number() {
                Some(c) => {
                    let rest: Vec<Expr> = fs[1..].to_vec();
                    let rest = if rest.len() == 1 {
                        rest.into_iter().next().unwrap()
                    } else {
                        Expr::from_node(Node::Product(rest))
                    };
                    (c, rest)
                }
                None => (Number::ONE, self.clone()),
            },
            _ => (Number::ONE, self.clone()),
        }
    }

    fn with_coefficient(self, c: Number) -> Expr {
        if c.is_one() {
            return self;
        }
        if self.is_one() {
            return Expr::num(c);
        }
        match self.node() {
            Node::Product(fs) => {
                let mut v = Vec::with_capacity(fs.len() + 1);
                v.push(Expr::num(c));
                v.extend(fs.iter().cloned());
                Expr::from_node(Node::Product(v))
            }
            _ => Expr::from_node(Node::Product(vec![Expr::num(c), self])),
        }
    }

    /// Symbols reachable in the tree.
    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Sum(v) | Node::Product(v) => v.iter().for_each(|e| e.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Func(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(t) => t == s,
            Node::Sum(v) | Node::Product(v) => v.iter().any(|e| e.contains(s)),
            Node::Pow(b, _) => b.contains(s),
            Node::Func(_, a) => a.contains(s),
        }
    }

    pub fn contains_any(&self, syms: &[Symbol]) -> bool {
        syms.iter().any(|s| self.contains(s))
    }

    /// Simultaneous substitution of symbols by expressions; the result is normalized.
    pub fn subs(&self, map: &BTreeMap<Symbol, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        self.rebuild(&|s| map.get(s).cloned())
    }

    pub fn subs1(&self, s: &Symbol, by: &Expr) -> Expr {
        self.rebuild(&|t| (t == s).then(|| by.clone()))
    }

    fn rebuild(&self, f: &dyn Fn(&Symbol) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Sym(s) => f(s).unwrap_or_else(|| self.clone()),
            Node::Sum(v) => Expr::add(v.iter().map(|e| e.rebuild(f))),
            Node::Product(v) => Expr::mul(v.iter().map(|e| e.rebuild(f))),
            Node::Pow(b, e) => Expr::pow(b.rebuild(f), *e),
            Node::Func(g, a) => Expr::func(*g, a.rebuild(f)),
        }
    }

    /// Highest level among symbols of the given kinds, if any appear.
    pub fn max_level(&self, pred: impl Fn(&Symbol) -> bool) -> Option<u32> {
        self.free_symbols()
            .iter()
            .filter(|s| pred(s))
            .map(Symbol::level)
            .max()
    }

    /// True when the tree is a polynomial in its symbols (non-negative integer powers only).
    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => true,
            Node::Sum(v) | Node::Product(v) => v.iter().all(Expr::is_polynomial),
            Node::Pow(b, e) => match b.node() {
                Node::Num(_) => true,
                _ => e.as_integer().is_some_and(|n| n >= 0) && b.is_polynomial(),
            },
            Node::Func(..) => false,
        }
    }

    /// Terms of a sum, or the expression itself.
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Sum(v) => v.clone(),
            _ => vec![self.clone()],
        }
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::sym(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Number> for Expr {
    fn from(n: Number) -> Self {
        Expr::num(n)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add([self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add([self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul([self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul([self, rhs.recip()])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul([Expr::num(Number::MINUS_ONE), self])
    }
}

impl<'a> ops::Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add([self.clone(), rhs.clone()])
    }
}

impl<'a> ops::Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self.clone() - rhs.clone()
    }
}

impl<'a> ops::Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul([self.clone(), rhs.clone()])
    }
}

/// Bottom-up renormalization, iterated to a fixed point.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = simplify_once(e);
    for _ in 0..8 {
        let next = simplify_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn simplify_once(e: &Expr) -> Expr {
    match e.node() {
        Node::Num(Number::Float(x)) => Expr::float(*x),
        Node::Num(_) | Node::Sym(_) => e.clone(),
        Node::Sum(v) => Expr::add(v.iter().map(simplify_once)),
        Node::Product(v) => Expr::mul(v.iter().map(simplify_once)),
        Node::Pow(b, n) => Expr::pow(simplify_once(b), *n),
        Node::Func(f, a) => Expr::func(*f, simplify_once(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(l: u32) -> Expr {
        Expr::sym(Symbol::q(1, l))
    }

    #[test]
    fn collects_like_terms() {
        assert_eq!(q(1) + q(1), Expr::int(2) * q(1));
        let mu = Expr::param("mu");
        assert!((q(2) * mu.clone() - mu * q(2)).is_zero());
    }

    #[test]
    fn merges_powers() {
        let x = q(0);
        assert_eq!(x.clone() * x.clone(), Expr::pow(x.clone(), Number::int(2)));
        assert_eq!(x.clone() / x.clone(), Expr::one());
        let s = Expr::sqrt(x.clone());
        assert_eq!(s.clone() * s, x);
    }

    #[test]
    fn expands_products_of_sums() {
        let x = q(0);
        let lhs = Expr::pow(x.clone() + Expr::one(), Number::int(2));
        let rhs = Expr::add([x.clone() * x.clone(), Expr::int(2) * x, Expr::one()]);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn keeps_irrational_constants() {
        let r2 = Expr::sqrt(Expr::int(2));
        assert!(r2.as_number().is_none());
        assert_eq!(r2.clone() * r2, Expr::int(2));
    }

    #[test]
    fn folds_functions_of_constants() {
        assert!(Expr::func(Func::Sin, Expr::zero()).is_zero());
        assert!(Expr::func(Func::Exp, Expr::zero()).is_one());
        assert!(Expr::func(Func::Ln, Expr::one()).is_zero());
        assert!(matches!(
            Expr::func(Func::Ln, Expr::int(-1)).node(),
            Node::Func(..)
        ));
    }

    #[test]
    fn substitution_renormalizes() {
        let x = q(0);
        let e = x.clone() * x.clone() - Expr::int(4);
        let sub = e.subs1(&Symbol::q(1, 0), &Expr::int(2));
        assert!(sub.is_zero());
    }
}
