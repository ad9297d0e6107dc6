//! Numeric evaluation: a tree-walking evaluator over [`Binding`]s and a
//! compiled stack machine over dense slot vectors for hot loops.

use super::expr::{Expr, Func, Node};
use super::symbol::Symbol;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Finite map from symbols to values. Looking up an unbound symbol is an error.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Binding(BTreeMap<Symbol, f64>);

impl Binding {
    pub fn new() -> Self {
        Binding(BTreeMap::new())
    }

    pub fn get(&self, s: &Symbol) -> Result<f64> {
        self.0
            .get(s)
            .copied()
            .ok_or_else(|| Error::Unbound(s.name()))
    }

    pub fn try_get(&self, s: &Symbol) -> Option<f64> {
        self.0.get(s).copied()
    }

    pub fn set(&mut self, s: Symbol, v: f64) -> &mut Self {
        self.0.insert(s, v);
        self
    }

    pub fn with(mut self, s: Symbol, v: f64) -> Self {
        self.0.insert(s, v);
        self
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.0.contains_key(s)
    }

    pub fn remove(&mut self, s: &Symbol) -> Option<f64> {
        self.0.remove(s)
    }

    pub fn extend(&mut self, other: &Binding) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), *v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &f64)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Values of `syms` in order.
    pub fn values_of(&self, syms: &[Symbol]) -> Result<Vec<f64>> {
        syms.iter().map(|s| self.get(s)).collect()
    }
}

impl FromIterator<(Symbol, f64)> for Binding {
    fn from_iter<I: IntoIterator<Item = (Symbol, f64)>>(iter: I) -> Self {
        Binding(iter.into_iter().collect())
    }
}

fn checked(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} is not finite")))
    }
}

fn apply_func(f: Func, x: f64) -> Result<f64> {
    if f == Func::Ln && x <= 0.0 {
        return Err(Error::Domain(format!("ln of non-positive value {x}")));
    }
    checked(f.apply(x), f.name())
}

fn apply_pow(b: f64, e: f64, integral: Option<i32>) -> Result<f64> {
    match integral {
        Some(k) => {
            if b == 0.0 && k < 0 {
                return Err(Error::Domain("division by zero".into()));
            }
            checked(b.powi(k), "power")
        }
        None => {
            if b < 0.0 {
                return Err(Error::Domain(format!(
                    "fractional power of negative value {b}"
                )));
            }
            if b == 0.0 && e < 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            if e == 0.5 {
                Ok(b.sqrt())
            } else {
                checked(b.powf(e), "power")
            }
        }
    }
}

/// Evaluate under a binding. Fails on unbound symbols and domain violations.
pub fn eval(e: &Expr, b: &Binding) -> Result<f64> {
    let v = match e.node() {
        Node::Num(n) => n.to_f64(),
        Node::Sym(s) => b.get(s)?,
        Node::Sum(v) => {
            let mut acc = 0.0;
            for t in v {
                acc += eval(t, b)?;
            }
            acc
        }
        Node::Product(v) => {
            let mut acc = 1.0;
            for t in v {
                acc *= eval(t, b)?;
            }
            acc
        }
        Node::Pow(base, n) => {
            let k = n.as_integer().and_then(|k| i32::try_from(k).ok());
            apply_pow(eval(base, b)?, n.to_f64(), k)?
        }
        Node::Func(f, a) => apply_func(*f, eval(a, b)?)?,
    };
    checked(v, "expression")
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Load(usize),
    Add(usize),
    Mul(usize),
    Pow(f64, Option<i32>),
    Func(Func),
}

/// A list of expressions compiled against a fixed slot layout.
///
/// Symbols not in the slot list are inlined from the constant binding given
/// at compile time; anything else is an unbound-symbol error.
#[derive(Clone, Debug)]
pub struct Compiled {
    programs: Vec<Vec<Op>>,
    slots: Vec<Symbol>,
}

impl Compiled {
    pub fn new(exprs: &[Expr], slots: &[Symbol], constants: &Binding) -> Result<Self> {
        let index: BTreeMap<&Symbol, usize> =
            slots.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut programs = Vec::with_capacity(exprs.len());
        for e in exprs {
            let mut code = Vec::new();
            emit(e, &index, constants, &mut code)?;
            programs.push(code);
        }
        Ok(Compiled {
            programs,
            slots: slots.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn slots(&self) -> &[Symbol] {
        &self.slots
    }

    /// Evaluate every expression at the slot values `x`, writing into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut stack = Vec::with_capacity(16);
        for (prog, o) in self.programs.iter().zip(out.iter_mut()) {
            *o = run(prog, x, &mut stack)?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.programs.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    pub fn eval_one(&self, i: usize, x: &[f64]) -> Result<f64> {
        let mut stack = Vec::with_capacity(16);
        run(&self.programs[i], x, &mut stack)
    }
}

fn emit(
    e: &Expr,
    index: &BTreeMap<&Symbol, usize>,
    constants: &Binding,
    code: &mut Vec<Op>,
) -> Result<()> {
    match e.node() {
        Node::Num(n) => code.push(Op::Const(n.to_f64())),
        Node::Sym(s) => match index.get(s) {
            Some(&i) => code.push(Op::Load(i)),
            None => code.push(Op::Const(constants.get(s)?)),
        },
        Node::Sum(v) => {
            for t in v {
                emit(t, index, constants, code)?;
            }
            code.push(Op::Add(v.len()));
        }
        Node::Product(v) => {
            for t in v {
                emit(t, index, constants, code)?;
            }
            code.push(Op::Mul(v.len()));
        }
        Node::Pow(b, n) => {
            emit(b, index, constants, code)?;
            let k = n.as_integer().and_then(|k| i32::try_from(k).ok());
            code.push(Op::Pow(n.to_f64(), k));
        }
        Node::Func(f, a) => {
            emit(a, index, constants, code)?;
            code.push(Op::Func(*f));
        }
    }
    Ok(())
}

fn run(prog: &[Op], x: &[f64], stack: &mut Vec<f64>) -> Result<f64> {
    stack.clear();
    for op in prog {
        match op {
            Op::Const(c) => stack.push(*c),
            Op::Load(i) => stack.push(x[*i]),
            Op::Add(n) => {
                let at = stack.len() - n;
                let s: f64 = stack[at..].iter().sum();
                stack.truncate(at);
                stack.push(s);
            }
            Op::Mul(n) => {
                let at = stack.len() - n;
                let p: f64 = stack[at..].iter().product();
                stack.truncate(at);
                stack.push(p);
            }
            Op::Pow(e, k) => {
                let b = stack.pop().unwrap();
                stack.push(apply_pow(b, *e, *k)?);
            }
            Op::Func(f) => {
                let a = stack.pop().unwrap();
                stack.push(apply_func(*f, a)?);
            }
        }
    }
    checked(stack.pop().unwrap_or(0.0), "expression")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::parse;

    #[test]
    fn evaluates_with_binding() {
        let e = parse("mu*q1_2^2/2 + rho*q1_0").unwrap();
        let b = Binding::new()
            .with(Symbol::param("mu"), 2.0)
            .with(Symbol::param("rho"), 3.0)
            .with(Symbol::q(1, 2), 1.5)
            .with(Symbol::q(1, 0), -1.0);
        assert_eq!(eval(&e, &b).unwrap(), 2.0 * 2.25 / 2.0 - 3.0);
    }

    #[test]
    fn unbound_is_an_error() {
        let e = parse("q1_0 + mu").unwrap();
        let b = Binding::new().with(Symbol::q(1, 0), 1.0);
        assert_eq!(eval(&e, &b), Err(Error::Unbound("mu".into())));
    }

    #[test]
    fn domain_errors() {
        let b = Binding::new().with(Symbol::q(1, 0), -1.0);
        assert!(matches!(
            eval(&parse("sqrt(q1_0)").unwrap(), &b),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval(&parse("ln(q1_0)").unwrap(), &b),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            eval(&parse("1/(q1_0+1)").unwrap(), &b),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn compiled_matches_tree_walk() {
        let e = parse("sin(q1_0)*exp(q1_1)/(1 + q1_0^2) - sqrt(q1_1 + 3)*mu").unwrap();
        let slots = [Symbol::q(1, 0), Symbol::q(1, 1)];
        let consts = Binding::new().with(Symbol::param("mu"), 0.7);
        let c = Compiled::new(std::slice::from_ref(&e), &slots, &consts).unwrap();
        let x = [0.3, -0.4];
        let mut b = consts.clone();
        b.set(slots[0].clone(), x[0]).set(slots[1].clone(), x[1]);
        assert_eq!(c.eval(&x).unwrap()[0], eval(&e, &b).unwrap());
    }
}
