//! Partial and total time derivatives.

use super::expr::{simplify, Expr, Func, Node};
use super::number::Number;
use super::symbol::Symbol;
use crate::error::{Error, Result};

/// Exact partial derivative `de/ds`, simplified.
pub fn diff(e: &Expr, s: &Symbol) -> Expr {
    simplify(&diff_raw(e, s))
}

fn diff_raw(e: &Expr, s: &Symbol) -> Expr {
    if !e.contains(s) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(t) => {
            if t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(v) => Expr::add(v.iter().map(|t| diff_raw(t, s))),
        Node::Product(v) => {
            let mut terms = Vec::new();
            for (i, f) in v.iter().enumerate() {
                let df = diff_raw(f, s);
                if df.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = v.clone();
                fs[i] = df;
                terms.push(Expr::mul(fs));
            }
            Expr::add(terms)
        }
        Node::Pow(b, n) => Expr::mul([
            Expr::num(*n),
            Expr::pow(b.clone(), n.sub(Number::ONE)),
            diff_raw(b, s),
        ]),
        Node::Func(f, a) => {
            let outer = match f {
                Func::Sin => Expr::func(Func::Cos, a.clone()),
                Func::Cos => -Expr::func(Func::Sin, a.clone()),
                Func::Exp => e.clone(),
                Func::Ln => a.clone().recip(),
            };
            Expr::mul([outer, diff_raw(a, s)])
        }
    }
}

/// Total time derivative along the jet prolongation:
/// `sum_s de/ds * shift(s)` over the jet symbols of `e`.
///
/// Parameters are constants. Momenta, fibers and multipliers have no
/// time prolongation and are rejected.
pub fn total_time_derivative(e: &Expr, max_order: u32) -> Result<Expr> {
    let mut terms = Vec::new();
    for s in e.free_symbols() {
        if s.is_param() {
            continue;
        }
        if !s.kind().is_jet() {
            return Err(Error::NotJet(s.name()));
        }
        if s.level() >= max_order {
            return Err(Error::LevelOverflow {
                symbol: s.name(),
                max_order,
            });
        }
        let shifted = s.shifted().expect("jet symbol");
        terms.push(Expr::mul([diff_raw(e, &s), Expr::sym(shifted)]));
    }
    Ok(simplify(&Expr::add(terms)))
}

/// `times`-fold total time derivative.
pub fn total_time_derivative_n(e: &Expr, times: u32, max_order: u32) -> Result<Expr> {
    let mut cur = e.clone();
    for _ in 0..times {
        cur = total_time_derivative(&cur, max_order)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        crate::symexpr::parse_simplified(s).unwrap()
    }

    #[test]
    fn product_rule() {
        assert_eq!(diff(&p("q1_1*q1_2"), &Symbol::q(1, 2)), p("q1_1"));
    }

    #[test]
    fn beam_top_momentum() {
        let d = diff(&p("mu*q1_2^2/2 + rho*q1_0"), &Symbol::q(1, 2));
        assert_eq!(d, p("mu*q1_2"));
    }

    #[test]
    fn absent_symbol_gives_zero() {
        assert!(diff(&p("sin(q1_0)"), &Symbol::q(1, 1)).is_zero());
    }

    #[test]
    fn chain_rule_through_functions() {
        let d = diff(&p("ln(q1_0^2 + 1)"), &Symbol::q(1, 0));
        assert_eq!(d, p("2*q1_0/(q1_0^2 + 1)"));
    }

    #[test]
    fn time_derivative_of_position() {
        assert_eq!(total_time_derivative(&p("q1_0"), 4).unwrap(), p("q1_1"));
    }

    #[test]
    fn second_time_derivative_of_square() {
        let d2 = total_time_derivative_n(&p("q1_0^2"), 2, 4).unwrap();
        assert_eq!(d2, p("2*q1_1^2 + 2*q1_0*q1_2"));
    }

    #[test]
    fn level_overflow_is_reported() {
        let err = total_time_derivative(&p("q1_2"), 2).unwrap_err();
        assert!(matches!(err, Error::LevelOverflow { max_order: 2, .. }));
    }

    #[test]
    fn momenta_are_not_prolonged() {
        assert!(matches!(
            total_time_derivative(&p("p1_0"), 4),
            Err(Error::NotJet(_))
        ));
    }
}
