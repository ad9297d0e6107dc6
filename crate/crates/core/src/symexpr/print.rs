//! Canonical text rendering. Output always re-parses to an eval-equal tree.

use super::expr::{Expr, Node};
use super::number::Number;
use std::fmt;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn wrap((s, prec): (String, u8), needed: u8) -> String {
    if prec < needed {
        format!("({s})")
    } else {
        s
    }
}

fn number(n: Number) -> (String, u8) {
    let s = n.to_string();
    let prec = if n.is_negative() {
        UNARY
    } else if s.contains('/') {
        PRODUCT
    } else {
        ATOM
    };
    (s, prec)
}

fn render(e: &Expr) -> (String, u8) {
    match e.node() {
        Node::Num(n) => number(*n),
        Node::Sym(s) => (s.name(), ATOM),
        Node::Sum(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                let (c, rest) = t.split_coefficient();
                if i > 0 && c.is_negative() {
                    let positive = product(c.neg(), &factors_of(&rest));
                    out.push_str(" - ");
                    out.push_str(&wrap(positive, PRODUCT));
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push_str(&wrap(render(t), PRODUCT.min(UNARY)));
                }
            }
            (out, SUM)
        }
        Node::Product(fs) => {
            let mut coeff = Number::ONE;
            let mut rest = Vec::new();
            for f in fs {
                match f.as_number() {
                    Some(n) => coeff = coeff.mul(n),
                    None => rest.push(f.clone()),
                }
            }
            product(coeff, &rest)
        }
        Node::Pow(b, n) => {
            if n.is_negative() {
                return product(Number::ONE, std::slice::from_ref(e));
            }
            power(b, *n)
        }
        Node::Func(f, a) => (format!("{}({})", f.name(), render(a).0), ATOM),
    }
}

fn factors_of(e: &Expr) -> Vec<Expr> {
    match e.node() {
        Node::Product(fs) => fs.clone(),
        _ if e.is_one() => vec![],
        _ => vec![e.clone()],
    }
}

fn power(b: &Expr, n: Number) -> (String, u8) {
    if n == Number::ratio(1, 2) {
        return (format!("sqrt({})", render(b).0), ATOM);
    }
    let base = wrap(render(b), ATOM);
    match n.as_integer() {
        Some(k) if k >= 0 => (format!("{base}^{k}"), POWER),
        _ => (format!("{base}^({n})"), POWER),
    }
}

fn product(coeff: Number, factors: &[Expr]) -> (String, u8) {
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    match coeff.abs() {
        Number::Rat(r) => {
            if *r.numer() != 1 {
                num.push(r.numer().to_string());
            }
            if *r.denom() != 1 {
                den.push(r.denom().to_string());
            }
        }
        f @ Number::Float(_) => {
            if !f.is_one() {
                num.push(f.to_string());
            }
        }
    }
    // Constant factors such as sqrt(2) lead, then momenta, so pairings read `p1_1*q1_2`.
    let rank = |f: &Expr| {
        let syms = f.free_symbols();
        if syms.is_empty() {
            0
        } else if syms.iter().all(|s| s.kind().is_momentum()) {
            1
        } else {
            2
        }
    };
    let mut ordered: Vec<&Expr> = factors.iter().collect();
    ordered.sort_by_key(|f| rank(f));
    for f in ordered {
        match f.node() {
            Node::Num(n) => num.push(wrap(number(n.abs()), POWER)),
            Node::Pow(b, n) if n.is_negative() => {
                let inv = n.neg();
                let s = if inv.is_one() {
                    render(b)
                } else {
                    power(b, inv)
                };
                den.push(wrap(s, POWER));
            }
            _ => num.push(wrap(render(f), POWER)),
        }
    }
    let mut s = if num.is_empty() {
        "1".to_string()
    } else {
        num.join("*")
    };
    match den.len() {
        0 => {}
        1 => {
            s.push('/');
            s.push_str(&den[0]);
        }
        _ => {
            s.push_str("/(");
            s.push_str(&den.join("*"));
            s.push(')');
        }
    }
    let single_atom = den.is_empty() && num.len() == 1;
    let mut prec = if single_atom && !s.contains(['*', '/', '^']) {
        ATOM
    } else if single_atom && factors.len() == 1 && matches!(factors[0].node(), Node::Pow(..)) {
        POWER
    } else {
        PRODUCT
    };
    if coeff.is_negative() {
        s.insert(0, '-');
        prec = UNARY;
    }
    (s, prec)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use crate::symexpr::{parse, simplify};

    fn canon(s: &str) -> String {
        simplify(&parse(s).unwrap()).to_string()
    }

    #[test]
    fn renders_canonical_forms() {
        assert_eq!(canon("q1_2^2/2"), "q1_2^2/2");
        assert_eq!(canon("p1_1 - mu*q1_2"), "p1_1 - mu*q1_2");
        assert_eq!(canon("-q1_0"), "-q1_0");
        assert_eq!(canon("sqrt(2)*q1_0"), "sqrt(2)*q1_0");
        assert_eq!(canon("1/(mu*q1_0)"), "1/(mu*q1_0)");
        assert_eq!(canon("(q1_0 + 1)^(-1)"), "1/(q1_0 + 1)");
        assert_eq!(canon("q1_0^(3/2)"), "q1_0^(3/2)");
        assert_eq!(canon("3/4"), "3/4");
        assert_eq!(canon("-(3/4)*q1_0"), "-3*q1_0/4");
    }

    #[test]
    fn reparses_to_same_tree() {
        for s in [
            "p1_0*q1_1 + p1_1*q1_2 - mu*q1_2^2/2 - rho*q1_0",
            "sin(q1_0)^2 + cos(q1_0 - 1)",
            "exp(-q1_0)/(2*mu)",
            "sqrt(q1_1 - q1_1^2/2)*sqrt(2)",
            "0.1*q1_0 - 2.5e-3",
            "(q1_0 + q2_0)^(-1/2)",
        ] {
            let e = simplify(&parse(s).unwrap());
            let again = simplify(&parse(&e.to_string()).unwrap());
            assert_eq!(e, again, "{s} -> {e}");
        }
    }
}
