//! Lagrangians affine in the top derivative, `L = f_A q{A}_k + g`.
//!
//! Second order: `f(q_0, q_1)`, `g(q_0, q_1)`. Third order: `f(q_1, q_2)`,
//! `g(q_0, q_1)`.

use super::{CheckOptions, ClosedOneForm, ResidualReport};
use crate::charts::ChartSpec;
use crate::error::{Error, Result};
use crate::ostro::LagrangianSpec;
use crate::symexpr::{diff, eval, simplify, Expr, Kind, Node, Number, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffineOrder {
    Second,
    Third,
}

impl AffineOrder {
    pub fn k(self) -> u32 {
        match self {
            AffineOrder::Second => 2,
            AffineOrder::Third => 3,
        }
    }
}

fn q(a: usize, l: u32) -> Symbol {
    Symbol::q(a as u32 + 1, l)
}

fn sample(
    name: &str,
    labels: Vec<String>,
    exprs: Vec<Expr>,
    opts: &CheckOptions,
) -> Result<ResidualReport> {
    let exprs: Vec<Expr> = exprs.iter().map(simplify).collect();
    let points = opts.region.sample(&exprs, opts.points, &mut opts.rng())?;
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|b| exprs.iter().map(|e| eval(e, b)).collect())
        .collect::<Result<_>>()?;
    Ok(ResidualReport::from_values(
        name, labels, exprs, &values, opts.tol,
    ))
}

/// `L = sum_A f_A q{A}_k + g`.
pub fn affine_lagrangian(f: &[Expr], g: &Expr, order: AffineOrder) -> Result<LagrangianSpec> {
    let k = order.k();
    let mut terms: Vec<Expr> = f
        .iter()
        .enumerate()
        .map(|(a, fa)| fa.clone() * Expr::sym(q(a, k)))
        .collect();
    terms.push(g.clone());
    LagrangianSpec::new(f.len() as u32, k, Expr::add(terms))
}

/// `d f_A / d q{B}_s - d f_B / d q{A}_s` for `A < B`, with `s = k - 1`.
pub fn affine_symmetry_check(
    f: &[Expr],
    order: AffineOrder,
    opts: &CheckOptions,
) -> Result<ResidualReport> {
    let s = order.k() - 1;
    let n = f.len();
    let mut labels = Vec::new();
    let mut exprs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            labels.push(format!(
                "df{}/d{} - df{}/d{}",
                a + 1,
                q(b, s),
                b + 1,
                q(a, s)
            ));
            exprs.push(diff(&f[a], &q(b, s)) - diff(&f[b], &q(a, s)));
        }
    }
    sample("affine-symmetry", labels, exprs, opts)
}

/// Criterion expressions, one per component `B`.
///
/// Second order:
/// `sum_A g_{q1A q0B} q1A - sum_{A,C} f_{A, q0B q0C} q1A q1C - g_{q0B}`.
/// Third order: `sum_A g_{q1A q0B} q1A - g_{q0B}`.
pub fn affine_integrability_check(
    f: &[Expr],
    g: &Expr,
    order: AffineOrder,
    opts: &CheckOptions,
) -> Result<ResidualReport> {
    let n = f.len();
    let mut labels = Vec::new();
    let mut exprs = Vec::new();
    for b in 0..n {
        let g_q0b = diff(g, &q(b, 0));
        let mut terms = vec![-g_q0b.clone()];
        for a in 0..n {
            terms.push(diff(&g_q0b, &q(a, 1)) * Expr::sym(q(a, 1)));
        }
        if order == AffineOrder::Second {
            for a in 0..n {
                let fab = diff(&f[a], &q(b, 0));
                for c in 0..n {
                    terms.push(-(diff(&fab, &q(c, 0)) * Expr::sym(q(a, 1)) * Expr::sym(q(c, 1))));
                }
            }
        }
        labels.push(format!("criterion {}", b + 1));
        exprs.push(Expr::add(terms));
    }
    sample("affine-integrability", labels, exprs, opts)
}

/// Candidate components of `gamma`, level-major (unchecked).
///
/// Second order: `gamma_0B = g_{q1B} - sum_A f_{B,q0A} q1A`, `gamma_1 = f`.
/// Third order: `gamma_2 = f`, `gamma_1B = -sum_C f_{B,q1C} q2C`,
/// `gamma_0B = g_{q1B} + sum_{A,C} f_{B,q1A q1C} q2A q2C`.
pub fn affine_gamma_components(f: &[Expr], g: &Expr, order: AffineOrder) -> Vec<Expr> {
    let n = f.len();
    let mut out = Vec::new();
    match order {
        AffineOrder::Second => {
            for b in 0..n {
                let mut t = vec![diff(g, &q(b, 1))];
                for a in 0..n {
                    t.push(-(diff(&f[b], &q(a, 0)) * Expr::sym(q(a, 1))));
                }
                out.push(simplify(&Expr::add(t)));
            }
            out.extend(f.iter().map(simplify));
        }
        AffineOrder::Third => {
            for b in 0..n {
                let mut t = vec![diff(g, &q(b, 1))];
                for a in 0..n {
                    let fba = diff(&f[b], &q(a, 1));
                    for c in 0..n {
                        t.push(diff(&fba, &q(c, 1)) * Expr::sym(q(a, 2)) * Expr::sym(q(c, 2)));
                    }
                }
                out.push(simplify(&Expr::add(t)));
            }
            for b in 0..n {
                let t = (0..n).map(|c| -(diff(&f[b], &q(c, 1)) * Expr::sym(q(c, 2))));
                out.push(simplify(&Expr::add(t)));
            }
            out.extend(f.iter().map(simplify));
        }
    }
    out
}

/// Build `gamma` from the affine data and verify closure. The symmetry and
/// integrability checks must pass first (`Incompatible` otherwise). When the
/// components are polynomial, the potential is recovered by line integration
/// from the origin.
pub fn affine_hj_solve(
    f: &[Expr],
    g: &Expr,
    order: AffineOrder,
    opts: &CheckOptions,
) -> Result<ClosedOneForm> {
    if f.is_empty() {
        return Err(Error::Precondition(
            "f must have at least one component".into(),
        ));
    }
    check_template(f, g, order)?;
    for r in [
        affine_symmetry_check(f, order, opts)?,
        affine_integrability_check(f, g, order, opts)?,
    ] {
        if !r.pass {
            return Err(Error::Incompatible(format!(
                "{} check fails with sup {:e}",
                r.system, r.sup
            )));
        }
    }
    let chart = ChartSpec::cot_tk1(f.len() as u32, order.k());
    let comps = affine_gamma_components(f, g, order);
    let mut form = ClosedOneForm::from_components_in(chart, comps, &opts.region)?;
    form.potential = line_integral_potential(&form.positions, &form.components);
    Ok(form)
}

/// Second order: `f, g` over `q_0, q_1`. Third order: `f` over `q_1, q_2`,
/// `g` over `q_0, q_1`.
fn check_template(f: &[Expr], g: &Expr, order: AffineOrder) -> Result<()> {
    let n = f.len() as u32;
    let f_levels: &[u32] = match order {
        AffineOrder::Second => &[0, 1],
        AffineOrder::Third => &[1, 2],
    };
    let allowed = |levels: &[u32], s: &Symbol| {
        s.is_param() || (s.kind() == Kind::Q && s.component() <= n && levels.contains(&s.level()))
    };
    let exprs = f
        .iter()
        .map(|e| (e, f_levels))
        .chain(std::iter::once((g, &[0u32, 1][..])));
    for (e, levels) in exprs {
        if let Some(s) = e.free_symbols().into_iter().find(|s| !allowed(levels, s)) {
            return Err(Error::Precondition(format!(
                "`{s}` is outside the affine template"
            )));
        }
    }
    Ok(())
}

fn monomial_degree(e: &Expr, coords: &[Symbol]) -> Option<u32> {
    let factor = |f: &Expr| -> Option<u32> {
        match f.node() {
            Node::Num(_) => Some(0),
            Node::Sym(s) if coords.contains(s) => Some(1),
            Node::Sym(_) => Some(0),
            Node::Pow(b, n) => {
                let k = n.as_integer()?;
                match b.node() {
                    Node::Sym(s) if coords.contains(s) && k >= 0 => Some(k as u32),
                    _ if b.free_symbols().iter().all(|s| !coords.contains(s)) => Some(0),
                    _ => None,
                }
            }
            _ if f.free_symbols().iter().all(|s| !coords.contains(s)) => Some(0),
            _ => None,
        }
    };
    match e.node() {
        Node::Product(fs) => fs.iter().map(factor).sum(),
        _ => factor(e),
    }
}

/// `W(x) = int_0^1 sum_i gamma_i(t x) x_i dt` for components polynomial in the
/// coordinates: each monomial of `sum_i gamma_i x_i` of degree `d` contributes
/// itself divided by `d`. `None` for non-polynomial components.
pub fn line_integral_potential(coords: &[Symbol], comps: &[Expr]) -> Option<Expr> {
    let pairing = simplify(&Expr::add(
        comps
            .iter()
            .zip(coords)
            .map(|(c, x)| c.clone() * Expr::sym(x.clone())),
    ));
    let mut terms = Vec::new();
    for t in pairing.terms() {
        let d = monomial_degree(&t, coords)?;
        if d == 0 {
            return None;
        }
        terms.push(t * Expr::num(Number::ratio(1, d as i64)));
    }
    Some(simplify(&Expr::add(terms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamjac::hj_residual;
    use crate::ostro::ostro_energy;
    use crate::symexpr::{equal_numeric, parse_simplified};

    fn p(s: &str) -> Expr {
        parse_simplified(s).unwrap()
    }

    #[test]
    fn symmetry() {
        let opts = CheckOptions::default().with_region(
            crate::symexpr::SampleBox::uniform(-1.0, 1.0).with_fixed(Symbol::param("lam"), 1.0),
        );
        let chiral = [p("-lam*q2_1"), p("lam*q1_1")];
        assert!(
            !affine_symmetry_check(&chiral, AffineOrder::Second, &opts)
                .unwrap()
                .pass
        );
        let g = p("q1_1^2*q2_1 + q1_0*q2_1");
        let grad = [diff(&g, &Symbol::q(1, 1)), diff(&g, &Symbol::q(2, 1))];
        assert!(
            affine_symmetry_check(&grad, AffineOrder::Second, &opts)
                .unwrap()
                .pass
        );
        assert!(
            affine_symmetry_check(&[p("2"), p("3")], AffineOrder::Second, &opts)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn integrability_cases() {
        let opts = CheckOptions::default();
        let r = affine_integrability_check(&[p("0")], &p("q1_0^2"), AffineOrder::Second, &opts)
            .unwrap();
        assert!(!r.pass);
        assert_eq!(r.expressions, vec![p("-2*q1_0")]);
        assert!(
            affine_integrability_check(&[p("0")], &p("5"), AffineOrder::Second, &opts)
                .unwrap()
                .pass
        );
        let r = affine_integrability_check(
            &[p("1"), p("2")],
            &p("(q1_1^2 + q2_1^2)/2"),
            AffineOrder::Second,
            &opts,
        )
        .unwrap();
        assert!(r.pass && r.expressions.iter().all(Expr::is_zero));
    }

    #[test]
    fn constant_f_solution() {
        let gamma = affine_hj_solve(
            &[p("c")],
            &p("0"),
            AffineOrder::Second,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(gamma.components, vec![p("0"), p("c")]);
        assert_eq!(gamma.potential, Some(p("c*q1_1")));
        let zero = affine_hj_solve(
            &[p("0")],
            &p("0"),
            AffineOrder::Second,
            &CheckOptions::default(),
        )
        .unwrap();
        assert!(zero.components.iter().all(Expr::is_zero));
    }

    #[test]
    fn nonlinear_g_is_not_closed() {
        let err = affine_hj_solve(
            &[p("0")],
            &p("q1_1^3"),
            AffineOrder::Second,
            &CheckOptions::default(),
        );
        assert!(matches!(err, Err(Error::NotClosed { .. })));
        let err = affine_hj_solve(
            &[p("0")],
            &p("q1_0^2"),
            AffineOrder::Second,
            &CheckOptions::default(),
        );
        assert!(matches!(err, Err(Error::Incompatible(_))));
    }

    #[test]
    fn null_lagrangian_round_trip() {
        let w = p("q1_0^2*q1_1 + q1_1^3/3 + q2_0*q1_1 + q2_1*q2_0^2");
        let f: Vec<Expr> = (1..=2).map(|a| diff(&w, &Symbol::q(a, 1))).collect();
        let g = Expr::add((1..=2).map(|a| diff(&w, &Symbol::q(a, 0)) * Expr::sym(Symbol::q(a, 1))));
        let opts = CheckOptions::default();
        let gamma = affine_hj_solve(&f, &g, AffineOrder::Second, &opts).unwrap();
        let pot = gamma.potential.clone().unwrap();
        assert!(equal_numeric(&pot, &w, 20, 1e-12).unwrap(), "{pot}");
        let mf = ostro_energy(&affine_lagrangian(&f, &g, AffineOrder::Second).unwrap());
        assert!(hj_residual(&mf, &gamma, &opts).unwrap().pass);
    }

    #[test]
    fn third_order_null_lagrangian() {
        // f depending on q2 alone: L is the time derivative of a function of q2.
        let f = [p("q1_2^2")];
        let g = p("0");
        let opts = CheckOptions::default();
        let gamma = affine_hj_solve(&f, &g, AffineOrder::Third, &opts).unwrap();
        let mf = ostro_energy(&affine_lagrangian(&f, &g, AffineOrder::Third).unwrap());
        assert!(hj_residual(&mf, &gamma, &opts).unwrap().pass);
    }
}
