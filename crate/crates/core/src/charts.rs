//! Coordinate charts on the jet, tangent and cotangent bundles, and the
//! canonical maps between them.
//!
//! Rosters are level-major: all components at level 0, then level 1, and so
//! on. Charts carry a structural tag so that feeding a point to the wrong map
//! is detected rather than silently relabelled.

use crate::error::{Error, Result};
use crate::symexpr::{Binding, Expr, Symbol};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ChartKind {
    /// `T^k Q`: `q_0 .. q_k`.
    Tk,
    /// `T T^{k-1} Q`: `q_0 .. q_{k-1}; dq_0 .. dq_{k-1}`.
    TTk1,
    /// `T* T^{k-1} Q`: `q_0 .. q_{k-1}; p_0 .. p_{k-1}`.
    CotTk1,
    /// `T T* T^{k-1} Q`: `q, p, dq, dp`.
    TCotTk1,
    /// `T* T* T^{k-1} Q`: `q, p` with momenta stored in the `dp` and `dq` slots.
    CotCotTk1,
    /// `T* T T^{k-1} Q`: `q, dq` with momenta stored in the `dp` and `p` slots.
    CotTTk1,
    /// Whitney sum `T^k Q x T* T^{k-1} Q`: `q_0 .. q_k; p_0 .. p_{k-1}`.
    Whitney,
    /// Acceleration bundle `AQ`: `q_0, a_0`.
    Aq,
    /// `T AQ`: `q_0, a_0; q_1, a_1`.
    TAq,
    /// `T* AQ`: `q_0, a_0; pq, pa`.
    CotAq,
    /// `AQ x M`: `q_0, a_0, m_0`.
    AqM,
    /// `T (AQ x M)`: `q_0, a_0, m_0; q_1, a_1, m_1`.
    TAqM,
    /// `T* (AQ x M)`: `q_0, a_0, m_0; pq, pa, pm`.
    CotAqM,
}

/// A chart: structural tag, configuration dimension `n`, order `k`, roster.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub dim: u32,
    pub order: u32,
    pub roster: Vec<Symbol>,
}

fn level_major(
    n: u32,
    levels: std::ops::Range<u32>,
    f: impl Fn(u32, u32) -> Symbol,
) -> Vec<Symbol> {
    levels
        .flat_map(|l| (1..=n).map(move |a| (a, l)))
        .map(|(a, l)| f(a, l))
        .collect()
}

fn per_component(n: u32, f: impl Fn(u32) -> Symbol) -> Vec<Symbol> {
    (1..=n).map(f).collect()
}

impl ChartSpec {
    fn build(kind: ChartKind, dim: u32, order: u32, roster: Vec<Symbol>) -> Self {
        assert!(dim >= 1, "chart dimension must be at least 1");
        ChartSpec {
            kind,
            dim,
            order,
            roster,
        }
    }

    pub fn tk(n: u32, k: u32) -> Self {
        Self::build(ChartKind::Tk, n, k, level_major(n, 0..k + 1, Symbol::q))
    }

    pub fn ttk1(n: u32, k: u32) -> Self {
        let mut r = level_major(n, 0..k, Symbol::q);
        r.extend(level_major(n, 0..k, Symbol::dq));
        Self::build(ChartKind::TTk1, n, k, r)
    }

    pub fn cot_tk1(n: u32, k: u32) -> Self {
        let mut r = level_major(n, 0..k, Symbol::q);
        r.extend(level_major(n, 0..k, Symbol::p));
        Self::build(ChartKind::CotTk1, n, k, r)
    }

    pub fn t_cot_tk1(n: u32, k: u32) -> Self {
        let mut r = Self::cot_tk1(n, k).roster;
        r.extend(level_major(n, 0..k, Symbol::dq));
        r.extend(level_major(n, 0..k, Symbol::dp));
        Self::build(ChartKind::TCotTk1, n, k, r)
    }

    pub fn cot_cot_tk1(n: u32, k: u32) -> Self {
        let mut r = Self::cot_tk1(n, k).roster;
        r.extend(level_major(n, 0..k, Symbol::dp));
        r.extend(level_major(n, 0..k, Symbol::dq));
        Self::build(ChartKind::CotCotTk1, n, k, r)
    }

    pub fn cot_ttk1(n: u32, k: u32) -> Self {
        let mut r = level_major(n, 0..k, Symbol::q);
        r.extend(level_major(n, 0..k, Symbol::dq));
        r.extend(level_major(n, 0..k, Symbol::dp));
        r.extend(level_major(n, 0..k, Symbol::p));
        Self::build(ChartKind::CotTTk1, n, k, r)
    }

    pub fn whitney(n: u32, k: u32) -> Self {
        let mut r = level_major(n, 0..k + 1, Symbol::q);
        r.extend(level_major(n, 0..k, Symbol::p));
        Self::build(ChartKind::Whitney, n, k, r)
    }

    pub fn aq(n: u32) -> Self {
        let mut r = per_component(n, |a| Symbol::q(a, 0));
        r.extend(per_component(n, |a| Symbol::a(a, 0)));
        Self::build(ChartKind::Aq, n, 2, r)
    }

    pub fn t_aq(n: u32) -> Self {
        let mut r = Self::aq(n).roster;
        r.extend(per_component(n, |a| Symbol::q(a, 1)));
        r.extend(per_component(n, |a| Symbol::a(a, 1)));
        Self::build(ChartKind::TAq, n, 2, r)
    }

    pub fn cot_aq(n: u32) -> Self {
        let mut r = Self::aq(n).roster;
        r.extend(per_component(n, Symbol::pq));
        r.extend(per_component(n, Symbol::pa));
        Self::build(ChartKind::CotAq, n, 2, r)
    }

    pub fn aq_m(n: u32) -> Self {
        let mut r = Self::aq(n).roster;
        r.extend(per_component(n, |a| Symbol::m(a, 0)));
        Self::build(ChartKind::AqM, n, 2, r)
    }

    pub fn t_aq_m(n: u32) -> Self {
        let mut r = Self::aq_m(n).roster;
        r.extend(per_component(n, |a| Symbol::q(a, 1)));
        r.extend(per_component(n, |a| Symbol::a(a, 1)));
        r.extend(per_component(n, |a| Symbol::m(a, 1)));
        Self::build(ChartKind::TAqM, n, 2, r)
    }

    pub fn cot_aq_m(n: u32) -> Self {
        let mut r = Self::aq_m(n).roster;
        r.extend(per_component(n, Symbol::pq));
        r.extend(per_component(n, Symbol::pa));
        r.extend(per_component(n, Symbol::pm));
        Self::build(ChartKind::CotAqM, n, 2, r)
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }

    /// Position/momentum pairs of a cotangent-type chart, in roster order.
    pub fn cotangent_pairs(&self) -> Option<Vec<(Symbol, Symbol)>> {
        match self.kind {
            ChartKind::CotTk1 | ChartKind::CotAq | ChartKind::CotAqM => {
                let half = self.roster.len() / 2;
                Some(
                    self.roster[..half]
                        .iter()
                        .cloned()
                        .zip(self.roster[half..].iter().cloned())
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Configuration part of a cotangent-type chart.
    pub fn positions(&self) -> Vec<Symbol> {
        self.cotangent_pairs()
            .map(|v| v.into_iter().map(|(q, _)| q).collect())
            .unwrap_or_else(|| self.roster.clone())
    }

    /// Momentum part of a cotangent-type chart (empty otherwise).
    pub fn momenta(&self) -> Vec<Symbol> {
        self.cotangent_pairs()
            .map(|v| v.into_iter().map(|(_, p)| p).collect())
            .unwrap_or_default()
    }

    pub fn expect(&self, kind: ChartKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                expected: format!("{kind:?}"),
                found: self.to_string(),
            })
        }
    }
}

impl fmt::Display for ChartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}(n={}, k={})", self.kind, self.dim, self.order)
    }
}

/// A point given by its coordinate values in roster order.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub chart: ChartSpec,
    pub values: Vec<f64>,
}

impl Point {
    pub fn new(chart: ChartSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != chart.len() {
            return Err(Error::Arity {
                expected: chart.len(),
                found: values.len(),
            });
        }
        Ok(Point { chart, values })
    }

    /// Build from a binding, which must cover exactly the roster.
    pub fn from_binding(chart: ChartSpec, b: &Binding) -> Result<Self> {
        if b.len() != chart.len() {
            return Err(Error::Arity {
                expected: chart.len(),
                found: b.len(),
            });
        }
        let values = b.values_of(&chart.roster)?;
        Ok(Point { chart, values })
    }

    pub fn binding(&self) -> Binding {
        self.chart
            .roster
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }

    pub fn get(&self, s: &Symbol) -> Option<f64> {
        self.chart
            .roster
            .iter()
            .position(|r| r == s)
            .map(|i| self.values[i])
    }

    fn at(&self, s: Symbol) -> f64 {
        self.get(&s).expect("roster symbol")
    }
}

fn block(n: u32, k: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..k).flat_map(move |l| (1..=n).map(move |a| (a, l)))
}

/// `T^k Q -> T T^{k-1} Q`: `(q_0..q_k) -> (q_0..q_{k-1}; q_1..q_k)`.
pub fn iterated_tangent_embed(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::Tk)?;
    let (n, k) = (p.chart.dim, p.chart.order);
    let mut v: Vec<f64> = block(n, k).map(|(a, l)| p.at(Symbol::q(a, l))).collect();
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::q(a, l + 1))));
    Point::new(ChartSpec::ttk1(n, k), v)
}

/// `T T* T^{k-1} Q -> T* T* T^{k-1} Q`: `(q, p, dq, dp) -> (q, p, dp, -dq)`.
pub fn tulczyjew_flat(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::TCotTk1)?;
    let (n, k) = (p.chart.dim, p.chart.order);
    let mut v: Vec<f64> = block(n, k).map(|(a, l)| p.at(Symbol::q(a, l))).collect();
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::p(a, l))));
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::dp(a, l))));
    v.extend(block(n, k).map(|(a, l)| -p.at(Symbol::dq(a, l))));
    Point::new(ChartSpec::cot_cot_tk1(n, k), v)
}

pub fn tulczyjew_flat_inverse(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::CotCotTk1)?;
    let (n, k) = (p.chart.dim, p.chart.order);
    let mut v: Vec<f64> = block(n, k).map(|(a, l)| p.at(Symbol::q(a, l))).collect();
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::p(a, l))));
    v.extend(block(n, k).map(|(a, l)| -p.at(Symbol::dq(a, l))));
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::dp(a, l))));
    Point::new(ChartSpec::t_cot_tk1(n, k), v)
}

/// `T T* T^{k-1} Q -> T* T T^{k-1} Q`: `(q, p, dq, dp) -> (q, dq, dp, p)`.
pub fn tulczyjew_xi(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::TCotTk1)?;
    let (n, k) = (p.chart.dim, p.chart.order);
    let mut v: Vec<f64> = block(n, k).map(|(a, l)| p.at(Symbol::q(a, l))).collect();
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::dq(a, l))));
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::dp(a, l))));
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::p(a, l))));
    Point::new(ChartSpec::cot_ttk1(n, k), v)
}

pub fn tulczyjew_xi_inverse(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::CotTTk1)?;
    let (n, k) = (p.chart.dim, p.chart.order);
    let mut v: Vec<f64> = block(n, k).map(|(a, l)| p.at(Symbol::q(a, l))).collect();
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::p(a, l))));
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::dq(a, l))));
    v.extend(block(n, k).map(|(a, l)| p.at(Symbol::dp(a, l))));
    Point::new(ChartSpec::t_cot_tk1(n, k), v)
}

/// `T AQ -> T^3 Q`: `(q_0, a_0; q_1, a_1) -> (q_0, q_1, a_0, a_1)`.
pub fn acceleration_iso(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::TAq)?;
    let n = p.chart.dim;
    let comps = |f: &dyn Fn(u32) -> Symbol| (1..=n).map(|a| p.at(f(a))).collect::<Vec<_>>();
    let mut v = comps(&|a| Symbol::q(a, 0));
    v.extend(comps(&|a| Symbol::q(a, 1)));
    v.extend(comps(&|a| Symbol::a(a, 0)));
    v.extend(comps(&|a| Symbol::a(a, 1)));
    Point::new(ChartSpec::tk(n, 3), v)
}

pub fn acceleration_iso_inverse(p: &Point) -> Result<Point> {
    p.chart.expect(ChartKind::Tk)?;
    if p.chart.order != 3 {
        return Err(Error::ChartMismatch {
            expected: "Tk(k=3)".into(),
            found: p.chart.to_string(),
        });
    }
    let n = p.chart.dim;
    let comps = |l: u32| (1..=n).map(|a| p.at(Symbol::q(a, l))).collect::<Vec<_>>();
    let mut v = comps(0);
    v.extend(comps(2));
    v.extend(comps(1));
    v.extend(comps(3));
    Point::new(ChartSpec::t_aq(n), v)
}

/// Lifted two-form on `T T* T^{k-1} Q`,
/// `sum d(dp) ^ dq + dp ^ d(dq)`, evaluated on two tangent vectors given in roster order.
pub fn lifted_two_form(chart: &ChartSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    chart.expect(ChartKind::TCotTk1)?;
    let m = chart.len() / 4;
    let (q, p, dq, dp) = (0, m, 2 * m, 3 * m);
    let mut s = 0.0;
    for i in 0..m {
        s += u[dp + i] * v[q + i] - v[dp + i] * u[q + i];
        s += u[p + i] * v[dq + i] - v[p + i] * u[dq + i];
    }
    Ok(s)
}

/// Canonical two-form `sum d(xi) ^ dx` on a cotangent chart whose roster is
/// positions followed by momenta.
pub fn canonical_two_form(chart: &ChartSpec, u: &[f64], v: &[f64]) -> Result<f64> {
    match chart.kind {
        ChartKind::CotCotTk1 | ChartKind::CotTk1 | ChartKind::CotAq | ChartKind::CotAqM => {}
        _ => {
            return Err(Error::ChartMismatch {
                expected: "cotangent chart".into(),
                found: chart.to_string(),
            })
        }
    }
    let m = chart.len() / 2;
    Ok((0..m).map(|i| u[m + i] * v[i] - v[m + i] * u[i]).sum())
}

/// Coefficients of a type-1 semispray on `T^k Q`: the `d/dq_i` component is
/// `q_{i+1}` for `i < k` and `F` for `i = k`. Rows are in `T^k Q` roster order.
#[derive(Clone, Debug, PartialEq)]
pub struct Semispray {
    pub chart: ChartSpec,
    pub components: Vec<Expr>,
}

pub fn semispray_type1(f: &[Expr], n: u32, k: u32) -> Result<Semispray> {
    if f.len() != n as usize {
        return Err(Error::Arity {
            expected: n as usize,
            found: f.len(),
        });
    }
    for fa in f {
        for s in fa.free_symbols() {
            if s.is_param() {
                continue;
            }
            if s.kind() != crate::symexpr::Kind::Q || s.component() > n {
                return Err(Error::ChartMismatch {
                    expected: format!("symbols of T^{k}Q"),
                    found: s.name(),
                });
            }
            if s.level() > k {
                return Err(Error::LevelOverflow {
                    symbol: s.name(),
                    max_order: k,
                });
            }
        }
    }
    let chart = ChartSpec::tk(n, k);
    let mut components: Vec<Expr> = block(n, k)
        .map(|(a, l)| Expr::sym(Symbol::q(a, l + 1)))
        .collect();
    components.extend(f.iter().cloned());
    Ok(Semispray { chart, components })
}

impl Semispray {
    /// Evaluate the vector field at a point given in roster order.
    pub fn eval(&self, x: &[f64], params: &Binding) -> Result<Vec<f64>> {
        let c = crate::symexpr::Compiled::new(&self.components, &self.chart.roster, params)?;
        c.eval(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_second_order() {
        let p = Point::new(ChartSpec::tk(1, 2), vec![1.0, 2.0, 3.0]).unwrap();
        let e = iterated_tangent_embed(&p).unwrap();
        assert_eq!(e.chart.kind, ChartKind::TTk1);
        assert_eq!(e.values, vec![1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn embedding_first_order() {
        let p = Point::new(ChartSpec::tk(1, 1), vec![0.5, -1.5]).unwrap();
        assert_eq!(iterated_tangent_embed(&p).unwrap().values, vec![0.5, -1.5]);
    }

    #[test]
    fn flat_and_xi() {
        let c = ChartSpec::t_cot_tk1(1, 1);
        let p = Point::new(c.clone(), vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            tulczyjew_flat(&p).unwrap().values,
            vec![0.0, 0.0, 2.0, -1.0]
        );
        let p = Point::new(c, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(tulczyjew_xi(&p).unwrap().values, vec![1.0, 3.0, 4.0, 2.0]);
    }

    #[test]
    fn acceleration_relabel() {
        let p = Point::new(ChartSpec::t_aq(1), vec![1.0, 3.0, 2.0, 4.0]).unwrap();
        let t = acceleration_iso(&p).unwrap();
        assert_eq!(t.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(acceleration_iso_inverse(&t).unwrap(), p);
    }

    #[test]
    fn chart_mismatch_detected() {
        let p = Point::new(ChartSpec::tk(1, 2), vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            tulczyjew_flat(&p),
            Err(Error::ChartMismatch { .. })
        ));
        assert!(matches!(
            acceleration_iso_inverse(&p),
            Err(Error::ChartMismatch { .. })
        ));
    }

    #[test]
    fn roster_dimensions() {
        assert_eq!(ChartSpec::cot_tk1(2, 3).len(), 2 * 2 * 3);
        assert_eq!(ChartSpec::t_cot_tk1(1, 2).len(), 4 * 2);
        assert_eq!(ChartSpec::whitney(2, 2).len(), 2 * 3 + 2 * 2);
        assert_eq!(ChartSpec::cot_aq_m(2).len(), 12);
        let r = ChartSpec::tk(2, 1).roster;
        assert_eq!(
            r,
            vec![
                Symbol::q(1, 0),
                Symbol::q(2, 0),
                Symbol::q(1, 1),
                Symbol::q(2, 1)
            ]
        );
    }

    #[test]
    fn beam_semispray() {
        let f = crate::symexpr::parse_simplified("-rho/mu").unwrap();
        let s = semispray_type1(std::slice::from_ref(&f), 1, 2).unwrap();
        assert_eq!(s.components.len(), 3);
        assert_eq!(s.components[0], Expr::sym(Symbol::q(1, 1)));
        assert_eq!(s.components[1], Expr::sym(Symbol::q(1, 2)));
        assert_eq!(s.components[2], f);
        let bad = crate::symexpr::parse_simplified("q1_3").unwrap();
        assert!(matches!(
            semispray_type1(&[bad], 1, 2),
            Err(Error::LevelOverflow { .. })
        ));
    }
}
