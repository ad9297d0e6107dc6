//! Schmidt–Legendre pipeline on the acceleration bundle.
//!
//! A second-order Lagrangian is pulled back to `T AQ` by `q_2 -> a_0`
//! (and `q_3 -> a_1` at third order), extended by the total derivative of a
//! gauge function `F`, and turned into a Morse family on `T* AQ` (or on
//! `T* (AQ x M)` when an auxiliary manifold is needed).

use crate::charts::ChartSpec;
use crate::error::{Error, Result};
use crate::linalg::{rank, solve_linear};
use crate::ostro::{ostro_energy, LagrangianSpec, MorseFamily};
use crate::symexpr::{
    default_rng, diff, equal_numeric_with, eval, simplify, Binding, Expr, Kind, SampleBox, Symbol,
};
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Points at which the auxiliary coupling determinant is checked.
pub const COND2_POINTS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SchmidtVariant {
    SecondNondeg,
    ThirdOrder,
    SecondDegenerate,
}

/// An extended first-order Lagrangian and the Morse family it generates.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSystem {
    pub variant: SchmidtVariant,
    pub l_ext: Expr,
    pub base: ChartSpec,
    pub energy: MorseFamily,
    pub hamiltonian: Option<Expr>,
}

fn comps(n: u32) -> std::ops::RangeInclusive<u32> {
    1..=n
}

fn syms(n: u32, f: impl Fn(u32) -> Symbol) -> Vec<Symbol> {
    comps(n).map(f).collect()
}

/// `L(q_0, q_1, a_0[, a_1])`: `q{A}_2 -> a{A}_0`, `q{A}_3 -> a{A}_1`.
pub fn pull_back(l: &LagrangianSpec) -> Expr {
    let mut map = BTreeMap::new();
    for a in comps(l.dim) {
        map.insert(Symbol::q(a, 2), Expr::sym(Symbol::a(a, 0)));
        map.insert(Symbol::q(a, 3), Expr::sym(Symbol::a(a, 1)));
    }
    l.lagrangian.subs(&map)
}

fn check_gauge(f: &Expr, n: u32, allow_m: bool) -> Result<()> {
    for s in f.free_symbols() {
        let ok = s.is_param()
            || (s.component() <= n
                && match s.kind() {
                    Kind::Q => s.level() <= 1,
                    Kind::A => s.level() == 0,
                    Kind::M => allow_m && s.level() == 0,
                    _ => false,
                });
        if !ok {
            return Err(Error::Precondition(format!(
                "gauge function may not contain {s}"
            )));
        }
    }
    Ok(())
}

fn expect_order(l: &LagrangianSpec, k: u32) -> Result<()> {
    if l.order != k {
        return Err(Error::Precondition(format!(
            "expected a Lagrangian of order {k}, got {}",
            l.order
        )));
    }
    Ok(())
}

/// `sum_A F_{x{A}} * xdot{A}` for the given position/velocity pairs.
fn gauge_terms(f: &Expr, n: u32, with_m: bool) -> Vec<Expr> {
    let mut pairs: Vec<(Symbol, Expr)> = Vec::new();
    for a in comps(n) {
        pairs.push((Symbol::q(a, 0), Expr::sym(Symbol::q(a, 1))));
        pairs.push((Symbol::q(a, 1), Expr::sym(Symbol::a(a, 0))));
        pairs.push((Symbol::a(a, 0), Expr::sym(Symbol::a(a, 1))));
        if with_m {
            pairs.push((Symbol::m(a, 0), Expr::sym(Symbol::m(a, 1))));
        }
    }
    pairs.into_iter().map(|(x, v)| diff(f, &x) * v).collect()
}

/// `L_2 = L + F_{q0} q_1 + F_{q1} a_0 + F_{a0} a_1`.
pub fn gauge_extend_second(l: &LagrangianSpec, f: &Expr) -> Result<Expr> {
    expect_order(l, 2)?;
    check_gauge(f, l.dim, false)?;
    let mut terms = vec![pull_back(l)];
    terms.extend(gauge_terms(f, l.dim, false));
    Ok(simplify(&Expr::add(terms)))
}

/// `dL/da{A}_0 + dF/dq{A}_1` per component.
pub fn chi_check(l: &LagrangianSpec, f: &Expr) -> Result<Vec<Expr>> {
    expect_order(l, 2)?;
    check_gauge(f, l.dim, false)?;
    let lp = pull_back(l);
    Ok(comps(l.dim)
        .map(|a| simplify(&(diff(&lp, &Symbol::a(a, 0)) + diff(f, &Symbol::q(a, 1)))))
        .collect())
}

fn param_box(exprs: &[Expr]) -> SampleBox {
    let mut b = SampleBox::uniform(-2.0, 2.0);
    for e in exprs {
        for s in e.free_symbols().into_iter().filter(Symbol::is_param) {
            b = b.with_range(s, 0.5, 2.0);
        }
    }
    b
}

fn vanishes(e: &Expr) -> Result<bool> {
    if e.is_zero() {
        return Ok(true);
    }
    let region = param_box(std::slice::from_ref(e));
    equal_numeric_with(e, &Expr::zero(), 50, 1e-10, &region, &mut default_rng())
}

/// Whether every chi residual vanishes.
pub fn chi_holds(l: &LagrangianSpec, f: &Expr) -> Result<bool> {
    for r in chi_check(l, f)? {
        if !vanishes(&r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `F = -sum_A (dL/da{A}_0) q{A}_1`, valid when `dL/da_0` does not involve `q_1`.
pub fn solve_f_quadratic(l: &LagrangianSpec) -> Result<Expr> {
    expect_order(l, 2)?;
    let lp = pull_back(l);
    let q1 = syms(l.dim, |a| Symbol::q(a, 1));
    let mut terms = Vec::new();
    for a in comps(l.dim) {
        let da = diff(&lp, &Symbol::a(a, 0));
        if da.contains_any(&q1) {
            return Err(Error::Precondition(format!(
                "dL/da{a}_0 = {da} depends on the velocity; supply F explicitly"
            )));
        }
        terms.push(-(da * Expr::sym(Symbol::q(a, 1))));
    }
    Ok(simplify(&Expr::add(terms)))
}

fn require_chi(l: &LagrangianSpec, f: &Expr) -> Result<()> {
    for (i, r) in chi_check(l, f)?.into_iter().enumerate() {
        if !vanishes(&r)? {
            return Err(Error::Incompatible(format!(
                "gauge function fails chi: residual for component {} is {r}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// `E = pq.q_1 + pa.a_1 - L_2` on `T* AQ` with fibers `q_1, a_1`.
///
/// Stationarity in `a_1` is the momentum relation `pa = F_{a0}`.
pub fn schmidt_morse_family(l: &LagrangianSpec, f: &Expr) -> Result<MorseFamily> {
    require_chi(l, f)?;
    let n = l.dim;
    let l2 = gauge_extend_second(l, f)?;
    let mut terms = Vec::new();
    for a in comps(n) {
        terms.push(Expr::sym(Symbol::pq(a)) * Expr::sym(Symbol::q(a, 1)));
        terms.push(Expr::sym(Symbol::pa(a)) * Expr::sym(Symbol::a(a, 1)));
    }
    terms.push(-l2);
    let mut fibers = syms(n, |a| Symbol::q(a, 1));
    fibers.extend(syms(n, |a| Symbol::a(a, 1)));
    MorseFamily::new(ChartSpec::cot_aq(n), fibers, simplify(&Expr::add(terms)))
}

/// The family with `a_1` eliminated: `E = pq.q_1 - L - F_{q0}.q_1 - F_{q1}.a_0`
/// over fibers `q_1`, plus the relations `pa - F_{a0} = 0`.
pub fn schmidt_reduced_energy(l: &LagrangianSpec, f: &Expr) -> Result<(Expr, Vec<Expr>)> {
    expect_order(l, 2)?;
    check_gauge(f, l.dim, false)?;
    let mut terms = vec![-pull_back(l)];
    let mut constraints = Vec::new();
    for a in comps(l.dim) {
        let q1 = Expr::sym(Symbol::q(a, 1));
        terms.push(Expr::sym(Symbol::pq(a)) * q1.clone());
        terms.push(-(diff(f, &Symbol::q(a, 0)) * q1));
        terms.push(-(diff(f, &Symbol::q(a, 1)) * Expr::sym(Symbol::a(a, 0))));
        constraints.push(simplify(
            &(Expr::sym(Symbol::pa(a)) - diff(f, &Symbol::a(a, 0))),
        ));
    }
    Ok((simplify(&Expr::add(terms)), constraints))
}

/// `q_1 = z(q_0, a_0, pa)` solving `pa = F_{a0}`.
fn velocity_from_pa(l: &LagrangianSpec, f: &Expr) -> Result<BTreeMap<Symbol, Expr>> {
    let eqs: Vec<Expr> = comps(l.dim)
        .map(|a| Expr::sym(Symbol::pa(a)) - diff(f, &Symbol::a(a, 0)))
        .collect();
    solve_linear(&eqs, &syms(l.dim, |a| Symbol::q(a, 1)))
}

/// `H = pq.z - L(q_0, z, a_0) - F_{q0}.z - F_{q1}.a_0` with `z` solving `pa = F_{a0}`.
pub fn schmidt_hamiltonian(l: &LagrangianSpec, f: &Expr) -> Result<Expr> {
    require_chi(l, f)?;
    let (e_red, _) = schmidt_reduced_energy(l, f)?;
    let z = velocity_from_pa(l, f)?;
    Ok(simplify(&e_red.subs(&z)))
}

/// Second-order nondegenerate route; the Hamiltonian is present when `pa = F_{a0}`
/// can be inverted symbolically.
pub fn schmidt_second(l: &LagrangianSpec, f: &Expr) -> Result<SchmidtSystem> {
    let energy = schmidt_morse_family(l, f)?;
    let hamiltonian = match schmidt_hamiltonian(l, f) {
        Ok(h) => Some(h),
        Err(Error::NotSolvable(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SchmidtSystem {
        variant: SchmidtVariant::SecondNondeg,
        l_ext: gauge_extend_second(l, f)?,
        base: ChartSpec::cot_aq(l.dim),
        energy,
        hamiltonian,
    })
}

/// `F = sum_A q{A}_1 m{A}_0`.
pub fn kronecker_coupling(n: u32) -> Expr {
    Expr::add(comps(n).map(|a| Expr::sym(Symbol::q(a, 1)) * Expr::sym(Symbol::m(a, 0))))
}

/// Rank of `[d2F / dq{A}_1 dm{B}_0]`, minimised over random points.
pub fn cond2_rank(f: &Expr, n: u32) -> Result<usize> {
    let entries: Vec<Expr> = comps(n)
        .flat_map(|a| {
            let fa = diff(f, &Symbol::q(a, 1));
            comps(n)
                .map(move |b| diff(&fa, &Symbol::m(b, 0)))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut probe = entries.clone();
    probe.push(f.clone());
    let points = param_box(&probe).sample(&probe, COND2_POINTS, &mut default_rng())?;
    let mut best = n as usize;
    for b in &points {
        let vals: Vec<f64> = entries.iter().map(|e| eval(e, b)).collect::<Result<_>>()?;
        best = best.min(rank(&DMatrix::from_row_slice(
            n as usize, n as usize, &vals,
        )));
    }
    Ok(best)
}

fn auxiliary_extend(
    l: &LagrangianSpec,
    f: &Expr,
    variant: SchmidtVariant,
) -> Result<SchmidtSystem> {
    let n = l.dim;
    check_gauge(f, n, true)?;
    let r = cond2_rank(f, n)?;
    if r < n as usize {
        return Err(Error::Degenerate {
            rank: r,
            dim: n as usize,
        });
    }
    let mut terms = vec![pull_back(l)];
    terms.extend(gauge_terms(f, n, true));
    let l_ext = simplify(&Expr::add(terms));
    let mut e = Vec::new();
    for a in comps(n) {
        e.push(Expr::sym(Symbol::pq(a)) * Expr::sym(Symbol::q(a, 1)));
        e.push(Expr::sym(Symbol::pa(a)) * Expr::sym(Symbol::a(a, 1)));
        e.push(Expr::sym(Symbol::pm(a)) * Expr::sym(Symbol::m(a, 1)));
    }
    e.push(-l_ext.clone());
    let mut fibers = syms(n, |a| Symbol::q(a, 1));
    fibers.extend(syms(n, |a| Symbol::a(a, 1)));
    fibers.extend(syms(n, |a| Symbol::m(a, 1)));
    let base = ChartSpec::cot_aq_m(n);
    let energy = MorseFamily::new(base.clone(), fibers, simplify(&Expr::add(e)))?;
    Ok(SchmidtSystem {
        variant,
        l_ext,
        base,
        energy,
        hamiltonian: None,
    })
}

/// `L_3 = L + F_{q0} q_1 + F_{q1} a_0 + F_{a0} a_1 + F_{m0} m_1` for a third-order `L`.
pub fn third_order_extend(l: &LagrangianSpec, f: &Expr) -> Result<SchmidtSystem> {
    expect_order(l, 3)?;
    auxiliary_extend(l, f, SchmidtVariant::ThirdOrder)
}

/// Same construction for a second-order `L`, typically degenerate.
pub fn degenerate_second_extend(l: &LagrangianSpec, f: &Expr) -> Result<SchmidtSystem> {
    expect_order(l, 2)?;
    auxiliary_extend(l, f, SchmidtVariant::SecondDegenerate)
}

/// Compose the Ostrogradsky energy with `q_1 -> z`, `p_0 -> pq - F_{q0}`,
/// `p_1 -> -F_{q1}`, `q_2 -> a_0` and compare with the Schmidt Hamiltonian at
/// 100 random points.
pub fn ostro_schmidt_pullback_check(l: &LagrangianSpec, f: &Expr) -> Result<bool> {
    ostro_schmidt_pullback_check_with(l, f, f)
}

/// As [`ostro_schmidt_pullback_check`], building the map from `f_map` and the
/// Hamiltonian from `f`.
pub fn ostro_schmidt_pullback_check_with(
    l: &LagrangianSpec,
    f: &Expr,
    f_map: &Expr,
) -> Result<bool> {
    let h = schmidt_hamiltonian(l, f)?;
    check_gauge(f_map, l.dim, false)?;
    let z = velocity_from_pa(l, f_map)?;
    let mut map = z.clone();
    for a in comps(l.dim) {
        let fq0 = diff(f_map, &Symbol::q(a, 0)).subs(&z);
        let fq1 = diff(f_map, &Symbol::q(a, 1)).subs(&z);
        map.insert(Symbol::p(a, 0), Expr::sym(Symbol::pq(a)) - fq0);
        map.insert(Symbol::p(a, 1), -fq1);
        map.insert(Symbol::q(a, 2), Expr::sym(Symbol::a(a, 0)));
    }
    let pulled = simplify(&ostro_energy(l).energy.subs(&map));
    let region = param_box(&[h.clone(), pulled.clone()]);
    equal_numeric_with(&pulled, &h, 100, 1e-10, &region, &mut default_rng())
}

/// Initial state on the base chart from a jet: `a_0 = q_2`, `a_1 = q_3`,
/// momenta `dL_ext / d(velocity)`. Auxiliary coordinates `m{A}_0, m{A}_1`
/// must be bound in `jet` when the system uses them.
pub fn schmidt_initial_state(sys: &SchmidtSystem, jet: &Binding) -> Result<Binding> {
    let mut at = jet.clone();
    let n = sys.base.dim;
    for a in comps(n) {
        if let Some(v) = jet.try_get(&Symbol::q(a, 2)) {
            at.set(Symbol::a(a, 0), v);
        }
        if let Some(v) = jet.try_get(&Symbol::q(a, 3)) {
            at.set(Symbol::a(a, 1), v);
        }
    }
    let mut out: Binding = jet
        .iter()
        .filter(|(s, _)| s.is_param())
        .map(|(s, v)| (s.clone(), *v))
        .collect();
    for (x, p) in sys
        .base
        .cotangent_pairs()
        .expect("Schmidt charts are cotangent")
    {
        let v = x.shifted().expect("jet coordinate");
        out.set(x.clone(), at.get(&x)?);
        out.set(p, eval(&diff(&sys.l_ext, &v), &at)?);
    }
    Ok(out)
}
