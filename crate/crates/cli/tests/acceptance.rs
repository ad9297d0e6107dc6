//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 2 and 4 are known not to hold (see the README); they are
//! reported as FAIL and do not fail the target. Any other FAIL does.

use jetmech::dynamics::{assemble, energy_drift, integrate_rk4, resolve_multipliers};
use jetmech::hamjac::{
    affine_hj_solve, affine_lagrangian, affine_symmetry_check, hj_residual, morse_rank_check,
    AffineOrder, CheckOptions, ClosedOneForm, RELATEDNESS_TOL,
};
use jetmech::ostro::{euler_lagrange, ostro_energy, ostro_initial_state};
use jetmech::schmidt::{
    ostro_schmidt_pullback_check, schmidt_hamiltonian, schmidt_initial_state, schmidt_second,
    solve_f_quadratic,
};
use jetmech::symexpr::{
    diff, equal_numeric, eval, parse_simplified, total_time_derivative, Node, Number, SampleBox,
};
use jetmech::{Binding, ChartSpec, Error, Expr, LagrangianSpec, MorseFamily, Symbol};
use jetmech_cli::corpus::{self, Command};
use jetmech_cli::{report, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;
use twofloat::TwoFloat;

const KNOWN_FAILURES: [usize; 2] = [2, 4];

type Outcome = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn p(s: &str) -> Expr {
    parse_simplified(s).unwrap()
}

fn params(pairs: &[(&str, f64)]) -> Binding {
    pairs.iter().map(|(n, v)| (Symbol::param(n), *v)).collect()
}

fn jet(values: &[f64], extra: &Binding) -> Binding {
    let mut b = extra.clone();
    for (l, v) in values.iter().enumerate() {
        b.set(Symbol::q(1, l as u32), *v);
    }
    b
}

fn fixed(region: SampleBox, b: &Binding) -> SampleBox {
    b.iter()
        .fold(region, |r, (s, v)| r.with_fixed(s.clone(), *v))
}

fn beam() -> LagrangianSpec {
    LagrangianSpec::parse(1, 2, "mu*q1_2^2/2 + rho*q1_0").unwrap()
}

fn javelin() -> LagrangianSpec {
    LagrangianSpec::parse(1, 2, "q1_1^2/2 - q1_2^2/2").unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &[Symbol], terms: usize, max_deg: usize) -> Expr {
    Expr::add((0..terms).map(|_| {
        let mut f = vec![Expr::int(rng.random_range(-3..=3))];
        for _ in 0..rng.random_range(0..=max_deg) {
            f.push(Expr::sym(vars[rng.random_range(0..vars.len())].clone()));
        }
        Expr::mul(f)
    }))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let l = beam();
    let mf = ostro_energy(&l);
    let sys = assemble(&mf).map_err(err)?;
    let mut ok = equal_numeric(
        &mf.energy,
        &p("p1_0*q1_1 + p1_1*q1_2 - mu*q1_2^2/2 - rho*q1_0"),
        100,
        1e-10,
    )
    .map_err(err)?;
    let printed = [
        (Symbol::q(1, 0), "q1_1"),
        (Symbol::q(1, 1), "q1_2"),
        (Symbol::p(1, 0), "rho"),
        (Symbol::p(1, 1), "-p1_0"),
    ];
    for (s, rhs) in printed {
        let got = sys.rhs_of(&s).ok_or(format!("no equation for {s}"))?;
        ok &= equal_numeric(got, &p(rhs), 100, 1e-10).map_err(err)?;
    }
    ok &= sys.constraints.len() == 1
        && equal_numeric(&sys.constraints[0], &p("p1_1 - mu*q1_2"), 100, 1e-10).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 1.0, format!("forms match: {ok}, {secs:.3} s")))
}

fn criterion_2() -> Outcome {
    let (mu, rho) = (1.5, 0.5);
    let prm = params(&[("mu", mu), ("rho", rho)]);
    let j0 = [0.1, -0.2, 0.3, 0.4];
    let exact = |t: f64| {
        j0[0] + j0[1] * t + j0[2] * t * t / 2.0 + j0[3] * t.powi(3) / 6.0
            - rho / mu * t.powi(4) / 24.0
    };
    let l = beam();
    let sys = assemble(&ostro_energy(&l)).map_err(err)?;
    let init = ostro_initial_state(&l, &jet(&j0, &prm)).map_err(err)?;
    let run = |h: f64| -> Result<(f64, f64), String> {
        let traj = integrate_rk4(&sys, &init, 0.0, 1.0, h).map_err(err)?;
        let q = traj.column(&Symbol::q(1, 0)).unwrap();
        let e = traj
            .times
            .iter()
            .zip(&q)
            .map(|(t, x)| (x - exact(*t)).abs())
            .fold(0.0, f64::max);
        Ok((e, energy_drift(&traj)))
    };
    let (e1, drift) = run(1e-3)?;
    let (e2, _) = run(5e-4)?;
    let ratio = e1 / e2;
    let ok = e1 <= 1e-8 && drift <= 1e-8 && (12.0..=20.0).contains(&ratio);
    Ok((
        ok,
        format!("sup error {e1:.2e}, drift {drift:.2e}, Richardson ratio {ratio:.3} ({e1:.2e} / {e2:.2e}; RK4 reproduces a quartic up to rounding)"),
    ))
}

fn criterion_3() -> Outcome {
    let gamma = ClosedOneForm::from_components(
        ChartSpec::cot_tk1(1, 2),
        vec![p("A"), p("sqrt(2)*sqrt(A*q1_1 - q1_1^2/2 - B)")],
    )
    .map_err(err)?;
    let region = SampleBox::uniform(-1.0, 1.0)
        .with_range(Symbol::q(1, 1), 0.0, 2.0)
        .with_guard(p("A*q1_1 - q1_1^2/2 - B"), 0.1);
    let opts = CheckOptions::default()
        .with_region(fixed(region, &params(&[("A", 1.0), ("B", 0.0)])))
        .with_tol(1e-9);
    let r = hj_residual(&ostro_energy(&javelin()), &gamma, &opts).map_err(err)?;
    Ok((
        r.pass,
        format!("sup {:.2e} over {} points", r.sup, r.samples),
    ))
}

fn criterion_4() -> Outcome {
    let l = javelin();
    let h = schmidt_hamiltonian(&l, &solve_f_quadratic(&l).map_err(err)?).map_err(err)?;
    let w = p("ln(a1_0 + sqrt(a1_0^2 + 2*c))/sqrt(2) + a1_0*sqrt(a1_0^2 + 2*c)/(2*sqrt(2))");
    let restricted = h
        .subs1(&Symbol::pq(1), &diff(&w, &Symbol::q(1, 0)))
        .subs1(&Symbol::pa(1), &diff(&w, &Symbol::a(1, 0)));
    let mut values = Vec::new();
    for i in 0..=200 {
        let a = -1.0 + i as f64 / 100.0;
        let b = params(&[("c", 1.0)])
            .with(Symbol::a(1, 0), a)
            .with(Symbol::q(1, 0), 0.3);
        values.push(eval(&restricted, &b).map_err(err)?);
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max - min;
    Ok((
        spread <= 1e-8,
        format!("spread of H o dW over a in [-1, 1] is {spread:.3e}"),
    ))
}

fn criterion_5() -> Outcome {
    let l = LagrangianSpec::parse(3, 2, "(q1_2 + q2_2)^2/2").map_err(err)?;
    let mf = ostro_energy(&l);
    let gamma = ClosedOneForm::from_potential(ChartSpec::cot_tk1(3, 2), p("a*q1_1 + b*q2_1"))
        .map_err(err)?;
    let opts = CheckOptions::default()
        .with_region(fixed(
            SampleBox::uniform(-1.0, 1.0),
            &params(&[("a", 0.7), ("b", 0.7)]),
        ))
        .with_tol(1e-12);
    let r = hj_residual(&mf, &gamma, &opts).map_err(err)?;
    let sys = assemble(&mf).map_err(err)?;
    let at: Binding = sys.states.iter().map(|s| (s.clone(), 0.25)).collect();
    let rank = match resolve_multipliers(&sys, &at) {
        Err(Error::SingularJacobian { rank, size }) => Some((rank, size)),
        _ => None,
    };
    Ok((
        r.pass && rank == Some((1, 3)),
        format!(
            "residual sup {:.1e} (a = b = 0.7), constraint rank {rank:?}",
            r.sup
        ),
    ))
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let cases = [
        (
            beam(),
            [0.1, -0.2, 0.3, 0.4],
            params(&[("mu", 1.5), ("rho", 0.5)]),
        ),
        (javelin(), [0.0, 1.0, -0.5, 0.2], Binding::new()),
    ];
    for (l, j0, prm) in cases {
        let f = solve_f_quadratic(&l).map_err(err)?;
        ok &= ostro_schmidt_pullback_check(&l, &f).map_err(err)?;
        let j = jet(&j0, &prm);
        let ostro = assemble(&ostro_energy(&l)).map_err(err)?;
        let a = integrate_rk4(
            &ostro,
            &ostro_initial_state(&l, &j).map_err(err)?,
            0.0,
            1.0,
            1e-3,
        )
        .map_err(err)?;
        let s = schmidt_second(&l, &f).map_err(err)?;
        let b = integrate_rk4(
            &assemble(&s.energy).map_err(err)?,
            &schmidt_initial_state(&s, &j).map_err(err)?,
            0.0,
            1.0,
            1e-3,
        )
        .map_err(err)?;
        let q = Symbol::q(1, 0);
        worst = worst.max(sup_diff(&a.column(&q).unwrap(), &b.column(&q).unwrap()));
    }
    Ok((
        ok && worst <= 1e-6,
        format!("pullback identity: {ok}, base curves differ by {worst:.2e}"),
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let jet_vars: Vec<Symbol> = (0..=2).map(|l| Symbol::q(1, l)).collect();
    let lags: Vec<Expr> = (0..5)
        .map(|_| random_poly(&mut rng, &jet_vars, 4, 3))
        .collect();
    let gauges: Vec<Expr> = (0..20)
        .map(|_| random_poly(&mut rng, &jet_vars, 3, 2))
        .collect();
    let mut agree = 0;
    for lag in &lags {
        let el =
            euler_lagrange(&LagrangianSpec::new(1, 2, lag.clone()).map_err(err)?).map_err(err)?;
        for f in &gauges {
            let dfdt = total_time_derivative(f, 3).map_err(err)?;
            let lg = LagrangianSpec::new(1, 3, lag.clone() + dfdt).map_err(err)?;
            let elg = euler_lagrange(&lg).map_err(err)?;
            if equal_numeric(&el[0], &elg[0], 20, 1e-9).map_err(err)? {
                agree += 1;
            }
        }
    }
    Ok((agree == 100, format!("{agree}/100 pairs agree")))
}

/// Half the instances are total derivatives of a random `W`; the rest are
/// unconstrained.
fn affine_instance(rng: &mut ChaCha8Rng, order: AffineOrder, n: u32) -> (Vec<Expr>, Expr) {
    let level = |l: u32| (1..=n).map(|a| Symbol::q(a, l)).collect::<Vec<_>>();
    let lo = [level(0), level(1)].concat();
    let dot = |w: &Expr| {
        Expr::add(
            level(0)
                .iter()
                .zip(level(1))
                .map(|(x, v)| diff(w, x) * Expr::sym(v)),
        )
    };
    match (order, rng.random_bool(0.5)) {
        (AffineOrder::Second, true) => {
            let w = random_poly(rng, &lo, 4, 3);
            (level(1).iter().map(|v| diff(&w, v)).collect(), dot(&w))
        }
        (AffineOrder::Third, true) => {
            let phi = random_poly(rng, &level(2), 3, 3);
            let psi = random_poly(rng, &level(0), 3, 3);
            (level(2).iter().map(|v| diff(&phi, v)).collect(), dot(&psi))
        }
        (AffineOrder::Second, false) => (
            (0..n).map(|_| random_poly(rng, &lo, 2, 2)).collect(),
            random_poly(rng, &lo, 3, 2),
        ),
        (AffineOrder::Third, false) => {
            let hi = [level(1), level(2)].concat();
            (
                (0..n).map(|_| random_poly(rng, &hi, 2, 2)).collect(),
                random_poly(rng, &lo, 3, 2),
            )
        }
    }
}

fn criterion_8() -> Outcome {
    let opts = CheckOptions::default().with_region(fixed(
        SampleBox::uniform(-1.0, 1.0),
        &params(&[("lam", 0.8), ("m", 1.0)]),
    ));
    let chiral =
        affine_symmetry_check(&[p("lam*q2_1"), p("-lam*q1_1")], AffineOrder::Second, &opts)
            .map_err(err)?;
    let g = p("q1_0*q1_1^2*q2_1 + q2_0^2*q2_1^3/3 + q1_1*q2_1");
    let grad: Vec<Expr> = [Symbol::q(1, 1), Symbol::q(2, 1)]
        .iter()
        .map(|v| diff(&g, v))
        .collect();
    let gradient = affine_symmetry_check(&grad, AffineOrder::Second, &opts).map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut solved, mut verified) = (0, 0);
    let plain = CheckOptions::default();
    for i in 0..50 {
        let order = if i % 2 == 0 {
            AffineOrder::Second
        } else {
            AffineOrder::Third
        };
        let n = 1 + (i / 2) % 2;
        let (f, g) = affine_instance(&mut rng, order, n as u32);
        if let Ok(gamma) = affine_hj_solve(&f, &g, order, &plain) {
            solved += 1;
            let l = affine_lagrangian(&f, &g, order).map_err(err)?;
            if hj_residual(&ostro_energy(&l), &gamma, &plain)
                .map_err(err)?
                .pass
            {
                verified += 1;
            }
        }
    }
    let ok = !chiral.pass && gradient.pass && solved > 0 && verified == solved;
    Ok((
        ok,
        format!(
            "chiral symmetry sup {:.2}, gradient-type sup {:.1e}, {verified}/{solved} solved instances re-verify (50 drawn)",
            chiral.sup, gradient.sup
        ),
    ))
}

fn criterion_9() -> Outcome {
    let run = RunOptions {
        seed: None,
        tol: None,
    };
    let mut passed = 0;
    let mut total = 0;
    for entry in corpus::entries() {
        let cfg = entry.base_config().map_err(err)?;
        if cfg.lagrangian.is_none() {
            continue;
        }
        let out = jetmech_cli::derive(&cfg, run).map_err(err)?;
        total += 1;
        let m = &out.report["morse_rank"];
        if m["pass"] == true && m["points"] == 20 {
            passed += 1;
        }
    }
    let zero = MorseFamily::new(
        ChartSpec::cot_tk1(1, 2),
        vec![Symbol::q(1, 2)],
        Expr::zero(),
    )
    .map_err(err)?;
    let pts: Vec<Binding> = (0..20)
        .map(|i| {
            zero.base
                .roster
                .iter()
                .chain(&zero.fibers)
                .map(|s| (s.clone(), 0.1 * i as f64 - 1.0))
                .collect()
        })
        .collect();
    let zero_fails = !morse_rank_check(&zero, &pts).map_err(err)?.pass;
    Ok((
        passed == total && total > 0 && zero_fails,
        format!("{passed}/{total} corpus energies full rank, E = 0 rejected: {zero_fails}"),
    ))
}

fn criterion_10() -> Outcome {
    let run = RunOptions {
        seed: None,
        tol: None,
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for entry in corpus::entries() {
        for check in &entry.checks {
            if check.command != Command::HjCheck {
                continue;
            }
            let cfg = entry.config_for(check).map_err(err)?;
            if cfg.simulation.is_none() {
                continue;
            }
            let out = jetmech_cli::hj_check(&cfg, run).map_err(err)?;
            if out.report["residual"]["pass"] != true {
                continue;
            }
            let rel = &out.report["relatedness"];
            let pass = rel["pass"] == true;
            let control = rel["perturbed"]["pass"] == false;
            ok &= pass && control;
            lines.push(format!(
                "{}/{} sup {:.1e}, perturbed sup {:.1e}",
                entry.id,
                check.name,
                rel["sup"].as_f64().unwrap_or(f64::NAN),
                rel["perturbed"]["sup"].as_f64().unwrap_or(f64::NAN),
            ));
        }
    }
    ok &= !lines.is_empty();
    Ok((ok, format!("tol {RELATEDNESS_TOL:e}: {}", lines.join("; "))))
}

/// `sum_m c_m (t - 1/2)^m`.
struct Curve(Vec<f64>);

impl Curve {
    fn deriv(&self, t: f64, l: u32) -> f64 {
        let s = t - 0.5;
        (l as usize..self.0.len())
            .map(|m| {
                let falling: f64 = (m - l as usize + 1..=m).map(|j| j as f64).product();
                self.0[m] * falling * s.powi((m - l as usize) as i32)
            })
            .sum()
    }

    fn value_dd(&self, t: TwoFloat) -> TwoFloat {
        let s = t - 0.5;
        self.0
            .iter()
            .rev()
            .fold(TwoFloat::from(0.0), |acc, c| acc * s + *c)
    }
}

/// Double-double evaluation of a polynomial expression.
fn eval_dd(e: &Expr, b: &BTreeMap<Symbol, TwoFloat>) -> Result<TwoFloat, String> {
    let num = |n: &Number| match n {
        Number::Rat(r) => TwoFloat::from(*r.numer()) / TwoFloat::from(*r.denom()),
        Number::Float(x) => TwoFloat::from(*x),
    };
    Ok(match e.node() {
        Node::Num(n) => num(n),
        Node::Sym(s) => *b.get(s).ok_or(format!("unbound {s}"))?,
        Node::Sum(ts) => ts.iter().try_fold(TwoFloat::from(0.0), |acc, t| {
            Ok::<_, String>(acc + eval_dd(t, b)?)
        })?,
        Node::Product(fs) => fs.iter().try_fold(TwoFloat::from(1.0), |acc, f| {
            Ok::<_, String>(acc * eval_dd(f, b)?)
        })?,
        Node::Pow(base, Number::Rat(r)) if r.is_integer() => {
            eval_dd(base, b)?.powi(*r.numer() as i32)
        }
        _ => return Err(format!("not a polynomial: {e}")),
    })
}

/// `S = h sum_i L(x_i, D1 x_i, D2 x_i, D3 x_i)` with the central stencils
/// `D1`, `D2` and `D3 = D1 D2`. Its gradient divided by `h` is
/// `sum_l (D_l)^T P_l`, `P_l = dL/dq_l` on the discrete jet; `D1^T = -D1` and
/// `D2^T = D2` away from the ends. Computed in double-double so that the
/// repeated differencing stays far below the comparison tolerance. Entries
/// within 8 nodes of an end are NaN.
fn discrete_variational_derivative(
    l: &LagrangianSpec,
    x: &[Vec<TwoFloat>],
    h: TwoFloat,
) -> Result<Vec<Vec<f64>>, String> {
    let (n, k) = (l.dim as usize, l.order as usize);
    let nodes = x[0].len();
    let zero = TwoFloat::from(0.0);
    let d1 = |v: &[TwoFloat], i: usize| (v[i + 1] - v[i - 1]) / (h * 2.0);
    let d2 = |v: &[TwoFloat], i: usize| (v[i + 1] - v[i] * 2.0 + v[i - 1]) / (h * h);
    let apply =
        |d: &dyn Fn(&[TwoFloat], usize) -> TwoFloat, v: &[TwoFloat], lo: usize, hi: usize| {
            (0..nodes)
                .map(|i| if i >= lo && i < hi { d(v, i) } else { zero })
                .collect::<Vec<_>>()
        };
    let (lo, hi) = (2, nodes - 2);
    let mut jets = vec![vec![vec![zero; nodes]; k + 1]; n];
    for a in 0..n {
        let second = apply(&d2, &x[a], 1, nodes - 1);
        jets[a][0] = x[a].clone();
        jets[a][1] = apply(&d1, &x[a], 1, nodes - 1);
        jets[a][2] = second.clone();
        if k >= 3 {
            jets[a][3] = apply(&d1, &second, lo, hi);
        }
    }
    let partials: Vec<Vec<Expr>> = (1..=l.dim)
        .map(|a| {
            (0..=k as u32)
                .map(|lv| diff(&l.lagrangian, &Symbol::q(a, lv)))
                .collect()
        })
        .collect();
    // pvals[a][lv][i]
    let mut pvals = vec![vec![vec![zero; nodes]; k + 1]; n];
    for i in lo..hi {
        let mut b = BTreeMap::new();
        for (a, jet) in jets.iter().enumerate() {
            for (lv, col) in jet.iter().enumerate() {
                b.insert(Symbol::q(a as u32 + 1, lv as u32), col[i]);
            }
        }
        for a in 0..n {
            for lv in 0..=k {
                pvals[a][lv][i] = eval_dd(&partials[a][lv], &b)?;
            }
        }
    }
    let mut out = vec![vec![f64::NAN; nodes]; n];
    for (a, p) in pvals.iter().enumerate() {
        let d1p3 = if k >= 3 {
            apply(&d1, &p[3], lo + 1, hi - 1)
        } else {
            vec![zero; nodes]
        };
        for j in 8..nodes - 8 {
            let mut g = p[0][j] - d1(&p[1], j) + d2(&p[2], j);
            if k >= 3 {
                g -= d2(&d1p3, j);
            }
            out[a][j] = g.hi();
        }
    }
    Ok(out)
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let nodes = 2000;
    let h = TwoFloat::from(1.0) / TwoFloat::from((nodes - 1) as f64);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 10 {
        let k = if done % 2 == 0 { 2 } else { 3 };
        let n = 1 + (done / 2) % 2;
        let vars: Vec<Symbol> = (1..=n)
            .flat_map(|a| (0..=k).map(move |lv| Symbol::q(a, lv)))
            .collect();
        // A top-level square keeps the order from collapsing.
        let top = Expr::sym(Symbol::q(1, k));
        let lag = random_poly(&mut rng, &vars, 5, 3) + top.clone() * top;
        let l = LagrangianSpec::new(n, k, lag).map_err(err)?;
        let el = euler_lagrange(&l).map_err(err)?;
        let curves: Vec<Curve> = (0..n)
            .map(|_| Curve((0..=8).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let x: Vec<Vec<TwoFloat>> = curves
            .iter()
            .map(|c| {
                (0..nodes)
                    .map(|i| c.value_dd(h * TwoFloat::from(i as f64)))
                    .collect()
            })
            .collect();
        let fd = discrete_variational_derivative(&l, &x, h)?;
        let mut scale = 0.0f64;
        let mut diff_sup = 0.0f64;
        for j in 8..nodes - 8 {
            let t = (h * TwoFloat::from(j as f64)).hi();
            let mut b = Binding::new();
            for (a, c) in curves.iter().enumerate() {
                for lv in 0..=2 * k {
                    b.set(Symbol::q(a as u32 + 1, lv), c.deriv(t, lv));
                }
            }
            for a in 0..n as usize {
                let exact = eval(&el[a], &b).map_err(err)?;
                scale = scale.max(exact.abs());
                diff_sup = diff_sup.max((exact - fd[a][j]).abs());
            }
        }
        if scale < 1e-6 {
            continue;
        }
        worst = worst.max(diff_sup / scale);
        done += 1;
    }
    Ok((
        worst <= 1e-4,
        format!("worst relative deviation {worst:.2e} over 10 Lagrangians of orders 2 and 3, N = {nodes}"),
    ))
}

fn criterion_12() -> Outcome {
    let run = RunOptions {
        seed: Some(0x5eed),
        tol: None,
    };
    let start = Instant::now();
    let a = corpus::run(None, run);
    let secs = start.elapsed().as_secs_f64();
    let b = corpus::run(None, run);
    let same = report::to_json(&a.report) == report::to_json(&b.report)
        && report::to_text(&a.report) == report::to_text(&b.report);
    let failed = &a.report["summary"]["failed"];
    Ok((
        secs < 60.0 && same,
        format!("{secs:.2} s, byte-identical: {same}, failed checks: {failed}"),
    ))
}

fn main() {
    let criteria: [fn() -> Outcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut unexpected = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let n = i + 1;
        let (pass, detail) = match c() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {n}: {} {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass && !KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
