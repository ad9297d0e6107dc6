//! The four job commands. Each returns a report value and an exit code;
//! errors that prevent a report from being produced are returned as `Err`.

use crate::config::{expr, JobConfig, Method, Start};
use crate::CliError;
use jetmech::dynamics::{energy_drift, integrate_rk4, integrate_rk4_partial, Prepared};
use jetmech::hamjac::{
    affine_hj_solve, affine_integrability_check, affine_lagrangian, affine_symmetry_check,
    gamma_relatedness, hj_residual, hj_residual_nondeg, line_integral_potential, morse_rank_check,
    morse_sample_points, AffineOrder, CheckOptions, ClosedOneForm,
};
use jetmech::ostro::{
    euler_lagrange, explicit_hamiltonian, generic_rank, ostro_energy, ostro_initial_state,
    ostro_momenta,
};
use jetmech::schmidt::{
    chi_holds, degenerate_second_extend, ostro_schmidt_pullback_check, schmidt_initial_state,
    schmidt_second, solve_f_quadratic, third_order_extend,
};
use jetmech::symexpr::{diff, eval, simplify};
use jetmech::{
    dynamics, Binding, Error, Expr, ImplicitSystem, LagrangianSpec, MorseFamily, SchmidtSystem,
    Symbol, Trajectory,
};
use serde_json::{json, Map, Value};

/// Overrides from the command line.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome {
            report,
            csv: None,
            code: 0,
        }
    }
}

/// The Lagrangian, its Morse family and the implicit system it generates.
pub struct Built {
    pub l: LagrangianSpec,
    pub mf: MorseFamily,
    pub sys: ImplicitSystem,
    pub schmidt: Option<SchmidtSystem>,
    pub gauge: Option<Expr>,
}

pub fn build(cfg: &JobConfig) -> Result<Built, CliError> {
    let l = LagrangianSpec::new(cfg.n, cfg.k, expr("lagrangian", cfg.lagrangian_text()?)?)?;
    let gauge = cfg.gauge_expr()?;
    let (schmidt, gauge) = match cfg.method {
        Method::Ostrogradsky => (None, gauge),
        Method::Schmidt2 => {
            let f = match gauge {
                Some(f) => f,
                None => solve_f_quadratic(&l)?,
            };
            (Some(schmidt_second(&l, &f)?), Some(f))
        }
        Method::Schmidt3 => {
            let f = gauge.expect("validated");
            (Some(third_order_extend(&l, &f)?), Some(f))
        }
        Method::Schmidt2deg => {
            let f = gauge.expect("validated");
            (Some(degenerate_second_extend(&l, &f)?), Some(f))
        }
    };
    let mf = match &schmidt {
        Some(s) => s.energy.clone(),
        None => ostro_energy(&l),
    };
    let sys = dynamics::assemble(&mf)?;
    Ok(Built {
        l,
        mf,
        sys,
        schmidt,
        gauge,
    })
}

fn strings<'a>(xs: impl IntoIterator<Item = &'a Expr>) -> Value {
    Value::Array(
        xs.into_iter()
            .map(|e| Value::String(e.to_string()))
            .collect(),
    )
}

fn names<'a>(xs: impl IntoIterator<Item = &'a Symbol>) -> Value {
    Value::Array(xs.into_iter().map(|s| Value::String(s.name())).collect())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn header(cfg: &JobConfig, command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("problem".into(), json!(cfg.problem));
    m.insert("method".into(), json!(cfg.method.name()));
    m.insert("n".into(), json!(cfg.n));
    m.insert("k".into(), json!(cfg.k));
    m
}

fn error_value(e: &CliError) -> Value {
    json!({"code": e.code, "message": e.message})
}

/// `(f, g, order)` when `L = sum_A f_A q{A}_k + g` with `f` free of level-`k` coordinates.
pub fn split_affine(l: &LagrangianSpec) -> Option<(Vec<Expr>, Expr, AffineOrder)> {
    let order = match l.order {
        2 => AffineOrder::Second,
        3 => AffineOrder::Third,
        _ => return None,
    };
    let top = l.level(l.order);
    let f: Vec<Expr> = top.iter().map(|s| diff(&l.lagrangian, s)).collect();
    if f.iter().any(|e| e.contains_any(&top)) {
        return None;
    }
    let g = simplify(
        &(l.lagrangian.clone()
            - Expr::add(
                f.iter()
                    .zip(&top)
                    .map(|(e, s)| e.clone() * Expr::sym(s.clone())),
            )),
    );
    Some((f, g, order))
}

fn affine_data(cfg: &JobConfig) -> Result<(Vec<Expr>, Expr, AffineOrder), CliError> {
    if let Some(a) = &cfg.affine {
        let f =
            a.f.iter()
                .map(|t| expr("affine.f", t))
                .collect::<Result<Vec<_>, _>>()?;
        return Ok((f, expr("affine.g", &a.g)?, a.order));
    }
    let l = LagrangianSpec::new(cfg.n, cfg.k, expr("lagrangian", cfg.lagrangian_text()?)?)?;
    split_affine(&l).ok_or_else(|| {
        CliError::config("the Lagrangian is not affine in its top derivatives at order 2 or 3")
    })
}

/// Energy, fibers, momenta, Euler–Lagrange expressions, implicit system,
/// Hamiltonian when one exists, Morse rank at 20 points, and the affine
/// symmetry status when the Lagrangian is affine in its top derivatives.
pub fn derive(cfg: &JobConfig, run: RunOptions) -> Result<Outcome, CliError> {
    let b = build(cfg)?;
    let seed = cfg.seed_or(run.seed);
    let mut r = header(cfg, "derive");
    r.insert("lagrangian".into(), json!(b.l.lagrangian.to_string()));
    r.insert("base_chart".into(), json!(b.mf.base.to_string()));
    r.insert("energy".into(), json!(b.mf.energy.to_string()));
    r.insert("fibers".into(), names(&b.mf.fibers));
    if cfg.method == Method::Ostrogradsky {
        r.insert("momenta".into(), strings(&ostro_momenta(&b.l)?));
    }
    r.insert("euler_lagrange".into(), strings(&euler_lagrange(&b.l)?));
    let eqs: Vec<Value> = b
        .sys
        .states
        .iter()
        .zip(&b.sys.rhs)
        .map(|(s, e)| json!(format!("{s}' = {e}")))
        .collect();
    r.insert(
        "implicit_system".into(),
        json!({"states": names(&b.sys.states), "equations": eqs, "constraints": strings(&b.sys.constraints),
               "multipliers": names(&b.sys.multipliers)}),
    );
    r.insert("hessian_rank".into(), json!(generic_rank(&b.l)?));
    let hamiltonian = match &b.schmidt {
        Some(s) => s
            .hamiltonian
            .clone()
            .ok_or_else(|| "the momentum relation is not symbolically invertible".to_string()),
        None => match explicit_hamiltonian(&b.l) {
            Ok(h) => Ok(h),
            Err(e @ (Error::Degenerate { .. } | Error::NotSolvable(_))) => Err(e.to_string()),
            Err(e) => return Err(e.into()),
        },
    };
    r.insert(
        "hamiltonian".into(),
        match hamiltonian {
            Ok(h) => json!(h.to_string()),
            Err(why) => json!({"unavailable": why}),
        },
    );
    if let (Some(s), Some(f)) = (&b.schmidt, &b.gauge) {
        let mut g = Map::new();
        g.insert("gauge".into(), json!(f.to_string()));
        g.insert("extended_lagrangian".into(), json!(s.l_ext.to_string()));
        if cfg.method == Method::Schmidt2 {
            g.insert("chi".into(), json!(chi_holds(&b.l, f)?));
            g.insert(
                "pullback".into(),
                json!(ostro_schmidt_pullback_check(&b.l, f)?),
            );
        }
        r.insert("schmidt".into(), Value::Object(g));
    }

    let opts = cfg.check_options(seed, None)?.with_points(20);
    let points = morse_sample_points(&b.mf, &opts)?;
    let morse = morse_rank_check(&b.mf, &points)?;
    r.insert(
        "morse_rank".into(),
        json!({"points": points.len(), "pass": morse.pass, "sup": morse.sup}),
    );

    if let Some((f, _, order)) = split_affine(&b.l) {
        let v = match affine_symmetry_check(&f, order, &opts.clone().with_points(50)) {
            Ok(rep) => {
                let mut m = Map::new();
                m.insert("pass".into(), json!(rep.pass));
                m.insert("sup".into(), json!(rep.sup));
                if !rep.pass {
                    m.insert(
                        "warning".into(),
                        json!("affine symmetry check fails: no Hamilton-Jacobi solution of the affine template exists"),
                    );
                }
                Value::Object(m)
            }
            Err(e) => json!({"not_applicable": e.to_string()}),
        };
        r.insert("affine_symmetry".into(), v);
    }
    Ok(Outcome::ok(Value::Object(r)))
}

fn initial_state(
    cfg: &JobConfig,
    b: &Built,
    start: Start,
    opts: &CheckOptions,
) -> Result<Binding, CliError> {
    let given = cfg.initial()?;
    Ok(match start {
        Start::State => given,
        Start::Jet => match &b.schmidt {
            Some(s) => schmidt_initial_state(s, &given)?,
            None => ostro_initial_state(&b.l, &given)?,
        },
        Start::Gamma => {
            let gamma = cfg.one_form(&b.mf.base, opts)?;
            let mut out = given.clone();
            for (p, c) in gamma.momenta.iter().zip(&gamma.components) {
                out.set(p.clone(), eval(c, &given)?);
            }
            out
        }
    })
}

fn constraint_sup(sys: &ImplicitSystem, traj: &Trajectory) -> Result<f64, CliError> {
    let prep = Prepared::new(sys, &traj.params)?;
    let ns = sys.states.len();
    let mut sup = 0.0f64;
    for row in &traj.data {
        sup = sup.max(prep.constraint_residual(&row[..ns], &row[ns..])?);
    }
    Ok(sup)
}

fn final_values(traj: &Trajectory) -> Value {
    let mut m = Map::new();
    if let Some(row) = traj.data.last() {
        for (s, v) in traj.symbols.iter().zip(row) {
            m.insert(s.name(), json!(v));
        }
    }
    Value::Object(m)
}

/// RK4 integration with a trajectory CSV; a failure after the start is
/// reported with the last time reached.
pub fn simulate(cfg: &JobConfig, run: RunOptions) -> Result<Outcome, CliError> {
    let sim = cfg
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::config("simulate requires a simulation block"))?;
    let b = build(cfg)?;
    let opts = cfg.check_options(cfg.seed_or(run.seed), run.tol)?;
    let init = initial_state(cfg, &b, sim.start, &opts)?;
    let mut r = header(cfg, "simulate");
    r.insert(
        "integrator".into(),
        json!({"method": "rk4", "t0": sim.t0, "t1": sim.t1, "h": sim.h}),
    );
    let (traj, failure) = match integrate_rk4_partial(&b.sys, &init, sim.t0, sim.t1, sim.h) {
        Ok(v) => v,
        Err(e) if e.exit_code() == 2 => return Err(e.into()),
        Err(e) => {
            let ce = CliError::from(e.clone());
            let mut err = error_value(&ce);
            if let Error::SingularJacobian { rank, size } = e {
                err["rank"] = json!(rank);
                err["size"] = json!(size);
            }
            r.insert("status".into(), json!("aborted"));
            r.insert("samples".into(), json!(0));
            r.insert("last_good_time".into(), json!(sim.t0));
            r.insert("error".into(), err);
            return Ok(Outcome {
                report: Value::Object(r),
                csv: None,
                code: ce.code,
            });
        }
    };
    let t_last = *traj
        .times
        .last()
        .expect("initial sample is always recorded");
    r.insert(
        "status".into(),
        json!(if failure.is_some() { "aborted" } else { "ok" }),
    );
    r.insert("samples".into(), json!(traj.len()));
    r.insert("last_good_time".into(), json!(t_last));
    r.insert("energy_drift".into(), json!(energy_drift(&traj)));
    r.insert(
        "constraint_sup".into(),
        json!(constraint_sup(&b.sys, &traj)?),
    );
    r.insert("final".into(), final_values(&traj));
    let code = match failure {
        Some(e) => {
            let ce = CliError::from(e);
            r.insert("error".into(), error_value(&ce));
            ce.code
        }
        None => 0,
    };
    Ok(Outcome {
        report: Value::Object(r),
        csv: Some(traj.to_csv()),
        code,
    })
}

fn relatedness(
    cfg: &JobConfig,
    b: &Built,
    gamma: &ClosedOneForm,
    opts: &CheckOptions,
) -> Result<Option<(Value, bool)>, CliError> {
    let Some(sim) = &cfg.simulation else {
        return Ok(None);
    };
    let init = initial_state(cfg, b, sim.start, opts)?;
    let mut traj = integrate_rk4(&b.sys, &init, sim.t0, sim.t1, sim.h)?;
    traj.params.extend(&cfg.params());
    let tol = cfg.relatedness_tol();
    let rep = gamma_relatedness(&b.sys, gamma, &traj, tol)?;
    let pass = rep.pass;
    let mut v = json!({"tol": tol, "sup": rep.sup, "pass": rep.pass, "samples": rep.samples});
    if !sim.perturb.is_empty() {
        for (name, x) in &sim.perturb {
            traj.params.set(Symbol::param(name), *x);
        }
        let neg = gamma_relatedness(&b.sys, gamma, &traj, tol)?;
        v["perturbed"] = json!({"params": sim.perturb, "sup": neg.sup, "pass": neg.pass});
    }
    Ok(Some((v, pass)))
}

/// Residuals of the Hamilton–Jacobi system for the configured one-form, the
/// Hamiltonian form when one is available, and relatedness along a simulated
/// trajectory when a simulation block is present.
pub fn hj_check(cfg: &JobConfig, run: RunOptions) -> Result<Outcome, CliError> {
    if !cfg.has_one_form() {
        return Err(CliError::config("hj-check requires potential or gamma"));
    }
    let b = build(cfg)?;
    let opts = cfg.check_options(cfg.seed_or(run.seed), run.tol)?;
    let gamma = cfg.one_form(&b.mf.base, &opts)?;
    let mut r = header(cfg, "hj-check");
    r.insert("gamma".into(), strings(&gamma.components));
    let rep = hj_residual(&b.mf, &gamma, &opts)?;
    let mut pass = rep.pass;
    r.insert("system".into(), json!(rep.system));
    r.insert("residual".into(), to_value(&rep));

    let h = match &b.schmidt {
        Some(s) => s.hamiltonian.clone(),
        None => explicit_hamiltonian(&b.l).ok(),
    };
    if let Some(h) = h {
        let nd = hj_residual_nondeg(&h, &gamma, &opts)?;
        let spread = nd.spread.unwrap_or(f64::NAN);
        r.insert(
            "hamiltonian".into(),
            json!({"expression": h.to_string(), "sup": nd.sup, "pass": nd.pass, "spread": spread,
                   "constant": spread <= opts.tol}),
        );
    }
    if let Some((v, ok)) = relatedness(cfg, &b, &gamma, &opts)? {
        pass &= ok;
        r.insert("relatedness".into(), v);
    }
    r.insert("pass".into(), json!(pass));
    Ok(Outcome {
        report: Value::Object(r),
        csv: None,
        code: if pass { 0 } else { 1 },
    })
}

/// Symmetry and integrability criteria, then the closed one-form they
/// produce, re-verified against the Hamilton–Jacobi residual.
pub fn hj_solve_affine(cfg: &JobConfig, run: RunOptions) -> Result<Outcome, CliError> {
    let (f, g, order) = affine_data(cfg)?;
    let opts = cfg.check_options(cfg.seed_or(run.seed), run.tol)?;
    let mut r = header(cfg, "hj-solve-affine");
    r.insert("order".into(), json!(order.k()));
    r.insert("f".into(), strings(&f));
    r.insert("g".into(), json!(g.to_string()));
    let sym = affine_symmetry_check(&f, order, &opts)?;
    r.insert("symmetry".into(), json!({"sup": sym.sup, "pass": sym.pass}));
    let integ = affine_integrability_check(&f, &g, order, &opts)?;
    r.insert(
        "integrability".into(),
        json!({"sup": integ.sup, "pass": integ.pass}),
    );
    let gamma = match affine_hj_solve(&f, &g, order, &opts) {
        Ok(gamma) => gamma,
        Err(e) if e.exit_code() == 1 => {
            let ce = CliError::from(e);
            r.insert("status".into(), json!("no solution"));
            r.insert("error".into(), error_value(&ce));
            return Ok(Outcome {
                report: Value::Object(r),
                csv: None,
                code: ce.code,
            });
        }
        Err(e) => return Err(e.into()),
    };
    r.insert("status".into(), json!("solved"));
    r.insert("positions".into(), names(&gamma.positions));
    r.insert("gamma".into(), strings(&gamma.components));
    let w = line_integral_potential(&gamma.positions, &gamma.components);
    r.insert(
        "potential".into(),
        w.map_or(Value::Null, |w| json!(w.to_string())),
    );
    let mf = ostro_energy(&affine_lagrangian(&f, &g, order)?);
    let verify = hj_residual(&mf, &gamma, &opts)?;
    r.insert(
        "verification".into(),
        json!({"system": verify.system, "sup": verify.sup, "pass": verify.pass}),
    );
    Ok(Outcome {
        report: Value::Object(r),
        csv: None,
        code: if verify.pass { 0 } else { 1 },
    })
}
