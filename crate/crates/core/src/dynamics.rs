//! Implicit systems generated by Morse families: assembly, multiplier
//! elimination, fixed-step RK4 integration, energy monitoring, lifting.

use crate::charts::ChartSpec;
use crate::error::{Error, Result};
use crate::hamjac::ClosedOneForm;
use crate::linalg::{lstsq, rank};
use crate::ostro::MorseFamily;
use crate::symexpr::{diff, simplify, Binding, Compiled, Expr, Symbol};
use nalgebra::{DMatrix, DVector};
use std::fmt::Write as _;

/// Newton tolerance for multiplier resolution.
pub const NEWTON_TOL: f64 = 1e-12;
/// Newton iteration cap.
pub const NEWTON_MAX_ITERS: usize = 50;
/// Constraint residual accepted at the initial state.
pub const INIT_CONSTRAINT_TOL: f64 = 1e-9;

/// `states' = rhs(states, multipliers)` subject to `constraints = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitSystem {
    pub chart: ChartSpec,
    pub states: Vec<Symbol>,
    /// One right-hand side per state, in the same order.
    pub rhs: Vec<Expr>,
    pub constraints: Vec<Expr>,
    pub multipliers: Vec<Symbol>,
    /// Energy monitored along trajectories.
    pub energy: Option<Expr>,
}

impl ImplicitSystem {
    pub fn new(
        chart: ChartSpec,
        states: Vec<Symbol>,
        rhs: Vec<Expr>,
        constraints: Vec<Expr>,
        multipliers: Vec<Symbol>,
        energy: Option<Expr>,
    ) -> Result<Self> {
        if states.len() != rhs.len() {
            return Err(Error::Arity {
                expected: states.len(),
                found: rhs.len(),
            });
        }
        Ok(ImplicitSystem {
            chart,
            states,
            rhs,
            constraints,
            multipliers,
            energy,
        })
    }

    /// Right-hand side of `s`, if it is a state.
    pub fn rhs_of(&self, s: &Symbol) -> Option<&Expr> {
        self.states
            .iter()
            .position(|x| x == s)
            .map(|i| &self.rhs[i])
    }

    /// Parameters (non-state, non-multiplier symbols) referenced anywhere.
    pub fn params(&self) -> Vec<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        for e in self
            .rhs
            .iter()
            .chain(&self.constraints)
            .chain(self.energy.iter())
        {
            out.extend(e.free_symbols());
        }
        out.into_iter()
            .filter(|s| !self.states.contains(s) && !self.multipliers.contains(s))
            .collect()
    }

    /// `true` if every constraint is affine in the multipliers.
    pub fn is_linear(&self) -> bool {
        self.constraints.iter().all(|c| {
            self.multipliers
                .iter()
                .all(|m| !diff(c, m).contains_any(&self.multipliers))
        })
    }
}

/// `q' = dE/dp`, `p' = -dE/dq` for each cotangent pair, `dE/dlambda = 0` for each fiber.
pub fn assemble(mf: &MorseFamily) -> Result<ImplicitSystem> {
    let pairs = mf
        .base
        .cotangent_pairs()
        .ok_or_else(|| Error::ChartMismatch {
            expected: "a cotangent chart".into(),
            found: mf.base.to_string(),
        })?;
    let mut qdot = Vec::with_capacity(pairs.len());
    let mut pdot = Vec::with_capacity(pairs.len());
    for (q, p) in &pairs {
        qdot.push(diff(&mf.energy, p));
        pdot.push(simplify(&-diff(&mf.energy, q)));
    }
    let (qs, ps): (Vec<Symbol>, Vec<Symbol>) = pairs.into_iter().unzip();
    let states = qs.into_iter().chain(ps).collect();
    let rhs = qdot.into_iter().chain(pdot).collect();
    let constraints = mf.fibers.iter().map(|l| diff(&mf.energy, l)).collect();
    ImplicitSystem::new(
        mf.base.clone(),
        states,
        rhs,
        constraints,
        mf.fibers.clone(),
        Some(mf.energy.clone()),
    )
}

/// A system compiled against the slot layout `states ++ multipliers`, with
/// parameters inlined.
#[derive(Clone, Debug)]
pub struct Prepared {
    ns: usize,
    nm: usize,
    linear: bool,
    rhs: Compiled,
    constraints: Compiled,
    jacobian: Compiled,
    energy: Option<Compiled>,
}

impl Prepared {
    pub fn new(sys: &ImplicitSystem, params: &Binding) -> Result<Self> {
        let slots: Vec<Symbol> = sys.states.iter().chain(&sys.multipliers).cloned().collect();
        let jac: Vec<Expr> = sys
            .constraints
            .iter()
            .flat_map(|c| sys.multipliers.iter().map(move |m| diff(c, m)))
            .collect();
        Ok(Prepared {
            ns: sys.states.len(),
            nm: sys.multipliers.len(),
            linear: sys.is_linear(),
            rhs: Compiled::new(&sys.rhs, &slots, params)?,
            constraints: Compiled::new(&sys.constraints, &slots, params)?,
            jacobian: Compiled::new(&jac, &slots, params)?,
            energy: match &sys.energy {
                Some(e) => Some(Compiled::new(std::slice::from_ref(e), &slots, params)?),
                None => None,
            },
        })
    }

    fn jacobian_at(&self, slots: &[f64]) -> Result<DMatrix<f64>> {
        let v = self.jacobian.eval(slots)?;
        Ok(DMatrix::from_row_slice(self.constraints.len(), self.nm, &v))
    }

    /// Multiplier values at `state`, warm-started from `guess`.
    pub fn resolve(&self, state: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        if self.nm == 0 {
            return Ok(Vec::new());
        }
        let mut slots: Vec<f64> = state.to_vec();
        match guess {
            Some(g) => slots.extend_from_slice(g),
            None => slots.resize(self.ns + self.nm, 0.0),
        }
        if self.linear {
            slots[self.ns..].iter_mut().for_each(|x| *x = 0.0);
            let j = self.jacobian_at(&slots)?;
            let r = rank(&j);
            if r < self.nm {
                return Err(Error::SingularJacobian {
                    rank: r,
                    size: self.nm,
                });
            }
            let c0 = DVector::from_vec(self.constraints.eval(&slots)?);
            return Ok(lstsq(&j, &-c0)?.iter().copied().collect());
        }
        for _ in 0..NEWTON_MAX_ITERS {
            let c = DVector::from_vec(self.constraints.eval(&slots)?);
            let j = self.jacobian_at(&slots)?;
            let r = rank(&j);
            if r < self.nm {
                return Err(Error::SingularJacobian {
                    rank: r,
                    size: self.nm,
                });
            }
            let step = lstsq(&j, &-c)?;
            let mut scale = 0.0f64;
            for (x, d) in slots[self.ns..].iter_mut().zip(step.iter()) {
                *x += d;
                scale = scale.max(x.abs());
            }
            if step.amax() <= NEWTON_TOL * (1.0 + scale) {
                return Ok(slots[self.ns..].to_vec());
            }
        }
        Err(Error::NoConvergence(format!(
            "{NEWTON_MAX_ITERS} iterations"
        )))
    }

    /// State derivative with multipliers resolved; returns the multipliers used.
    pub fn field(&self, state: &[f64], guess: Option<&[f64]>, out: &mut [f64]) -> Result<Vec<f64>> {
        let lam = self.resolve(state, guess)?;
        let slots: Vec<f64> = state.iter().chain(&lam).copied().collect();
        self.rhs.eval_into(&slots, out)?;
        Ok(lam)
    }

    pub fn constraint_residual(&self, state: &[f64], lam: &[f64]) -> Result<f64> {
        let slots: Vec<f64> = state.iter().chain(lam).copied().collect();
        Ok(self
            .constraints
            .eval(&slots)?
            .iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn energy(&self, state: &[f64], lam: &[f64]) -> Result<Option<f64>> {
        let Some(e) = &self.energy else {
            return Ok(None);
        };
        let slots: Vec<f64> = state.iter().chain(lam).copied().collect();
        e.eval_one(0, &slots).map(Some)
    }
}

/// Multiplier values at a point binding every state and parameter.
pub fn resolve_multipliers(sys: &ImplicitSystem, at: &Binding) -> Result<Binding> {
    let prep = Prepared::new(sys, at)?;
    let state = at.values_of(&sys.states)?;
    let guess = sys
        .multipliers
        .iter()
        .map(|m| at.try_get(m))
        .collect::<Option<Vec<f64>>>();
    let lam = prep.resolve(&state, guess.as_deref())?;
    Ok(sys.multipliers.iter().cloned().zip(lam).collect())
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct IntegratorMeta {
    pub method: String,
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    pub steps: usize,
}

/// Sampled solution curve. Row `i` of `data` holds the values of `symbols`
/// at `times[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub symbols: Vec<Symbol>,
    pub times: Vec<f64>,
    pub data: Vec<Vec<f64>>,
    pub energy: Vec<f64>,
    pub params: Binding,
    pub meta: IntegratorMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, s: &Symbol) -> Option<Vec<f64>> {
        let j = self.symbols.iter().position(|x| x == s)?;
        Some(self.data.iter().map(|row| row[j]).collect())
    }

    /// Sample `i` as a binding, including parameters.
    pub fn sample(&self, i: usize) -> Binding {
        let mut b = self.params.clone();
        for (s, v) in self.symbols.iter().zip(&self.data[i]) {
            b.set(s.clone(), *v);
        }
        b
    }

    pub fn last(&self) -> Option<Binding> {
        (!self.is_empty()).then(|| self.sample(self.len() - 1))
    }

    /// Header `t, symbols..., E`, then one row per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for sym in &self.symbols {
            s.push(',');
            s.push_str(&sym.name());
        }
        s.push_str(",E\n");
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{t:.16e}");
            for v in &self.data[i] {
                let _ = write!(s, ",{v:.16e}");
            }
            match self.energy.get(i) {
                Some(e) => {
                    let _ = write!(s, ",{e:.16e}");
                }
                None => s.push(','),
            }
            s.push('\n');
        }
        s
    }
}

/// Classical fixed-step RK4 on the multiplier-resolved field. The number of
/// steps is `ceil((t1 - t0) / h)` with the last step trimmed to land on `t1`.
pub fn integrate_rk4(
    sys: &ImplicitSystem,
    init: &Binding,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<Trajectory> {
    match integrate_rk4_partial(sys, init, t0, t1, h)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// As [`integrate_rk4`], but a failure after the initial state is accepted
/// returns the samples computed so far together with the error.
pub fn integrate_rk4_partial(
    sys: &ImplicitSystem,
    init: &Binding,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<(Trajectory, Option<Error>)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::StepSize(h));
    }
    if !(t1 >= t0) {
        return Err(Error::Precondition(format!("t1 = {t1} precedes t0 = {t0}")));
    }
    let params: Binding = sys
        .params()
        .iter()
        .map(|p| init.get(p).map(|v| (p.clone(), v)))
        .collect::<Result<_>>()?;
    let prep = Prepared::new(sys, &params)?;
    let n = sys.states.len();
    let mut x = init.values_of(&sys.states)?;
    let guess = sys
        .multipliers
        .iter()
        .map(|m| init.try_get(m))
        .collect::<Option<Vec<f64>>>();
    let mut lam = prep.resolve(&x, guess.as_deref())?;
    let res = prep.constraint_residual(&x, &lam)?;
    if res > INIT_CONSTRAINT_TOL {
        return Err(Error::Precondition(format!(
            "initial state violates constraints by {res:e}"
        )));
    }

    let span = t1 - t0;
    let steps = ((span / h) - 1e-9).ceil().max(0.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut data = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    // A sample is appended only once its energy evaluated.
    let record = |t: f64,
                  x: &[f64],
                  lam: &[f64],
                  times: &mut Vec<f64>,
                  data: &mut Vec<Vec<f64>>,
                  energy: &mut Vec<f64>|
     -> Result<()> {
        if let Some(e) = prep.energy(x, lam)? {
            energy.push(e);
        }
        times.push(t);
        data.push(x.iter().chain(lam).copied().collect());
        Ok(())
    };
    record(t0, &x, &lam, &mut times, &mut data, &mut energy)?;

    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut t = t0;
    let mut failure = None;
    for i in 0..steps {
        let dt = if i + 1 == steps { t1 - t } else { h };
        let mut step = || -> Result<Vec<f64>> {
            let l1 = prep.field(&x, Some(&lam), &mut k1)?;
            axpy(&x, 0.5 * dt, &k1, &mut tmp);
            let l2 = prep.field(&tmp, Some(&l1), &mut k2)?;
            axpy(&x, 0.5 * dt, &k2, &mut tmp);
            let l3 = prep.field(&tmp, Some(&l2), &mut k3)?;
            axpy(&x, dt, &k3, &mut tmp);
            prep.field(&tmp, Some(&l3), &mut k4)?;
            let next: Vec<f64> = (0..n)
                .map(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
                .collect();
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("non-finite state after t = {t}")));
            }
            Ok(next)
        };
        let next = match step().and_then(|next| prep.resolve(&next, Some(&lam)).map(|l| (next, l)))
        {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let t_next = if i + 1 == steps {
            t1
        } else {
            t0 + (i + 1) as f64 * h
        };
        if let Err(e) = record(t_next, &next.0, &next.1, &mut times, &mut data, &mut energy) {
            failure = Some(e);
            break;
        }
        (x, lam) = next;
        t = t_next;
    }

    let traj = Trajectory {
        symbols: sys.states.iter().chain(&sys.multipliers).cloned().collect(),
        times,
        data,
        energy,
        params,
        meta: IntegratorMeta {
            method: "rk4".into(),
            t0,
            t1,
            h,
            steps,
        },
    };
    Ok((traj, failure))
}

fn axpy(x: &[f64], a: f64, k: &[f64], out: &mut [f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// `max |E(t) - E(t0)| / (1 + |E(t0)|)`; zero without energy samples.
pub fn energy_drift(traj: &Trajectory) -> f64 {
    let Some(&e0) = traj.energy.first() else {
        return 0.0;
    };
    traj.energy
        .iter()
        .fold(0.0f64, |m, e| m.max((e - e0).abs()))
        / (1.0 + e0.abs())
}

/// Append the momenta `gamma(q(t))` to every sample (replacing existing columns).
pub fn lift_trajectory(gamma: &ClosedOneForm, base: &Trajectory) -> Result<Trajectory> {
    let idx: Vec<usize> = gamma
        .positions
        .iter()
        .map(|q| {
            base.symbols
                .iter()
                .position(|s| s == q)
                .ok_or_else(|| Error::ChartMismatch {
                    expected: format!("trajectory containing {q}"),
                    found: format!("{:?}", base.symbols),
                })
        })
        .collect::<Result<_>>()?;
    let prog = Compiled::new(&gamma.components, &gamma.positions, &base.params)?;
    let mut out = base.clone();
    let mut cols = Vec::with_capacity(gamma.momenta.len());
    for p in &gamma.momenta {
        match out.symbols.iter().position(|s| s == p) {
            Some(j) => cols.push(j),
            None => {
                out.symbols.push(p.clone());
                out.data.iter_mut().for_each(|row| row.push(0.0));
                cols.push(out.symbols.len() - 1);
            }
        }
    }
    let mut q = vec![0.0; idx.len()];
    let mut v = vec![0.0; gamma.momenta.len()];
    for row in out.data.iter_mut() {
        for (qi, &j) in q.iter_mut().zip(&idx) {
            *qi = row[j];
        }
        prog.eval_into(&q, &mut v)?;
        for (&j, vi) in cols.iter().zip(&v) {
            row[j] = *vi;
        }
    }
    Ok(out)
}
