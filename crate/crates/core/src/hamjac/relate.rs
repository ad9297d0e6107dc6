//! Condition 1 of the implicit HJ theorem (gamma-relatedness along sampled
//! curves) and the auxiliary-section relation.

use super::{
    check_symbols, gauss_newton, jacobian_exprs, CheckOptions, ClosedOneForm, ResidualReport,
};
use crate::dynamics::{ImplicitSystem, Trajectory};
use crate::error::{Error, Result};
use crate::symexpr::{diff, eval, simplify, Binding, Compiled, Expr, Symbol};

/// Default tolerance for trajectory-lift checks.
pub const RELATEDNESS_TOL: f64 = 1e-5;

/// Weights of the derivative at `x[c]` of the interpolant through `x`.
fn fd_weights(x: &[f64], c: usize) -> Vec<f64> {
    let x0 = x[c];
    (0..x.len())
        .map(|j| {
            let mut s = 0.0;
            for m in (0..x.len()).filter(|&m| m != j) {
                let mut prod = 1.0 / (x[j] - x[m]);
                for l in (0..x.len()).filter(|&l| l != j && l != m) {
                    prod *= (x0 - x[l]) / (x[j] - x[l]);
                }
                s += prod;
            }
            s
        })
        .collect()
}

/// Lift the positions of `traj` through `gamma` and evaluate the equations
/// of `sys` on the lifted curve. Position velocities come from 5-point finite
/// differences, momentum velocities from the chain rule through `gamma`, and
/// multipliers from least squares on all equations at each interior sample.
pub fn gamma_relatedness(
    sys: &ImplicitSystem,
    gamma: &ClosedOneForm,
    traj: &Trajectory,
    tol: f64,
) -> Result<ResidualReport> {
    if traj.len() < 5 {
        return Err(Error::TooShort(traj.len()));
    }
    let expected: Vec<Symbol> = gamma
        .positions
        .iter()
        .chain(&gamma.momenta)
        .cloned()
        .collect();
    if sys.states != expected {
        return Err(Error::ChartMismatch {
            expected: format!("{:?}", expected),
            found: format!("{:?}", sys.states),
        });
    }
    let cols: Vec<Vec<f64>> = gamma
        .positions
        .iter()
        .map(|q| {
            traj.column(q).ok_or_else(|| Error::ChartMismatch {
                expected: format!("trajectory containing {q}"),
                found: format!("{:?}", traj.symbols),
            })
        })
        .collect::<Result<_>>()?;

    let n = gamma.positions.len();
    let m = sys.multipliers.len();
    // Slots: positions, momenta, position velocities, multipliers.
    // One placeholder per position index; component/level would collide across kinds.
    let vel: Vec<Symbol> = (1..=n as u32).map(|i| Symbol::dq(i, 0)).collect();
    let slots: Vec<Symbol> = gamma
        .positions
        .iter()
        .chain(&gamma.momenta)
        .chain(&sys.multipliers)
        .cloned()
        .collect();
    let mut eqs = Vec::with_capacity(2 * n + sys.constraints.len());
    let mut labels = Vec::new();
    // Velocities enter as extra slots appended after the multipliers.
    let mut all_slots = slots.clone();
    all_slots.extend(vel.iter().cloned());
    for (i, q) in gamma.positions.iter().enumerate() {
        labels.push(format!("{q}' - rhs"));
        eqs.push(Expr::sym(vel[i].clone()) - sys.rhs[i].clone());
    }
    for (i, p) in gamma.momenta.iter().enumerate() {
        // p' along the lifted curve: sum_j d gamma_i / dx_j * x_j'.
        let chain = Expr::add(
            gamma
                .positions
                .iter()
                .zip(&vel)
                .map(|(x, v)| diff(&gamma.components[i], x) * Expr::sym(v.clone())),
        );
        labels.push(format!("{p}' - rhs"));
        eqs.push(chain - sys.rhs[n + i].clone());
    }
    for (i, c) in sys.constraints.iter().enumerate() {
        labels.push(format!("constraint {i}"));
        eqs.push(c.clone());
    }
    let sub = gamma.substitution();
    let eqs: Vec<Expr> = eqs.iter().map(|e| simplify(&e.subs(&sub))).collect();
    let jac = jacobian_exprs(&eqs, &sys.multipliers);
    let eq_prog = Compiled::new(&eqs, &all_slots, &traj.params)?;
    let jac_prog = Compiled::new(&jac, &all_slots, &traj.params)?;

    let mut values = Vec::new();
    let mut lam = vec![0.0; m];
    for c in 2..traj.len() - 2 {
        let w = fd_weights(&traj.times[c - 2..=c + 2], 2);
        let mut x = vec![0.0; all_slots.len()];
        for j in 0..n {
            x[j] = cols[j][c];
            x[2 * n + m + j] = (0..5).map(|s| w[s] * cols[j][c - 2 + s]).sum();
        }
        x[2 * n..2 * n + m].copy_from_slice(&lam);
        gauss_newton(&eq_prog, &jac_prog, &mut x, 2 * n, m)?;
        lam.copy_from_slice(&x[2 * n..2 * n + m]);
        values.push(eq_prog.eval(&x)?);
    }
    Ok(ResidualReport::from_values(
        "gamma-relatedness",
        labels,
        eqs,
        &values,
        tol,
    ))
}

/// A section selecting one velocity per point: `sigma_pos` over positions,
/// `sigma_mom` over momenta, both functions of positions and momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionSigma {
    pub pos: Vec<Expr>,
    pub mom: Vec<Expr>,
}

/// `sum_j sigma_pos_j d gamma_i / dx_j - sigma_mom_i` with momenta replaced by `gamma`.
pub fn local_vf_residual(
    sigma: &SectionSigma,
    gamma: &ClosedOneForm,
    opts: &CheckOptions,
) -> Result<ResidualReport> {
    let n = gamma.positions.len();
    for part in [&sigma.pos, &sigma.mom] {
        if part.len() != n {
            return Err(Error::Arity {
                expected: n,
                found: part.len(),
            });
        }
    }
    for e in sigma.pos.iter().chain(&sigma.mom) {
        check_symbols(e, &gamma.chart.roster)?;
    }
    let sub = gamma.substitution();
    let pos: Vec<Expr> = sigma.pos.iter().map(|e| e.subs(&sub)).collect();
    let exprs: Vec<Expr> = (0..n)
        .map(|i| {
            let lhs = Expr::add(
                pos.iter()
                    .zip(&gamma.positions)
                    .map(|(s, x)| s.clone() * diff(&gamma.components[i], x)),
            );
            simplify(&(lhs - sigma.mom[i].subs(&sub)))
        })
        .collect();
    let labels = gamma
        .momenta
        .iter()
        .map(|p| format!("sigma relation {p}"))
        .collect();
    let mut domain = exprs.clone();
    domain.extend(gamma.components.iter().cloned());
    let points: Vec<Binding> = opts.region.sample(&domain, opts.points, &mut opts.rng())?;
    let values: Vec<Vec<f64>> = points
        .iter()
        .map(|b| exprs.iter().map(|e| eval(e, b)).collect())
        .collect::<Result<_>>()?;
    Ok(ResidualReport::from_values(
        "local-vector-field",
        labels,
        exprs,
        &values,
        opts.tol,
    ))
}
