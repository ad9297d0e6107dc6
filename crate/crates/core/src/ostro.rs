//! Ostrogradsky–Legendre pipeline: energy function, momenta, higher-order
//! Euler–Lagrange equations, nondegeneracy, explicit Hamiltonian.

use crate::charts::ChartSpec;
use crate::dynamics::{assemble, ImplicitSystem};
use crate::error::{Error, Result};
use crate::linalg::{rank, solve_linear};
use crate::symexpr::{
    default_rng, diff, eval, parse_simplified, simplify, total_time_derivative_n, Binding, Expr,
    Kind, SampleBox, Symbol,
};
use nalgebra::DMatrix;

/// A Lagrangian of order `k` on an `n`-dimensional configuration space.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSpec {
    pub dim: u32,
    pub order: u32,
    pub lagrangian: Expr,
}

impl LagrangianSpec {
    /// Validates that `L` only involves `q{A}_{j}` with `A <= n`, `j <= k`, and parameters.
    pub fn new(dim: u32, order: u32, lagrangian: Expr) -> Result<Self> {
        if dim == 0 || order == 0 {
            return Err(Error::Precondition("n and k must be at least 1".into()));
        }
        for s in lagrangian.free_symbols() {
            if s.is_param() {
                continue;
            }
            if s.kind() != Kind::Q || s.component() > dim {
                return Err(Error::Precondition(format!(
                    "Lagrangian may only use q{{A}}_{{j}} with A <= {dim}; found {s}"
                )));
            }
            if s.level() > order {
                return Err(Error::LevelOverflow {
                    symbol: s.name(),
                    max_order: order,
                });
            }
        }
        Ok(LagrangianSpec {
            dim,
            order,
            lagrangian: simplify(&lagrangian),
        })
    }

    pub fn parse(dim: u32, order: u32, text: &str) -> Result<Self> {
        Self::new(dim, order, parse_simplified(text)?)
    }

    pub fn q(&self, a: u32, level: u32) -> Symbol {
        Symbol::q(a, level)
    }

    /// `q{A}_{level}` for `A = 1..n`.
    pub fn level(&self, level: u32) -> Vec<Symbol> {
        (1..=self.dim).map(|a| Symbol::q(a, level)).collect()
    }

    /// Jet order large enough for every derived expression (`2k`).
    pub fn jet_order(&self) -> u32 {
        2 * self.order + 1
    }

    /// Free parameters of the Lagrangian.
    pub fn params(&self) -> Vec<Symbol> {
        self.lagrangian
            .free_symbols()
            .into_iter()
            .filter(Symbol::is_param)
            .collect()
    }
}

/// An energy function on the total space of a bundle over a cotangent chart.
/// The fiber symbols play the role of Lagrange multipliers.
#[derive(Clone, Debug, PartialEq)]
pub struct MorseFamily {
    pub base: ChartSpec,
    pub fibers: Vec<Symbol>,
    pub energy: Expr,
}

impl MorseFamily {
    pub fn new(base: ChartSpec, fibers: Vec<Symbol>, energy: Expr) -> Result<Self> {
        for s in energy.free_symbols() {
            if !(s.is_param() || base.roster.contains(&s) || fibers.contains(&s)) {
                return Err(Error::ChartMismatch {
                    expected: format!("symbols of {base} or fibers"),
                    found: s.name(),
                });
            }
        }
        Ok(MorseFamily {
            base,
            fibers,
            energy,
        })
    }
}

/// `E = sum_kappa p{A}_kappa q{A}_{kappa+1} - L` on `T* T^{k-1} Q`, fibers `q{A}_k`.
pub fn ostro_energy(l: &LagrangianSpec) -> MorseFamily {
    let (n, k) = (l.dim, l.order);
    let mut terms = Vec::new();
    for kappa in 0..k {
        for a in 1..=n {
            terms.push(Expr::sym(Symbol::p(a, kappa)) * Expr::sym(Symbol::q(a, kappa + 1)));
        }
    }
    terms.push(-l.lagrangian.clone());
    MorseFamily {
        base: ChartSpec::cot_tk1(n, k),
        fibers: l.level(k),
        energy: Expr::add(terms),
    }
}

/// Ostrogradsky momenta
/// `p{A}_kappa = sum_{j=kappa}^{k-1} (-d/dt)^{j-kappa} dL/dq{A}_{j+1}`,
/// ordered level-major like the momentum roster.
pub fn ostro_momenta(l: &LagrangianSpec) -> Result<Vec<Expr>> {
    let (n, k) = (l.dim, l.order);
    let mut out = Vec::with_capacity((n * k) as usize);
    for kappa in 0..k {
        for a in 1..=n {
            let mut terms = Vec::new();
            for j in kappa..k {
                let d = diff(&l.lagrangian, &Symbol::q(a, j + 1));
                let times = j - kappa;
                let t = total_time_derivative_n(&d, times, l.jet_order())?;
                terms.push(if times % 2 == 0 { t } else { -t });
            }
            out.push(simplify(&Expr::add(terms)));
        }
    }
    Ok(out)
}

/// Residuals `sum_i (-1)^i (d/dt)^i dL/dq{A}_i`, one per component.
pub fn euler_lagrange(l: &LagrangianSpec) -> Result<Vec<Expr>> {
    let mut out = Vec::with_capacity(l.dim as usize);
    for a in 1..=l.dim {
        let mut terms = Vec::new();
        for i in 0..=l.order {
            let d = diff(&l.lagrangian, &Symbol::q(a, i));
            let t = total_time_derivative_n(&d, i, l.jet_order())?;
            terms.push(if i % 2 == 0 { t } else { -t });
        }
        out.push(simplify(&Expr::add(terms)));
    }
    Ok(out)
}

/// `q' = dE/dp`, `p' = -dE/dq`, `dE/dq_k = 0` with the top derivatives as multipliers.
pub fn ostro_implicit_system(mf: &MorseFamily) -> Result<ImplicitSystem> {
    assemble(mf)
}

/// The acceleration Hessian `[d^2 L / dq{A}_k dq{B}_k]` symbolically.
pub fn top_hessian(l: &LagrangianSpec) -> Vec<Vec<Expr>> {
    let top = l.level(l.order);
    top.iter()
        .map(|a| {
            let da = diff(&l.lagrangian, a);
            top.iter().map(|b| diff(&da, b)).collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Nondegeneracy {
    pub rank: usize,
    pub full: bool,
}

/// Numeric rank of the top Hessian at a point.
pub fn nondegeneracy(l: &LagrangianSpec, at: &Binding) -> Result<Nondegeneracy> {
    let h = top_hessian(l);
    let n = l.dim as usize;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = eval(&h[i][j], at)?;
        }
    }
    let r = rank(&m);
    Ok(Nondegeneracy {
        rank: r,
        full: r == n,
    })
}

/// Smallest Hessian rank over a handful of random points; generic rank in practice.
pub fn generic_rank(l: &LagrangianSpec) -> Result<usize> {
    let h = top_hessian(l);
    let entries: Vec<Expr> = h.iter().flatten().cloned().collect();
    let mut syms: Vec<Expr> = entries.clone();
    syms.push(l.lagrangian.clone());
    let pts = SampleBox::uniform(0.3, 1.7).sample(&syms, 5, &mut default_rng())?;
    let mut best = usize::MAX;
    for b in &pts {
        best = best.min(nondegeneracy(l, b)?.rank);
    }
    Ok(best)
}

/// Solve `p{A}_{k-1} = dL/dq{A}_k` for the top derivatives and substitute
/// into the energy. Requires a generically nondegenerate Hessian and
/// constraints linear in `q_k`.
pub fn explicit_hamiltonian(l: &LagrangianSpec) -> Result<Expr> {
    let n = l.dim as usize;
    let r = generic_rank(l)?;
    if r < n {
        return Err(Error::Degenerate { rank: r, dim: n });
    }
    let mf = ostro_energy(l);
    let sys = assemble(&mf)?;
    let sol = solve_linear(&sys.constraints, &mf.fibers)?;
    Ok(simplify(&mf.energy.subs(&sol)))
}

/// Base-chart state `(q_0 .. q_{k-1}, p_0 .. p_{k-1})` from a jet binding
/// `q{A}_j`, `j < 2k`, plus parameters, which are carried along.
pub fn ostro_initial_state(l: &LagrangianSpec, jet: &Binding) -> Result<Binding> {
    let momenta = ostro_momenta(l)?;
    let chart = ChartSpec::cot_tk1(l.dim, l.order);
    let mut out: Binding = jet
        .iter()
        .filter(|(s, _)| s.is_param())
        .map(|(s, v)| (s.clone(), *v))
        .collect();
    let half = chart.roster.len() / 2;
    for q in &chart.roster[..half] {
        out.set(q.clone(), jet.get(q)?);
    }
    for (p, e) in chart.roster[half..].iter().zip(&momenta) {
        out.set(p.clone(), eval(e, jet)?);
    }
    Ok(out)
}
