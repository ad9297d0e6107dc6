//! Hamilton–Jacobi verification: Morse rank, HJ residual systems,
//! gamma-relatedness along trajectories, the auxiliary-section method, and
//! affine-in-acceleration helpers.

mod affine;
mod relate;

pub use affine::{
    affine_gamma_components, affine_hj_solve, affine_integrability_check, affine_lagrangian,
    affine_symmetry_check, line_integral_potential, AffineOrder,
};
pub use relate::{gamma_relatedness, local_vf_residual, SectionSigma, RELATEDNESS_TOL};

use crate::charts::ChartSpec;
use crate::error::{Error, Result};
use crate::linalg::{lstsq, rank};
use crate::ostro::MorseFamily;
use crate::symexpr::{diff, eval, simplify, Binding, Compiled, Expr, SampleBox, Symbol};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Residual tolerance for symbolic-substitution checks.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Tolerance of the closure test applied to component one-forms.
pub const CLOSURE_TOL: f64 = 1e-9;
/// Points used by the closure test.
pub const CLOSURE_POINTS: usize = 50;

/// Sampling box, point count, tolerance and seed for a residual check.
#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub region: SampleBox,
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            region: SampleBox::uniform(-1.0, 1.0),
            points: 50,
            tol: DEFAULT_TOL,
            seed: 0x5eed,
        }
    }
}

impl CheckOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.points = n;
        self
    }

    pub fn with_region(mut self, region: SampleBox) -> Self {
        self.region = region;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Residual expressions with their sampled sup-norms.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ResidualReport {
    pub system: String,
    pub labels: Vec<String>,
    pub expressions: Vec<Expr>,
    pub sup_per_equation: Vec<f64>,
    pub samples: usize,
    pub sup: f64,
    pub tol: f64,
    pub pass: bool,
    /// `max - min` of the restricted Hamiltonian, when one is checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    /// Rank found at each sample, for rank checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
}

impl ResidualReport {
    /// Build from per-point residual values (`values[point][equation]`).
    pub fn from_values(
        system: &str,
        labels: Vec<String>,
        expressions: Vec<Expr>,
        values: &[Vec<f64>],
        tol: f64,
    ) -> Self {
        let mut per = vec![0.0f64; labels.len()];
        for row in values {
            for (m, v) in per.iter_mut().zip(row) {
                // NaN must fail, so it is propagated rather than ignored by max.
                *m = if v.is_nan() {
                    f64::NAN
                } else if m.is_nan() {
                    *m
                } else {
                    m.max(v.abs())
                };
            }
        }
        let sup = per.iter().fold(0.0f64, |m, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(*v)
            }
        });
        ResidualReport {
            system: system.to_string(),
            labels,
            expressions,
            sup_per_equation: per,
            samples: values.len(),
            sup,
            tol,
            pass: sup <= tol,
            spread: None,
            ranks: None,
        }
    }
}

/// A closed one-form on the configuration part of a cotangent chart, given by
/// one component per position coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedOneForm {
    pub chart: ChartSpec,
    pub positions: Vec<Symbol>,
    pub momenta: Vec<Symbol>,
    pub components: Vec<Expr>,
    pub potential: Option<Expr>,
}

fn cotangent(chart: &ChartSpec) -> Result<(Vec<Symbol>, Vec<Symbol>)> {
    let pairs = chart
        .cotangent_pairs()
        .ok_or_else(|| Error::ChartMismatch {
            expected: "a cotangent chart".into(),
            found: chart.to_string(),
        })?;
    Ok(pairs.into_iter().unzip())
}

fn check_symbols(e: &Expr, allowed: &[Symbol]) -> Result<()> {
    for s in e.free_symbols() {
        if !s.is_param() && !allowed.contains(&s) {
            return Err(Error::ChartMismatch {
                expected: format!("an expression over {allowed:?}"),
                found: s.name(),
            });
        }
    }
    Ok(())
}

impl ClosedOneForm {
    /// `gamma = dW`.
    pub fn from_potential(chart: ChartSpec, w: Expr) -> Result<Self> {
        let (positions, momenta) = cotangent(&chart)?;
        check_symbols(&w, &positions)?;
        let components = positions.iter().map(|x| diff(&w, x)).collect();
        Ok(ClosedOneForm {
            chart,
            positions,
            momenta,
            components,
            potential: Some(w),
        })
    }

    /// Components checked for closure at random points of `[-1, 1]`.
    pub fn from_components(chart: ChartSpec, components: Vec<Expr>) -> Result<Self> {
        Self::from_components_in(chart, components, &SampleBox::uniform(-1.0, 1.0))
    }

    /// Components checked for closure at random points of `region`.
    pub fn from_components_in(
        chart: ChartSpec,
        components: Vec<Expr>,
        region: &SampleBox,
    ) -> Result<Self> {
        let (positions, momenta) = cotangent(&chart)?;
        if components.len() != positions.len() {
            return Err(Error::Arity {
                expected: positions.len(),
                found: components.len(),
            });
        }
        for c in &components {
            check_symbols(c, &positions)?;
        }
        let components: Vec<Expr> = components.iter().map(simplify).collect();
        let form = ClosedOneForm {
            chart,
            positions,
            momenta,
            components,
            potential: None,
        };
        form.check_closure(region)?;
        Ok(form)
    }

    /// Symbolic closure residuals `d gamma_i / dx_j - d gamma_j / dx_i` for `i < j`
    /// that do not simplify to zero.
    pub fn closure_residuals(&self) -> Vec<(usize, usize, Expr)> {
        let n = self.positions.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let r = simplify(
                    &(diff(&self.components[i], &self.positions[j])
                        - diff(&self.components[j], &self.positions[i])),
                );
                if !r.is_zero() {
                    out.push((i, j, r));
                }
            }
        }
        out
    }

    fn check_closure(&self, region: &SampleBox) -> Result<()> {
        let residuals = self.closure_residuals();
        if residuals.is_empty() {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let exprs: Vec<Expr> = residuals.iter().map(|(_, _, r)| r.clone()).collect();
        let points = region.sample(&exprs, CLOSURE_POINTS, &mut rng)?;
        for (i, j, r) in &residuals {
            let mut worst = 0.0f64;
            for b in &points {
                worst = worst.max(eval(r, b)?.abs());
            }
            if !(worst <= CLOSURE_TOL) {
                return Err(Error::NotClosed {
                    i: self.positions[*i].name(),
                    j: self.positions[*j].name(),
                    residual: worst,
                });
            }
        }
        Ok(())
    }

    /// `p_i -> gamma_i`.
    pub fn substitution(&self) -> BTreeMap<Symbol, Expr> {
        self.momenta
            .iter()
            .cloned()
            .zip(self.components.iter().cloned())
            .collect()
    }

    /// Free parameters of the components.
    pub fn params(&self) -> BTreeSet<Symbol> {
        self.components
            .iter()
            .flat_map(|c| c.free_symbols())
            .filter(Symbol::is_param)
            .collect()
    }

    /// Substitute parameter values into the components (and the potential).
    pub fn bind_params(&self, params: &Binding) -> Self {
        let map: BTreeMap<Symbol, Expr> = params
            .iter()
            .filter(|(s, _)| s.is_param())
            .map(|(s, v)| (s.clone(), Expr::float(*v)))
            .collect();
        ClosedOneForm {
            chart: self.chart.clone(),
            positions: self.positions.clone(),
            momenta: self.momenta.clone(),
            components: self
                .components
                .iter()
                .map(|c| simplify(&c.subs(&map)))
                .collect(),
            potential: self.potential.as_ref().map(|w| simplify(&w.subs(&map))),
        }
    }
}

/// Rank of `[d2E/dlambda dx | d2E/dlambda dlambda]` at each point; passes iff
/// it equals the number of fibers everywhere.
pub fn morse_rank_check(mf: &MorseFamily, points: &[Binding]) -> Result<ResidualReport> {
    let cols: Vec<Symbol> = mf.base.roster.iter().chain(&mf.fibers).cloned().collect();
    let m = mf.fibers.len();
    let entries: Vec<Expr> = mf
        .fibers
        .iter()
        .flat_map(|l| {
            let dl = diff(&mf.energy, l);
            cols.iter().map(move |x| diff(&dl, x)).collect::<Vec<_>>()
        })
        .collect();
    let mut ranks = Vec::with_capacity(points.len());
    let mut values = Vec::with_capacity(points.len());
    for b in points {
        let mut mat = DMatrix::zeros(m, cols.len());
        for (idx, e) in entries.iter().enumerate() {
            mat[(idx / cols.len(), idx % cols.len())] = eval(e, b)?;
        }
        let r = rank(&mat);
        ranks.push(r);
        values.push(vec![(m - r) as f64]);
    }
    let degenerate_zero = mf.energy.is_zero();
    let mut report = ResidualReport::from_values(
        "morse-rank",
        vec!["rank deficiency".into()],
        vec![],
        &values,
        0.0,
    );
    if degenerate_zero {
        report.pass = false;
    }
    report.ranks = Some(ranks);
    Ok(report)
}

/// Random points over the base and fibers of a family, for rank checks.
pub fn morse_sample_points(mf: &MorseFamily, opts: &CheckOptions) -> Result<Vec<Binding>> {
    let mut syms: Vec<Expr> = mf
        .base
        .roster
        .iter()
        .chain(&mf.fibers)
        .map(|s| Expr::sym(s.clone()))
        .collect();
    syms.push(mf.energy.clone());
    opts.region.sample(&syms, opts.points, &mut opts.rng())
}

/// Gauss–Newton on `eqs(slots) = 0` over the slots `off .. off + m`.
pub(crate) fn gauss_newton(
    eqs: &Compiled,
    jac: &Compiled,
    slots: &mut [f64],
    off: usize,
    m: usize,
) -> Result<()> {
    if m == 0 || eqs.is_empty() {
        return Ok(());
    }
    for _ in 0..50 {
        let r = DVector::from_vec(eqs.eval(slots)?);
        if r.amax() <= 1e-15 {
            return Ok(());
        }
        let j = DMatrix::from_row_slice(eqs.len(), m, &jac.eval(slots)?);
        let step = lstsq(&j, &-r)?;
        let mut scale = 0.0f64;
        for (x, d) in slots[off..off + m].iter_mut().zip(step.iter()) {
            *x += d;
            scale = scale.max(x.abs());
        }
        if step.amax() <= 1e-14 * (1.0 + scale) {
            return Ok(());
        }
    }
    Ok(())
}

fn jacobian_exprs(eqs: &[Expr], vars: &[Symbol]) -> Vec<Expr> {
    eqs.iter()
        .flat_map(|e| vars.iter().map(move |v| diff(e, v)))
        .collect()
}

fn params_of(exprs: &[Expr], exclude: &[Symbol]) -> Vec<Symbol> {
    let mut set = BTreeSet::new();
    for e in exprs {
        set.extend(e.free_symbols());
    }
    set.into_iter().filter(|s| !exclude.contains(s)).collect()
}

fn same_positions(mf: &MorseFamily, gamma: &ClosedOneForm) -> Result<()> {
    if mf.base.positions() != gamma.positions {
        return Err(Error::ChartMismatch {
            expected: mf.base.to_string(),
            found: gamma.chart.to_string(),
        });
    }
    Ok(())
}

/// Name of the HJ system instantiated for a family's base chart.
fn system_label(mf: &MorseFamily) -> &'static str {
    use crate::charts::ChartKind::*;
    match mf.base.kind {
        CotTk1 => "ostrogradsky",
        CotAq => "schmidt-acceleration",
        CotAqM => "schmidt-auxiliary",
        _ => "morse-family",
    }
}

/// `d(E o gamma) = 0`: partials of `E` with momenta replaced by `gamma`, with
/// respect to positions and fibers. At each sample the fiber values are found
/// by least squares on the fiber equations before the residuals are evaluated.
pub fn hj_residual(
    mf: &MorseFamily,
    gamma: &ClosedOneForm,
    opts: &CheckOptions,
) -> Result<ResidualReport> {
    same_positions(mf, gamma)?;
    let eg = simplify(&mf.energy.subs(&gamma.substitution()));
    let mut labels = Vec::new();
    let mut exprs = Vec::new();
    for x in gamma.positions.iter().chain(&mf.fibers) {
        labels.push(format!("d/d{x}"));
        exprs.push(diff(&eg, x));
    }
    let fiber_eqs: Vec<Expr> = exprs[gamma.positions.len()..].to_vec();
    let mut slots: Vec<Symbol> = gamma.positions.iter().chain(&mf.fibers).cloned().collect();
    let mut domain: Vec<Expr> = gamma.components.clone();
    domain.push(eg.clone());
    let params = params_of(&domain, &slots);
    slots.extend(params.iter().cloned());

    let empty = Binding::new();
    let res_prog = Compiled::new(&exprs, &slots, &empty)?;
    let fib_prog = Compiled::new(&fiber_eqs, &slots, &empty)?;
    let jac_prog = Compiled::new(&jacobian_exprs(&fiber_eqs, &mf.fibers), &slots, &empty)?;

    let points = opts.region.sample(&domain, opts.points, &mut opts.rng())?;
    let off = gamma.positions.len();
    let m = mf.fibers.len();
    let mut values = Vec::with_capacity(points.len());
    for b in &points {
        let mut x: Vec<f64> = slots.iter().map(|s| b.try_get(s).unwrap_or(0.0)).collect();
        x[off..off + m].iter_mut().for_each(|v| *v = 0.0);
        gauss_newton(&fib_prog, &jac_prog, &mut x, off, m)?;
        values.push(res_prog.eval(&x)?);
    }
    Ok(ResidualReport::from_values(
        system_label(mf),
        labels,
        exprs,
        &values,
        opts.tol,
    ))
}

/// `d(H o gamma) = 0` for a Hamiltonian free of fibers; also reports the
/// spread of `H o gamma` over the samples.
pub fn hj_residual_nondeg(
    h: &Expr,
    gamma: &ClosedOneForm,
    opts: &CheckOptions,
) -> Result<ResidualReport> {
    let allowed: Vec<Symbol> = gamma.chart.roster.clone();
    check_symbols(h, &allowed)?;
    let hg = simplify(&h.subs(&gamma.substitution()));
    let labels = gamma.positions.iter().map(|x| format!("d/d{x}")).collect();
    let exprs: Vec<Expr> = gamma.positions.iter().map(|x| diff(&hg, x)).collect();
    let mut domain = gamma.components.clone();
    domain.push(hg.clone());
    let points = opts.region.sample(&domain, opts.points, &mut opts.rng())?;
    let mut values = Vec::with_capacity(points.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for b in &points {
        let v = eval(&hg, b)?;
        lo = lo.min(v);
        hi = hi.max(v);
        values.push(
            exprs
                .iter()
                .map(|e| eval(e, b))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let mut report = ResidualReport::from_values("hamiltonian", labels, exprs, &values, opts.tol);
    report.spread = Some(if points.is_empty() { 0.0 } else { hi - lo });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ostro::{ostro_energy, LagrangianSpec};
    use crate::symexpr::parse_simplified;

    fn p(s: &str) -> Expr {
        parse_simplified(s).unwrap()
    }

    fn fixed(opts: CheckOptions, pairs: &[(&str, f64)]) -> CheckOptions {
        let mut region = opts.region.clone();
        for (n, v) in pairs {
            region = region.with_fixed(Symbol::param(n), *v);
        }
        opts.with_region(region)
    }

    #[test]
    fn morse_rank_beam_and_zero() {
        let beam = ostro_energy(&LagrangianSpec::parse(1, 2, "mu*q1_2^2/2 + rho*q1_0").unwrap());
        let opts = fixed(
            CheckOptions::default().with_points(20),
            &[("mu", 1.5), ("rho", 0.5)],
        );
        let pts = morse_sample_points(&beam, &opts).unwrap();
        assert!(morse_rank_check(&beam, &pts).unwrap().pass);
        let zero = MorseFamily::new(beam.base.clone(), beam.fibers.clone(), Expr::zero()).unwrap();
        let r = morse_rank_check(&zero, &pts).unwrap();
        assert!(!r.pass);
        assert_eq!(r.ranks.unwrap()[0], 0);
    }

    #[test]
    fn javelin_ostrogradsky_solution() {
        let mf = ostro_energy(&LagrangianSpec::parse(1, 2, "q1_1^2/2 - q1_2^2/2").unwrap());
        let gamma = ClosedOneForm::from_components(
            ChartSpec::cot_tk1(1, 2),
            vec![p("1"), p("sqrt(2)*sqrt(q1_1 - q1_1^2/2)")],
        )
        .unwrap();
        let region = SampleBox::uniform(-1.0, 1.0)
            .with_range(Symbol::q(1, 1), 0.0, 2.0)
            .with_guard(p("q1_1 - q1_1^2/2"), 0.1);
        let r = hj_residual(
            &mf,
            &gamma,
            &CheckOptions::default().with_region(region).with_tol(1e-9),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn beam_zero_potential_fails() {
        let mf = ostro_energy(&LagrangianSpec::parse(1, 2, "mu*q1_2^2/2 + rho*q1_0").unwrap());
        let gamma = ClosedOneForm::from_potential(ChartSpec::cot_tk1(1, 2), Expr::zero()).unwrap();
        let opts = fixed(CheckOptions::default(), &[("mu", 1.0), ("rho", 1.0)]);
        assert!(!hj_residual(&mf, &gamma, &opts).unwrap().pass);
    }

    #[test]
    fn closure_failure_names_pair() {
        let err = ClosedOneForm::from_components(ChartSpec::cot_tk1(1, 2), vec![p("q1_1"), p("0")])
            .unwrap_err();
        assert!(matches!(err, Error::NotClosed { ref i, ref j, .. } if i == "q1_0" && j == "q1_1"));
    }

    #[test]
    fn nondeg_spread_and_partials() {
        let gamma = ClosedOneForm::from_potential(ChartSpec::cot_tk1(1, 1), p("c*q1_0")).unwrap();
        let opts = fixed(CheckOptions::default(), &[("c", 2.0)]);
        let r = hj_residual_nondeg(&p("p1_0^2/2"), &gamma, &opts).unwrap();
        assert!(r.pass);
        assert!(r.spread.unwrap() < 1e-15);
        let w0 = ClosedOneForm::from_potential(ChartSpec::cot_tk1(1, 1), Expr::int(3)).unwrap();
        let r =
            hj_residual_nondeg(&p("p1_0^2/2 + q1_0^2/2"), &w0, &CheckOptions::default()).unwrap();
        assert_eq!(r.expressions, vec![p("q1_0")]);
    }
}
