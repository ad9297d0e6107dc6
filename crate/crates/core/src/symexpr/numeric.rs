//! Randomized numeric certification of symbolic identities.

use super::eval::{eval, Binding};
use super::expr::Expr;
use super::symbol::Symbol;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Where random sample points are drawn from.
///
/// Every symbol is uniform in `[lo, hi]` unless overridden in `ranges`.
/// Points where a guard expression falls below its minimum, or where any
/// checked expression leaves its function domain, are rejected.
#[derive(Clone, Debug)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
    pub ranges: BTreeMap<Symbol, (f64, f64)>,
    pub fixed: Binding,
    pub guards: Vec<(Expr, f64)>,
}

impl SampleBox {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        SampleBox {
            lo,
            hi,
            ranges: BTreeMap::new(),
            fixed: Binding::new(),
            guards: Vec::new(),
        }
    }

    pub fn with_range(mut self, s: Symbol, lo: f64, hi: f64) -> Self {
        self.ranges.insert(s, (lo, hi));
        self
    }

    /// Pin a symbol (typically a parameter) to a value instead of sampling it.
    pub fn with_fixed(mut self, s: Symbol, v: f64) -> Self {
        self.fixed.set(s, v);
        self
    }

    pub fn with_guard(mut self, e: Expr, min: f64) -> Self {
        self.guards.push((e, min));
        self
    }

    fn draw(&self, syms: &BTreeSet<Symbol>, rng: &mut impl Rng) -> Binding {
        let mut b = self.fixed.clone();
        for s in syms {
            if b.contains(s) {
                continue;
            }
            let (lo, hi) = self.ranges.get(s).copied().unwrap_or((self.lo, self.hi));
            b.set(s.clone(), rng.random_range(lo..=hi));
        }
        b
    }

    /// Draw `n` points binding every symbol of `exprs` (and of the guards)
    /// at which all of `exprs` evaluate inside their domains.
    pub fn sample(&self, exprs: &[Expr], n: usize, rng: &mut impl Rng) -> Result<Vec<Binding>> {
        let mut syms = BTreeSet::new();
        for e in exprs.iter().chain(self.guards.iter().map(|(g, _)| g)) {
            syms.extend(e.free_symbols());
        }
        let budget = 1000 * n.max(1);
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n {
            if attempts >= budget {
                return Err(Error::DomainExhausted { attempts });
            }
            attempts += 1;
            let b = self.draw(&syms, rng);
            let guards_ok = self
                .guards
                .iter()
                .all(|(g, min)| eval(g, &b).is_ok_and(|v| v >= *min));
            if guards_ok && exprs.iter().all(|e| eval(e, &b).is_ok()) {
                out.push(b);
            }
        }
        Ok(out)
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::uniform(-1.0, 1.0)
    }
}

/// Deterministic generator used when the caller does not supply one.
pub fn default_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

/// `|e1 - e2| <= tol * (1 + |e1|)` at `trials` random points drawn uniformly
/// from `[-2, 2]` per free symbol, with a fixed seed.
pub fn equal_numeric(e1: &Expr, e2: &Expr, trials: usize, tol: f64) -> Result<bool> {
    equal_numeric_with(
        e1,
        e2,
        trials,
        tol,
        &SampleBox::uniform(-2.0, 2.0),
        &mut default_rng(),
    )
}

/// [`equal_numeric`] with an explicit sample box and generator.
pub fn equal_numeric_with(
    e1: &Expr,
    e2: &Expr,
    trials: usize,
    tol: f64,
    region: &SampleBox,
    rng: &mut impl Rng,
) -> Result<bool> {
    assert!(
        trials >= 1 && tol > 0.0,
        "equal_numeric needs trials >= 1 and tol > 0"
    );
    let points = region.sample(&[e1.clone(), e2.clone()], trials, rng)?;
    for b in &points {
        let a = eval(e1, b)?;
        let c = eval(e2, b)?;
        if (a - c).abs() > tol * (1.0 + a.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `|e|` over the given points.
pub fn sup_norm(e: &Expr, points: &[Binding]) -> Result<f64> {
    let mut m = 0.0f64;
    for b in points {
        m = m.max(eval(e, b)?.abs());
    }
    Ok(m)
}
