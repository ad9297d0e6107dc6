//! Fixtures shared by the benchmarks in `benches/`.

use jetmech::symexpr::parse_simplified;
use jetmech::{Binding, ChartSpec, ClosedOneForm, LagrangianSpec, Symbol};

pub fn beam() -> LagrangianSpec {
    LagrangianSpec::parse(1, 2, "mu*q1_2^2/2 + rho*q1_0").expect("beam parses")
}

pub fn javelin() -> LagrangianSpec {
    LagrangianSpec::parse(1, 2, "q1_1^2/2 - q1_2^2/2").expect("javelin parses")
}

pub fn beam_params() -> Binding {
    Binding::new()
        .with(Symbol::param("mu"), 1.5)
        .with(Symbol::param("rho"), 0.5)
}

/// Jet `q1_0..q1_3` plus the beam parameters.
pub fn beam_jet() -> Binding {
    [0.1, -0.2, 0.3, 0.4]
        .iter()
        .enumerate()
        .fold(beam_params(), |b, (l, v)| {
            b.with(Symbol::q(1, l as u32), *v)
        })
}

pub fn javelin_gamma() -> ClosedOneForm {
    let comps = ["A", "sqrt(2)*sqrt(A*q1_1 - q1_1^2/2 - B)"]
        .iter()
        .map(|s| parse_simplified(s).expect("component parses"))
        .collect();
    ClosedOneForm::from_components(ChartSpec::cot_tk1(1, 2), comps).expect("closed")
}
