use jetmech::hamjac::{
    affine_hj_solve, affine_integrability_check, affine_lagrangian, affine_symmetry_check,
    hj_residual, AffineOrder, CheckOptions,
};
use jetmech::ostro::ostro_energy;
use jetmech::symexpr::{diff, parse_simplified, SampleBox};
use jetmech::{Error, Expr, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(s: &str) -> Expr {
    parse_simplified(s).unwrap()
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

/// Half the instances are total derivatives of a random `W` and always
/// close; the rest are unconstrained and mostly do not. At third order the
/// template only admits `W = phi(q_2) + psi(q_0)`.
fn instance(rng: &mut ChaCha8Rng, order: AffineOrder, n: u32) -> (Vec<Expr>, Expr) {
    let level = |l: u32| (1..=n).map(|a| Symbol::q(a, l)).collect::<Vec<_>>();
    let lo = [level(0), level(1)].concat();
    match (order, rng.random_bool(0.5)) {
        (AffineOrder::Second, true) => {
            let w = random_poly(rng, &lo, 4, 3);
            let f = level(1).iter().map(|v| diff(&w, v)).collect();
            let g = Expr::add(
                level(0)
                    .iter()
                    .zip(level(1))
                    .map(|(x, v)| diff(&w, x) * Expr::sym(v)),
            );
            (f, g)
        }
        (AffineOrder::Third, true) => {
            let (phi, psi) = (
                random_poly(rng, &level(2), 3, 3),
                random_poly(rng, &level(0), 3, 3),
            );
            let f = level(2).iter().map(|v| diff(&phi, v)).collect();
            let g = Expr::add(
                level(0)
                    .iter()
                    .zip(level(1))
                    .map(|(x, v)| diff(&psi, x) * Expr::sym(v)),
            );
            (f, g)
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

#[test]
fn solved_instances_always_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = CheckOptions::default();
    let mut solved = 0;
    for i in 0..50 {
        let order = if i % 2 == 0 {
            AffineOrder::Second
        } else {
            AffineOrder::Third
        };
        let n = 1 + (i % 3) as u32 / 2;
        let (f, g) = instance(&mut rng, order, n);
        match affine_hj_solve(&f, &g, order, &opts) {
            Ok(gamma) => {
                solved += 1;
                let mf = ostro_energy(&affine_lagrangian(&f, &g, order).unwrap());
                let r = hj_residual(&mf, &gamma, &opts).unwrap();
                assert!(r.pass, "f = {f:?}, g = {g}: sup {:e}", r.sup);
            }
            Err(Error::NotClosed { .. } | Error::Incompatible(_)) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
    let bad = affine_hj_solve(&[p("q1_3")], &p("0"), AffineOrder::Third, &opts);
    assert!(matches!(bad, Err(Error::Precondition(_))));
    assert!(solved >= 20, "only {solved} instances closed");
}

#[test]
fn chiral_oscillator_is_not_symmetric() {
    let opts = CheckOptions::default()
        .with_region(SampleBox::uniform(-1.0, 1.0).with_fixed(Symbol::param("lam"), 0.8));
    let f = [p("-lam*q2_1"), p("lam*q1_1")];
    let r = affine_symmetry_check(&f, AffineOrder::Second, &opts).unwrap();
    assert!(!r.pass);
    assert!((r.sup - 1.6).abs() < 1e-12);
}

#[test]
fn gradient_type_coefficients_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vars: Vec<Symbol> = (1..=3)
        .flat_map(|a| [Symbol::q(a, 0), Symbol::q(a, 1)])
        .collect();
    for order in [AffineOrder::Second, AffineOrder::Third] {
        let s = order.k() - 1;
        let vars: Vec<Symbol> = vars
            .iter()
            .map(|v| Symbol::q(v.component(), v.level() + s - 1))
            .collect();
        for _ in 0..10 {
            let g = random_poly(&mut rng, &vars, 5, 3);
            let f: Vec<Expr> = (1..=3).map(|a| diff(&g, &Symbol::q(a, s))).collect();
            assert!(
                affine_symmetry_check(&f, order, &CheckOptions::default())
                    .unwrap()
                    .pass
            );
        }
    }
}

#[test]
fn integrability_of_total_derivatives() {
    let w = p("q1_0^2*q2_1 + q2_0*q1_1^2");
    let f: Vec<Expr> = (1..=2).map(|a| diff(&w, &Symbol::q(a, 1))).collect();
    let g = Expr::add((1..=2).map(|a| diff(&w, &Symbol::q(a, 0)) * Expr::sym(Symbol::q(a, 1))));
    let r =
        affine_integrability_check(&f, &g, AffineOrder::Second, &CheckOptions::default()).unwrap();
    assert!(r.pass, "{:?}", r.expressions);
}
