//! Small dense linear algebra: numeric rank, least squares, and symbolic
//! solution of systems linear in a set of unknowns.

use crate::error::{Error, Result};
use crate::symexpr::{diff, simplify, Expr, Symbol};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Relative singular-value threshold for numeric rank.
pub const RANK_TOL: f64 = 1e-10;

/// Number of singular values above `RANK_TOL * sigma_max`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (RANK_TOL * max).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).map_err(|e| Error::Numeric(e.to_string()))
}

/// Symbolic determinant by cofactor expansion (intended for n <= 4).
pub fn det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &det(&minor);
                terms.push(if j % 2 == 0 { t } else { -t });
            }
            Expr::add(terms)
        }
    }
}

/// Largest system handled by symbolic Cramer elimination.
pub const MAX_SYMBOLIC_UNKNOWNS: usize = 4;

/// Solve `eqs = 0` for `unknowns` when the equations are linear in them.
///
/// Fails with [`Error::NotSolvable`] if the system is not square, not linear,
/// too large for symbolic elimination, or has an identically zero determinant.
pub fn solve_linear(eqs: &[Expr], unknowns: &[Symbol]) -> Result<BTreeMap<Symbol, Expr>> {
    let n = unknowns.len();
    if eqs.len() != n {
        return Err(Error::NotSolvable(format!(
            "{} equations in {} unknowns",
            eqs.len(),
            n
        )));
    }
    if n > MAX_SYMBOLIC_UNKNOWNS {
        return Err(Error::NotSolvable(format!(
            "{n} unknowns exceed symbolic limit"
        )));
    }
    let zero: BTreeMap<Symbol, Expr> = unknowns.iter().map(|u| (u.clone(), Expr::zero())).collect();
    let mut a = vec![vec![Expr::zero(); n]; n];
    let mut rhs = Vec::with_capacity(n);
    for (i, eq) in eqs.iter().enumerate() {
        for (j, u) in unknowns.iter().enumerate() {
            let c = diff(eq, u);
            if c.contains_any(unknowns) {
                return Err(Error::NotSolvable(format!(
                    "equation {eq} is not linear in {u}"
                )));
            }
            a[i][j] = c;
        }
        rhs.push(-eq.subs(&zero));
    }
    let d = simplify(&det(&a));
    if d.is_zero() {
        return Err(Error::NotSolvable("coefficient matrix is singular".into()));
    }
    let inv_d = d.clone().recip();
    let mut out = BTreeMap::new();
    for (j, u) in unknowns.iter().enumerate() {
        let mut aj = a.clone();
        for (i, row) in aj.iter_mut().enumerate() {
            row[j] = rhs[i].clone();
        }
        out.insert(u.clone(), simplify(&(det(&aj) * inv_d.clone())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{equal_numeric, parse_simplified};

    #[test]
    fn numeric_rank() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(rank(&m), 1);
        assert_eq!(rank(&DMatrix::<f64>::zeros(2, 2)), 0);
        assert_eq!(rank(&DMatrix::<f64>::identity(3, 3)), 3);
    }

    #[test]
    fn least_squares_consistent_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = lstsq(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symbolic_linear_solve() {
        let eqs = [parse_simplified("p1_1 - mu*q1_2").unwrap()];
        let sol = solve_linear(&eqs, &[Symbol::q(1, 2)]).unwrap();
        assert_eq!(sol[&Symbol::q(1, 2)], parse_simplified("p1_1/mu").unwrap());

        let eqs = [
            parse_simplified("2*q1_2 + q2_2 - p1_1").unwrap(),
            parse_simplified("q1_2 + 3*q2_2 - p2_1").unwrap(),
        ];
        let sol = solve_linear(&eqs, &[Symbol::q(1, 2), Symbol::q(2, 2)]).unwrap();
        let x = parse_simplified("(3*p1_1 - p2_1)/5").unwrap();
        assert!(equal_numeric(&sol[&Symbol::q(1, 2)], &x, 20, 1e-12).unwrap());
    }

    #[test]
    fn rejects_nonlinear_and_singular() {
        let eqs = [parse_simplified("q1_2^2 - p1_1").unwrap()];
        assert!(solve_linear(&eqs, &[Symbol::q(1, 2)]).is_err());
        let eqs = [
            parse_simplified("q1_2 + q2_2 - p1_1").unwrap(),
            parse_simplified("q1_2 + q2_2 - p2_1").unwrap(),
        ];
        assert!(solve_linear(&eqs, &[Symbol::q(1, 2), Symbol::q(2, 2)]).is_err());
    }
}
