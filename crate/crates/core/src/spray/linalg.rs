//! Small dense linear algebra over jets.
//!
//! Pivots are chosen on constant terms; the constant-term matrix is screened
//! for conditioning first so a nearly singular metric fails loudly instead of
//! producing garbage derivatives.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Condition number above which a warning is logged.
pub const CONDITION_WARNING: f64 = 1e8;
const CONDITION_FATAL: f64 = 1e14;

pub(crate) fn constant_matrix(a: &[Vec<Jet>]) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::from_fn(n, n, |i, j| a[i][j].value())
}

/// Extreme eigenvalues of the symmetrized matrix.
pub fn eigen_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// `σ_max / σ_min`; infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn screen(a: &[Vec<Jet>], what: &'static str) -> Result<()> {
    let m = constant_matrix(a);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular {
            what,
            condition: f64::INFINITY,
            min_eigenvalue: f64::NAN,
        });
    }
    let cond = condition_number(&m);
    if cond > CONDITION_FATAL {
        let (min, _) = eigen_extremes(&m);
        return Err(Error::Singular {
            what,
            condition: cond,
            min_eigenvalue: min,
        });
    }
    if cond > CONDITION_WARNING {
        log::warn!("{what} is ill-conditioned: condition estimate {cond:e}");
    }
    Ok(())
}

/// Solve `A X = B` column by column with partial pivoting on constant terms.
pub fn solve(a: &[Vec<Jet>], b: &[Vec<Jet>], what: &'static str) -> Result<Vec<Vec<Jet>>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    screen(a, what)?;
    let mut a: Vec<Vec<Jet>> = a.to_vec();
    let mut b: Vec<Vec<Jet>> = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .value()
                    .abs()
                    .total_cmp(&a[j][col].value().abs())
            })
            .expect("non-empty pivot range");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip()?;
        for row in col + 1..n {
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[row][k] -= &t;
            }
            for k in 0..b[row].len() {
                let t = &factor * &b[col][k];
                b[row][k] -= &t;
            }
        }
    }
    let width = b.first().map_or(0, Vec::len);
    let mut x: Vec<Vec<Jet>> = vec![Vec::with_capacity(width); n];
    for row in (0..n).rev() {
        let inv = a[row][row].recip()?;
        let mut sol = Vec::with_capacity(width);
        for k in 0..width {
            let mut acc = b[row][k].clone();
            for j in row + 1..n {
                let t = &a[row][j] * &x[j][k];
                acc -= &t;
            }
            sol.push(&acc * &inv);
        }
        x[row] = sol;
    }
    Ok(x)
}

/// Solve `A x = b` for a single right-hand side.
pub fn solve_vec(a: &[Vec<Jet>], b: &[Jet], what: &'static str) -> Result<Vec<Jet>> {
    let cols: Vec<Vec<Jet>> = b.iter().map(|v| vec![v.clone()]).collect();
    Ok(solve(a, &cols, what)?
        .into_iter()
        .map(|mut r| r.remove(0))
        .collect())
}

/// Determinant by elimination with partial pivoting on constant terms.
pub fn determinant(a: &[Vec<Jet>]) -> Result<Jet> {
    let n = a.len();
    let mut a: Vec<Vec<Jet>> = a.to_vec();
    let mut det = a[0][0].scale(0.0).add_scalar(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .value()
                    .abs()
                    .total_cmp(&a[j][col].value().abs())
            })
            .expect("non-empty pivot range");
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det = &det * &a[col][col];
        let inv = a[col][col].recip()?;
        for row in col + 1..n {
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[row][k] -= &t;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;
    use approx::assert_relative_eq;

    #[test]
    fn solves_with_pivoting() {
        let s = JetSpace::full(1, 2).unwrap();
        let t = Jet::variable(&s, 0.0, 0).unwrap();
        // [[t, 1], [1, 1]] x = [1, 2]  ->  x0 = 1/(1-t), x1 = 2 - 1/(1-t)
        let a = vec![
            vec![t.clone(), Jet::constant(&s, 1.0)],
            vec![Jet::constant(&s, 1.0), Jet::constant(&s, 1.0)],
        ];
        let b = vec![Jet::constant(&s, 1.0), Jet::constant(&s, 2.0)];
        let x = solve_vec(&a, &b, "test matrix").unwrap();
        assert_relative_eq!(x[0].value(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(x[0].d1(0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(x[1].value(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(x[1].d1(0).unwrap(), -1.0, epsilon = 1e-15);
        let det = determinant(&a).unwrap();
        assert_relative_eq!(det.value(), -1.0, epsilon = 1e-15);
        assert_relative_eq!(det.d1(0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let s = JetSpace::full(1, 1).unwrap();
        let one = Jet::constant(&s, 1.0);
        let a = vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]];
        let err = solve_vec(&a, &[one.clone(), one], "metric").unwrap_err();
        assert!(matches!(err, Error::Singular { what: "metric", .. }));
    }
}
