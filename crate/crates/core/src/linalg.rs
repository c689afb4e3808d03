//! Small dense helpers over exact rationals and complex numbers.
//!
//! Coefficient matrices here are at most 6x6, so plain `Vec<Vec<_>>` with
//! Gaussian elimination is all that is needed.

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::rational::{one, zero, Rational};

pub type QMatrix = Vec<Vec<Rational>>;
pub type QVector = Vec<Rational>;

pub fn ones(n: usize) -> QVector {
    vec![one(); n]
}

pub fn zeros(rows: usize, cols: usize) -> QMatrix {
    vec![vec![zero(); cols]; rows]
}

pub fn mat_vec(m: &QMatrix, v: &[Rational]) -> QVector {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mat(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn hadamard(a: &[Rational], b: &[Rational]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

pub fn row_sums(m: &QMatrix) -> QVector {
    m.iter().map(|row| row.iter().sum()).collect()
}

/// Solves `m x = rhs` exactly; `None` when `m` is singular.
pub fn solve(m: &QMatrix, rhs: &[Rational]) -> Option<QVector> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for entry in a[col].iter_mut().skip(col) {
            *entry = &*entry / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    Some(a.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Solves `mᵗ x = rhs`, i.e. returns the row vector `rhsᵗ m⁻¹`.
pub fn solve_transposed(m: &QMatrix, rhs: &[Rational]) -> Option<QVector> {
    let n = m.len();
    let t: QMatrix = (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect();
    solve(&t, rhs)
}

pub fn is_zero_matrix(m: &QMatrix) -> bool {
    m.iter().flatten().all(Zero::is_zero)
}

pub fn max_abs_diff(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(zero(), |acc, d| if d > acc { d } else { acc })
}

pub fn to_f64_matrix(m: &QMatrix) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| row.iter().map(crate::rational::to_f64).collect())
        .collect()
}

pub fn to_f64_vector(v: &[Rational]) -> Vec<f64> {
    v.iter().map(crate::rational::to_f64).collect()
}

/// Determinant by partial-pivoting elimination.
pub fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return Complex64::zero();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            let factor = a[r][col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let delta = factor * a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn exact_solve_recovers_solution() {
        let m = vec![
            vec![int(2), int(1), zero()],
            vec![int(1), int(3), int(1)],
            vec![zero(), int(1), int(4)],
        ];
        let x = vec![ratio(1, 3), int(-2), ratio(5, 7)];
        let rhs = mat_vec(&m, &x);
        assert_eq!(solve(&m, &rhs).unwrap(), x);
        let y = solve_transposed(&m, &rhs).unwrap();
        let t: QMatrix = (0..3).map(|i| (0..3).map(|j| m[j][i].clone()).collect()).collect();
        assert_eq!(mat_vec(&t, &y), rhs);
    }

    #[test]
    fn singular_matrix_is_detected() {
        let m = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve(&m, &[int(1), int(1)]).is_none());
    }

    #[test]
    fn complex_determinant_matches_cofactor_expansion() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let a = vec![
            vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0)],
            vec![c(2.0, 0.0), c(-1.0, 1.0), c(3.0, 0.0)],
            vec![c(0.0, 1.0), c(1.0, 0.0), c(2.0, -2.0)],
        ];
        let expected = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        assert!((complex_det(a) - expected).norm() < 1e-12);
    }
}
