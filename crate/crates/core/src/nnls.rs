//! Nonnegative least squares, `min ‖Ax - b‖₂` subject to `x ≥ 0`, by the
//! Lawson–Hanson active-set method. Passive-set subproblems are solved by
//! SVD so nearly collinear columns do not blow up.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(invalid(format!("right-hand side has {} rows, matrix has {m}", b.len())));
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    let tol = 10.0 * f64::EPSILON * scale * (m.max(n) as f64) * b.norm().max(1.0);
    let max_iter = 3 * n.max(1) + 30;

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let mut w = a.transpose() * (b - a * &x);
    for _ in 0..max_iter {
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else {
            return Ok(x);
        };
        passive[t] = true;
        loop {
            let s = solve_passive(a, b, &passive);
            if (0..n).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..n)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .map(|j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= tol * 1e-3 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        w = a.transpose() * (b - a * &x);
    }
    Ok(x)
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(b, f64::EPSILON * 1e2)
        .expect("SVD computed with both factors");
    let mut full = DVector::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        full[j] = sol[k];
    }
    full
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn recovers_a_nonnegative_exact_solution() {
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 2.0, 0.5, 1.0, 0.0, 0.0, 3.0, 1.0, 1.0, 1.0, 1.0]);
        let truth = DVector::from_vec(vec![0.3, 0.0, 1.2]);
        let x = nnls(&a, &(&a * &truth)).unwrap();
        assert!((x - truth).norm() < 1e-12);
    }

    #[test]
    fn clips_an_unconstrained_negative_solution() {
        // unconstrained minimiser is (-1, 2); constrained optimum sets x₀ = 0
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let x = nnls(&a, &b).unwrap();
        assert_eq!(x, DVector::from_vec(vec![0.0, 2.0]));
    }

    proptest! {
        #[test]
        fn kkt_conditions_hold(entries in prop::collection::vec(-1.0f64..1.0, 30), rhs in prop::collection::vec(-1.0f64..1.0, 6)) {
            let a = DMatrix::from_vec(6, 5, entries);
            let b = DVector::from_vec(rhs);
            let x = nnls(&a, &b).unwrap();
            let grad = a.transpose() * (&b - &a * &x);
            for j in 0..5 {
                prop_assert!(x[j] >= 0.0);
                // stationarity: no improving direction among the bounds
                prop_assert!(grad[j] <= 1e-9);
                if x[j] > 1e-9 {
                    prop_assert!(grad[j].abs() <= 1e-9);
                }
            }
        }
    }
}
