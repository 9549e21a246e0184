//! Dense symmetric positive definite solves for the ridge normal equations.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `A x = b` in place for symmetric positive definite `A`
/// (row-major, `n x n`). `a` is overwritten by its Cholesky factor and `b`
/// by the solution.
pub fn cholesky_solve<T: Scalar>(a: &mut [T], n: usize, b: &mut [T]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(T::zero(), T::max);
    let tol = T::epsilon() * T::of_usize(n.max(1)) * scale;

    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > tol) {
            return Err(Error::SingularFit);
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / diag;
        }
    }

    // L y = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    // L^T x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(())
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        // [[4, 2], [2, 3]] x = [2, 1]  =>  x = [0.5, 0]
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        let mut b = vec![2.0, 1.0];
        cholesky_solve(&mut a, 2, &mut b).unwrap();
        assert!((b[0] - 0.5f64).abs() < 1e-15 && b[1].abs() < 1e-15);
    }

    #[test]
    fn singular_is_an_error() {
        let mut a = vec![1.0f64, 1.0, 1.0, 1.0];
        let mut b = vec![1.0, 1.0];
        assert!(matches!(cholesky_solve(&mut a, 2, &mut b), Err(Error::SingularFit)));
    }

    #[test]
    fn residual_is_small_on_random_spd() {
        let n = 12;
        let mut state = 7u64;
        let mut next = || {
            state = crate::seed::splitmix64(state);
            crate::seed::symmetric_unit(state)
        };
        let g: Vec<f64> = (0..n * n).map(|_| next()).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| g[i * n + k] * g[j * n + k]).sum::<f64>()
                    + if i == j { 1.0 } else { 0.0 };
            }
        }
        let rhs: Vec<f64> = (0..n).map(|_| next()).collect();
        let mut fac = a.clone();
        let mut x = rhs.clone();
        cholesky_solve(&mut fac, n, &mut x).unwrap();
        for i in 0..n {
            let r = dot(&a[i * n..(i + 1) * n], &x) - rhs[i];
            assert!(r.abs() < 1e-12, "row {i}: {r}");
        }
    }
}
