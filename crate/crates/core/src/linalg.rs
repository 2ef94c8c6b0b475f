//! Dense kernels used by the transform and the orthogonal-polynomial builder.
//! Matrices are row-major `Vec<Vec<T>>`; sizes here stay in the tens.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_JACOBI_SWEEPS: usize = 200;

/// Lower-triangular `L` with `A = L Lᵀ`. A non-positive pivot reports its
/// index.
pub fn cholesky<T: Real>(a: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    let zero = a[0][0].zero_like();
    let mut l = vec![vec![zero.clone(); n]; n];
    for j in 0..n {
        let mut d = a[j][j].clone();
        for k in 0..j {
            d -= l[j][k].clone() * &l[j][k];
        }
        if !(d > zero) {
            return Err(Error::PositivityFailure { index: j });
        }
        let djj = d.sqrt();
        for i in j + 1..n {
            let mut s = a[i][j].clone();
            for k in 0..j {
                s -= l[i][k].clone() * &l[j][k];
            }
            l[i][j] = s / &djj;
        }
        l[j][j] = djj;
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub fn invert_lower<T: Real>(l: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = l.len();
    let zero = l[0][0].zero_like();
    let one = l[0][0].one_like();
    let mut inv = vec![vec![zero.clone(); n]; n];
    for i in 0..n {
        inv[i][i] = one.clone() / &l[i][i];
        for j in 0..i {
            let mut s = zero.clone();
            for k in j..i {
                s += l[i][k].clone() * &inv[k][j];
            }
            inv[i][j] = -s / &l[i][i];
        }
    }
    inv
}

/// Singular values by one-sided (Hestenes) Jacobi rotations, sorted
/// descending. Only `+ - * / sqrt` are used, so scaling the input by a power
/// of two scales the output exactly.
pub fn singular_values<T: Real>(a: &[Vec<T>]) -> Vec<T> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols_n = a[0].len();
    // columns of A
    let mut cols: Vec<Vec<T>> = (0..cols_n)
        .map(|j| (0..rows).map(|i| a[i][j].clone()).collect())
        .collect();
    let eps = T::exp2i(1 - i64::from(a[0][0].precision()), a[0][0].precision());
    let dot = |x: &[T], y: &[T]| {
        let mut s = x[0].zero_like();
        for (u, v) in x.iter().zip(y) {
            s += u.clone() * v;
        }
        s
    };
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..cols_n {
            for j in i + 1..cols_n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma.is_zero() || gamma.abs() <= eps.clone() * (alpha.clone() * &beta).sqrt() {
                    continue;
                }
                rotated = true;
                let one = alpha.one_like();
                let zeta = (beta - &alpha) / (gamma.clone() + &gamma);
                let t = if zeta < alpha.zero_like() {
                    -(one.clone() / (zeta.abs() + (one.clone() + zeta.clone() * &zeta).sqrt()))
                } else {
                    one.clone() / (zeta.clone() + (one.clone() + zeta.clone() * &zeta).sqrt())
                };
                let c = one.clone() / (one + t.clone() * &t).sqrt();
                let s = c.clone() * &t;
                let (left, right) = cols.split_at_mut(j);
                for (u, v) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let ui = u.clone();
                    *u = c.clone() * &ui - s.clone() * &*v;
                    *v = s.clone() * &ui + c.clone() * &*v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Smallest singular value.
pub fn smallest_singular_value<T: Real>(a: &[Vec<T>]) -> T {
    singular_values(a)
        .pop()
        .expect("non-empty matrix")
}
