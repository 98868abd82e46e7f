//! Eigenvalues of dense real symmetric matrices.

use ndarray::Array2;

use crate::Scalar;

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns the diagonal and the subdiagonal (`e[0] = 0`, `e[i]` couples
/// `i - 1` and `i`).
fn tridiagonalize<T: Scalar>(mut a: Array2<T>) -> (Vec<T>, Vec<T>) {
    let n = a.nrows();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale: T = (0..=l).map(|k| a[[i, k]].abs()).sum();
            if scale == T::zero() {
                e[i] = a[[i, l]];
            } else {
                for k in 0..=l {
                    a[[i, k]] = a[[i, k]] / scale;
                    h = h + a[[i, k]] * a[[i, k]];
                }
                let f = a[[i, l]];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h = h - f * g;
                a[[i, l]] = f - g;
                let mut f = T::zero();
                for j in 0..=l {
                    let mut g = T::zero();
                    for k in 0..=j {
                        g = g + a[[j, k]] * a[[i, k]];
                    }
                    for k in j + 1..=l {
                        g = g + a[[k, j]] * a[[i, k]];
                    }
                    e[j] = g / h;
                    f = f + e[j] * a[[i, j]];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[[i, j]];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[[j, k]] = a[[j, k]] - (f * e[k] + g * a[[i, k]]);
                    }
                }
            }
        } else {
            e[i] = a[[i, l]];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[[i, i]];
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
fn tridiagonal_ql<T: Scalar>(d: &mut [T], e: &mut [T]) -> Result<(), usize> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(l);
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r } else { -r });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix in decreasing order. Only the lower
/// triangle is read. Returns `Err(index)` if QL fails to converge.
pub fn symmetric_eigenvalues<T: Scalar>(a: Array2<T>) -> Result<Vec<T>, usize> {
    assert_eq!(a.nrows(), a.ncols(), "square matrix");
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    Ok(d)
}
