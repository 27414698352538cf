//! Eigendecomposition of real symmetric tridiagonal matrices by implicit QL
//! iterations with Wilkinson-style shifts.

use nalgebra::DMatrix;

use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct TridiagEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Diagonalise the symmetric tridiagonal matrix with main diagonal `diag`
/// and first off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    if off.len() + 1 != n {
        return Err(Error::Validation(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut v = DMatrix::<f64>::identity(n, n);

    let max_iter = 60 * n.max(1);
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > f64::EPSILON * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::Numerical(
                        "tridiagonal QL iteration did not converge".into(),
                    ));
                }
                // Shift from the leading 2x2 block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                // Implicit QL sweep from m back to l.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vk1 = v[(k, i + 1)];
                        let vk = v[(k, i)];
                        v[(k, i + 1)] = s * vk + c * vk1;
                        v[(k, i)] = c * vk - s * vk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= f64::EPSILON * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(TridiagEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn two_by_two() {
        let e = symmetric_tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_and_empty() {
        let e = symmetric_tridiagonal_eigen(&[3.5], &[]).unwrap();
        assert_eq!(e.values, vec![3.5]);
        assert_eq!(e.vectors[(0, 0)], 1.0);
        assert!(symmetric_tridiagonal_eigen(&[], &[]).unwrap().values.is_empty());
        assert!(symmetric_tridiagonal_eigen(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn matches_nalgebra_on_chain() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|k| 0.3 * k as f64).collect();
        let off: Vec<f64> = (0..n - 1)
            .map(|k| ((k + 1) as f64 * (60 - k) as f64).sqrt())
            .collect();
        let ours = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        let mut reference: Vec<f64> = dense(&diag, &off)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in ours.values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-10 * reference.last().unwrap().abs());
        }
    }

    proptest! {
        #[test]
        fn reconstructs_matrix(
            diag in prop::collection::vec(-5.0f64..5.0, 1..30),
            seed in prop::collection::vec(0.01f64..5.0, 30),
        ) {
            let n = diag.len();
            let off = &seed[..n - 1];
            let eig = symmetric_tridiagonal_eigen(&diag, off).unwrap();
            let a = dense(&diag, off);
            let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone()));
            let back = &eig.vectors * lam * eig.vectors.transpose();
            prop_assert!((back - &a).amax() < 1e-11);
            let ortho = eig.vectors.transpose() * &eig.vectors - DMatrix::identity(n, n);
            prop_assert!(ortho.amax() < 1e-12);
            prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
