//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (descending) and matching unit eigenvectors as columns.
pub fn symmetric_eigen(matrix: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::invalid("eigendecomposition needs a square matrix"));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "in matrix passed to the eigensolver".into(),
        });
    }
    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    for sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[[p, q]] * a[[p, q]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let tiny = 100.0 * apq.abs();
                if sweep > 3 && a[[p, p]].abs() + tiny == a[[p, p]].abs() && a[[q, q]].abs() + tiny == a[[q, q]].abs() {
                    a[[p, q]] = 0.0;
                    a[[q, p]] = 0.0;
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[j, j]].total_cmp(&a[[i, i]]).then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        vectors.column_mut(k).assign(&v.column(i));
    }
    Ok((values, vectors))
}

/// Applies the rotation zeroing `a[p][q]` to both sides of `a` and to `v`.
fn rotate(a: &mut Array2<f64>, v: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[[k, p]];
        let akq = a[[k, q]];
        a[[k, p]] = c * akp - s * akq;
        a[[k, q]] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[[p, k]];
        let aqk = a[[q, k]];
        a[[p, k]] = c * apk - s * aqk;
        a[[q, k]] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = c * vkp - s * vkq;
        v[[k, q]] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_by_two() {
        let m = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let r = m.dot(&vecs) - &vecs * &vals;
        assert!(r.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let n = 30;
        let b = Array2::from_shape_fn((n, n), |(i, j)| ((i * 31 + j * 17) % 23) as f64 / 7.0 - 1.5);
        let m = &b + &b.t();
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        let recon = vecs.dot(&Array2::from_diag(&vals)).dot(&vecs.t());
        let err = (&recon - &m).iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        let gram = vecs.t().dot(&vecs) - Array2::<f64>::eye(n);
        assert!(gram.iter().all(|x| x.abs() < 1e-12));
        assert!(vals.windows(2).into_iter().all(|w| w[0] >= w[1]));
    }
}
