//! Helpers shared by the integration suites: seeded generators and small
//! self-contained matrix oracles that stay independent of the library's own
//! factorization path.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use tubal::{t_product, Tensor3};

pub fn random_tensor(dims: (usize, usize, usize), seed: u64) -> Tensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor3::from_fn(dims, |_, _, _| rng.sample(StandardNormal))
}

pub fn random_low_rank(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Tensor3 {
    let p = random_tensor((n1, r, n3), seed);
    let w = random_tensor((r, n2, n3), seed.wrapping_add(1));
    t_product(&p, &w).unwrap()
}

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix. Returns
/// (eigenvalues descending, eigenvectors as columns).
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off < 1e-32 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).unwrap());
    let eig = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n)
        .map(|row| order.iter().map(|&col| v[row][col]).collect())
        .collect();
    (eig, vectors)
}

/// Singular values of the first frontal slice of an `m x n x 1` tensor via
/// the Gram matrix, descending.
pub fn matrix_singular_values(a: &Tensor3) -> Vec<f64> {
    let (m, n, _) = a.dims();
    let dim = n.min(m);
    let use_ata = n <= m;
    let g = if use_ata { n } else { m };
    let mut gram = vec![vec![0.0; g]; g];
    for x in 0..g {
        for y in 0..g {
            let mut acc = 0.0;
            if use_ata {
                for i in 0..m {
                    acc += a.get(i, x, 0) * a.get(i, y, 0);
                }
            } else {
                for j in 0..n {
                    acc += a.get(x, j, 0) * a.get(y, j, 0);
                }
            }
            gram[x][y] = acc;
        }
    }
    jacobi_eigen(gram)
        .0
        .into_iter()
        .take(dim)
        .map(|e| e.max(0.0).sqrt())
        .collect()
}

/// Matrix singular value thresholding of the first frontal slice of an
/// `m x n x 1` tensor, computed as `A V diag(shrink(sigma)/sigma) V^T`.
/// This form only needs the right singular vectors, and as a matrix
/// function of `A^T A` it is insensitive to clustered singular values.
pub fn matrix_svt(a: &Tensor3, tau: f64) -> Tensor3 {
    let (m, n, _) = a.dims();
    let mut gram = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in 0..n {
            let mut acc = 0.0;
            for i in 0..m {
                acc += a.get(i, x, 0) * a.get(i, y, 0);
            }
            gram[x][y] = acc;
        }
    }
    let (eig, v) = jacobi_eigen(gram);
    let ratio: Vec<f64> = eig
        .iter()
        .map(|&e| {
            let sigma = e.max(0.0).sqrt();
            if sigma > tau {
                (sigma - tau) / sigma
            } else {
                0.0
            }
        })
        .collect();
    // w = V diag(ratio) V^T
    let mut w = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in 0..n {
            let mut acc = 0.0;
            for (c, &rc) in ratio.iter().enumerate() {
                acc += v[x][c] * rc * v[y][c];
            }
            w[x][y] = acc;
        }
    }
    Tensor3::from_fn((m, n, 1), |i, j, _| {
        let mut acc = 0.0;
        for (x, wx) in w.iter().enumerate() {
            acc += a.get(i, x, 0) * wx[j];
        }
        acc
    })
}

/// Plain matrix product of two `.. x .. x 1` tensors.
pub fn matrix_product(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let (m, inner, _) = a.dims();
    let (_, n, _) = b.dims();
    Tensor3::from_fn((m, n, 1), |i, j, _| {
        (0..inner).map(|k| a.get(i, k, 0) * b.get(k, j, 0)).sum()
    })
}
