//! Reference computations that share no code with the library under test.

#![allow(dead_code, clippy::needless_range_loop)]

use beamsim_core::matcore::ComplexMatrix;
use beamsim_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Independent generator for test inputs (ChaCha20, not the simulator's
/// substream scheme).
pub fn test_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let sd = 0.5f64.sqrt();
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sd, im * sd)
        })
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

/// Eigenvalues (ascending) of a Hermitian matrix by cyclic Jacobi on its real
/// symmetric embedding `[[Re, -Im], [Im, Re]]`; each eigenvalue appears twice
/// there, so every other one is returned.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.rows();
    let m = 2 * n;
    let mut s = vec![vec![0.0f64; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            s[i][j] = z.re;
            s[i + n][j + n] = z.re;
            s[i][j + n] = -z.im;
            s[i + n][j] = z.im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i][j] * s[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m - 1 {
            for q in p + 1..m {
                if s[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let (akp, akq) = (s[k][p], s[k][q]);
                    s[k][p] = c * akp - sn * akq;
                    s[k][q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (s[p][k], s[q][k]);
                    s[p][k] = c * apk - sn * aqk;
                    s[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|i| s[i][i]).collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig.into_iter().step_by(2).collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(a: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| m[x][k].norm().total_cmp(&m[y][k].norm())).unwrap();
        if m[p][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
    }
    det
}

pub fn brute_nearest(points: &[Complex64], z: Complex64) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if (z - p).norm_sqr() < (z - points[best]).norm_sqr() {
            best = i;
        }
    }
    best
}

/// Joint ML over every symbol pair for a 2-stream triangular channel.
pub fn joint_ml_pair(
    z: &[Complex64],
    r: &ComplexMatrix,
    a: &[Complex64],
    b: &[Complex64],
    gain: f64,
) -> (usize, usize) {
    let mut best = (0, 0, f64::INFINITY);
    for (i, &u0) in a.iter().enumerate() {
        for (j, &u1) in b.iter().enumerate() {
            let y0 = (r[(0, 0)] * u0 + r[(0, 1)] * u1) * gain;
            let y1 = r[(1, 1)] * u1 * gain;
            let d = (z[0] - y0).norm_sqr() + (z[1] - y1).norm_sqr();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

/// Bit error probability of Gray QPSK on a Rayleigh channel at mean SNR per
/// bit `gamma_b`.
pub fn rayleigh_qpsk_ber(gamma_b: f64) -> f64 {
    0.5 * (1.0 - (gamma_b / (1.0 + gamma_b)).sqrt())
}
