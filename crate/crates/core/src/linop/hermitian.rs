//! Cyclic Jacobi eigensolver for hermitian matrices.
//!
//! Works on raw row-major storage so that internal callers (Gram matrices of
//! stacked linear systems) are not bound by the public dimension cap. Each
//! rotation zeroes one off-diagonal pair; sweeps repeat until the off-diagonal
//! mass is at machine level relative to the Frobenius norm.

use num_complex::Complex64;

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Diagonalizes the hermitian part of `m`; callers pass hermitian input.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.dim();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    // Symmetrize to guard against representation-level asymmetry.
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = 0.5 * (m.entry(i, j) + m.entry(j, i).conj());
        }
    }
    hermitian_eigen_raw(n, data)
}

/// Jacobi iteration on raw hermitian storage (row-major, length `n*n`).
pub(crate) fn hermitian_eigen_raw(n: usize, mut h: Vec<Complex64>) -> HermitianEigen {
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    if n > 1 {
        let fro: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let stop = f64::EPSILON * fro.max(f64::MIN_POSITIVE);
        for _ in 0..MAX_SWEEPS {
            let off: f64 = off_diagonal_norm(n, &h);
            if off <= stop {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(n, &mut h, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| h[i * n + i].re).collect();
    order.sort_by(|&a, &b| diag[b].partial_cmp(&diag[a]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    HermitianEigen { values, vectors }
}

fn off_diagonal_norm(n: usize, h: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += h[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing the (p, q) entry: strip the phase of
/// `h[p][q]`, then apply the classic real rotation.
fn rotate(n: usize, h: &mut [Complex64], v: &mut [Complex64], p: usize, q: usize) {
    let hpq = h[p * n + q];
    let scale = h[p * n + p].re.abs() + h[q * n + q].re.abs();
    if hpq.norm() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
        h[p * n + q] = Complex64::new(0.0, 0.0);
        h[q * n + p] = Complex64::new(0.0, 0.0);
        return;
    }
    let g = hpq.norm();
    let phase = hpq / g; // e^{i φ}
    let app = h[p * n + p].re;
    let aqq = h[q * n + q].re;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (tau - (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane:
    // conjugation by diag(1, conj(phase)) makes the pivot block real
    // symmetric, then the real rotation annihilates it.
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = Complex64::new(-s, 0.0) * phase.conj();
    let uqq = Complex64::new(c, 0.0) * phase.conj();

    // h <- U* h U ; update columns then rows.
    for i in 0..n {
        let hip = h[i * n + p];
        let hiq = h[i * n + q];
        h[i * n + p] = hip * upp + hiq * uqp;
        h[i * n + q] = hip * upq + hiq * uqq;
    }
    for j in 0..n {
        let hpj = h[p * n + j];
        let hqj = h[q * n + j];
        h[p * n + j] = upp.conj() * hpj + uqp.conj() * hqj;
        h[q * n + j] = upq.conj() * hpj + uqq.conj() * hqj;
    }
    h[p * n + q] = Complex64::new(0.0, 0.0);
    h[q * n + p] = Complex64::new(0.0, 0.0);
    h[p * n + p] = Complex64::new(h[p * n + p].re, 0.0);
    h[q * n + q] = Complex64::new(h[q * n + q].re, 0.0);

    for i in 0..n {
        let vip = v[i * n + p];
        let viq = v[i * n + q];
        v[i * n + p] = vip * upp + viq * uqp;
        v[i * n + q] = vip * upq + viq * uqq;
    }
}

/// Orthonormal basis of the joint null space of the given rows, i.e. of the
/// stacked matrix `M` with those rows: eigenvectors of `M* M` whose singular
/// value is at most `rel_tol · σ_max`. An empty or all-zero row set yields
/// the full space.
pub(crate) fn gram_null_space(
    ncols: usize,
    rows: &[Vec<Complex64>],
    rel_tol: f64,
) -> Vec<Vec<Complex64>> {
    let mut gram = vec![Complex64::new(0.0, 0.0); ncols * ncols];
    for row in rows {
        debug_assert_eq!(row.len(), ncols);
        for i in 0..ncols {
            let ri = row[i].conj();
            if ri.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..ncols {
                gram[i * ncols + j] += ri * row[j];
            }
        }
    }
    let eig = hermitian_eigen_raw(ncols, gram);
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    // The requested cut can be sharper than the eigensolver resolves; true
    // null eigenvalues of the Gram carry absolute noise of order eps·λ_max,
    // so the cutoff never drops below that floor.
    let cutoff = (rel_tol * rel_tol).max(64.0 * f64::EPSILON) * lambda_max;
    eig.values
        .iter()
        .zip(eig.vectors.iter())
        .filter(|(&lambda, _)| lambda.max(0.0) <= cutoff)
        .map(|(_, vec)| vec.clone())
        .collect()
}
