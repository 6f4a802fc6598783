//! Dense complex linear algebra used throughout the lab.
//!
//! Everything here is deliberately self-contained: cyclic Jacobi for Hermitian
//! eigenproblems, Householder QR with column pivoting for rank-revealing
//! orthonormalization, and a normal-matrix eigensolver built from two Hermitian
//! solves. Window sizes stay in the hundreds, so robustness beats asymptotics.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{LabError, Result};

pub type C64 = Complex64;
pub type Mat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn eye(n: usize) -> Mat {
    Array2::from_diag_elem(n, ONE)
}

pub fn zeros(n: usize, m: usize) -> Mat {
    Array2::from_elem((n, m), ZERO)
}

pub fn adjoint(a: &Mat) -> Mat {
    a.t().mapv(|z| z.conj())
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

pub fn frobenius(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-norm of `a - b`.
pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Max-norm of `a - b` over the index square `rows x cols`.
pub fn band_max_diff(
    a: &Mat,
    b: &Mat,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> f64 {
    let mut m = 0.0f64;
    for i in rows {
        for j in cols.clone() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Hermitian part `(a + a*)/2`.
pub fn hermitian_part(a: &Mat) -> Mat {
    let ad = adjoint(a);
    (a + &ad).mapv(|z| z * 0.5)
}

/// Anti-Hermitian part divided by i, i.e. `(a - a*)/(2i)`; Hermitian again.
pub fn skew_part(a: &Mat) -> Mat {
    let ad = adjoint(a);
    (a - &ad).mapv(|z| z * C64::new(0.0, -0.5))
}

fn off_diagonal_norm(a: &Mat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, vectors)` with eigenvalues ascending and the k-th
/// column of `vectors` the eigenvector of the k-th eigenvalue.
pub fn hermitian_eigen(a: &Mat) -> Result<(Array1<f64>, Mat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LabError::DimensionMismatch(format!(
            "hermitian_eigen needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let herm_defect = max_diff(a, &adjoint(a));
    let scale = max_abs(a).max(1e-300);
    if herm_defect > 1e-10 * scale.max(1.0) {
        return Err(LabError::InvalidInput(format!(
            "hermitian_eigen: matrix is not Hermitian (defect {herm_defect:.3e})"
        )));
    }

    let mut m = a.clone();
    let mut v = eye(n);
    let tol = 1e-14 * frobenius(a).max(1e-300);
    let max_sweeps = 60;

    for _sweep in 0..max_sweeps {
        if off_diagonal_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[(p, q)];
                let babs = b.norm();
                if babs <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * babs);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = -sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sigma = t * c;
                let phase = b / babs; // e^{i phi}
                let s_pq = -phase * sigma; // U[p][q]
                let s_qp = phase.conj() * sigma; // U[q][p]

                // m <- m U   (columns p, q)
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c + miq * s_qp;
                    m[(i, q)] = mip * s_pq + miq * c;
                }
                // m <- U† m  (rows p, q)
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c + mqj * s_qp.conj();
                    m[(q, j)] = mpj * s_pq.conj() + mqj * c;
                }
                // v <- v U
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c + viq * s_qp;
                    v[(i, q)] = vip * s_pq + viq * c;
                }
            }
        }
    }

    if off_diagonal_norm(&m) > 1e-10 * frobenius(a).max(1.0) {
        return Err(LabError::Stabilization(
            "Jacobi sweeps did not converge".into(),
        ));
    }

    // Sort ascending by eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut vecs = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, k)] = v[(r, i)];
        }
    }
    Ok((vals, vecs))
}

/// Eigenvalues (with eigenvector columns) of a *normal* matrix, computed by
/// diagonalizing the Hermitian part and then the skew part inside each
/// eigenvalue cluster. Exact for commuting parts, which is what normality
/// guarantees; the off-diagonal residual of the result is returned so callers
/// can reject non-normal input.
pub fn normal_eigen(a: &Mat) -> Result<(Vec<C64>, Mat, f64)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0), 0.0));
    }
    let h = hermitian_part(a);
    let k = skew_part(a);
    let (hv, hq) = hermitian_eigen(&h)?;
    let scale = max_abs(a).max(1.0);
    let cluster_tol = 1e-8 * scale;

    let mut q = hq;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && (hv[end] - hv[start]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            // Diagonalize the skew part restricted to the cluster.
            let block_cols = q.slice(ndarray::s![.., start..end]).to_owned();
            let kb = adjoint(&block_cols).dot(&k).dot(&block_cols);
            let (_kv, ku) = hermitian_eigen(&kb)?;
            let rotated = block_cols.dot(&ku);
            for (jj, col) in (start..end).enumerate() {
                for r in 0..n {
                    q[(r, col)] = rotated[(r, jj)];
                }
            }
        }
        start = end;
    }

    let d = adjoint(&q).dot(a).dot(&q);
    let mut vals = Vec::with_capacity(n);
    let mut off = 0.0f64;
    for i in 0..n {
        vals.push(d[(i, i)]);
        for j in 0..n {
            if i != j {
                off = off.max(d[(i, j)].norm());
            }
        }
    }
    Ok((vals, q, off))
}

/// Householder QR with column pivoting. Returns an orthonormal basis of the
/// column span, keeping only directions whose pivot magnitude exceeds
/// `cutoff` (absolute). The second element is the list of pivot magnitudes.
pub fn orthonormal_columns(a: &Mat, cutoff: f64) -> (Mat, Vec<f64>) {
    let m = a.nrows();
    let n = a.ncols();
    let mut cols: Vec<CVec> = (0..n).map(|j| a.column(j).to_owned()).collect();
    let mut basis: Vec<CVec> = Vec::new();
    let mut pivots: Vec<f64> = Vec::new();

    // Modified Gram-Schmidt with pivoting and one re-orthogonalization pass.
    loop {
        let (best, best_norm) = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == usize::MAX || best_norm <= cutoff {
            break;
        }
        let mut v = cols.swap_remove(best);
        for _pass in 0..2 {
            for b in &basis {
                let inner: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                for i in 0..m {
                    let bi = b[i];
                    v[i] -= inner * bi;
                }
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv <= cutoff {
            continue;
        }
        pivots.push(nv);
        v.mapv_inplace(|z| z / nv);
        // Orthogonalize the remaining columns against the new direction.
        for c in cols.iter_mut() {
            let inner: C64 = v.iter().zip(c.iter()).map(|(x, y)| x.conj() * y).sum();
            for i in 0..m {
                let vi = v[i];
                c[i] -= inner * vi;
            }
        }
        basis.push(v);
    }

    let r = basis.len();
    let mut q = zeros(m, r);
    for (j, b) in basis.iter().enumerate() {
        for i in 0..m {
            q[(i, j)] = b[i];
        }
    }
    (q, pivots)
}

/// Numerical rank with an absolute cutoff on pivot magnitudes.
pub fn rank(a: &Mat, cutoff: f64) -> usize {
    orthonormal_columns(a, cutoff).0.ncols()
}

/// Haar-like random unitary from QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> Mat {
    let mut g = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Box-Muller keeps us independent of any Distribution features.
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt();
            g[(i, j)] = C64::new(r * u2.cos(), r * u2.sin());
        }
    }
    let (q, _) = orthonormal_columns(&g, 1e-12);
    debug_assert_eq!(q.ncols(), n);
    q
}

/// Gram matrix `a* a`.
pub fn gram(a: &Mat) -> Mat {
    adjoint(a).dot(a)
}

/// `max |gram(a) - I|`; zero for an orthonormal family.
pub fn orthonormality_defect(a: &Mat) -> f64 {
    let g = gram(a);
    max_diff(&g, &eye(a.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        let mut a = zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        hermitian_part(&a)
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 5, 16, 40] {
            let a = random_hermitian(&mut rng, n);
            let (vals, q) = hermitian_eigen(&a).unwrap();
            let mut d = zeros(n, n);
            for i in 0..n {
                d[(i, i)] = C64::new(vals[i], 0.0);
            }
            let rec = q.dot(&d).dot(&adjoint(&q));
            assert!(max_diff(&rec, &a) < 1e-11, "n={n}");
            assert!(orthonormality_defect(&q) < 1e-12);
        }
    }

    #[test]
    fn jacobi_known_two_by_two() {
        // [[0,1],[1,0]] has eigenvalues -1, 1.
        let mut a = zeros(2, 2);
        a[(0, 1)] = ONE;
        a[(1, 0)] = ONE;
        let (vals, _) = hermitian_eigen(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_eigen_unitary_spectrum() {
        // Diagonal phases conjugated by a random unitary.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 8;
        let u = random_unitary(&mut rng, n);
        let phases: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(1.0, 0.3 + 0.7 * k as f64))
            .collect();
        let mut d = zeros(n, n);
        for k in 0..n {
            d[(k, k)] = phases[k];
        }
        let a = u.dot(&d).dot(&adjoint(&u));
        let (vals, _q, off) = normal_eigen(&a).unwrap();
        assert!(off < 1e-10, "off-diagonal residual {off}");
        let mut got: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
        let mut want: Vec<f64> = phases.iter().map(|z| z.arg()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn cpqr_rank_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let q = random_unitary(&mut rng, n);
        // Rank-4 projector.
        let block = q.slice(ndarray::s![.., 0..4]).to_owned();
        let p = block.dot(&adjoint(&block));
        assert_eq!(rank(&p, 1e-8), 4);
        let (basis, _) = orthonormal_columns(&p, 1e-8);
        assert!(orthonormality_defect(&basis) < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 10);
        assert!(max_diff(&gram(&u), &eye(10)) < 1e-12);
    }
}
