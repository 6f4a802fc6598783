//! Finite window of the integer lattice standing in for the line.
//!
//! Vectors live on sites `k in [-N, N)`; the shift group acts by
//! `(S_m v)(k) = v(k + m)`, so the basis vector `e_j` moves to `e_{j-m}`.
//! Support leaving the window is a hard error, never a silent truncation.

use ndarray::Array1;

use crate::error::{LabError, Result};
use crate::linalg::{self, C64, CVec, Mat, ONE, ZERO};

/// Complex vector on the window `[-N, N)` with tracked support.
#[derive(Debug, Clone)]
pub struct LatticeVector {
    half_width: usize,
    amplitudes: CVec,
    /// `Some((lo, hi))` = lowest/highest site with a nonzero amplitude.
    support: Option<(i64, i64)>,
}

impl LatticeVector {
    pub fn zero(half_width: usize) -> Self {
        LatticeVector {
            half_width,
            amplitudes: Array1::from_elem(2 * half_width, ZERO),
            support: None,
        }
    }

    pub fn from_amplitudes(half_width: usize, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != 2 * half_width {
            return Err(LabError::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                2 * half_width,
                amplitudes.len()
            )));
        }
        let mut v = LatticeVector {
            half_width,
            amplitudes,
            support: None,
        };
        v.recompute_support();
        Ok(v)
    }

    /// Basis vector `e_k`.
    pub fn basis(half_width: usize, k: i64) -> Result<Self> {
        let mut v = LatticeVector::zero(half_width);
        v.set(k, ONE)?;
        Ok(v)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        self.support
    }

    fn index(&self, k: i64) -> Result<usize> {
        let n = self.half_width as i64;
        if k < -n || k >= n {
            return Err(LabError::WindowOverflow(format!(
                "site {k} outside window [{}, {})",
                -n, n
            )));
        }
        Ok((k + n) as usize)
    }

    pub fn get(&self, k: i64) -> Result<C64> {
        Ok(self.amplitudes[self.index(k)?])
    }

    pub fn set(&mut self, k: i64, value: C64) -> Result<()> {
        let idx = self.index(k)?;
        self.amplitudes[idx] = value;
        self.recompute_support();
        Ok(())
    }

    fn recompute_support(&mut self) {
        let n = self.half_width as i64;
        let mut lo = None;
        let mut hi = None;
        for (i, z) in self.amplitudes.iter().enumerate() {
            if z.norm() > 0.0 {
                let k = i as i64 - n;
                if lo.is_none() {
                    lo = Some(k);
                }
                hi = Some(k);
            }
        }
        self.support = lo.map(|l| (l, hi.unwrap()));
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &LatticeVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn add(&self, other: &LatticeVector) -> Result<LatticeVector> {
        if self.half_width != other.half_width {
            return Err(LabError::DimensionMismatch("window sizes differ".into()));
        }
        LatticeVector::from_amplitudes(self.half_width, &self.amplitudes + &other.amplitudes)
    }

    pub fn sub(&self, other: &LatticeVector) -> Result<LatticeVector> {
        if self.half_width != other.half_width {
            return Err(LabError::DimensionMismatch("window sizes differ".into()));
        }
        LatticeVector::from_amplitudes(self.half_width, &self.amplitudes - &other.amplitudes)
    }

    pub fn scale(&self, c: C64) -> LatticeVector {
        let mut v = self.clone();
        v.amplitudes.mapv_inplace(|z| z * c);
        v.recompute_support();
        v
    }

    /// Invariant check: recorded support matches the amplitude pattern and the
    /// squared norm agrees with a direct recomputation.
    pub fn verify_invariants(&self) -> Result<()> {
        let mut copy = self.clone();
        copy.recompute_support();
        if copy.support != self.support {
            return Err(LabError::InvalidInput(format!(
                "support bounds {:?} do not match amplitudes {:?}",
                self.support, copy.support
            )));
        }
        let direct: f64 = self.amplitudes.iter().map(|z| z.re * z.re + z.im * z.im).sum();
        if (direct - self.norm().powi(2)).abs() > 1e-12 * (1.0 + direct) {
            return Err(LabError::InvalidInput("norm mismatch".into()));
        }
        Ok(())
    }
}

/// `(S_m v)(k) = v(k + m)`; `e_j` goes to `e_{j - m}`. Errors when the shifted
/// support would exit the window.
pub fn shift(v: &LatticeVector, m: i64) -> Result<LatticeVector> {
    let n = v.half_width as i64;
    if let Some((lo, hi)) = v.support {
        if lo - m < -n || hi - m >= n {
            return Err(LabError::WindowOverflow(format!(
                "shift by {m} moves support [{lo}, {hi}] outside [{}, {})",
                -n, n
            )));
        }
    }
    let mut out = LatticeVector::zero(v.half_width);
    if let Some((lo, hi)) = v.support {
        for k in lo..=hi {
            let idx_src = (k + n) as usize;
            let idx_dst = (k - m + n) as usize;
            out.amplitudes[idx_dst] = v.amplitudes[idx_src];
        }
    }
    out.recompute_support();
    Ok(out)
}

/// Additive cocycle of the shift group at integer time `t`.
///
/// `t > 0` gives the indicator of sites `{-t, ..., -1}`; the extension to
/// negative times is forced by the cocycle identity and comes out as minus the
/// indicator of `{0, ..., -t-1}`. `chi(0)` is the zero vector.
pub fn chi(half_width: usize, t: i64) -> Result<LatticeVector> {
    let n = half_width as i64;
    let mut v = LatticeVector::zero(half_width);
    if t > 0 {
        if t > n {
            return Err(LabError::WindowOverflow(format!(
                "chi({t}) needs sites down to {}, window starts at {}",
                -t, -n
            )));
        }
        for k in -t..0 {
            v.amplitudes[(k + n) as usize] = ONE;
        }
    } else if t < 0 {
        let m = -t;
        if m > n {
            return Err(LabError::WindowOverflow(format!(
                "chi({t}) needs sites up to {}, window ends at {}",
                m - 1,
                n - 1
            )));
        }
        for k in 0..m {
            v.amplitudes[(k + n) as usize] = -ONE;
        }
    }
    v.recompute_support();
    Ok(v)
}

/// Structural tag an operator may carry, together with the tolerance at which
/// the tag was asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralTag {
    General,
    Unitary,
    Isometry,
    LowerToeplitz,
}

/// Dense operator over the full window `[-N, N)`.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    half_width: usize,
    matrix: Mat,
    tag: StructuralTag,
    tag_tolerance: f64,
}

impl LatticeOperator {
    pub fn new(half_width: usize, matrix: Mat) -> Result<Self> {
        if matrix.nrows() != 2 * half_width || matrix.ncols() != 2 * half_width {
            return Err(LabError::DimensionMismatch(format!(
                "operator must be {0}x{0}",
                2 * half_width
            )));
        }
        Ok(LatticeOperator {
            half_width,
            matrix,
            tag: StructuralTag::General,
            tag_tolerance: 0.0,
        })
    }

    pub fn identity(half_width: usize) -> Self {
        LatticeOperator {
            half_width,
            matrix: linalg::eye(2 * half_width),
            tag: StructuralTag::Unitary,
            tag_tolerance: 0.0,
        }
    }

    /// Attach a structural tag after checking it at `tolerance`.
    pub fn with_tag(mut self, tag: StructuralTag, tolerance: f64) -> Result<Self> {
        let defect = match tag {
            StructuralTag::General => 0.0,
            StructuralTag::Unitary => {
                let g = linalg::gram(&self.matrix);
                let gg = self.matrix.dot(&linalg::adjoint(&self.matrix));
                let i = linalg::eye(self.matrix.nrows());
                linalg::max_diff(&g, &i).max(linalg::max_diff(&gg, &i))
            }
            StructuralTag::Isometry => {
                let g = linalg::gram(&self.matrix);
                linalg::max_diff(&g, &linalg::eye(self.matrix.ncols()))
            }
            StructuralTag::LowerToeplitz => {
                let n = self.matrix.nrows();
                let mut d = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i >= j {
                            self.matrix[(i - j, 0)]
                        } else {
                            ZERO
                        };
                        d = d.max((self.matrix[(i, j)] - expect).norm());
                    }
                }
                d
            }
        };
        if defect > tolerance {
            return Err(LabError::InvalidInput(format!(
                "tag {:?} fails at tolerance {:.1e}: defect {:.3e}",
                tag, tolerance, defect
            )));
        }
        self.tag = tag;
        self.tag_tolerance = tolerance;
        Ok(self)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn tag(&self) -> StructuralTag {
        self.tag
    }

    pub fn tag_tolerance(&self) -> f64 {
        self.tag_tolerance
    }

    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        if v.half_width != self.half_width {
            return Err(LabError::DimensionMismatch("window sizes differ".into()));
        }
        let out = self.matrix.dot(v.amplitudes());
        LatticeVector::from_amplitudes(self.half_width, out)
    }

    pub fn compose(&self, other: &LatticeOperator) -> Result<LatticeOperator> {
        if other.half_width != self.half_width {
            return Err(LabError::DimensionMismatch("window sizes differ".into()));
        }
        LatticeOperator::new(self.half_width, self.matrix.dot(&other.matrix))
    }

    pub fn adjoint(&self) -> LatticeOperator {
        LatticeOperator {
            half_width: self.half_width,
            matrix: linalg::adjoint(&self.matrix),
            tag: StructuralTag::General,
            tag_tolerance: 0.0,
        }
    }
}

/// Matrix of the shift `S_m` on the window: `e_j` to `e_{j-m}`; entries whose
/// source or target leaves the window are dropped. Use it only inside
/// relabel-style computations that account for the boundary.
pub fn shift_matrix(half_width: usize, m: i64) -> Mat {
    let dim = 2 * half_width;
    let mut s = linalg::zeros(dim, dim);
    for j in 0..dim as i64 {
        let i = j - m;
        if i >= 0 && i < dim as i64 {
            s[(i as usize, j as usize)] = ONE;
        }
    }
    s
}

/// Relabel-conjugation `S_m A S_{-m}` with identity extension beyond the
/// window: `B[i][j] = A[i+m][j+m]` where both indices exist, Kronecker delta
/// otherwise. Exact whenever the true operator acts as the identity (or is
/// not consulted) outside the window.
pub fn shift_conjugate(a: &Mat, m: i64) -> Mat {
    let dim = a.nrows() as i64;
    let mut b = linalg::zeros(dim as usize, dim as usize);
    for i in 0..dim {
        for j in 0..dim {
            let si = i + m;
            let sj = j + m;
            b[(i as usize, j as usize)] = if si >= 0 && si < dim && sj >= 0 && sj < dim {
                a[(si as usize, sj as usize)]
            } else if i == j {
                ONE
            } else {
                ZERO
            };
        }
    }
    b
}

/// Relabel-conjugation with zero extension instead: right for localized
/// (compactly supported) operators, where the action must stay linear and
/// additive in the shift parameter.
pub fn shift_conjugate_zero(a: &Mat, m: i64) -> Mat {
    let dim = a.nrows() as i64;
    let mut b = linalg::zeros(dim as usize, dim as usize);
    for i in 0..dim {
        for j in 0..dim {
            let si = i + m;
            let sj = j + m;
            if si >= 0 && si < dim && sj >= 0 && sj < dim {
                b[(i as usize, j as usize)] = a[(si as usize, sj as usize)];
            }
        }
    }
    b
}

/// Projection onto `span{e_0, ..., e_{n-1}}`, the head `H_0 - H_{-n}` of the
/// positive half-window.
pub fn head_projection(half_width: usize, n: usize) -> Result<LatticeOperator> {
    if n > half_width {
        return Err(LabError::WindowOverflow(format!(
            "head_projection({n}) exceeds half-width {half_width}"
        )));
    }
    let dim = 2 * half_width;
    let mut p = linalg::zeros(dim, dim);
    for k in 0..n {
        let idx = half_width + k;
        p[(idx, idx)] = ONE;
    }
    LatticeOperator::new(half_width, p)
}

/// Projection onto `span{e_k : n <= k < N}`, the in-window part of `H_{-n}`.
pub fn tail_projection(half_width: usize, n: usize) -> Result<LatticeOperator> {
    if n > half_width {
        return Err(LabError::WindowOverflow(format!(
            "tail_projection({n}) exceeds half-width {half_width}"
        )));
    }
    let dim = 2 * half_width;
    let mut p = linalg::zeros(dim, dim);
    for k in n..half_width {
        let idx = half_width + k;
        p[(idx, idx)] = ONE;
    }
    LatticeOperator::new(half_width, p)
}

/// List of mutually orthonormal window vectors.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    half_width: usize,
    vectors: Vec<LatticeVector>,
}

impl SubspaceBasis {
    pub fn new(half_width: usize, vectors: Vec<LatticeVector>) -> Result<Self> {
        let basis = SubspaceBasis {
            half_width,
            vectors,
        };
        basis.verify_orthonormal(1e-10)?;
        Ok(basis)
    }

    pub fn from_matrix_columns(half_width: usize, m: &Mat) -> Result<Self> {
        let mut vectors = Vec::with_capacity(m.ncols());
        for j in 0..m.ncols() {
            vectors.push(LatticeVector::from_amplitudes(
                half_width,
                m.column(j).to_owned(),
            )?);
        }
        SubspaceBasis::new(half_width, vectors)
    }

    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[LatticeVector] {
        &self.vectors
    }

    pub fn as_matrix(&self) -> Mat {
        let dim = 2 * self.half_width;
        let mut m = linalg::zeros(dim, self.vectors.len());
        for (j, v) in self.vectors.iter().enumerate() {
            for i in 0..dim {
                m[(i, j)] = v.amplitudes()[i];
            }
        }
        m
    }

    pub fn projector(&self) -> Mat {
        let m = self.as_matrix();
        m.dot(&linalg::adjoint(&m))
    }

    pub fn verify_orthonormal(&self, tol: f64) -> Result<()> {
        let defect = linalg::orthonormality_defect(&self.as_matrix());
        if defect > tol {
            return Err(LabError::InvalidInput(format!(
                "basis Gram matrix off identity by {defect:.3e}"
            )));
        }
        Ok(())
    }
}
