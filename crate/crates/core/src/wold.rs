//! Wold decomposition of an isometry semigroup on the half-window.
//!
//! The unitary part is the intersection of the ranges of the powers. On a
//! finite window the shift part marches off the edge at unit speed, so the
//! intersection needs on the order of `N` iterations to stabilize; a
//! power-doubling jump gets there cheaply and a few single steps then confirm
//! the plateau. Failure to stabilize signals boundary contamination.

use crate::cocycle::IsometrySemigroup;
use crate::error::{LabError, Result};
use crate::linalg::{self, adjoint, max_abs, Mat};

/// Result of the Wold decomposition.
#[derive(Debug, Clone)]
pub struct WoldData {
    /// Orthonormal basis of the unitary part (columns, half-window block).
    pub unitary_basis: Mat,
    /// Orthonormal basis of the shift part, the orthocomplement within `H_0`.
    pub shift_basis: Mat,
    /// `dim(H_0) - rank(V)`, computed independently of the intersection.
    pub defect_index: usize,
    /// `V` compressed to the unitary part.
    pub unitary_part: Mat,
    /// Power of `V` at which the range intersection stabilized.
    pub stabilized_at: usize,
}

/// Iterated range intersection with rank-revealing orthonormalization
/// (cutoff 1e-8). `max_power` defaults to `dim + 32` when `None`; the spec's
/// plateau is reached once every shift-part orbit has left the window, which
/// takes about `dim` applications.
pub fn wold_decompose(v: &IsometrySemigroup, max_power: Option<usize>) -> Result<WoldData> {
    let n = v.half_width();
    let cutoff = 1e-8;
    let stability_tol = 1e-8;
    let max_power = max_power.unwrap_or(n + 32);

    // Jump close to the stabilization point by repeated squaring.
    let mut power_mat = v.generator().clone();
    let mut applied = 1usize;
    while 2 * applied <= max_power.min(2 * n) && applied < n {
        power_mat = power_mat.dot(&power_mat);
        applied *= 2;
    }
    let (mut basis, _) = linalg::orthonormal_columns(&power_mat, cutoff);

    // Single-step refinement until the subspace reproduces itself.
    let mut stabilized = None;
    for step in 0..64usize {
        if applied + step >= max_power + 64 {
            break;
        }
        let image = v.generator().dot(&basis);
        let (next, _) = linalg::orthonormal_columns(&image, cutoff);
        if next.ncols() == basis.ncols() {
            let p_old = basis.dot(&adjoint(&basis));
            let p_new = next.dot(&adjoint(&next));
            let dist = linalg::max_diff(&p_old, &p_new);
            if dist <= stability_tol {
                stabilized = Some(applied + step);
                basis = next;
                break;
            }
        }
        basis = next;
    }
    let stabilized_at = stabilized.ok_or_else(|| {
        LabError::Stabilization(format!(
            "range intersection still moving after {} powers; boundary contamination",
            max_power + 64
        ))
    })?;

    // V must be unitary on the intersection.
    let compressed = adjoint(&basis).dot(v.generator()).dot(&basis);
    if basis.ncols() > 0 {
        let defect = linalg::max_diff(
            &linalg::gram(&compressed),
            &linalg::eye(basis.ncols()),
        );
        if defect > 1e-8 {
            return Err(LabError::Stabilization(format!(
                "compression to the intersection is not unitary (defect {defect:.3e})"
            )));
        }
    }

    // Shift part: orthocomplement of the unitary part within the half-window.
    let mut complement = linalg::eye(n);
    let p = basis.dot(&adjoint(&basis));
    complement = &complement - &p;
    let (shift_basis, _) = linalg::orthonormal_columns(&complement, cutoff);

    let defect_index = n - linalg::rank(v.generator(), cutoff);

    Ok(WoldData {
        unitary_basis: basis,
        shift_basis,
        defect_index,
        unitary_part: compressed,
        stabilized_at,
    })
}

impl WoldData {
    pub fn unitary_dimension(&self) -> usize {
        self.unitary_basis.ncols()
    }

    /// Mutual orthogonality of the two parts.
    pub fn orthogonality_residual(&self) -> f64 {
        if self.unitary_basis.ncols() == 0 || self.shift_basis.ncols() == 0 {
            return 0.0;
        }
        max_abs(&adjoint(&self.unitary_basis).dot(&self.shift_basis))
    }

    /// How far `V` moves the unitary part out of itself.
    pub fn invariance_residual(&self, v: &IsometrySemigroup) -> f64 {
        if self.unitary_basis.ncols() == 0 {
            return 0.0;
        }
        let image = v.generator().dot(&self.unitary_basis);
        let p = self.unitary_basis.dot(&adjoint(&self.unitary_basis));
        let outside = &image - &p.dot(&image);
        max_abs(&outside)
    }

    /// Eigenvalues of the compressed unitary part.
    pub fn unitary_spectrum(&self) -> Result<Vec<linalg::C64>> {
        let (vals, _, off) = linalg::normal_eigen(&self.unitary_part)?;
        if off > 1e-8 {
            return Err(LabError::Stabilization(format!(
                "unitary part is not normal (off-diagonal {off:.3e})"
            )));
        }
        Ok(vals)
    }
}

/// Consistency of the shift part with a unilateral shift: the orbit
/// `{V^k d}` of a defect vector must stay orthonormal. Returns the worst Gram
/// residual over the first `count` orbit vectors.
pub fn shift_orbit_residual(v: &IsometrySemigroup, count: usize) -> f64 {
    let d = v.defect_basis();
    if d.ncols() == 0 {
        return 0.0;
    }
    let n = v.half_width();
    let mut orbit = linalg::zeros(n, count * d.ncols());
    for c in 0..d.ncols() {
        let mut current = d.column(c).to_owned();
        for k in 0..count {
            for i in 0..n {
                orbit[(i, k + c * count)] = current[i];
            }
            current = v.generator().dot(&current);
        }
    }
    linalg::orthonormality_defect(&orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::{
        associated_isometry, markovian_from_inner, verify_markovian, ConstructorForm,
        MultiplicativeCocycle,
    };
    use crate::inner::{model_space, InnerFunction, ModelSpaceUnitary};
    use crate::linalg::{eye, C64, ONE};

    #[test]
    fn right_shift_has_trivial_unitary_part() {
        let v = IsometrySemigroup::right_shift(24);
        let wold = wold_decompose(&v, None).unwrap();
        assert_eq!(wold.defect_index, 1);
        assert_eq!(wold.unitary_dimension(), 0);
        assert_eq!(wold.shift_basis.ncols(), 24);
        assert!(shift_orbit_residual(&v, 12) < 1e-10);
    }

    #[test]
    fn unitary_semigroup_has_defect_zero() {
        // Diagonal phases: a unitary "isometry"; everything is unitary part.
        let n = 16usize;
        let mut u = eye(n);
        for k in 0..n {
            u[(k, k)] = C64::from_polar(1.0, 0.2 * k as f64);
        }
        let v = IsometrySemigroup::from_block(n, u, 0).unwrap();
        let wold = wold_decompose(&v, None).unwrap();
        assert_eq!(wold.defect_index, 0);
        assert_eq!(wold.unitary_dimension(), n);
        assert_eq!(wold.shift_basis.ncols(), 0);
    }

    #[test]
    fn constructed_cocycle_unitary_part_matches_spectrum() {
        let theta = InnerFunction::blaschke(vec![C64::new(0.5, 0.0)]).unwrap();
        let half = 64usize;
        let space = model_space(&theta, half).unwrap();
        let lambda = C64::from_polar(1.0, 1.3);
        let unitary = ModelSpaceUnitary::new(&space, vec![lambda]).unwrap();
        let w = markovian_from_inner(&space, &unitary, 4, ConstructorForm::Corrected).unwrap();
        verify_markovian(&w, 4, 1e-12).unwrap();
        let (v, _) = associated_isometry(&w, 3).unwrap();
        let wold = wold_decompose(&v, None).unwrap();
        assert_eq!(wold.defect_index, 1);
        assert_eq!(wold.unitary_dimension(), 1);
        assert!(wold.orthogonality_residual() < 1e-9);
        assert!(wold.invariance_residual(&v) < 1e-9);
        let spec = wold.unitary_spectrum().unwrap();
        assert_eq!(spec.len(), 1);
        assert!((spec[0] - lambda).norm() < 1e-9, "got {}", spec[0]);
    }

    #[test]
    fn identity_cocycle_wold() {
        let w = MultiplicativeCocycle::identity(20, 3).unwrap();
        verify_markovian(&w, 3, 1e-12).unwrap();
        let (v, _) = associated_isometry(&w, 2).unwrap();
        let wold = wold_decompose(&v, None).unwrap();
        assert_eq!(wold.defect_index, 1);
        assert_eq!(wold.unitary_dimension(), 0);
    }

    #[test]
    fn phase_only_multiplier_is_unitary_with_defect_zero() {
        // The multiplier of a constant inner function is a phase on the
        // half-window: unitary, so its Wold decomposition has defect 0.
        let n = 16usize;
        let lam = C64::from_polar(1.0, 0.9);
        let mut m = eye(n);
        for k in 0..n {
            m[(k, k)] = lam;
        }
        let v = IsometrySemigroup::from_block(n, m, 0).unwrap();
        let wold = wold_decompose(&v, None).unwrap();
        assert_eq!(wold.defect_index, 0);
        assert_eq!(wold.unitary_dimension(), n);
        let _ = ONE;
    }
}
