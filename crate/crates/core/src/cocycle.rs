//! Multiplicative cocycles of the shift group on the window.
//!
//! A family `n -> W_n` of window operators satisfying
//! `W_{m+n} = W_m S_m W_n S_{-m}`, `W_0 = I`. Markovian cocycles act as the
//! identity on the complement of `H_n` for `n >= 0`; they are constructed here
//! from an inner function together with a unitary group on its model space.
//!
//! Two readings of the constructor ship. The `Corrected` form conjugates the
//! shift into the multiplier range and is unitary; the `Literal` form applies
//! the range projection without that conjugation and fails unitarity already
//! for the simplest inputs (`|W_{-1} e_1| = sqrt 2` for the shift function).
//! The literal form is retained so the discrepancy can be measured and
//! reported rather than asserted away.
//!
//! All residuals are evaluated on a reliability band that excludes a guard
//! strip at the window edges: the finite window truncates coefficient tails,
//! and only entries whose dependencies stay inside the window are meaningful.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use crate::error::{LabError, Result};
use crate::inner::{
    tail_guard, taylor_coefficients, toeplitz_block, ModelSpace, ModelSpaceUnitary,
};
use crate::lattice::{chi, shift_conjugate, shift_matrix, LatticeVector};
use crate::linalg::{self, adjoint, band_max_diff, eye, max_diff, C64, CVec, Mat, ONE};

/// Which reading of the markovian constructor to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructorForm {
    Corrected,
    Literal,
}

type Rule = Rc<dyn Fn(i64) -> Result<Mat>>;

/// Family `n -> W_n` on the full window, materialized lazily from a rule.
pub struct MultiplicativeCocycle {
    half_width: usize,
    horizon: i64,
    cache: RefCell<BTreeMap<i64, Rc<Mat>>>,
    rule: Rule,
    /// Width of the untrusted strip at each window edge for `W_0`; grows with
    /// `|n|` for the other members.
    base_guard: usize,
    markovian: RefCell<Option<f64>>,
}

impl MultiplicativeCocycle {
    pub fn from_rule(half_width: usize, horizon: i64, base_guard: usize, rule: Rule) -> Result<Self> {
        let c = MultiplicativeCocycle {
            half_width,
            horizon,
            cache: RefCell::new(BTreeMap::new()),
            rule,
            base_guard,
            markovian: RefCell::new(None),
        };
        let w0 = c.operator(0)?;
        if max_diff(&w0, &eye(2 * half_width)) > 1e-12 {
            return Err(LabError::InvalidInput("W_0 is not the identity".into()));
        }
        Ok(c)
    }

    /// The trivial cocycle `W = I`.
    pub fn identity(half_width: usize, horizon: i64) -> Result<Self> {
        let dim = 2 * half_width;
        Self::from_rule(half_width, horizon, 0, Rc::new(move |_| Ok(eye(dim))))
    }

    /// Coboundary `W_n = J S_n J* S_{-n}` of a window unitary `J`. The unitary
    /// should be supported on an interior block so that its shift conjugates
    /// stay exact on the window.
    pub fn coboundary(half_width: usize, horizon: i64, j: Mat) -> Result<Self> {
        let dim = 2 * half_width;
        if j.nrows() != dim || j.ncols() != dim {
            return Err(LabError::DimensionMismatch("coboundary generator size".into()));
        }
        let jj = Rc::new(j);
        Self::from_rule(
            half_width,
            horizon,
            0,
            Rc::new(move |n| {
                let moved = shift_conjugate(&adjoint(&jj), n);
                Ok(jj.dot(&moved))
            }),
        )
    }

    pub fn from_family(half_width: usize, family: BTreeMap<i64, Mat>) -> Result<Self> {
        let horizon = family.keys().map(|k| k.abs()).max().unwrap_or(0);
        let shared: BTreeMap<i64, Rc<Mat>> =
            family.into_iter().map(|(k, v)| (k, Rc::new(v))).collect();
        let map = Rc::new(shared);
        let lookup = Rc::clone(&map);
        let c = MultiplicativeCocycle {
            half_width,
            horizon,
            cache: RefCell::new(BTreeMap::new()),
            rule: Rc::new(move |n| {
                lookup
                    .get(&n)
                    .map(|m| (**m).clone())
                    .ok_or_else(|| LabError::InvalidInput(format!("no stored member at {n}")))
            }),
            base_guard: 0,
            markovian: RefCell::new(None),
        };
        let w0 = c.operator(0)?;
        if max_diff(&w0, &eye(2 * half_width)) > 1e-12 {
            return Err(LabError::InvalidInput("W_0 is not the identity".into()));
        }
        Ok(c)
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    pub fn base_guard(&self) -> usize {
        self.base_guard
    }

    /// Residual at which markovianity was verified, if it was.
    pub fn markovian_residual(&self) -> Option<f64> {
        *self.markovian.borrow()
    }

    pub fn is_markovian(&self) -> bool {
        self.markovian.borrow().is_some()
    }

    /// Member `W_n`, materialized on demand.
    pub fn operator(&self, n: i64) -> Result<Rc<Mat>> {
        if let Some(m) = self.cache.borrow().get(&n) {
            return Ok(Rc::clone(m));
        }
        let built = Rc::new((self.rule)(n)?);
        self.cache.borrow_mut().insert(n, Rc::clone(&built));
        Ok(built)
    }

    /// Entry band that can be trusted for `W_n`: indices
    /// `[guard(n), dim - guard(n))`.
    pub fn reliable_band(&self, n: i64) -> std::ops::Range<usize> {
        let g = self.base_guard + n.unsigned_abs() as usize + 2;
        let dim = 2 * self.half_width;
        if 2 * g >= dim {
            0..0
        } else {
            g..dim - g
        }
    }

    /// Mark the cocycle markovian after an external verification at the given
    /// residual. Use `verify_markovian` instead where possible.
    pub fn set_markovian_residual(&self, residual: f64) {
        *self.markovian.borrow_mut() = Some(residual);
    }
}

/// Residual report for the cocycle identity sweep.
#[derive(Debug, Clone)]
pub struct CocycleReport {
    /// Max over pairs of the banded residual of
    /// `W_{m+n} - W_m S_m W_n S_{-m}`.
    pub cocycle_residual: f64,
    /// Max over `n >= 1` of the banded residual of `W_{-n} - S_n W_n* S_{-n}`.
    pub adjoint_residual: f64,
    pub pairs_checked: usize,
}

/// Max residual of the cocycle identity over all pairs with
/// `|m|, |n|, |m+n| <= horizon`, plus the adjoint-relation check.
pub fn verify_cocycle(w: &MultiplicativeCocycle, horizon: i64) -> Result<CocycleReport> {
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for m in -horizon..=horizon {
        for n in -horizon..=horizon {
            if (m + n).abs() > horizon {
                continue;
            }
            let lhs = w.operator(m + n)?;
            let wm = w.operator(m)?;
            let wn = w.operator(n)?;
            let rhs = wm.dot(&shift_conjugate(&wn, m));
            let band = intersect(w.reliable_band(m + n), {
                let b = w.reliable_band(n.abs().max(m.abs()));
                shrink(b, m.unsigned_abs() as usize)
            });
            worst = worst.max(band_max_diff(&lhs, &rhs, band.clone(), band));
            pairs += 1;
        }
    }
    // Derived adjoint relation: setting s = -t in the cocycle identity forces
    // W_{-t} = S_{-t} W_t* S_t. (Mind the conjugation direction; the other
    // order is not implied by the identity.)
    let mut adj = 0.0f64;
    for n in 1..=horizon {
        let lhs = w.operator(-n)?;
        let rhs = shift_conjugate(&adjoint(&*w.operator(n)?), -n);
        let band = shrink(w.reliable_band(n), n as usize);
        adj = adj.max(band_max_diff(&lhs, &rhs, band.clone(), band));
    }
    Ok(CocycleReport {
        cocycle_residual: worst,
        adjoint_residual: adj,
        pairs_checked: pairs,
    })
}

fn intersect(a: std::ops::Range<usize>, b: std::ops::Range<usize>) -> std::ops::Range<usize> {
    let lo = a.start.max(b.start);
    let hi = a.end.min(b.end);
    if lo >= hi {
        0..0
    } else {
        lo..hi
    }
}

fn shrink(r: std::ops::Range<usize>, by: usize) -> std::ops::Range<usize> {
    if r.end - r.start <= 2 * by {
        0..0
    } else {
        r.start + by..r.end - by
    }
}

/// Unitarity residual of every stored member over its reliable band.
pub fn verify_unitarity(w: &MultiplicativeCocycle, horizon: i64) -> Result<f64> {
    let dim = 2 * w.half_width();
    let id = eye(dim);
    let mut worst = 0.0f64;
    for n in -horizon..=horizon {
        let wn = w.operator(n)?;
        let band = w.reliable_band(n);
        let g = adjoint(&wn).dot(&*wn);
        let gg = wn.dot(&adjoint(&wn));
        worst = worst.max(band_max_diff(&g, &id, band.clone(), band.clone()));
        worst = worst.max(band_max_diff(&gg, &id, band.clone(), band));
    }
    Ok(worst)
}

/// Markovianity report: `W_n` must fix the complement of `H_n` pointwise for
/// `n >= 0`, equivalently `W_{-n}` must fix the complement of `H_0`.
#[derive(Debug, Clone)]
pub struct MarkovReport {
    /// Max over `n >= 0` of `|(W_n - I)` restricted to `span{e_k : k < -n}|`.
    pub positive_residual: f64,
    /// Max over `n >= 0` of `|(W_{-n} - I)` restricted to `span{e_k : k < 0}|`.
    pub negative_residual: f64,
}

impl MarkovReport {
    pub fn residual(&self) -> f64 {
        self.positive_residual.max(self.negative_residual)
    }
}

/// Measure both forms of the markovian property up to `horizon`; when the
/// residual is below `tol` the cocycle is flagged markovian.
pub fn verify_markovian(w: &MultiplicativeCocycle, horizon: i64, tol: f64) -> Result<MarkovReport> {
    let half = w.half_width();
    let dim = 2 * half;
    let mut pos = 0.0f64;
    let mut neg = 0.0f64;
    for n in 0..=horizon {
        let wn = w.operator(n)?;
        // columns with site k < -n, i.e. index < half - n
        let hi = half.saturating_sub(n as usize);
        for j in 0..hi {
            for i in 0..dim {
                let want = if i == j { ONE } else { linalg::ZERO };
                pos = pos.max((wn[(i, j)] - want).norm());
            }
        }
        let wneg = w.operator(-n)?;
        for j in 0..half {
            for i in 0..dim {
                let want = if i == j { ONE } else { linalg::ZERO };
                neg = neg.max((wneg[(i, j)] - want).norm());
            }
        }
    }
    let report = MarkovReport {
        positive_residual: pos,
        negative_residual: neg,
    };
    if report.residual() <= tol {
        w.set_markovian_residual(report.residual());
    }
    Ok(report)
}

/// Markovian cocycle from an inner function and a unitary group on its model
/// space. `W_{-n}` acts as the multiplier on the head `span{e_0..e_{n-1}}`,
/// rotates the model-space component of the shifted tail, and carries the
/// multiplier-range component along the conjugated shift; positive members
/// come from the adjoint relation. The `Literal` form omits the conjugation
/// of the range component.
pub fn markovian_from_inner(
    space: &ModelSpace,
    unitary: &ModelSpaceUnitary,
    horizon: i64,
    form: ConstructorForm,
) -> Result<MultiplicativeCocycle> {
    if unitary.dimension() != space.dimension() {
        return Err(LabError::DimensionMismatch(
            "unitary group does not match the model space".into(),
        ));
    }
    let half = space.half_width();
    let coeffs = taylor_coefficients(space.theta(), half)?;
    let base_guard = tail_guard(&coeffs, 1e-12).min(half);
    let m_block = Rc::new(toeplitz_block(space.theta(), half)?);
    let p_k = Rc::new(space.projector_block());
    let r = Rc::new(unitary.clone());

    let rule: Rule = Rc::new(move |n: i64| {
        let dim = 2 * half;
        if n == 0 {
            return Ok(eye(dim));
        }
        let k = n.unsigned_abs() as usize;
        if k >= half {
            return Err(LabError::WindowOverflow(format!(
                "cocycle member {n} exceeds the half-window {half}"
            )));
        }
        // W_{-k} on the positive block.
        let mut head = linalg::zeros(half, half);
        for i in 0..k {
            head[(i, i)] = ONE;
        }
        // e_j -> e_{j-k} for j >= k (shift combined with the tail projection)
        let mut t = linalg::zeros(half, half);
        for j in k..half {
            t[(j - k, j)] = ONE;
        }
        let rot = r.rotation_block(k as i64); // R^k P_K
        let block = match form {
            ConstructorForm::Corrected => {
                // e_j -> e_{j+k} on the half block
                let mut up = linalg::zeros(half, half);
                for j in 0..half - k {
                    up[(j + k, j)] = ONE;
                }
                let mut pv = eye(half);
                pv = &pv - &*p_k;
                let carried = m_block.dot(&up).dot(&adjoint(&m_block)).dot(&pv);
                let tail_action = (&rot + &carried).dot(&t);
                &m_block.dot(&head) + &tail_action
            }
            ConstructorForm::Literal => {
                let mut ptail = linalg::zeros(half, half);
                for j in k..half {
                    ptail[(j, j)] = ONE;
                }
                let pv = m_block.dot(&adjoint(&m_block));
                let tail_action = &rot.dot(&t) + &pv.dot(&ptail);
                &m_block.dot(&head) + &tail_action
            }
        };
        let mut w_neg = eye(dim);
        for i in 0..half {
            for j in 0..half {
                w_neg[(half + i, half + j)] = block[(i, j)];
            }
        }
        if n < 0 {
            Ok(w_neg)
        } else {
            // W_n = S_n W_{-n}^* S_{-n}
            Ok(shift_conjugate(&adjoint(&w_neg), n))
        }
    });

    MultiplicativeCocycle::from_rule(half, horizon, base_guard, rule)
}

/// Semigroup of isometries on the positive half-window associated with a
/// markovian cocycle: `V = W_{-1} S_{-1}` restricted to `H_0`.
pub struct IsometrySemigroup {
    half_width: usize,
    v: Mat,
    powers: RefCell<BTreeMap<u32, Rc<Mat>>>,
    guard: usize,
}

impl IsometrySemigroup {
    /// Wrap an explicit half-window matrix as a semigroup generator.
    pub fn from_block(half_width: usize, v: Mat, guard: usize) -> Result<Self> {
        if v.nrows() != half_width || v.ncols() != half_width {
            return Err(LabError::DimensionMismatch(
                "isometry block must act on the positive half-window".into(),
            ));
        }
        Ok(IsometrySemigroup {
            half_width,
            v,
            powers: RefCell::new(BTreeMap::new()),
            guard,
        })
    }

    /// Right shift `e_k -> e_{k+1}` on the half-window (the trivial cocycle's
    /// semigroup).
    pub fn right_shift(half_width: usize) -> Self {
        let mut v = linalg::zeros(half_width, half_width);
        for k in 0..half_width - 1 {
            v[(k + 1, k)] = ONE;
        }
        IsometrySemigroup {
            half_width,
            v,
            powers: RefCell::new(BTreeMap::new()),
            guard: 1,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn generator(&self) -> &Mat {
        &self.v
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn power(&self, n: u32) -> Rc<Mat> {
        if let Some(p) = self.powers.borrow().get(&n) {
            return Rc::clone(p);
        }
        let result = if n == 0 {
            Rc::new(eye(self.half_width))
        } else {
            let prev = self.power(n - 1);
            Rc::new(self.v.dot(&*prev))
        };
        self.powers.borrow_mut().insert(n, Rc::clone(&result));
        result
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        self.v.dot(v)
    }

    pub fn apply_adjoint(&self, v: &CVec) -> CVec {
        adjoint(&self.v).dot(v)
    }

    /// `max |V*V - I|` over the interior (excluding the guard strip at the far
    /// edge, whose columns are truncated by the window).
    pub fn isometry_defect(&self) -> f64 {
        let g = linalg::gram(&self.v);
        let hi = self.half_width.saturating_sub(self.guard);
        band_max_diff(&g, &eye(self.half_width), 0..hi, 0..hi)
    }

    /// Defect index `dim(H_0) - rank(V)` with the rank cut at 1e-8.
    pub fn defect_index(&self) -> usize {
        self.half_width - linalg::rank(&self.v, 1e-8)
    }

    /// Orthonormal basis of `H_0 (-) V H_0`.
    pub fn defect_basis(&self) -> Mat {
        let (q, _) = linalg::orthonormal_columns(&self.v, 1e-8);
        let mut complement = eye(self.half_width);
        let p = q.dot(&adjoint(&q));
        complement = &complement - &p;
        let (basis, _) = linalg::orthonormal_columns(&complement, 1e-8);
        basis
    }
}

/// Extract the associated isometry from a markovian cocycle and check the
/// semigroup property against `W_{-n} S_{-n}` up to `check_horizon`.
pub fn associated_isometry(
    w: &MultiplicativeCocycle,
    check_horizon: i64,
) -> Result<(IsometrySemigroup, f64)> {
    if !w.is_markovian() {
        return Err(LabError::InvalidInput(
            "cocycle is not verified markovian; the compression to H_0 would not be a semigroup"
                .into(),
        ));
    }
    let half = w.half_width();
    let dim = 2 * half;
    let w1 = w.operator(-1)?;
    let u = w1.dot(&shift_matrix(half, -1));
    // V must map H_0 into H_0: no mass on negative sites.
    let mut leak = 0.0f64;
    for j in half..dim {
        for i in 0..half {
            leak = leak.max(u[(i, j)].norm());
        }
    }
    if leak > 1e-10 {
        return Err(LabError::InvalidInput(format!(
            "compression leaks {leak:.3e} outside H_0; input not markovian"
        )));
    }
    let mut block = linalg::zeros(half, half);
    for i in 0..half {
        for j in 0..half {
            block[(i, j)] = u[(half + i, half + j)];
        }
    }
    let guard = w.base_guard() + 2;
    let semigroup = IsometrySemigroup::from_block(half, block, guard)?;

    // Semigroup property: V^n equals the compression of W_{-n} S_{-n}.
    let mut worst = 0.0f64;
    for n in 1..=check_horizon {
        let wn = w.operator(-n)?;
        let un = wn.dot(&shift_matrix(half, -n));
        let vn = semigroup.power(n as u32);
        let lo = 0usize;
        let hi = half.saturating_sub(w.base_guard() + n as usize + 2);
        let mut d = 0.0f64;
        for i in lo..hi {
            for j in lo..hi {
                d = d.max((un[(half + i, half + j)] - vn[(i, j)]).norm());
            }
        }
        worst = worst.max(d);
    }
    Ok((semigroup, worst))
}

/// Column-stabilization data for the strong limit of `W_{-n}`.
#[derive(Debug, Clone)]
pub struct LimitCocycle {
    /// Stabilized columns over the positive half-window, one per site
    /// `0..columns.ncols()`.
    pub columns: Mat,
    /// Max distance between consecutive members on a stabilized column.
    pub stabilization_residual: f64,
}

/// Verify that `W_{-n} e_k` is constant for `n > k` and collect the stabilized
/// columns for `k < k_max`.
pub fn limit_cocycle(w: &MultiplicativeCocycle, k_max: usize) -> Result<LimitCocycle> {
    if !w.is_markovian() {
        return Err(LabError::InvalidInput(
            "strong limit requires a verified markovian cocycle".into(),
        ));
    }
    let half = w.half_width();
    if k_max + 2 >= half {
        return Err(LabError::WindowOverflow(format!(
            "k_max {k_max} needs cocycle members beyond the half-window {half}"
        )));
    }
    let mut columns = linalg::zeros(half, k_max);
    let mut worst = 0.0f64;
    for k in 0..k_max {
        let a = w.operator(-(k as i64 + 1))?;
        let b = w.operator(-(k as i64 + 2))?;
        let col_idx = half + k;
        let mut diff = 0.0f64;
        for i in 0..2 * half {
            diff = diff.max((a[(i, col_idx)] - b[(i, col_idx)]).norm());
        }
        if diff > 1e-10 {
            return Err(LabError::Stabilization(format!(
                "column {k} still moves by {diff:.3e} between members {} and {}",
                k + 1,
                k + 2
            )));
        }
        worst = worst.max(diff);
        for i in 0..half {
            columns[(i, k)] = a[(half + i, col_idx)];
        }
        // Negative sites must be untouched.
        for i in 0..half {
            let want = linalg::ZERO;
            if (a[(i, col_idx)] - want).norm() > 1e-12 {
                return Err(LabError::Stabilization(
                    "stabilized column leaks onto negative sites".into(),
                ));
            }
        }
    }
    Ok(LimitCocycle {
        columns,
        stabilization_residual: worst,
    })
}

/// Proof-object report: the additive `V`-cocycle built from the multiplicative
/// one, its orthogonal increments, and the eigenvector of `V*` it generates.
#[derive(Debug, Clone)]
pub struct ZetaXiReport {
    /// Max residual of `zeta_{m+n} = zeta_m + V_m zeta_n`.
    pub additive_residual: f64,
    /// Max `|(V_{kn} zeta_n, zeta_n)|` over `k >= 1`.
    pub orthogonality_residual: f64,
    /// `|V* xi - e^{-1} xi|`.
    pub eigenvector_residual: f64,
    pub xi_norm: f64,
}

/// Build `zeta_n = W_{-n} chi_{-n}` and `xi = sum e^{-n} V_n zeta_1`, then
/// check the additive cocycle identity, increment orthogonality, and the
/// eigenvector relation `V* xi = e^{-1} xi`.
pub fn zeta_xi(w: &MultiplicativeCocycle, horizon: i64) -> Result<ZetaXiReport> {
    let half = w.half_width();
    if horizon <= 0 || horizon as usize >= half / 2 {
        return Err(LabError::WindowOverflow(format!(
            "horizon {horizon} too large for half-window {half}"
        )));
    }
    let (v, _) = associated_isometry(w, 2)?;

    let zeta = |n: i64| -> Result<CVec> {
        let x = chi(half, -n)?;
        let full = w.operator(-n)?.dot(x.amplitudes());
        // zeta lives in H_0.
        let mut out = CVec::from_elem(half, linalg::ZERO);
        for i in 0..half {
            out[i] = full[half + i];
        }
        for i in 0..half {
            if full[i].norm() > 1e-12 {
                return Err(LabError::Stabilization(
                    "zeta leaks onto negative sites".into(),
                ));
            }
        }
        Ok(out)
    };

    let mut additive = 0.0f64;
    for m in 1..=horizon {
        for n in 1..=horizon {
            if m + n > horizon {
                continue;
            }
            let lhs = zeta(m + n)?;
            let zm = zeta(m)?;
            let zn = zeta(n)?;
            let rhs = &zm + &v.power(m as u32).dot(&zn);
            let d = (&lhs - &rhs).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            additive = additive.max(d);
        }
    }

    let mut ortho = 0.0f64;
    for n in 1..=horizon.min(6) {
        let zn = zeta(n)?;
        let mut k = 1i64;
        while k * n <= horizon {
            let moved = v.power((k * n) as u32).dot(&zn);
            let inner: C64 = moved.iter().zip(zn.iter()).map(|(a, b)| a.conj() * b).sum();
            ortho = ortho.max(inner.norm());
            k += 1;
        }
    }

    let z1 = zeta(1)?;
    let mut xi = CVec::from_elem(half, linalg::ZERO);
    for n in 0..=horizon {
        let term = v.power(n as u32).dot(&z1);
        let scale = (-(n as f64)).exp();
        for i in 0..half {
            xi[i] += term[i] * scale;
        }
    }
    let want = xi.mapv(|z| z * (-1.0f64).exp());
    let got = v.apply_adjoint(&xi);
    let eig = (&got - &want).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let xi_norm = xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    Ok(ZetaXiReport {
        additive_residual: additive,
        orthogonality_residual: ortho,
        eigenvector_residual: eig,
        xi_norm,
    })
}

/// Hilbert-Schmidt convergence series: Frobenius norm of `W_n - I` restricted
/// to central sub-windows of the given sizes.
#[derive(Debug, Clone)]
pub struct HsSeries {
    pub member: i64,
    /// `(sub-window size, Frobenius norm)` sorted by size.
    pub series: Vec<(usize, f64)>,
    /// Consecutive increments of the norm.
    pub increments: Vec<f64>,
    /// Increments are non-increasing and the last one is below 1e-6.
    pub cauchy_pass: bool,
}

pub fn hs_distance(
    w: &MultiplicativeCocycle,
    member: i64,
    truncations: &[usize],
) -> Result<HsSeries> {
    let dim = 2 * w.half_width();
    let wn = w.operator(member)?;
    let mut diff = (*wn).clone();
    for i in 0..dim {
        diff[(i, i)] -= ONE;
    }
    let mut sizes: Vec<usize> = truncations.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.iter().any(|&t| t > dim) {
        return Err(LabError::WindowOverflow(
            "truncation exceeds the full window".into(),
        ));
    }
    let mut series = Vec::with_capacity(sizes.len());
    for &t in &sizes {
        let lo = (dim - t) / 2;
        let hi = lo + t;
        let mut sum = 0.0f64;
        for i in lo..hi {
            for j in lo..hi {
                sum += diff[(i, j)].norm_sqr();
            }
        }
        series.push((t, sum.sqrt()));
    }
    let mut increments = Vec::with_capacity(series.len());
    let mut prev = 0.0f64;
    for &(_, f) in &series {
        increments.push(f - prev);
        prev = f;
    }
    let mut monotone = true;
    for k in 1..increments.len() {
        if increments[k] > increments[k - 1] + 1e-12 {
            monotone = false;
        }
    }
    let cauchy_pass = monotone && increments.last().map(|&d| d < 1e-6).unwrap_or(false);
    Ok(HsSeries {
        member,
        series,
        increments,
        cauchy_pass,
    })
}

/// Coboundary triviality: the perturbed group of a coboundary is unitarily
/// equivalent to the shift, `W_n S_n = J S_n J*`. Returns the banded residual.
pub fn coboundary_equivalence(
    w: &MultiplicativeCocycle,
    j: &Mat,
    n: i64,
    interior: std::ops::Range<usize>,
) -> Result<f64> {
    let half = w.half_width();
    let wn = w.operator(n)?;
    let lhs = wn.dot(&shift_matrix(half, n));
    let rhs = j.dot(&shift_matrix(half, n)).dot(&adjoint(j));
    Ok(band_max_diff(&lhs, &rhs, interior.clone(), interior))
}

/// Convenience: `W_{-1} e_k` as a window vector (used by hand-comparison
/// tests and the demo).
pub fn apply_member(w: &MultiplicativeCocycle, n: i64, v: &LatticeVector) -> Result<LatticeVector> {
    let m = w.operator(n)?;
    LatticeVector::from_amplitudes(w.half_width(), m.dot(v.amplitudes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::{model_space, InnerFunction};
    use crate::lattice::LatticeVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shift_cocycle(
        lambda: C64,
        half: usize,
        horizon: i64,
        form: ConstructorForm,
    ) -> MultiplicativeCocycle {
        let theta = InnerFunction::shift();
        let space = model_space(&theta, half).unwrap();
        let unitary = ModelSpaceUnitary::new(&space, vec![lambda]).unwrap();
        markovian_from_inner(&space, &unitary, horizon, form).unwrap()
    }

    #[test]
    fn identity_cocycle_reports_zero() {
        let w = MultiplicativeCocycle::identity(16, 3).unwrap();
        let rep = verify_cocycle(&w, 3).unwrap();
        assert_eq!(rep.cocycle_residual, 0.0);
        assert_eq!(rep.adjoint_residual, 0.0);
        let mk = verify_markovian(&w, 3, 1e-12).unwrap();
        assert_eq!(mk.residual(), 0.0);
        assert!(w.is_markovian());
    }

    #[test]
    fn coboundary_satisfies_cocycle_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let half = 16usize;
        let dim = 2 * half;
        // Interior-supported unitary: random block on sites [-8, 8).
        let inner_dim = 16usize;
        let u = linalg::random_unitary(&mut rng, inner_dim);
        let mut j = eye(dim);
        let off = half - inner_dim / 2;
        for i in 0..inner_dim {
            for k in 0..inner_dim {
                j[(off + i, off + k)] = u[(i, k)];
            }
        }
        let w = MultiplicativeCocycle::coboundary(half, 4, j.clone()).unwrap();
        let rep = verify_cocycle(&w, 4).unwrap();
        assert!(rep.cocycle_residual < 1e-10, "residual {}", rep.cocycle_residual);
        assert!(rep.adjoint_residual < 1e-10);
        // Generic coboundary fails markovianity.
        let mk = verify_markovian(&w, 4, 1e-12).unwrap();
        assert!(mk.residual() > 0.01, "markov residual {}", mk.residual());
        assert!(!w.is_markovian());
        // Coboundary triviality: W_n S_n = J S_n J*.
        let res = coboundary_equivalence(&w, &j, 2, 4..dim - 4).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn shift_construction_hand_oracle() {
        // Theta = z, R = lambda on span{e_0}: W_{-1} is the permutation-with-
        // phase matrix e_0 -> e_1, e_1 -> lambda e_0, fixed elsewhere.
        let lambda = C64::from_polar(1.0, 1.1);
        let half = 16usize;
        let w = shift_cocycle(lambda, half, 4, ConstructorForm::Corrected);
        let dim = 2 * half;
        let mut want = eye(dim);
        want[(half, half)] = linalg::ZERO;
        want[(half + 1, half + 1)] = linalg::ZERO;
        want[(half + 1, half)] = ONE; // e_0 -> e_1
        want[(half, half + 1)] = lambda; // e_1 -> lambda e_0
        let got = w.operator(-1).unwrap();
        assert!(max_diff(&got, &want) < 1e-12);

        let rep = verify_cocycle(&w, 4).unwrap();
        assert!(rep.cocycle_residual < 1e-12, "residual {}", rep.cocycle_residual);
        let mk = verify_markovian(&w, 4, 1e-12).unwrap();
        assert!(mk.residual() < 1e-12);
        assert!(verify_unitarity(&w, 4).unwrap() < 1e-12);
    }

    #[test]
    fn constant_phase_one_gives_identity() {
        let theta = InnerFunction::constant(ONE).unwrap();
        let space = model_space(&theta, 12).unwrap();
        assert_eq!(space.dimension(), 0);
        let unitary = ModelSpaceUnitary::new(&space, vec![]).unwrap();
        let w = markovian_from_inner(&space, &unitary, 3, ConstructorForm::Corrected).unwrap();
        for n in -3i64..=3 {
            assert!(max_diff(&w.operator(n).unwrap(), &eye(24)) < 1e-12);
        }
    }

    #[test]
    fn literal_form_documents_unitarity_failure() {
        let half = 16usize;
        let w = shift_cocycle(ONE, half, 2, ConstructorForm::Literal);
        let e1 = LatticeVector::basis(half, 1).unwrap();
        let img = apply_member(&w, -1, &e1).unwrap();
        assert!((img.norm() - 2.0f64.sqrt()).abs() < 1e-12);
        let defect = verify_unitarity(&w, 1).unwrap();
        assert!(defect > 0.1, "literal form should fail unitarity, defect {defect}");
    }

    #[test]
    fn associated_isometry_of_shift_construction() {
        let lambda = C64::from_polar(1.0, 0.7);
        let half = 16usize;
        let w = shift_cocycle(lambda, half, 4, ConstructorForm::Corrected);
        verify_markovian(&w, 4, 1e-12).unwrap();
        let (v, semi_res) = associated_isometry(&w, 3).unwrap();
        assert!(semi_res < 1e-12);
        // V e_0 = lambda e_0, V e_k = e_{k+1} for k >= 1.
        let g = v.generator();
        assert!((g[(0, 0)] - lambda).norm() < 1e-12);
        for k in 1..half - 1 {
            assert!((g[(k + 1, k)] - ONE).norm() < 1e-12);
        }
        assert!(v.isometry_defect() < 1e-12);
        assert_eq!(v.defect_index(), 1);
        // Defect vector is e_1.
        let d = v.defect_basis();
        assert_eq!(d.ncols(), 1);
        assert!((d[(1, 0)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trivial_cocycle_isometry_is_right_shift() {
        let w = MultiplicativeCocycle::identity(12, 3).unwrap();
        verify_markovian(&w, 3, 1e-12).unwrap();
        let (v, res) = associated_isometry(&w, 3).unwrap();
        assert!(res < 1e-14);
        let want = IsometrySemigroup::right_shift(12);
        assert!(max_diff(v.generator(), want.generator()) < 1e-14);
        assert_eq!(v.defect_index(), 1);
    }

    #[test]
    fn limit_columns_match_multiplier() {
        let theta = InnerFunction::blaschke(vec![C64::new(0.5, 0.0)]).unwrap();
        let half = 64usize;
        let space = model_space(&theta, half).unwrap();
        let unitary = ModelSpaceUnitary::new(&space, vec![C64::from_polar(1.0, 0.4)]).unwrap();
        let w = markovian_from_inner(&space, &unitary, 10, ConstructorForm::Corrected).unwrap();
        verify_markovian(&w, 6, 1e-12).unwrap();
        let lim = limit_cocycle(&w, 8).unwrap();
        assert!(lim.stabilization_residual < 1e-13);
        let m = toeplitz_block(&theta, half).unwrap();
        for k in 0..8 {
            for i in 0..half {
                assert!((lim.columns[(i, k)] - m[(i, k)]).norm() < 1e-10);
            }
        }
        // Range of the limit is orthogonal to the model space.
        let overlaps = adjoint(space.basis_block()).dot(&lim.columns);
        assert!(linalg::max_abs(&overlaps) < 1e-9);
    }

    #[test]
    fn zeta_xi_identity_cocycle() {
        // W = I: zeta_1 = -e_0, xi = -sum e^{-n} e_n, V* xi = e^{-1} xi up to
        // the truncation tail.
        let w = MultiplicativeCocycle::identity(64, 24).unwrap();
        verify_markovian(&w, 4, 1e-12).unwrap();
        let rep = zeta_xi(&w, 24).unwrap();
        assert!(rep.additive_residual < 1e-12);
        assert!(rep.orthogonality_residual < 1e-12);
        assert!(rep.eigenvector_residual < 1e-8, "eig {}", rep.eigenvector_residual);
        // xi norm equals sqrt(sum e^{-2n}).
        let want: f64 = (0..=24).map(|n| (-2.0 * n as f64).exp()).sum::<f64>().sqrt();
        assert!((rep.xi_norm - want).abs() < 1e-12);
    }

    #[test]
    fn hs_series_for_shift_construction() {
        let half = 16usize;
        let w = shift_cocycle(ONE, half, 2, ConstructorForm::Corrected);
        let hs = hs_distance(&w, -1, &[2, 4, 8, 16]).unwrap();
        // W_{-1} - I has two off-diagonal unit entries and two diagonal
        // deficits; Frobenius norm 2 once the sub-window covers sites {0, 1}.
        let last = hs.series.last().unwrap().1;
        assert!((last - 2.0).abs() < 1e-12, "F = {last}");
        for (t, f) in &hs.series {
            if *t >= 4 {
                assert!((f - 2.0).abs() < 1e-12);
            }
        }
        assert!(hs.cauchy_pass);
    }

    #[test]
    fn non_markovian_input_rejected_by_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let half = 8usize;
        let dim = 2 * half;
        let inner_dim = 8usize;
        let u = linalg::random_unitary(&mut rng, inner_dim);
        let mut j = eye(dim);
        let off = half - inner_dim / 2;
        for i in 0..inner_dim {
            for k in 0..inner_dim {
                j[(off + i, off + k)] = u[(i, k)];
            }
        }
        let w = MultiplicativeCocycle::coboundary(half, 3, j).unwrap();
        assert!(associated_isometry(&w, 2).is_err());
    }
}
