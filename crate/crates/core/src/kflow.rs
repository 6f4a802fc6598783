//! Markovian perturbations of the filtered fermion flow.
//!
//! The filtration algebras are the full operator algebras of site ranges;
//! cocycles are generated from a single even local unitary by the product
//! rule, which makes both markovian conditions checkable exactly on the
//! window. The perturbed process, its localization identities, the trace
//! independence of increments, the Powers-shift tail triviality (as a
//! finite-window proxy via partial-trace twirls) and the conjugacy of the
//! perturbed endomorphism semigroup are all verified by direct matrix
//! computation.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use rand::Rng;

use crate::error::{LabError, Result};
use crate::fermion::{CarProcess, FermionWindow, LocalOperator, Parity, ProcessSymbol};
use crate::linalg::{self, adjoint, max_abs, max_diff, Mat, C64};

/// Filtration by site cuts: `past(t)` is the full algebra of sites `<= t`
/// tensored with the identity elsewhere.
pub struct FiltrationAlgebra {
    window: Rc<FermionWindow>,
}

impl FiltrationAlgebra {
    pub fn new(window: Rc<FermionWindow>) -> Self {
        FiltrationAlgebra { window }
    }

    pub fn window(&self) -> &Rc<FermionWindow> {
        &self.window
    }

    /// Fermionic generators of the past algebra `N_{t]}` within the window.
    pub fn past_generators(&self, t: i64) -> Vec<LocalOperator> {
        let (lo, hi) = self.window.site_range();
        let mut gens = Vec::new();
        for k in lo..=t.min(hi) {
            gens.push(self.window.annihilator(k).expect("in-window site"));
            gens.push(self.window.creator(k).expect("in-window site"));
        }
        gens
    }

    /// Fermionic generators of the future algebra `N_{[t}` within the window.
    pub fn future_generators(&self, t: i64) -> Vec<LocalOperator> {
        let (lo, hi) = self.window.site_range();
        let mut gens = Vec::new();
        for k in t.max(lo)..=hi {
            gens.push(self.window.annihilator(k).expect("in-window site"));
            gens.push(self.window.creator(k).expect("in-window site"));
        }
        gens
    }

    /// Even elements of the complementary range `sites > t`: number operators
    /// plus adjacent hopping and pairing terms. Together with localization
    /// metadata these decide membership in `N_{t]}`.
    pub fn complement_even_elements(&self, t: i64) -> Vec<Mat> {
        let (lo, hi) = self.window.site_range();
        let mut out = Vec::new();
        for k in (t + 1).max(lo)..=hi {
            out.push(self.window.number_op(k).expect("in-window site").matrix);
            if k + 1 <= hi {
                let a_k = self.window.annihilator(k).expect("site");
                let a_next = self.window.annihilator(k + 1).expect("site");
                out.push(adjoint(&a_k.matrix).dot(&a_next.matrix));
                out.push(a_k.matrix.dot(&a_next.matrix));
            }
        }
        out
    }

    /// Membership residual of `x` in `N_{t]}`: localization metadata must sit
    /// inside `sites <= t` and `x` must commute exactly with the even elements
    /// of the complement.
    pub fn membership_residual(&self, x: &LocalOperator, t: i64) -> Result<f64> {
        if let Some((_, hi)) = x.loc {
            if hi > t {
                return Err(LabError::Localization(format!(
                    "operator localized up to site {hi} claimed in the past of {t}"
                )));
            }
        }
        let mut worst = 0.0f64;
        for e in self.complement_even_elements(t) {
            let comm = x.matrix.dot(&e) - e.dot(&x.matrix);
            worst = worst.max(max_abs(&comm));
        }
        Ok(worst)
    }

    /// Projection of `x` onto the past algebra in the Frobenius sense:
    /// partial trace over the complement, tensored back with the normalized
    /// identity. Its fixed space is exactly `N_{t]}` on the window.
    pub fn project_onto_past(&self, x: &Mat, t: i64) -> Mat {
        let (lo, hi) = self.window.site_range();
        let kept = if t < lo {
            0usize
        } else {
            ((t.min(hi) - lo) + 1) as usize
        };
        let total = self.window.sites();
        let dim_kept = 1usize << kept;
        let dim_rest = 1usize << (total - kept);
        let scale = 1.0 / dim_rest as f64;
        let mut y = linalg::zeros(dim_kept, dim_kept);
        for i1 in 0..dim_kept {
            for j1 in 0..dim_kept {
                let mut s = C64::new(0.0, 0.0);
                for i2 in 0..dim_rest {
                    s += x[(i1 * dim_rest + i2, j1 * dim_rest + i2)];
                }
                y[(i1, j1)] = s * scale;
            }
        }
        let mut out = linalg::zeros(x.nrows(), x.ncols());
        for i1 in 0..dim_kept {
            for j1 in 0..dim_kept {
                for i2 in 0..dim_rest {
                    out[(i1 * dim_rest + i2, j1 * dim_rest + i2)] = y[(i1, j1)];
                }
            }
        }
        out
    }
}

/// Multiplicative cocycle of the shift automorphism generated by an even
/// local unitary `w` localized in sites `<= 0`:
/// `W_n = w a_1(w) ... a_{n-1}(w)` and `W_{-n} = a_{-1}(w*) ... a_{-n}(w*)`.
pub struct AlgebraCocycle {
    window: Rc<FermionWindow>,
    generator: LocalOperator,
    cache: RefCell<BTreeMap<i64, Rc<LocalOperator>>>,
    markovian: RefCell<Option<f64>>,
}

impl AlgebraCocycle {
    pub fn from_local_unitary(window: Rc<FermionWindow>, w: LocalOperator) -> Result<Self> {
        let dim = window.dim();
        if w.matrix.nrows() != dim {
            return Err(LabError::DimensionMismatch("generator dimension".into()));
        }
        let unit_defect = max_diff(&w.matrix.dot(&adjoint(&w.matrix)), &linalg::eye(dim));
        if unit_defect > 1e-12 {
            return Err(LabError::InvalidInput(format!(
                "generator is not unitary (defect {unit_defect:.3e})"
            )));
        }
        match w.loc {
            Some((_, hi)) if hi <= 0 => {}
            None => {}
            _ => {
                return Err(LabError::Localization(
                    "generator must be localized in sites <= 0".into(),
                ));
            }
        }
        if window.parity_of(&w.matrix) != Parity::Even {
            return Err(LabError::InvalidInput(
                "odd-parity generator would break the future-commutation half of markovianity"
                    .into(),
            ));
        }
        Ok(Self::from_local_unitary_unchecked(window, w))
    }

    /// Test hook: skips the parity and localization admission checks so that
    /// negative controls can exercise the verification failures.
    pub fn from_local_unitary_unchecked(window: Rc<FermionWindow>, w: LocalOperator) -> Self {
        AlgebraCocycle {
            window,
            generator: w,
            cache: RefCell::new(BTreeMap::new()),
            markovian: RefCell::new(None),
        }
    }

    pub fn window(&self) -> &Rc<FermionWindow> {
        &self.window
    }

    pub fn generator(&self) -> &LocalOperator {
        &self.generator
    }

    pub fn is_markovian(&self) -> bool {
        self.markovian.borrow().is_some()
    }

    pub fn member(&self, n: i64) -> Result<Rc<LocalOperator>> {
        if let Some(m) = self.cache.borrow().get(&n) {
            return Ok(Rc::clone(m));
        }
        let value = if n == 0 {
            LocalOperator::scalar(self.window.identity())
        } else if n > 0 {
            let mut acc = self.generator.clone();
            for j in 1..n {
                let term = self.window.shift_automorphism(&self.generator, j)?;
                acc = acc.product(&term);
            }
            acc
        } else {
            let star = self.generator.adjoint();
            let mut acc: Option<LocalOperator> = None;
            for j in 1..=(-n) {
                let term = self.window.shift_automorphism(&star, -j)?;
                acc = Some(match acc {
                    None => term,
                    Some(prev) => prev.product(&term),
                });
            }
            acc.unwrap()
        };
        let shared = Rc::new(value);
        self.cache.borrow_mut().insert(n, Rc::clone(&shared));
        Ok(shared)
    }

    /// Cocycle identity `W_{m+n} = W_m alpha_m(W_n)` over all pairs whose
    /// members and shifts fit the window; returns the max residual and the
    /// number of pairs checked.
    pub fn cocycle_residual(&self, horizon: i64) -> Result<(f64, usize)> {
        let mut worst = 0.0f64;
        let mut pairs = 0usize;
        for m in -horizon..=horizon {
            for n in -horizon..=horizon {
                if (m + n).abs() > horizon {
                    continue;
                }
                let lhs = match self.member(m + n) {
                    Ok(v) => v,
                    Err(LabError::Localization(_)) | Err(LabError::WindowOverflow(_)) => continue,
                    Err(e) => return Err(e),
                };
                let wm = match self.member(m) {
                    Ok(v) => v,
                    Err(LabError::Localization(_)) | Err(LabError::WindowOverflow(_)) => continue,
                    Err(e) => return Err(e),
                };
                let wn = match self.member(n) {
                    Ok(v) => v,
                    Err(LabError::Localization(_)) | Err(LabError::WindowOverflow(_)) => continue,
                    Err(e) => return Err(e),
                };
                let shifted = match self.window.shift_automorphism(&wn, m) {
                    Ok(v) => v,
                    Err(LabError::Localization(_)) => continue,
                    Err(e) => return Err(e),
                };
                let rhs = wm.product(&shifted);
                worst = worst.max(max_diff(&lhs.matrix, &rhs.matrix));
                pairs += 1;
            }
        }
        Ok((worst, pairs))
    }

    /// Unitarity of every member up to the horizon.
    pub fn unitarity_residual(&self, horizon: i64) -> Result<f64> {
        let id = self.window.identity();
        let mut worst = 0.0f64;
        for n in -horizon..=horizon {
            let w = match self.member(n) {
                Ok(v) => v,
                Err(LabError::Localization(_)) | Err(LabError::WindowOverflow(_)) => continue,
                Err(e) => return Err(e),
            };
            worst = worst.max(max_diff(&w.matrix.dot(&adjoint(&w.matrix)), &id));
            worst = worst.max(max_diff(&adjoint(&w.matrix).dot(&w.matrix), &id));
        }
        Ok(worst)
    }

    /// Both markovian conditions: `W_n N_{n]} W_n^* inside N_{n]}` and
    /// `W_n x W_n^* = x` for generators `x` of the future `N_{[n}`.
    /// Flags the cocycle markovian when the residual is below `tol`.
    pub fn verify_markovian(&self, horizon: i64, tol: f64) -> Result<f64> {
        let filtration = FiltrationAlgebra::new(Rc::clone(&self.window));
        let (_lo, hi) = self.window.site_range();
        let mut worst = 0.0f64;
        for n in 0..=horizon {
            let w = match self.member(n) {
                Ok(v) => v,
                Err(LabError::Localization(_)) | Err(LabError::WindowOverflow(_)) => continue,
                Err(e) => return Err(e),
            };
            // Conjugated past generators stay in the past algebra.
            for g in filtration.past_generators(n.min(hi)) {
                let conj = w.product(&g).product(&w.adjoint());
                let loc_t = n.min(hi);
                let bounded = LocalOperator {
                    matrix: conj.matrix,
                    loc: conj.loc.map(|(a, b)| (a, b.min(loc_t))),
                };
                worst = worst.max(filtration.membership_residual(&bounded, loc_t)?);
            }
            // Future generators are fixed pointwise.
            for x in filtration.future_generators(n) {
                let conj = w.product(&x).product(&w.adjoint());
                worst = worst.max(max_diff(&conj.matrix, &x.matrix));
            }
        }
        if worst <= tol {
            *self.markovian.borrow_mut() = Some(worst);
        }
        Ok(worst)
    }
}

/// The perturbed process of a markovian cocycle: unchanged at nonnegative
/// times, conjugated by `W_n` at negative ones, with the perturbed
/// automorphism family `t -> W_t alpha_t(.) W_t^*`.
pub struct PerturbedProcess {
    process: CarProcess,
    cocycle: Rc<AlgebraCocycle>,
}

impl PerturbedProcess {
    pub fn new(process: CarProcess, cocycle: Rc<AlgebraCocycle>) -> Result<Self> {
        if !cocycle.is_markovian() {
            return Err(LabError::InvalidInput(
                "perturbation requires a verified markovian cocycle".into(),
            ));
        }
        if !Rc::ptr_eq(process.window(), cocycle.window()) {
            return Err(LabError::InvalidInput(
                "process and cocycle live on different windows".into(),
            ));
        }
        Ok(PerturbedProcess { process, cocycle })
    }

    pub fn unperturbed(&self) -> &CarProcess {
        &self.process
    }

    pub fn value(&self, symbol: ProcessSymbol, n: i64) -> Result<LocalOperator> {
        let base = self.process.value(symbol, n)?;
        if n >= 0 {
            return Ok(base);
        }
        let w = self.cocycle.member(n)?;
        Ok(w.product(&base).product(&w.adjoint()))
    }

    pub fn automorphism(&self, m: i64, x: &LocalOperator) -> Result<LocalOperator> {
        let moved = self.cocycle.window().shift_automorphism(x, m)?;
        let w = self.cocycle.member(m)?;
        Ok(w.product(&moved).product(&w.adjoint()))
    }

    /// Additive cocycle identity of the perturbed process over negative time
    /// pairs: `j'(x)(m+n) = j'(x)(m) + a'_m(j'(x)(n))`.
    pub fn additive_residual(&self, symbol: ProcessSymbol, depth: i64) -> Result<f64> {
        let mut worst = 0.0f64;
        for m in -depth..=0 {
            for n in -depth..=0 {
                if (m + n) < -depth {
                    continue;
                }
                let jn = self.value(symbol, n)?;
                let moved = match self.automorphism(m, &jn) {
                    Ok(v) => v,
                    Err(LabError::Localization(_)) => continue,
                    Err(e) => return Err(e),
                };
                let lhs = self.value(symbol, m + n)?;
                let rhs = &self.value(symbol, m)?.matrix + &moved.matrix;
                worst = worst.max(max_diff(&lhs.matrix, &rhs));
            }
        }
        Ok(worst)
    }

    /// Localization identities: the perturbed automorphisms agree with the
    /// unperturbed ones on the future. Returns (residual for
    /// `a'_m = a_m on N_{[0}, m >= 0`, residual for `a'_{-m} = a_{-m} on
    /// N_{[m}, m >= 0`).
    pub fn localization_residuals(&self, depth: i64) -> Result<(f64, f64)> {
        let filtration = FiltrationAlgebra::new(Rc::clone(self.cocycle.window()));
        let mut forward = 0.0f64;
        let mut backward = 0.0f64;
        for m in 0..=depth {
            for x in filtration.future_generators(0) {
                match (
                    self.automorphism(m, &x),
                    self.cocycle.window().shift_automorphism(&x, m),
                ) {
                    (Ok(lhs), Ok(rhs)) => forward = forward.max(max_diff(&lhs.matrix, &rhs.matrix)),
                    (Err(LabError::Localization(_)), _) | (_, Err(LabError::Localization(_))) => {}
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
            for x in filtration.future_generators(m) {
                match (
                    self.automorphism(-m, &x),
                    self.cocycle.window().shift_automorphism(&x, -m),
                ) {
                    (Ok(lhs), Ok(rhs)) => backward = backward.max(max_diff(&lhs.matrix, &rhs.matrix)),
                    (Err(LabError::Localization(_)), _) | (_, Err(LabError::Localization(_))) => {}
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
        }
        Ok((forward, backward))
    }
}

/// Independence of disjointly localized elements under the normalized trace:
/// `phi(xy) = phi(x) phi(y)`. Returns the max residual over sampled pairs and
/// a negative-control residual from overlapping pairs (which must be large).
pub struct IndependenceReport {
    pub disjoint_residual: f64,
    pub overlap_residual: f64,
    pub pairs: usize,
}

pub fn independence_check<R: Rng>(
    window: &Rc<FermionWindow>,
    cut: i64,
    rng: &mut R,
    samples: usize,
) -> Result<IndependenceReport> {
    let (lo, hi) = window.site_range();
    if cut <= lo || cut >= hi {
        return Err(LabError::InvalidInput("cut must be interior".into()));
    }
    let dim = window.dim() as f64;
    let phi = |x: &Mat| -> C64 {
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..x.nrows() {
            tr += x[(i, i)];
        }
        tr / dim
    };

    let random_word = |rng: &mut R, sites: std::ops::RangeInclusive<i64>| -> Result<LocalOperator> {
        let site_list: Vec<i64> = sites.collect();
        let mut acc = LocalOperator::scalar(window.identity());
        let len = rng.gen_range(1..=3usize);
        for _ in 0..len {
            let site = site_list[rng.gen_range(0..site_list.len())];
            let op = match rng.gen_range(0..4u8) {
                0 => window.annihilator(site)?,
                1 => window.creator(site)?,
                2 => window.number_op(site)?,
                _ => window.hole_op(site)?,
            };
            acc = acc.product(&op);
        }
        Ok(acc)
    };

    let mut disjoint = 0.0f64;
    let mut pairs = 0usize;
    for _ in 0..samples {
        let x = random_word(rng, (cut + 1)..=hi)?;
        let y = random_word(rng, lo..=cut)?;
        let lhs = phi(&x.matrix.dot(&y.matrix));
        let rhs = phi(&x.matrix) * phi(&y.matrix);
        disjoint = disjoint.max((lhs - rhs).norm());
        pairs += 1;
    }

    // Negative control: overlapping localization breaks factorization.
    let mut overlap = 0.0f64;
    let n_mid = window.number_op(cut)?.matrix;
    let lhs = phi(&n_mid.dot(&n_mid));
    let rhs = phi(&n_mid) * phi(&n_mid);
    overlap = overlap.max((lhs - rhs).norm());

    Ok(IndependenceReport {
        disjoint_residual: disjoint,
        overlap_residual: overlap,
        pairs,
    })
}

/// Finite-window Powers-shift proxy report.
pub struct PowersShiftReport {
    /// `beta_n(N_{0]}) = N_{-n]}` on generators.
    pub shift_match_residual: f64,
    /// Projector-chain residual: after projecting onto every `N_{-n]}` up to
    /// the depth, probes collapse to their trace part.
    pub tail_residual: f64,
    /// Inclusion of the perturbed filtration in the unperturbed one,
    /// `W_n N_{n]} W_n^* inside N_{n]}` (exact zero expected).
    pub perturbed_inclusion_residual: f64,
    pub depth: i64,
}

pub fn powers_shift_check<R: Rng>(
    cocycle: &AlgebraCocycle,
    depth: i64,
    rng: &mut R,
) -> Result<PowersShiftReport> {
    let window = cocycle.window();
    let filtration = FiltrationAlgebra::new(Rc::clone(window));
    let (lo, hi) = window.site_range();
    if -depth > hi || lo > 0 {
        return Err(LabError::InvalidInput("window does not contain the chain".into()));
    }

    // beta_n = alpha_{-n} maps the past of 0 onto the past of -n.
    let mut shift_match = 0.0f64;
    for n in 0..=depth {
        for g in filtration.past_generators(0) {
            let Some((a, _)) = g.loc else { continue };
            if a - n < lo {
                continue;
            }
            let moved = window.shift_automorphism(&g, -n)?;
            // Same fermionic generator at the shifted site.
            let site = a - n;
            let direct = window.annihilator(site)?;
            let d1 = max_diff(&moved.matrix, &direct.matrix);
            let d2 = max_diff(&moved.matrix, &adjoint(&direct.matrix));
            shift_match = shift_match.max(d1.min(d2));
            // Decreasing chain: the image is in every coarser past algebra.
            let res = filtration.membership_residual(&moved, site)?;
            shift_match = shift_match.max(res);
        }
    }

    // Tail triviality proxy: composing the conditional expectations onto
    // N_{0]}, N_{-1]}, ..., N_{-depth]} must land every probe on its scalar
    // trace part (the last range is empty inside the window, so the fixed
    // space of the composition is C1).
    let dim = window.dim();
    let mut tail = 0.0f64;
    for _ in 0..6 {
        let mut probe = linalg::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                probe[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut projected = probe.clone();
        for n in 0..=depth {
            projected = filtration.project_onto_past(&projected, -n);
        }
        let mut tr = C64::new(0.0, 0.0);
        for i in 0..dim {
            tr += probe[(i, i)];
        }
        let scalar = linalg::eye(dim).mapv(|z| z * (tr / dim as f64));
        tail = tail.max(max_diff(&projected, &scalar));
    }

    // Perturbed filtration inclusion.
    let mut inclusion = 0.0f64;
    for n in 0..=depth.min(hi) {
        let w = match cocycle.member(n) {
            Ok(v) => v,
            Err(LabError::Localization(_)) | Err(LabError::WindowOverflow(_)) => continue,
            Err(e) => return Err(e),
        };
        for g in filtration.past_generators(n) {
            let conj = w.product(&g).product(&w.adjoint());
            let bounded = LocalOperator {
                matrix: conj.matrix,
                loc: conj.loc.map(|(a, b)| (a, b.min(n))),
            };
            inclusion = inclusion.max(filtration.membership_residual(&bounded, n)?);
        }
    }

    Ok(PowersShiftReport {
        shift_match_residual: shift_match,
        tail_residual: tail,
        perturbed_inclusion_residual: inclusion,
        depth,
    })
}

/// Conjugacy data for the perturbed endomorphism semigroup.
pub struct ConjugacyReport {
    /// Stabilization step of `W_{-n} x W_{-n}^*` per probe.
    pub stabilized_at: Vec<(String, i64)>,
    /// `theta_plus(theta(x)) = x`.
    pub round_trip_residual: f64,
    /// `theta(theta_plus(y)) = y` on the image.
    pub image_round_trip_residual: f64,
    /// `beta'_n(theta(x)) = theta(beta_n(x))` for small `n`.
    pub intertwining_residual: f64,
}

/// The injective endomorphism `theta(x) = W_{-infinity} x W_{-infinity}^*`,
/// realized through the stabilized action: once the fresh factors of
/// `W_{-n}` are localized strictly left of `x`, further factors commute and
/// the conjugation is constant in `n`.
pub fn conjugacy(
    cocycle: &AlgebraCocycle,
    probes: &[(String, LocalOperator)],
    intertwine_steps: i64,
) -> Result<ConjugacyReport> {
    if !cocycle.is_markovian() {
        return Err(LabError::InvalidInput(
            "conjugacy needs a verified markovian cocycle".into(),
        ));
    }
    let window = cocycle.window();
    let (lo, _hi) = window.site_range();

    let max_n = {
        // Largest n with alpha_{-n}(w) still in the window.
        let (wl, _wh) = cocycle.generator().loc.unwrap_or((0, 0));
        wl - lo
    };
    if max_n < 2 {
        return Err(LabError::Stabilization(
            "window too shallow for the stabilized conjugation".into(),
        ));
    }

    let stabilized = |x: &LocalOperator, forward: bool| -> Result<(LocalOperator, i64)> {
        let mut last: Option<(LocalOperator, i64)> = None;
        for n in 1..=max_n {
            let w = cocycle.member(-n)?;
            let conj = if forward {
                w.product(x).product(&w.adjoint())
            } else {
                w.adjoint().product(x).product(&w)
            };
            if let Some((prev, _)) = &last {
                if max_diff(&prev.matrix, &conj.matrix) <= 1e-13 {
                    return Ok((conj, n - 1));
                }
            }
            last = Some((conj, n));
        }
        Err(LabError::Stabilization(
            "conjugation did not stabilize inside the window".into(),
        ))
    };

    let mut stabilized_at = Vec::new();
    let mut round = 0.0f64;
    let mut image_round = 0.0f64;
    let mut intertwine = 0.0f64;

    for (name, x) in probes {
        let (theta_x, at) = stabilized(x, true)?;
        stabilized_at.push((name.clone(), at));
        let (back, _) = stabilized(&theta_x, false)?;
        round = round.max(max_diff(&back.matrix, &x.matrix));
        let (forward_again, _) = stabilized(&back, true)?;
        image_round = image_round.max(max_diff(&forward_again.matrix, &theta_x.matrix));

        for n in 1..=intertwine_steps {
            // beta'_n(theta(x)) vs theta(beta_n(x)); skip when the shift
            // leaves the window.
            let beta_x = match window.shift_automorphism(x, -n) {
                Ok(v) => v,
                Err(LabError::Localization(_)) => continue,
                Err(e) => return Err(e),
            };
            let theta_beta = match stabilized(&beta_x, true) {
                Ok((v, _)) => v,
                Err(LabError::Stabilization(_)) => continue,
                Err(e) => return Err(e),
            };
            let moved_theta = match window.shift_automorphism(&theta_x, -n) {
                Ok(v) => v,
                Err(LabError::Localization(_)) => continue,
                Err(e) => return Err(e),
            };
            let w = cocycle.member(-n)?;
            let beta_theta = w.product(&moved_theta).product(&w.adjoint());
            intertwine = intertwine.max(max_diff(&beta_theta.matrix, &theta_beta.matrix));
        }
    }

    Ok(ConjugacyReport {
        stabilized_at,
        round_trip_residual: round,
        image_round_trip_residual: image_round,
        intertwining_residual: intertwine,
    })
}

/// Diagonal generator `w = exp(i theta a_k^* a_k)` at the given site, the
/// even local unitary used throughout the perturbation suites. Markovian
/// admission requires `site <= 0`.
pub fn phase_generator_at(
    window: &Rc<FermionWindow>,
    theta: f64,
    site: i64,
) -> Result<LocalOperator> {
    let n_site = window.number_op(site)?;
    let dim = window.dim();
    let phase = C64::from_polar(1.0, theta);
    let mut m = linalg::eye(dim);
    // exp(i theta n) = 1 + (e^{i theta} - 1) n for a projector n.
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] += (phase - C64::new(1.0, 0.0)) * n_site.matrix[(i, j)];
        }
    }
    Ok(LocalOperator::new(m, site, site))
}

/// `phase_generator_at` pinned to site 0.
pub fn phase_generator(window: &Rc<FermionWindow>, theta: f64) -> Result<LocalOperator> {
    phase_generator_at(window, theta, 0)
}

/// A non-diagonal even local unitary: the fermionic swap of sites `-1, 0`.
pub fn fswap_generator(window: &Rc<FermionWindow>) -> Result<LocalOperator> {
    let a = window.annihilator(-1)?;
    let b = window.annihilator(0)?;
    let id = window.identity();
    let na = a.adjoint().product(&a).matrix;
    let nb = b.adjoint().product(&b).matrix;
    let hop = a.adjoint().product(&b).matrix + b.adjoint().product(&a).matrix;
    let m = &(&(&id - &na) - &nb) + &hop;
    Ok(LocalOperator::new(m, -1, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_window() -> Rc<FermionWindow> {
        FermionWindow::build(-5, 2).unwrap()
    }

    #[test]
    fn trivial_cocycle_everything_zero() {
        let w = test_window();
        let gen = LocalOperator::new(w.identity(), 0, 0);
        let c = AlgebraCocycle::from_local_unitary(Rc::clone(&w), gen).unwrap();
        let (res, pairs) = c.cocycle_residual(3).unwrap();
        assert_eq!(res, 0.0);
        assert!(pairs > 10);
        assert_eq!(c.verify_markovian(2, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn phase_cocycle_is_markovian() {
        let w = test_window();
        let gen = phase_generator(&w, std::f64::consts::FRAC_PI_2).unwrap();
        assert_eq!(w.parity_of(&gen.matrix), Parity::Even);
        let c = AlgebraCocycle::from_local_unitary(Rc::clone(&w), gen).unwrap();
        let (res, _) = c.cocycle_residual(3).unwrap();
        assert!(res < 1e-12, "cocycle residual {res}");
        assert!(c.unitarity_residual(3).unwrap() < 1e-12);
        let mk = c.verify_markovian(2, 1e-12).unwrap();
        assert_eq!(mk, 0.0, "markov residual {mk}");
    }

    #[test]
    fn odd_generator_rejected_but_unchecked_hook_fails_verification() {
        let w = test_window();
        // sigma_x-like odd local unitary: a_0 + a_0^*.
        let a = w.annihilator(0).unwrap();
        let m = &a.matrix + &adjoint(&a.matrix);
        let odd = LocalOperator::new(m, 0, 0);
        assert!(AlgebraCocycle::from_local_unitary(Rc::clone(&w), odd.clone()).is_err());
        let c = AlgebraCocycle::from_local_unitary_unchecked(Rc::clone(&w), odd);
        let res = c.verify_markovian(2, 1e-12).unwrap();
        assert!(res > 0.1, "odd generator must fail markovianity, got {res}");
        assert!(!c.is_markovian());
    }

    #[test]
    fn perturbed_process_identities() {
        let w = test_window();
        let gen = phase_generator(&w, std::f64::consts::FRAC_PI_2).unwrap();
        let c = Rc::new(AlgebraCocycle::from_local_unitary(Rc::clone(&w), gen).unwrap());
        c.verify_markovian(2, 1e-12).unwrap();
        let p = PerturbedProcess::new(CarProcess::new(Rc::clone(&w)), Rc::clone(&c)).unwrap();
        // Unchanged at nonnegative times, exactly.
        for n in 0..=2 {
            for sym in ProcessSymbol::ALL {
                let a = p.value(sym, n).unwrap();
                let b = p.unperturbed().value(sym, n).unwrap();
                assert_eq!(max_diff(&a.matrix, &b.matrix), 0.0);
            }
        }
        for sym in ProcessSymbol::ALL {
            let res = p.additive_residual(sym, 3).unwrap();
            assert!(res < 1e-11, "symbol {} residual {res}", sym.name());
        }
        let (f, b) = p.localization_residuals(2).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn trace_independence() {
        let w = test_window();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let rep = independence_check(&w, -2, &mut rng, 40).unwrap();
        assert!(rep.disjoint_residual < 1e-12, "residual {}", rep.disjoint_residual);
        assert!(rep.overlap_residual > 0.01);
    }

    #[test]
    fn powers_shift_finite_window() {
        let w = test_window();
        let gen = phase_generator(&w, std::f64::consts::FRAC_PI_2).unwrap();
        let c = AlgebraCocycle::from_local_unitary(Rc::clone(&w), gen).unwrap();
        c.verify_markovian(2, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = powers_shift_check(&c, 6, &mut rng).unwrap();
        assert_eq!(rep.shift_match_residual, 0.0);
        assert!(rep.tail_residual < 1e-12, "tail {}", rep.tail_residual);
        assert_eq!(rep.perturbed_inclusion_residual, 0.0);
    }

    #[test]
    fn conjugacy_round_trip() {
        let w = test_window();
        let gen = phase_generator(&w, std::f64::consts::FRAC_PI_2).unwrap();
        let c = AlgebraCocycle::from_local_unitary(Rc::clone(&w), gen).unwrap();
        c.verify_markovian(2, 1e-12).unwrap();
        let probes = vec![
            ("a(-1)".to_string(), w.annihilator(-1).unwrap()),
            ("n(-2)".to_string(), w.number_op(-2).unwrap()),
        ];
        let rep = conjugacy(&c, &probes, 1).unwrap();
        assert_eq!(rep.round_trip_residual, 0.0);
        assert_eq!(rep.image_round_trip_residual, 0.0);
        assert!(rep.intertwining_residual < 1e-11);
    }

    #[test]
    fn fswap_generator_is_even_unitary() {
        let w = test_window();
        let gen = fswap_generator(&w).unwrap();
        assert_eq!(w.parity_of(&gen.matrix), Parity::Even);
        let c = AlgebraCocycle::from_local_unitary(Rc::clone(&w), gen).unwrap();
        let (res, _) = c.cocycle_residual(2).unwrap();
        assert!(res < 1e-12);
        let mk = c.verify_markovian(1, 1e-11).unwrap();
        assert!(mk < 1e-12, "fswap markov residual {mk}");
    }

    #[test]
    fn membership_requires_localization_and_commutation() {
        let w = test_window();
        let f = FiltrationAlgebra::new(Rc::clone(&w));
        let a = w.annihilator(-3).unwrap();
        assert_eq!(f.membership_residual(&a, -3).unwrap(), 0.0);
        assert!(f.membership_residual(&a, -4).is_err());
        // An operator on site 1 does not commute with the complement of
        // sites <= 0.
        let bad = LocalOperator {
            matrix: w.number_op(1).unwrap().matrix,
            loc: Some((0, 0)), // deliberately wrong metadata
        };
        assert!(f.membership_residual(&bad, 0).unwrap() > 0.1);
    }

    #[test]
    fn projection_onto_past_fixes_members() {
        let w = test_window();
        let f = FiltrationAlgebra::new(Rc::clone(&w));
        let x = w.number_op(-4).unwrap();
        let proj = f.project_onto_past(&x.matrix, -3);
        assert!(max_diff(&proj, &x.matrix) < 1e-13);
        // And kills operators localized beyond the cut (traceless there).
        let y = w.annihilator(0).unwrap();
        let proj = f.project_onto_past(&y.matrix, -1);
        assert!(max_abs(&proj) < 1e-13);
    }
}
