//! Finite fermion lattice: Jordan-Wigner generators on a site window, the
//! shift automorphism, the basic additive processes and their relation suite.
//!
//! Sites are indexed by integers `lo..=hi` (at most 12 of them); the state
//! space is the `2^sites`-dimensional dense representation with site `lo` as
//! the leading tensor factor. The shift automorphism `a_k -> a_{k+1}` is
//! conjugation by an explicit product of fermionic swap unitaries, a signed
//! permutation matrix, so shifting localized operators is exact in floating
//! point.

use std::rc::Rc;

use crate::cohomology::ShiftAction;
use crate::error::{LabError, Result};
use crate::linalg::{self, adjoint, max_abs, max_diff, Mat, C64, ONE, ZERO};

pub const MAX_SITES: usize = 12;

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = linalg::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let v = a[(i, j)];
            if v == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

fn sigma_minus() -> Mat {
    let mut m = linalg::zeros(2, 2);
    m[(0, 1)] = ONE;
    m
}

fn pauli_z() -> Mat {
    let mut m = linalg::eye(2);
    m[(1, 1)] = -ONE;
    m
}

/// Parity classification under the grading automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Operator together with the site interval it is localized in (`None` for
/// scalars, which are localized everywhere and nowhere).
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub matrix: Mat,
    pub loc: Option<(i64, i64)>,
}

impl LocalOperator {
    pub fn scalar(matrix: Mat) -> Self {
        LocalOperator { matrix, loc: None }
    }

    pub fn new(matrix: Mat, lo: i64, hi: i64) -> Self {
        LocalOperator {
            matrix,
            loc: Some((lo, hi)),
        }
    }

    fn merged_loc(&self, other: &LocalOperator) -> Option<(i64, i64)> {
        match (self.loc, other.loc) {
            (None, l) | (l, None) => l,
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
        }
    }

    pub fn product(&self, other: &LocalOperator) -> LocalOperator {
        LocalOperator {
            matrix: self.matrix.dot(&other.matrix),
            loc: self.merged_loc(other),
        }
    }

    pub fn add(&self, other: &LocalOperator) -> LocalOperator {
        LocalOperator {
            matrix: &self.matrix + &other.matrix,
            loc: self.merged_loc(other),
        }
    }

    pub fn adjoint(&self) -> LocalOperator {
        LocalOperator {
            matrix: adjoint(&self.matrix),
            loc: self.loc,
        }
    }
}

/// Jordan-Wigner window on sites `lo..=hi`.
pub struct FermionWindow {
    lo: i64,
    hi: i64,
    dim: usize,
    annihilators: Vec<Mat>,
    parity: Mat,
    shift: Mat,
}

impl FermionWindow {
    pub fn build(lo: i64, hi: i64) -> Result<Rc<Self>> {
        if hi < lo {
            return Err(LabError::InvalidInput("empty site range".into()));
        }
        let sites = (hi - lo + 1) as usize;
        if sites > MAX_SITES {
            return Err(LabError::SizeLimit(format!(
                "{sites} sites exceed the cap of {MAX_SITES}"
            )));
        }
        let dim = 1usize << sites;
        let z = pauli_z();
        let sm = sigma_minus();
        let id2 = linalg::eye(2);

        let mut annihilators = Vec::with_capacity(sites);
        for k in 0..sites {
            let mut m = linalg::eye(1);
            for j in 0..sites {
                let factor = if j < k {
                    &z
                } else if j == k {
                    &sm
                } else {
                    &id2
                };
                m = kron(&m, factor);
            }
            annihilators.push(m);
        }
        let mut parity = linalg::eye(1);
        for _ in 0..sites {
            parity = kron(&parity, &z);
        }

        // One-step fermionic translation: product of fermionic swaps moving
        // every mode one site up (the last mode wraps with a sign and is never
        // consulted thanks to the localization preconditions).
        let mut fswap4 = linalg::zeros(4, 4);
        fswap4[(0, 0)] = ONE;
        fswap4[(1, 2)] = ONE;
        fswap4[(2, 1)] = ONE;
        fswap4[(3, 3)] = -ONE;
        let mut shift = linalg::eye(dim);
        if sites > 1 {
            let mut factors = Vec::with_capacity(sites - 1);
            for j in 0..sites - 1 {
                let mut f = linalg::eye(1);
                for p in 0..sites {
                    if p == j {
                        f = kron(&f, &fswap4);
                    } else if p == j + 1 {
                        continue;
                    } else {
                        f = kron(&f, &id2);
                    }
                }
                factors.push(f);
            }
            // conj_U = conj_{F_{0,1}} after ... after conj_{F_{s-2,s-1}}.
            shift = factors
                .iter()
                .fold(linalg::eye(dim), |acc, f| acc.dot(f));
        }

        let window = Rc::new(FermionWindow {
            lo,
            hi,
            dim,
            annihilators,
            parity,
            shift,
        });
        if dim <= 512 {
            let residual = window.verify_car()?;
            if residual > 1e-12 {
                return Err(LabError::InvalidInput(format!(
                    "canonical anticommutation relations violated at {residual:.3e}"
                )));
            }
        }
        Ok(window)
    }

    pub fn site_range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn sites(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn identity(&self) -> Mat {
        linalg::eye(self.dim)
    }

    pub fn parity_operator(&self) -> &Mat {
        &self.parity
    }

    fn site_index(&self, k: i64) -> Result<usize> {
        if k < self.lo || k > self.hi {
            return Err(LabError::WindowOverflow(format!(
                "site {k} outside window [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok((k - self.lo) as usize)
    }

    pub fn annihilator(&self, k: i64) -> Result<LocalOperator> {
        let idx = self.site_index(k)?;
        Ok(LocalOperator::new(self.annihilators[idx].clone(), k, k))
    }

    pub fn creator(&self, k: i64) -> Result<LocalOperator> {
        let idx = self.site_index(k)?;
        Ok(LocalOperator::new(adjoint(&self.annihilators[idx]), k, k))
    }

    pub fn number_op(&self, k: i64) -> Result<LocalOperator> {
        let a = self.annihilator(k)?;
        Ok(a.adjoint().product(&a))
    }

    pub fn hole_op(&self, k: i64) -> Result<LocalOperator> {
        let a = self.annihilator(k)?;
        Ok(a.product(&a.adjoint()))
    }

    /// Parity under the grading automorphism `x -> P x P`.
    pub fn parity_of(&self, x: &Mat) -> Parity {
        let conj = self.parity.dot(x).dot(&self.parity);
        let even = max_diff(&conj, x);
        let minus = x.mapv(|z| -z);
        let odd = max_diff(&conj, &minus);
        if even < 1e-12 {
            Parity::Even
        } else if odd < 1e-12 {
            Parity::Odd
        } else {
            Parity::Mixed
        }
    }

    /// Max residual of the canonical anticommutation relations over all site
    /// pairs, including the projector identity for number operators.
    pub fn verify_car(&self) -> Result<f64> {
        let n = self.sites();
        let id = self.identity();
        let mut worst = 0.0f64;
        for k in 0..n {
            for l in 0..n {
                let ak = &self.annihilators[k];
                let al = &self.annihilators[l];
                let alc = adjoint(al);
                let mixed = ak.dot(&alc) + alc.dot(ak);
                let want = if k == l { id.clone() } else { linalg::zeros(self.dim, self.dim) };
                worst = worst.max(max_diff(&mixed, &want));
                let same = ak.dot(al) + al.dot(ak);
                worst = worst.max(max_abs(&same));
            }
            // (a* a)^2 = a* a
            let num = adjoint(&self.annihilators[k]).dot(&self.annihilators[k]);
            worst = worst.max(max_diff(&num.dot(&num), &num));
        }
        // Parity squares to the identity and grades the generators as odd.
        worst = worst.max(max_diff(&self.parity.dot(&self.parity), &id));
        for a in &self.annihilators {
            let conj = self.parity.dot(a).dot(&self.parity);
            let minus = a.mapv(|z| -z);
            worst = worst.max(max_diff(&conj, &minus));
        }
        Ok(worst)
    }

    /// Shift automorphism `a_k -> a_{k+m}` applied to a localized operator by
    /// conjugation with the translation unitary. The shifted localization must
    /// stay inside the window.
    pub fn shift_automorphism(&self, x: &LocalOperator, m: i64) -> Result<LocalOperator> {
        if m == 0 {
            return Ok(x.clone());
        }
        let Some((a, b)) = x.loc else {
            return Ok(x.clone());
        };
        if a + m < self.lo || b + m > self.hi {
            return Err(LabError::Localization(format!(
                "shifting [{a}, {b}] by {m} leaves the window [{}, {}]",
                self.lo, self.hi
            )));
        }
        let steps = m.unsigned_abs() as usize;
        let mut out = x.matrix.clone();
        for _ in 0..steps {
            out = if m > 0 {
                self.shift.dot(&out).dot(&adjoint(&self.shift))
            } else {
                adjoint(&self.shift).dot(&out).dot(&self.shift)
            };
        }
        Ok(LocalOperator::new(out, a + m, b + m))
    }
}

/// Formal factor symbols for the ordered-product operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarSymbol {
    Annihilate,
    Create,
    Number,
    Hole,
}

/// Ordered product `y_1 y_2 ... y_m` with `y_i` the symbol's realization at
/// the assigned site.
pub fn odot(window: &FermionWindow, factors: &[(CarSymbol, i64)]) -> Result<LocalOperator> {
    if factors.is_empty() {
        return Err(LabError::InvalidInput("empty product".into()));
    }
    let mut acc: Option<LocalOperator> = None;
    for &(sym, site) in factors {
        let op = match sym {
            CarSymbol::Annihilate => window.annihilator(site)?,
            CarSymbol::Create => window.creator(site)?,
            CarSymbol::Number => window.number_op(site)?,
            CarSymbol::Hole => window.hole_op(site)?,
        };
        acc = Some(match acc {
            None => op,
            Some(prev) => prev.product(&op),
        });
    }
    Ok(acc.unwrap())
}

/// Symbols of the basic additive processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessSymbol {
    Annihilation,
    Creation,
    Number,
    Unit,
}

impl ProcessSymbol {
    pub const ALL: [ProcessSymbol; 4] = [
        ProcessSymbol::Annihilation,
        ProcessSymbol::Creation,
        ProcessSymbol::Number,
        ProcessSymbol::Unit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProcessSymbol::Annihilation => "a",
            ProcessSymbol::Creation => "a*",
            ProcessSymbol::Number => "a*a",
            ProcessSymbol::Unit => "1",
        }
    }
}

/// The stationary process: time step `n` maps to the increment over sites
/// `1..=n` (negative times extend through the cocycle identity, using sites
/// `n+1..=0`).
pub struct CarProcess {
    window: Rc<FermionWindow>,
}

impl CarProcess {
    pub fn new(window: Rc<FermionWindow>) -> Self {
        CarProcess { window }
    }

    pub fn window(&self) -> &Rc<FermionWindow> {
        &self.window
    }

    fn site_span(n: i64) -> Option<(i64, i64)> {
        if n > 0 {
            Some((1, n))
        } else if n < 0 {
            Some((n + 1, 0))
        } else {
            None
        }
    }

    /// `j(symbol)(n)`.
    pub fn value(&self, symbol: ProcessSymbol, n: i64) -> Result<LocalOperator> {
        let dim = self.window.dim();
        if symbol == ProcessSymbol::Unit {
            let m = linalg::eye(dim).mapv(|z| z * C64::new(n as f64, 0.0));
            return Ok(LocalOperator::scalar(m));
        }
        let Some((lo, hi)) = Self::site_span(n) else {
            return Ok(LocalOperator::new(linalg::zeros(dim, dim), 0, 0));
        };
        let sign = if n > 0 { ONE } else { -ONE };
        let mut acc = linalg::zeros(dim, dim);
        for k in lo..=hi {
            let term = match symbol {
                ProcessSymbol::Annihilation => self.window.annihilator(k)?,
                ProcessSymbol::Creation => self.window.creator(k)?,
                ProcessSymbol::Number => self.window.number_op(k)?,
                ProcessSymbol::Unit => unreachable!(),
            };
            acc = &acc + &term.matrix;
        }
        acc.mapv_inplace(|z| z * sign);
        Ok(LocalOperator::new(acc, lo, hi))
    }

    /// Max residual of the additive cocycle identity
    /// `X_{m+n} = X_m + alpha_m(X_n)` over all valid pairs with both times and
    /// the sum inside `[-bound_neg, bound_pos]`.
    pub fn additive_cocycle_residual(
        &self,
        symbol: ProcessSymbol,
        bound_neg: i64,
        bound_pos: i64,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for m in -bound_neg..=bound_pos {
            for n in -bound_neg..=bound_pos {
                let s = m + n;
                if s < -bound_neg || s > bound_pos {
                    continue;
                }
                // alpha_m needs the shifted localization in-window.
                let xn = self.value(symbol, n)?;
                let shifted = match self.window.shift_automorphism(&xn, m) {
                    Ok(v) => v,
                    Err(LabError::Localization(_)) => continue,
                    Err(e) => return Err(e),
                };
                let lhs = self.value(symbol, s)?;
                let rhs = &self.value(symbol, m)?.matrix + &shifted.matrix;
                worst = worst.max(max_diff(&lhs.matrix, &rhs));
            }
        }
        Ok(worst)
    }
}

/// Relation report for the basic processes on a window.
#[derive(Debug, Clone)]
pub struct CarRelationReport {
    /// Generator-level relations (from `verify_car`).
    pub car_residual: f64,
    /// `A_n A_m* + A_m* A_n = (n and m) 1` over `1 <= n, m <= max_n`.
    pub wedge_residual: f64,
    /// `A_n A_m + A_m A_n = 0`.
    pub nilpotency_residual: f64,
    /// `j(a*)(n) = j(a)(n)*`.
    pub adjoint_residual: f64,
    /// `j(a)* j(a) + j(a) j(a)* = j(1)`.
    pub unit_residual: f64,
    /// `[L_n, A_n] = -A_n` and `[L_n, A_n*] = A_n*`.
    pub commutator_residual: f64,
    /// Spectral norms `|L_n - A_n* A_n|`, strictly positive for `n >= 2`.
    pub witness_norms: Vec<(i64, f64)>,
    /// Parity labels: every `A_n` odd, every `L_n` even.
    pub parity_ok: bool,
}

pub fn verify_relations(window: &Rc<FermionWindow>, max_n: i64) -> Result<CarRelationReport> {
    let (_lo, hi) = window.site_range();
    if max_n > hi {
        return Err(LabError::WindowOverflow(format!(
            "process time {max_n} needs site {max_n}, window ends at {hi}"
        )));
    }
    if max_n < 2 {
        return Err(LabError::InvalidInput("need at least two sites/times".into()));
    }
    let process = CarProcess::new(Rc::clone(window));
    let car_residual = window.verify_car()?;
    let id = window.identity();

    let mut wedge = 0.0f64;
    let mut nil = 0.0f64;
    let mut adj = 0.0f64;
    let mut unit = 0.0f64;
    let mut comm = 0.0f64;
    let mut witness = Vec::new();
    let mut parity_ok = true;

    for n in 1..=max_n {
        let a_n = process.value(ProcessSymbol::Annihilation, n)?;
        let a_n_star = process.value(ProcessSymbol::Creation, n)?;
        let lam_n = process.value(ProcessSymbol::Number, n)?;

        adj = adj.max(max_diff(&a_n_star.matrix, &adjoint(&a_n.matrix)));

        let lhs = adjoint(&a_n.matrix).dot(&a_n.matrix) + a_n.matrix.dot(&adjoint(&a_n.matrix));
        let want = id.mapv(|z| z * C64::new(n as f64, 0.0));
        unit = unit.max(max_diff(&lhs, &want));

        let c1 = lam_n.matrix.dot(&a_n.matrix) - a_n.matrix.dot(&lam_n.matrix);
        comm = comm.max(max_diff(&c1, &a_n.matrix.mapv(|z| -z)));
        let c2 = lam_n.matrix.dot(&a_n_star.matrix) - a_n_star.matrix.dot(&lam_n.matrix);
        comm = comm.max(max_diff(&c2, &a_n_star.matrix));

        let diff = &lam_n.matrix - &adjoint(&a_n.matrix).dot(&a_n.matrix);
        let (vals, _) = linalg::hermitian_eigen(&diff)?;
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        witness.push((n, norm));

        if window.parity_of(&a_n.matrix) != Parity::Odd
            || window.parity_of(&lam_n.matrix) != Parity::Even
        {
            parity_ok = false;
        }

        for m in 1..=max_n {
            let a_m = process.value(ProcessSymbol::Annihilation, m)?;
            let a_m_star = process.value(ProcessSymbol::Creation, m)?;
            let mixed = a_n.matrix.dot(&a_m_star.matrix) + a_m_star.matrix.dot(&a_n.matrix);
            let want = id.mapv(|z| z * C64::new(n.min(m) as f64, 0.0));
            wedge = wedge.max(max_diff(&mixed, &want));
            let same = a_n.matrix.dot(&a_m.matrix) + a_m.matrix.dot(&a_n.matrix);
            nil = nil.max(max_abs(&same));
        }
    }

    Ok(CarRelationReport {
        car_residual,
        wedge_residual: wedge,
        nilpotency_residual: nil,
        adjoint_residual: adj,
        unit_residual: unit,
        commutator_residual: comm,
        witness_norms: witness,
        parity_ok,
    })
}

/// Shift module over a fermion window, for operator-valued cochains.
#[derive(Clone)]
pub struct FermionConjugationModule {
    window: Rc<FermionWindow>,
}

impl FermionConjugationModule {
    pub fn new(window: Rc<FermionWindow>) -> Self {
        FermionConjugationModule { window }
    }

    pub fn window(&self) -> &Rc<FermionWindow> {
        &self.window
    }
}

impl ShiftAction for FermionConjugationModule {
    type Elem = LocalOperator;

    fn act(&self, t: i64, x: &LocalOperator) -> Result<LocalOperator> {
        self.window.shift_automorphism(x, t)
    }

    fn add(&self, a: &LocalOperator, b: &LocalOperator) -> LocalOperator {
        a.add(b)
    }

    fn neg(&self, a: &LocalOperator) -> LocalOperator {
        LocalOperator {
            matrix: a.matrix.mapv(|z| -z),
            loc: a.loc,
        }
    }

    fn mul(&self, a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
        Ok(a.product(b))
    }

    fn norm(&self, a: &LocalOperator) -> f64 {
        max_abs(&a.matrix)
    }

    fn compatible(&self, other: &Self) -> bool {
        Rc::ptr_eq(&self.window, &other.window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_site_annihilator_is_lowering_matrix() {
        let w = FermionWindow::build(1, 1).unwrap();
        let a = w.annihilator(1).unwrap();
        assert_eq!(a.matrix[(0, 1)], ONE);
        assert_eq!(a.matrix[(1, 0)], ZERO);
    }

    #[test]
    fn two_site_anticommutators() {
        let w = FermionWindow::build(1, 2).unwrap();
        let a1 = w.annihilator(1).unwrap().matrix;
        let a2 = w.annihilator(2).unwrap().matrix;
        let anti = a1.dot(&a2) + a2.dot(&a1);
        assert_eq!(max_abs(&anti), 0.0);
        let mixed = a1.dot(&adjoint(&a2)) + adjoint(&a2).dot(&a1);
        assert_eq!(max_abs(&mixed), 0.0);
    }

    #[test]
    fn build_time_relations_verified() {
        let w = FermionWindow::build(-2, 3).unwrap();
        assert!(w.verify_car().unwrap() < 1e-14);
        assert!(FermionWindow::build(0, 12).is_err()); // 13 sites
    }

    #[test]
    fn shift_moves_generators_exactly() {
        let w = FermionWindow::build(-2, 3).unwrap();
        for k in -2i64..3 {
            let a = w.annihilator(k).unwrap();
            let shifted = w.shift_automorphism(&a, 1).unwrap();
            let want = w.annihilator(k + 1).unwrap();
            assert_eq!(max_diff(&shifted.matrix, &want.matrix), 0.0, "site {k}");
            assert_eq!(shifted.loc, Some((k + 1, k + 1)));
        }
        // alpha_m alpha_n = alpha_{m+n} where defined.
        let x = w.number_op(0).unwrap();
        let ab = w
            .shift_automorphism(&w.shift_automorphism(&x, 2).unwrap(), -1)
            .unwrap();
        let direct = w.shift_automorphism(&x, 1).unwrap();
        assert_eq!(max_diff(&ab.matrix, &direct.matrix), 0.0);
        // Localization overflow is an error.
        let edge = w.annihilator(3).unwrap();
        assert!(matches!(
            w.shift_automorphism(&edge, 1),
            Err(LabError::Localization(_))
        ));
    }

    #[test]
    fn shift_preserves_relations_and_parity() {
        let w = FermionWindow::build(0, 4).unwrap();
        let a0 = w.annihilator(0).unwrap();
        let s = w.shift_automorphism(&a0, 2).unwrap();
        // Shifted generator still anticommutes correctly.
        let a3 = w.annihilator(3).unwrap().matrix;
        let anti = s.matrix.dot(&a3) + a3.dot(&s.matrix);
        assert_eq!(max_abs(&anti), 0.0);
        assert_eq!(w.parity_of(&s.matrix), Parity::Odd);
    }

    #[test]
    fn process_values_and_wedge_relation() {
        let w = FermionWindow::build(-1, 4).unwrap();
        let p = CarProcess::new(Rc::clone(&w));
        let a2 = p.value(ProcessSymbol::Annihilation, 2).unwrap();
        let a3s = p.value(ProcessSymbol::Creation, 3).unwrap();
        let mixed = a2.matrix.dot(&a3s.matrix) + a3s.matrix.dot(&a2.matrix);
        let want = w.identity().mapv(|z| z * C64::new(2.0, 0.0));
        assert!(max_diff(&mixed, &want) < 1e-12);
    }

    #[test]
    fn additive_cocycle_for_all_symbols() {
        let w = FermionWindow::build(-3, 4).unwrap();
        let p = CarProcess::new(Rc::clone(&w));
        for sym in ProcessSymbol::ALL {
            let res = p.additive_cocycle_residual(sym, 3, 4).unwrap();
            assert_eq!(res, 0.0, "symbol {}", sym.name());
        }
    }

    #[test]
    fn relation_report_small_window() {
        let w = FermionWindow::build(-1, 4).unwrap();
        let rep = verify_relations(&w, 4).unwrap();
        assert!(rep.car_residual < 1e-13);
        assert!(rep.wedge_residual < 1e-13);
        assert!(rep.nilpotency_residual < 1e-13);
        assert!(rep.adjoint_residual < 1e-13);
        assert!(rep.unit_residual < 1e-13);
        assert!(rep.commutator_residual < 1e-13);
        assert!(rep.parity_ok);
        // n = 1: Lambda_1 = A_1* A_1 exactly; n >= 2: strictly positive gap.
        assert!(rep.witness_norms[0].1 < 1e-13);
        for (n, norm) in &rep.witness_norms[1..] {
            assert!(*norm > 0.5, "n={n} witness {norm}");
        }
    }

    #[test]
    fn odot_dictionary() {
        let w = FermionWindow::build(1, 3).unwrap();
        let x = odot(&w, &[(CarSymbol::Annihilate, 1), (CarSymbol::Create, 2)]).unwrap();
        let want = w
            .annihilator(1)
            .unwrap()
            .product(&w.creator(2).unwrap());
        assert_eq!(max_diff(&x.matrix, &want.matrix), 0.0);
        assert_eq!(x.loc, Some((1, 2)));
        // (a (.) a) squared is zero by nilpotency.
        let aa = odot(&w, &[(CarSymbol::Annihilate, 1), (CarSymbol::Annihilate, 2)]).unwrap();
        let sq = aa.matrix.dot(&aa.matrix);
        assert_eq!(max_abs(&sq), 0.0);
        // Single symbol reduces to the generator.
        let single = odot(&w, &[(CarSymbol::Number, 2)]).unwrap();
        assert_eq!(max_diff(&single.matrix, &w.number_op(2).unwrap().matrix), 0.0);
    }

    #[test]
    fn witness_identity_at_two_sites() {
        // Lambda_2 - A_2* A_2 = -(a_1* a_2 + a_2* a_1); spectral norm 1.
        let w = FermionWindow::build(1, 2).unwrap();
        let p = CarProcess::new(Rc::clone(&w));
        let lam = p.value(ProcessSymbol::Number, 2).unwrap().matrix;
        let a = p.value(ProcessSymbol::Annihilation, 2).unwrap().matrix;
        let diff = &lam - &adjoint(&a).dot(&a);
        let (vals, _) = linalg::hermitian_eigen(&diff).unwrap();
        let norm = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
