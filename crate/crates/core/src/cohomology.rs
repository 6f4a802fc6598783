//! Degree-graded cochain calculus for a one-parameter group action.
//!
//! A cochain of degree `k` maps `k` integer times into a shift module; the
//! coboundary is the alternating sum with `k + 2` terms
//!
//! ```text
//! (dx)(t_1..t_{k+1}) = a_{t_1}(x(t_2..t_{k+1}))
//!                    + sum_{j=1}^{k} (-1)^j x(t_1, .., t_j + t_{j+1}, .., t_{k+1})
//!                    + (-1)^{k+1} x(t_1..t_k)
//! ```
//!
//! The trailing sign is pinned by requiring `d(dx) = 0`; conventions with the
//! final term carrying `(-1)^k` do not square to zero and are rejected by the
//! property tests. The cup product shifts the second factor's arguments past
//! the first factor's total time.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::error::{LabError, Result};
use crate::lattice::shift_conjugate_zero;
use crate::linalg::{self, Mat};

/// A module the shift group acts on: elements can be shifted, added and
/// multiplied, with a norm used by residual checks.
pub trait ShiftAction: Clone + 'static {
    type Elem: Clone + 'static;
    fn act(&self, t: i64, x: &Self::Elem) -> Result<Self::Elem>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn norm(&self, a: &Self::Elem) -> f64;
    /// Whether two instances describe the same value space.
    fn compatible(&self, other: &Self) -> bool;
}

type EvalRule<E> = Rc<dyn Fn(&[i64]) -> Result<E>>;

/// Degree-`k` map from `k` integer time arguments into a shift module.
pub struct Cochain<M: ShiftAction> {
    module: M,
    degree: usize,
    domain_bound: i64,
    eval: EvalRule<M::Elem>,
}

impl<M: ShiftAction> Clone for Cochain<M> {
    fn clone(&self) -> Self {
        Cochain {
            module: self.module.clone(),
            degree: self.degree,
            domain_bound: self.domain_bound,
            eval: Rc::clone(&self.eval),
        }
    }
}

impl<M: ShiftAction> Cochain<M> {
    pub fn new(module: M, degree: usize, domain_bound: i64, eval: EvalRule<M::Elem>) -> Result<Self> {
        if degree == 0 {
            return Err(LabError::InvalidInput(
                "degree-0 cochains are not part of the calculus".into(),
            ));
        }
        Ok(Cochain {
            module,
            degree,
            domain_bound,
            eval,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain_bound(&self) -> i64 {
        self.domain_bound
    }

    pub fn module(&self) -> &M {
        &self.module
    }

    pub fn eval(&self, args: &[i64]) -> Result<M::Elem> {
        if args.len() != self.degree {
            return Err(LabError::DimensionMismatch(format!(
                "degree-{} cochain evaluated on {} arguments",
                self.degree,
                args.len()
            )));
        }
        if args.iter().any(|t| t.abs() > self.domain_bound) {
            return Err(LabError::WindowOverflow(format!(
                "argument outside the domain bound {}",
                self.domain_bound
            )));
        }
        (self.eval)(args)
    }
}

/// Coboundary operator; degree goes up by one, the usable time bound halves
/// because adjacent arguments get merged.
pub fn coboundary<M: ShiftAction>(x: &Cochain<M>) -> Cochain<M> {
    let k = x.degree;
    let module = x.module.clone();
    let inner = x.clone();
    let rule: EvalRule<M::Elem> = Rc::new(move |args: &[i64]| {
        let m = &inner.module;
        // Leading term: a_{t_1}(x(t_2, ..., t_{k+1})).
        let mut acc = m.act(args[0], &inner.eval(&args[1..])?)?;
        // Merging terms.
        for j in 1..=k {
            let mut merged: Vec<i64> = Vec::with_capacity(k);
            merged.extend_from_slice(&args[..j - 1]);
            merged.push(args[j - 1] + args[j]);
            merged.extend_from_slice(&args[j + 1..]);
            let term = inner.eval(&merged)?;
            acc = if j % 2 == 1 {
                m.add(&acc, &m.neg(&term))
            } else {
                m.add(&acc, &term)
            };
        }
        // Trailing term: (-1)^{k+1} x(t_1, ..., t_k).
        let term = inner.eval(&args[..k])?;
        acc = if (k + 1) % 2 == 1 {
            m.add(&acc, &m.neg(&term))
        } else {
            m.add(&acc, &term)
        };
        Ok(acc)
    });
    Cochain {
        module,
        degree: k + 1,
        domain_bound: x.domain_bound / 2,
        eval: rule,
    }
}

/// Cup product: `(x u y)(t_1..t_{i+j}) = x(t_1..t_i) *
/// a_{t_1+...+t_i}(y(t_{i+1}..t_{i+j}))`.
pub fn cup<M: ShiftAction>(x: &Cochain<M>, y: &Cochain<M>) -> Result<Cochain<M>> {
    if !x.module.compatible(&y.module) {
        return Err(LabError::InvalidInput(
            "cup factors live in incompatible value spaces".into(),
        ));
    }
    let i = x.degree;
    let j = y.degree;
    let module = x.module.clone();
    let xx = x.clone();
    let yy = y.clone();
    let rule: EvalRule<M::Elem> = Rc::new(move |args: &[i64]| {
        let m = &xx.module;
        let left = xx.eval(&args[..i])?;
        let total: i64 = args[..i].iter().sum();
        let right = m.act(total, &yy.eval(&args[i..])?)?;
        m.mul(&left, &right)
    });
    Ok(Cochain {
        module,
        degree: i + j,
        domain_bound: x.domain_bound.min(y.domain_bound),
        eval: rule,
    })
}

/// Extend a generator assignment to a formal product word by iterated cup
/// products, the unique multiplicative extension.
pub fn extend_process<M: ShiftAction>(
    generators: &BTreeMap<String, Cochain<M>>,
    word: &[&str],
) -> Result<Cochain<M>> {
    if word.is_empty() {
        return Err(LabError::InvalidInput("empty product word".into()));
    }
    let mut iter = word.iter();
    let first = iter.next().unwrap();
    let mut acc = generators
        .get(*first)
        .ok_or_else(|| LabError::InvalidInput(format!("unknown generator {first}")))?
        .clone();
    for sym in iter {
        let next = generators
            .get(*sym)
            .ok_or_else(|| LabError::InvalidInput(format!("unknown generator {sym}")))?;
        acc = cup(&acc, next)?;
    }
    Ok(acc)
}

/// Max norm of `x` over `samples` random argument tuples with entries in
/// `[-time_bound, time_bound]`.
pub fn sampled_residual<M: ShiftAction, R: rand::Rng>(
    x: &Cochain<M>,
    rng: &mut R,
    samples: usize,
    time_bound: i64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let args: Vec<i64> = (0..x.degree())
            .map(|_| rng.gen_range(-time_bound..=time_bound))
            .collect();
        let v = x.eval(&args)?;
        worst = worst.max(x.module().norm(&v));
    }
    Ok(worst)
}

/// Scalar value space: functions of a real base point, with the action
/// `(T_t f)(r) = f(r + t)`. Norms are sups over the module's probe points.
#[derive(Clone)]
pub struct PointFunctionModule {
    probes: Rc<Vec<f64>>,
}

/// Scalar-function element; evaluation outside the originating measure's
/// support panics, which construction-time support checks rule out for all
/// probe evaluations.
#[derive(Clone)]
pub struct PointFn(pub Rc<dyn Fn(f64) -> f64>);

impl PointFn {
    pub fn constant(c: f64) -> Self {
        PointFn(Rc::new(move |_| c))
    }

    pub fn call(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

impl PointFunctionModule {
    pub fn new(probes: Vec<f64>) -> Self {
        PointFunctionModule {
            probes: Rc::new(probes),
        }
    }

    pub fn probes(&self) -> &[f64] {
        &self.probes
    }
}

impl ShiftAction for PointFunctionModule {
    type Elem = PointFn;

    fn act(&self, t: i64, x: &PointFn) -> Result<PointFn> {
        let f = Rc::clone(&x.0);
        let shift = t as f64;
        Ok(PointFn(Rc::new(move |r| f(r + shift))))
    }

    fn add(&self, a: &PointFn, b: &PointFn) -> PointFn {
        let fa = Rc::clone(&a.0);
        let fb = Rc::clone(&b.0);
        PointFn(Rc::new(move |r| fa(r) + fb(r)))
    }

    fn neg(&self, a: &PointFn) -> PointFn {
        let fa = Rc::clone(&a.0);
        PointFn(Rc::new(move |r| -fa(r)))
    }

    fn mul(&self, a: &PointFn, b: &PointFn) -> Result<PointFn> {
        let fa = Rc::clone(&a.0);
        let fb = Rc::clone(&b.0);
        Ok(PointFn(Rc::new(move |r| fa(r) * fb(r))))
    }

    fn norm(&self, a: &PointFn) -> f64 {
        self.probes
            .iter()
            .fold(0.0f64, |m, &r| m.max((a.0)(r).abs()))
    }

    fn compatible(&self, _other: &Self) -> bool {
        true
    }
}

/// Window operators with the conjugation action `A -> S_t A S_{-t}`
/// (relabel with identity extension, exact for interior-supported operators).
#[derive(Clone)]
pub struct LatticeConjugationModule {
    half_width: usize,
}

impl LatticeConjugationModule {
    pub fn new(half_width: usize) -> Self {
        LatticeConjugationModule { half_width }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }
}

impl ShiftAction for LatticeConjugationModule {
    type Elem = Mat;

    fn act(&self, t: i64, x: &Mat) -> Result<Mat> {
        Ok(shift_conjugate_zero(x, t))
    }

    fn add(&self, a: &Mat, b: &Mat) -> Mat {
        a + b
    }

    fn neg(&self, a: &Mat) -> Mat {
        a.mapv(|z| -z)
    }

    fn mul(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        if a.ncols() != b.nrows() {
            return Err(LabError::DimensionMismatch("operator product".into()));
        }
        Ok(a.dot(b))
    }

    fn norm(&self, a: &Mat) -> f64 {
        linalg::max_abs(a)
    }

    fn compatible(&self, other: &Self) -> bool {
        self.half_width == other.half_width
    }
}

/// Additivity of the module action on sampled elements:
/// `T_{t+s} = T_t T_s` within the returned residual.
pub fn action_additivity_residual<M: ShiftAction>(
    module: &M,
    elems: &[M::Elem],
    pairs: &[(i64, i64)],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for e in elems {
        for &(t, s) in pairs {
            let lhs = module.act(t + s, e)?;
            let rhs = module.act(t, &module.act(s, e)?)?;
            let diff = module.add(&lhs, &module.neg(&rhs));
            worst = worst.max(module.norm(&diff));
        }
    }
    Ok(worst)
}
