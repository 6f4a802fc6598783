//! Measures on the line (finite atoms plus a piecewise-constant grid density)
//! and the degree-1 cocycles they generate.

use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::cohomology::{cup, Cochain, PointFn, PointFunctionModule};
use crate::error::{LabError, Result};

/// Piecewise-constant density: value `values[i]` on
/// `[start + i*step, start + (i+1)*step)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDensity {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

/// Finite atom list plus an optional grid density, with a declared support
/// range outside which evaluation is refused.
#[derive(Debug, Clone)]
pub struct Measure {
    atoms: Vec<(f64, f64)>,
    density: Option<GridDensity>,
    support: (f64, f64),
}

/// Plain-text form for configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pub density: Option<GridDensity>,
    pub support_lo: f64,
    pub support_hi: f64,
}

impl Measure {
    pub fn new(atoms: Vec<(f64, f64)>, density: Option<GridDensity>, support: (f64, f64)) -> Result<Self> {
        if support.0 >= support.1 {
            return Err(LabError::InvalidInput("empty measure support".into()));
        }
        if let Some(d) = &density {
            if d.step <= 0.0 {
                return Err(LabError::InvalidInput("density step must be positive".into()));
            }
        }
        for (_, mass) in &atoms {
            if *mass < 0.0 {
                return Err(LabError::InvalidInput("atom masses must be nonnegative".into()));
            }
        }
        Ok(Measure {
            atoms,
            density,
            support,
        })
    }

    /// Counting measure on the integers of `[lo, hi]`.
    pub fn counting_integers(lo: i64, hi: i64) -> Result<Self> {
        let atoms = (lo..=hi).map(|k| (k as f64, 1.0)).collect();
        Measure::new(atoms, None, (lo as f64 - 0.5, hi as f64 + 0.5))
    }

    pub fn from_spec(spec: &MeasureSpec) -> Result<Self> {
        Measure::new(
            spec.atoms.clone(),
            spec.density.clone(),
            (spec.support_lo, spec.support_hi),
        )
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// `nu([a, b))` for `a <= b`; half-open so that interval masses are
    /// exactly additive under concatenation.
    pub fn interval_mass(&self, a: f64, b: f64) -> Result<f64> {
        if a > b {
            return Err(LabError::InvalidInput("interval endpoints out of order".into()));
        }
        if a < self.support.0 || b > self.support.1 {
            return Err(LabError::WindowOverflow(format!(
                "interval [{a}, {b}) outside declared support [{}, {}]",
                self.support.0, self.support.1
            )));
        }
        let mut total = 0.0;
        for &(p, mass) in &self.atoms {
            if p >= a && p < b {
                total += mass;
            }
        }
        if let Some(d) = &self.density {
            let end = d.start + d.step * d.values.len() as f64;
            let lo = a.max(d.start);
            let hi = b.min(end);
            if lo < hi {
                let first = ((lo - d.start) / d.step).floor() as usize;
                let last = (((hi - d.start) / d.step).ceil() as usize).min(d.values.len());
                for i in first..last {
                    let cell_lo = d.start + d.step * i as f64;
                    let cell_hi = cell_lo + d.step;
                    let overlap = (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0);
                    total += d.values[i] * overlap;
                }
            }
        }
        Ok(total)
    }

    /// Cocycle value `I_r(t) = nu([r, r+t))`, extended to negative times by
    /// the cocycle identity: `I_r(t) = -I_{r+t}(-t)`. Accepts any real `t`
    /// (grid-rational times stay exact on the density grid).
    pub fn cocycle_value(&self, r: f64, t: f64) -> Result<f64> {
        if t >= 0.0 {
            self.interval_mass(r, r + t)
        } else {
            Ok(-self.interval_mass(r + t, r)?)
        }
    }
}

/// Degree-1 cochain `t -> (u -> nu([u + r, u + r + t)))` over the scalar
/// module. The support must cover every probe point drifted by up to
/// `drift_budget` total time, checked here once so the inner closures can
/// evaluate unchecked.
pub fn measure_cocycle(
    module: &PointFunctionModule,
    nu: Rc<Measure>,
    r: f64,
    domain_bound: i64,
    drift_budget: i64,
) -> Result<Cochain<PointFunctionModule>> {
    let probe_max = module
        .probes()
        .iter()
        .fold(0.0f64, |m, p| m.max(p.abs()));
    let reach = probe_max + r.abs() + (domain_bound * (drift_budget + 1)) as f64;
    let (lo, hi) = nu.support();
    if -reach < lo || reach > hi {
        return Err(LabError::WindowOverflow(format!(
            "evaluation reach {reach} exceeds measure support [{lo}, {hi}]"
        )));
    }
    let base = r;
    Cochain::new(
        module.clone(),
        1,
        domain_bound,
        Rc::new(move |args: &[i64]| {
            let t = args[0] as f64;
            let m = Rc::clone(&nu);
            Ok(PointFn(Rc::new(move |u| {
                m.cocycle_value(u + base, t)
                    .expect("measure evaluated outside its declared support")
            })))
        }),
    )
}

/// Degree-`k` cocycle from base points `r_1..r_k`: the iterated cup product of
/// the degree-1 cocycles, which is exactly the nested shift-action product.
pub fn tensor_cocycle(
    module: &PointFunctionModule,
    nu: Rc<Measure>,
    base_points: &[f64],
    domain_bound: i64,
) -> Result<Cochain<PointFunctionModule>> {
    if base_points.is_empty() {
        return Err(LabError::InvalidInput("tensor cocycle needs base points".into()));
    }
    let k = base_points.len() as i64;
    let mut acc = measure_cocycle(module, Rc::clone(&nu), base_points[0], domain_bound, k)?;
    for &r in &base_points[1..] {
        let next = measure_cocycle(module, Rc::clone(&nu), r, domain_bound, k)?;
        acc = cup(&acc, &next)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{coboundary, sampled_residual, ShiftAction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probe_module() -> PointFunctionModule {
        PointFunctionModule::new((0..16).map(|k| -2.0 + 0.27 * k as f64).collect())
    }

    #[test]
    fn counting_measure_counts() {
        let nu = Measure::counting_integers(-100, 100).unwrap();
        assert_eq!(nu.cocycle_value(0.0, 5.0).unwrap(), 5.0);
        assert_eq!(nu.cocycle_value(0.0, -5.0).unwrap(), -5.0);
        // Half-open: the left endpoint is in, the right endpoint is out.
        assert_eq!(nu.interval_mass(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(nu.interval_mass(0.25, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn single_atom_case_analysis() {
        let nu = Measure::new(vec![(0.0, 1.0)], None, (-50.0, 50.0)).unwrap();
        for r in [-3.0f64, -0.5, 0.0, 0.5] {
            for n in 1..5 {
                let want = if r <= 0.0 && 0.0 < r + n as f64 { 1.0 } else { 0.0 };
                assert_eq!(nu.cocycle_value(r, n as f64).unwrap(), want, "r={r} n={n}");
            }
        }
    }

    #[test]
    fn density_interval_masses_exact_on_grid() {
        let d = GridDensity {
            start: -4.0,
            step: 0.5,
            values: vec![1.0; 16],
        };
        let nu = Measure::new(vec![], Some(d), (-50.0, 50.0)).unwrap();
        assert!((nu.interval_mass(-1.0, 3.0).unwrap() - 4.0).abs() < 1e-12);
        // Grid-rational endpoints.
        assert!((nu.interval_mass(-0.5, 1.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cocycle_identity_for_atoms_and_density() {
        let d = GridDensity {
            start: -8.0,
            step: 0.25,
            values: (0..64).map(|k| 0.1 + 0.01 * (k % 7) as f64).collect(),
        };
        let nu = Measure::new(vec![(0.3, 0.7), (-2.0, 1.1)], Some(d), (-200.0, 200.0)).unwrap();
        for r in [-1.5f64, 0.0, 2.25] {
            for m in -5i64..=5 {
                for n in -5i64..=5 {
                    let lhs = nu.cocycle_value(r, (m + n) as f64).unwrap();
                    let rhs = nu.cocycle_value(r, m as f64).unwrap()
                        + nu.cocycle_value(r + m as f64, n as f64).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12, "r={r} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn measure_cocycle_is_a_cocycle() {
        let module = probe_module();
        let nu = Rc::new(
            Measure::new(
                vec![(0.5, 1.0), (-1.0, 0.3)],
                Some(GridDensity {
                    start: -10.0,
                    step: 1.0,
                    values: vec![0.2; 20],
                }),
                (-500.0, 500.0),
            )
            .unwrap(),
        );
        let x = measure_cocycle(&module, nu, 0.7, 8, 3).unwrap();
        let dx = coboundary(&x);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let res = sampled_residual(&dx, &mut rng, 100, 4).unwrap();
        assert!(res < 1e-12, "dI residual {res}");
    }

    #[test]
    fn counting_tensor_cocycle_is_product_of_times() {
        // I_0 cup I_0 for the counting measure evaluates to t1 * t2.
        let module = PointFunctionModule::new(vec![0.0]);
        let nu = Rc::new(Measure::counting_integers(-200, 200).unwrap());
        let x = tensor_cocycle(&module, nu, &[0.0, 0.0], 8).unwrap();
        for t1 in -4i64..=4 {
            for t2 in -4i64..=4 {
                let v = x.eval(&[t1, t2]).unwrap().call(0.0);
                assert!((v - (t1 * t2) as f64).abs() < 1e-12, "t1={t1} t2={t2} v={v}");
            }
        }
    }

    #[test]
    fn cup_of_cocycles_is_a_cocycle() {
        let module = probe_module();
        let nu = Rc::new(
            Measure::new(
                vec![(0.25, 0.5)],
                Some(GridDensity {
                    start: -6.0,
                    step: 0.5,
                    values: vec![0.3; 24],
                }),
                (-500.0, 500.0),
            )
            .unwrap(),
        );
        let x = measure_cocycle(&module, Rc::clone(&nu), 0.0, 6, 4).unwrap();
        let y = measure_cocycle(&module, Rc::clone(&nu), 1.25, 6, 4).unwrap();
        let xy = crate::cohomology::cup(&x, &y).unwrap();
        let dxy = coboundary(&xy);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let res = sampled_residual(&dxy, &mut rng, 100, 3).unwrap();
        assert!(res < 1e-10, "d(x cup y) residual {res}");
    }

    #[test]
    fn out_of_support_evaluation_rejected() {
        let nu = Measure::new(vec![(0.0, 1.0)], None, (-2.0, 2.0)).unwrap();
        assert!(nu.interval_mass(-3.0, 0.0).is_err());
        let module = probe_module();
        // Reach far beyond the support: construction must refuse.
        assert!(measure_cocycle(&module, Rc::new(nu), 0.0, 8, 3).is_err());
    }

    #[test]
    fn scalar_cup_reduces_to_pointwise_product_under_trivial_action() {
        // Constant-in-base-point cochains: the shift action is trivial on
        // them, so cup is the plain product of evaluations.
        let module = PointFunctionModule::new(vec![0.0, 1.0]);
        let x = Cochain::new(
            module.clone(),
            1,
            10,
            Rc::new(|args: &[i64]| Ok(PointFn::constant(args[0] as f64 * 2.0))),
        )
        .unwrap();
        let y = Cochain::new(
            module.clone(),
            1,
            10,
            Rc::new(|args: &[i64]| Ok(PointFn::constant(args[0] as f64 - 1.0))),
        )
        .unwrap();
        let xy = crate::cohomology::cup(&x, &y).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let t1 = rng.gen_range(-5i64..=5);
            let t2 = rng.gen_range(-5i64..=5);
            let got = xy.eval(&[t1, t2]).unwrap().call(0.0);
            let want = (t1 as f64 * 2.0) * (t2 as f64 - 1.0);
            assert_eq!(got, want);
        }
        let _ = module.norm(&PointFn::constant(1.0));
    }
}
