//! Property tests for the algebraic identities that must hold for *all*
//! inputs, not just the frozen examples.

use std::rc::Rc;

use proptest::prelude::*;

use cocycle_lab::fermion::{CarProcess, FermionWindow, ProcessSymbol};
use cocycle_lab::lattice::{chi, shift, LatticeVector};
use cocycle_lab::linalg::C64;
use cocycle_lab::measure::{GridDensity, Measure};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_preserves_norm_and_inverts(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        m in -8i64..=8,
    ) {
        let half = 16usize;
        let mut v = LatticeVector::zero(half);
        for (i, (re, im)) in amps.iter().enumerate() {
            v.set(i as i64 - 4, C64::new(*re, *im)).unwrap();
        }
        let s = shift(&v, m).unwrap();
        prop_assert!((s.norm() - v.norm()).abs() < 1e-15);
        let back = shift(&s, -m).unwrap();
        prop_assert_eq!(back.sub(&v).unwrap().norm(), 0.0);
    }

    #[test]
    fn chi_cocycle_identity(m in 1i64..12, n in 1i64..12) {
        let half = 32usize;
        let lhs = chi(half, m + n).unwrap();
        let rhs = chi(half, m).unwrap().add(&shift(&chi(half, n).unwrap(), m).unwrap()).unwrap();
        prop_assert_eq!(lhs.sub(&rhs).unwrap().norm(), 0.0);
    }

    #[test]
    fn chi_increment_norm(t in -10i64..=10, s in -10i64..=10) {
        let half = 32usize;
        let d = chi(half, t).unwrap().sub(&chi(half, s).unwrap()).unwrap();
        prop_assert!((d.norm() - ((t - s).abs() as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn measure_cocycle_identity(
        atoms in proptest::collection::vec((-6.0f64..6.0, 0.0f64..2.0), 0..4),
        density_level in 0.0f64..0.5,
        r in -3.0f64..3.0,
        m in -4i64..=4,
        n in -4i64..=4,
    ) {
        let density = GridDensity {
            start: -8.0,
            step: 0.5,
            values: vec![density_level; 32],
        };
        let nu = Measure::new(atoms, Some(density), (-100.0, 100.0)).unwrap();
        let lhs = nu.cocycle_value(r, (m + n) as f64).unwrap();
        let rhs = nu.cocycle_value(r, m as f64).unwrap()
            + nu.cocycle_value(r + m as f64, n as f64).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}

proptest! {
    // The fermion window is comparatively expensive to build; keep the case
    // count small and the window tiny.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn car_additive_cocycle(m in -2i64..=2, n in -2i64..=2) {
        let window = FermionWindow::build(-2, 2).unwrap();
        let process = CarProcess::new(Rc::clone(&window));
        for sym in ProcessSymbol::ALL {
            let s = m + n;
            if !(-2..=2).contains(&s) {
                continue;
            }
            let xn = process.value(sym, n).unwrap();
            let shifted = match window.shift_automorphism(&xn, m) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let lhs = process.value(sym, s).unwrap();
            let rhs = &process.value(sym, m).unwrap().matrix + &shifted.matrix;
            let diff = &lhs.matrix - &rhs;
            let worst = diff.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
            prop_assert_eq!(worst, 0.0);
        }
    }
}
