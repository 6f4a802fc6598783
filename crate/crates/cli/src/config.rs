//! Flat structured-text configuration, one section per suite.

use cocycle_lab::inner::InnerFunctionSpec;
use cocycle_lab::measure::MeasureSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    /// Seed for every randomized sweep; reports are byte-identical per seed.
    pub seed: u64,
    pub shift_cocycles: ShiftCocyclesConfig,
    pub cohomology: CohomologyConfig,
    pub car: CarConfig,
    pub perturbation: PerturbationConfig,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 42,
            shift_cocycles: ShiftCocyclesConfig::default(),
            cohomology: CohomologyConfig::default(),
            car: CarConfig::default(),
            perturbation: PerturbationConfig::default(),
        }
    }
}

/// An inner function together with the spectrum requested for the unitary
/// group on its model space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub inner: InnerFunctionSpec,
    /// Eigenvalue angles (radians) for the model-space unitary; length must
    /// match the Blaschke degree.
    pub spectrum_angles: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftCocyclesConfig {
    pub windows: Vec<usize>,
    pub horizon: i64,
    pub zeta_window: usize,
    pub zeta_horizon: i64,
    pub hs_window: usize,
    pub hs_truncations: Vec<usize>,
    pub limit_columns: usize,
    pub scenarios: Vec<ScenarioConfig>,
}

impl Default for ShiftCocyclesConfig {
    fn default() -> Self {
        ShiftCocyclesConfig {
            windows: vec![64, 128, 256],
            horizon: 3,
            zeta_window: 128,
            zeta_horizon: 40,
            hs_window: 256,
            hs_truncations: vec![8, 16, 32, 64, 128, 256, 512],
            limit_columns: 16,
            scenarios: vec![
                ScenarioConfig {
                    name: "shift".into(),
                    inner: InnerFunctionSpec {
                        phase_angle: 0.0,
                        zeros: vec![(0.0, 0.0)],
                        atoms: vec![],
                    },
                    spectrum_angles: vec![0.7],
                },
                ScenarioConfig {
                    name: "blaschke-half".into(),
                    inner: InnerFunctionSpec {
                        phase_angle: 0.0,
                        zeros: vec![(0.5, 0.0)],
                        atoms: vec![],
                    },
                    spectrum_angles: vec![1.3],
                },
                ScenarioConfig {
                    name: "blaschke-deg2".into(),
                    inner: InnerFunctionSpec {
                        phase_angle: 0.0,
                        zeros: vec![(0.3, 0.0), (0.0, -0.4)],
                        atoms: vec![],
                    },
                    spectrum_angles: vec![0.9, -1.7],
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedMeasure {
    pub name: String,
    pub measure: MeasureSpec,
    pub base_point: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CohomologyConfig {
    pub samples: usize,
    pub time_bound: i64,
    pub probe_count: usize,
    pub probe_span: f64,
    pub lattice_half_width: usize,
    /// Fermion window for operator-valued cochains.
    pub car_lo: i64,
    pub car_hi: i64,
    pub measures: Vec<NamedMeasure>,
}

impl Default for CohomologyConfig {
    fn default() -> Self {
        CohomologyConfig {
            samples: 200,
            time_bound: 4,
            probe_count: 20,
            probe_span: 3.0,
            lattice_half_width: 10,
            car_lo: -1,
            car_hi: 5,
            measures: vec![
                NamedMeasure {
                    name: "counting".into(),
                    measure: MeasureSpec {
                        atoms: (-260..=260).map(|k| (k as f64, 1.0)).collect(),
                        density: None,
                        support_lo: -260.5,
                        support_hi: 260.5,
                    },
                    base_point: 0.0,
                },
                NamedMeasure {
                    name: "atom-plus-density".into(),
                    measure: MeasureSpec {
                        atoms: vec![(0.5, 1.0), (-2.0, 0.4)],
                        density: Some(cocycle_lab::measure::GridDensity {
                            start: -12.0,
                            step: 0.5,
                            values: (0..48).map(|k| 0.1 + 0.02 * (k % 5) as f64).collect(),
                        }),
                        support_lo: -400.0,
                        support_hi: 400.0,
                    },
                    base_point: 0.25,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CarConfig {
    /// Window for the additive-cocycle sweep (covers negative times).
    pub lo: i64,
    pub hi: i64,
    /// Window for the relation sweep (positive times only).
    pub relations_lo: i64,
    pub relations_hi: i64,
}

impl Default for CarConfig {
    fn default() -> Self {
        CarConfig {
            lo: -3,
            hi: 4,
            relations_lo: 1,
            relations_hi: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationConfig {
    pub lo: i64,
    pub hi: i64,
    /// Phase of the diagonal generator, in units of pi.
    pub theta_over_pi: f64,
    /// Site the diagonal generator is localized at (must be <= 0).
    pub generator_site: i64,
    pub depth: i64,
    pub horizon: i64,
    pub samples: usize,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        PerturbationConfig {
            lo: -5,
            hi: 2,
            theta_over_pi: 0.5,
            generator_site: 0,
            depth: 6,
            horizon: 3,
            samples: 40,
        }
    }
}

impl LabConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Apply the `--window` override to the lattice-based suites.
    pub fn override_window(&mut self, window: usize) {
        self.shift_cocycles.windows = vec![window];
        self.shift_cocycles.zeta_window = window;
        self.shift_cocycles.hs_window = window;
        self.shift_cocycles
            .hs_truncations
            .retain(|&t| t <= 2 * window);
        if self.shift_cocycles.zeta_horizon >= (window / 2) as i64 {
            self.shift_cocycles.zeta_horizon = (window / 2) as i64 - 1;
        }
        if self.shift_cocycles.limit_columns + 4 > window {
            self.shift_cocycles.limit_columns = window.saturating_sub(4);
        }
    }
}
