//! JSON run configurations. Every block rejects unknown keys; omitted keys
//! take the documented defaults and the resolved values are echoed into the
//! run manifest.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 2048,
            t_min: -40.0,
            t_max: 40.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Lie,
    Strang,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperSection {
    pub dz: f64,
    pub scheme: SchemeName,
    pub store_every: usize,
    /// `null` disables guard-band monitoring.
    pub guard_tol: Option<f64>,
    pub guard_fraction: f64,
}

impl Default for StepperSection {
    fn default() -> Self {
        StepperSection {
            dz: 1e-3,
            scheme: SchemeName::Strang,
            store_every: 1,
            guard_tol: Some(1e-8),
            guard_fraction: 0.25,
        }
    }
}

/// `{"constant": c}`, `{"exponential": {"a": a, "b": b}}` for `a·e^{bz}`, or
/// `{"tabulated": {"z0": .., "dz": .., "values": [..]}}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientConfig {
    Constant(f64),
    Exponential { a: f64, b: f64 },
    Tabulated { z0: f64, dz: f64, values: Vec<f64> },
}

fn zero_coefficient() -> CoefficientConfig {
    CoefficientConfig::Constant(0.0)
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationConfig {
    Nlse {
        c1: f64,
        c2: f64,
    },
    Tnlse {
        c1: f64,
        c2: f64,
    },
    Snlse {
        rho: f64,
    },
    Dimensional {
        alpha: f64,
        beta2: f64,
        gamma: f64,
    },
    General {
        f: CoefficientConfig,
        g: CoefficientConfig,
        #[serde(default = "zero_coefficient")]
        h: CoefficientConfig,
        #[serde(default = "zero_coefficient")]
        v0: CoefficientConfig,
        #[serde(default = "zero_coefficient")]
        v1: CoefficientConfig,
        #[serde(default = "zero_coefficient")]
        v2: CoefficientConfig,
    },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    #[default]
    Corrected,
    SechTheta,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// `Φ_θ(T − shift) + perturbation·e^{−T²}`.
    Soliton {
        #[serde(default = "one")]
        theta: f64,
        #[serde(default)]
        profile: ProfileName,
        #[serde(default)]
        shift: f64,
        #[serde(default)]
        perturbation: f64,
    },
    Cw {
        p0: f64,
        rho: f64,
    },
    /// `amplitude·e^{−((t − center)/width)² + i·chirp·t²}`.
    Gaussian {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// Seeded sum of `count` random Gaussians.
    Random {
        count: usize,
        amplitude: f64,
    },
    /// A `t,re,im` CSV on exactly the configured grid.
    Csv {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    #[serde(default)]
    pub grid: GridConfig,
    pub equation: EquationConfig,
    pub initial: InitialConfig,
    pub z_end: f64,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub seed: u64,
    /// Also report the equation residual at interior snapshots.
    #[serde(default)]
    pub residual: bool,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Standard-frame field `Q(Z)` to the lossy frame.
    Push,
    /// Lossy-frame field `v(z)` to the standard frame.
    Pull,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub input: PathBuf,
    /// Propagation coordinate of the input (`Z` for push, `z` for pull).
    pub z: f64,
    pub direction: Direction,
    #[serde(default = "one")]
    pub c1: f64,
    pub c2: f64,
    #[serde(default = "one")]
    pub rho: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PainleveConfig {
    pub equation: EquationConfig,
    #[serde(default)]
    pub z_min: f64,
    #[serde(default = "one")]
    pub z_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_samples() -> usize {
    65
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl RangeConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + k as f64 * h).collect()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiMeasureConfig {
    pub rho: f64,
    pub omegas: Vec<f64>,
    pub seed_amplitude: f64,
    pub d_omega: f64,
    pub n: usize,
    pub z_end: f64,
    pub dz: f64,
    pub window: f64,
    pub store_every: usize,
}

impl Default for MiMeasureConfig {
    fn default() -> Self {
        MiMeasureConfig {
            rho: 1.0,
            omegas: vec![0.4, 0.7, 1.0, 1.8],
            seed_amplitude: 1e-6,
            d_omega: 0.05,
            n: 1024,
            z_end: 10.0,
            dz: 1e-3,
            window: 4.0,
            store_every: 20,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MiConfig {
    #[serde(default = "one")]
    pub p0: f64,
    #[serde(default = "default_mi_beta2")]
    pub beta2: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    pub omega: RangeConfig,
    /// Optional seeded-sideband simulation of the normalized model.
    #[serde(default)]
    pub measure: Option<MiMeasureConfig>,
}

fn default_mi_beta2() -> f64 {
    -2.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClosenessConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "one")]
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    pub initial: InitialConfig,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "one")]
    pub c_strichartz: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_eps() -> f64 {
    1e-2
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConventionName {
    #[default]
    Consistent,
    ExponentialModes,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseInitial {
    pub a0: f64,
    pub b0: f64,
    pub phi0: f64,
    pub a_z0: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CwNoiseConfig {
    pub alpha: f64,
    pub beta2: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub p0: f64,
    #[serde(default)]
    pub convention: ConventionName,
    pub omegas: Vec<f64>,
    pub z_end: f64,
    #[serde(default = "default_noise_dz")]
    pub dz: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default)]
    pub initial: NoiseInitial,
    #[serde(default = "default_exclusion")]
    pub exclusion_radius: f64,
    #[serde(default = "default_noise_tol")]
    pub tol: f64,
}

fn default_noise_dz() -> f64 {
    1e-3
}

fn default_sample_every() -> usize {
    10
}

fn default_exclusion() -> f64 {
    1e-3
}

fn default_noise_tol() -> f64 {
    1e-6
}

fn orbital_stepper() -> StepperSection {
    StepperSection {
        store_every: 100,
        guard_tol: None,
        ..StepperSection::default()
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalConfig {
    #[serde(default)]
    pub grid: GridConfig,
    /// Soliton parameter of the reference orbit and metric weight.
    #[serde(default = "one")]
    pub theta: f64,
    /// Amplitude of the `e^{−T²}` perturbation of the ground state.
    #[serde(default = "default_eps")]
    pub perturbation: f64,
    #[serde(default = "default_orbital_z")]
    pub z_end: f64,
    #[serde(default = "orbital_stepper")]
    pub stepper: StepperSection,
}

fn default_orbital_z() -> f64 {
    20.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VparamConfig {
    pub core_radius: f64,
    pub wavelength: f64,
    pub n1: f64,
    pub n2: f64,
}
