//! Closed-form solution families and the diagnostics built on them:
//! CW and soliton fields, the modulation-instability relation, the fiber
//! V-parameter, and the linearized operators about the ground state.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Envelope, TimeGrid, C64};
use crate::propagator::{propagate, EquationSpec, Scheme, StepperConfig};

/// First zero of the Bessel function J₀; single-mode cut-off.
pub const SINGLE_MODE_CUTOFF: f64 = 2.405;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CwSpec {
    pub p0: f64,
    pub rho: f64,
}

impl CwSpec {
    pub fn new(p0: f64, rho: f64) -> Result<CwSpec> {
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::InvalidInput(format!("P0 = {p0} must be positive")));
        }
        if rho != 1.0 && rho != -1.0 {
            return Err(Error::InvalidInput(format!("rho = {rho} must be +1 or -1")));
        }
        Ok(CwSpec { p0, rho })
    }

    /// `√P0·e^{iρP0Z}`, the time-homogeneous solution of the SNLSE.
    pub fn value(&self, big_z: f64) -> C64 {
        C64::from_polar(self.p0.sqrt(), self.rho * self.p0 * big_z)
    }

    pub fn envelope(&self, grid: &Arc<TimeGrid>, big_z: f64) -> Envelope {
        let v = self.value(big_z);
        Envelope::new(grid.clone(), vec![v; grid.n()], big_z).expect("CW samples are finite")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProfileConvention {
    /// `√(2θ)/cosh(θT)`: solves the profile ODE only at θ = 1.
    SechTheta,
    /// `√(2θ)·sech(√θ·T)`.
    Corrected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolitonSpec {
    pub theta: f64,
    pub convention: ProfileConvention,
}

impl SolitonSpec {
    pub fn new(theta: f64, convention: ProfileConvention) -> Result<SolitonSpec> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidInput(format!("theta = {theta} must be positive")));
        }
        Ok(SolitonSpec { theta, convention })
    }

    pub fn corrected(theta: f64) -> Result<SolitonSpec> {
        Self::new(theta, ProfileConvention::Corrected)
    }

    /// Non-empty when the chosen convention is known not to solve the ODE.
    pub fn warning(&self) -> Option<String> {
        match self.convention {
            ProfileConvention::SechTheta if self.theta != 1.0 => Some(format!(
                "profile sqrt(2θ)/cosh(θT) does not solve Φ'' − θΦ + Φ³ = 0 for θ = {}",
                self.theta
            )),
            _ => None,
        }
    }

    /// Real profile `Φ(T)`.
    pub fn profile(&self, t: f64) -> f64 {
        let amp = (2.0 * self.theta).sqrt();
        match self.convention {
            ProfileConvention::Corrected => amp * sech(self.theta.sqrt() * t),
            ProfileConvention::SechTheta => amp * sech(self.theta * t),
        }
    }

    /// `Φ'(T)`.
    pub fn profile_derivative(&self, t: f64) -> f64 {
        let k = match self.convention {
            ProfileConvention::Corrected => self.theta.sqrt(),
            ProfileConvention::SechTheta => self.theta,
        };
        -(2.0 * self.theta).sqrt() * k * sech(k * t) * (k * t).tanh()
    }

    /// `Φ(T)·e^{iθZ}`.
    pub fn value(&self, big_z: f64, t: f64) -> C64 {
        C64::from_polar(self.profile(t), self.theta * big_z)
    }

    pub fn envelope(&self, grid: &Arc<TimeGrid>, big_z: f64) -> Envelope {
        Envelope::from_fn(grid.clone(), big_z, |t| self.value(big_z, t))
            .expect("soliton samples are finite")
    }
}

/// `‖Φ'' − θΦ + Φ³‖_{L²}` with a spectral second derivative.
pub fn profile_ode_residual(spec: &SolitonSpec, grid: &TimeGrid) -> f64 {
    let phi: Vec<C64> = grid.t().iter().map(|&t| C64::new(spec.profile(t), 0.0)).collect();
    let d2 = grid.derivative(&phi, 2);
    let r: Vec<C64> = phi
        .iter()
        .zip(&d2)
        .map(|(p, pp)| pp - spec.theta * p + p * p.norm_sqr())
        .collect();
    grid.l2_of(&r)
}

/// `(A1, A2)` with `|Φ| + |Φ'| ≤ A1·e^{−A2|T|}` on the grid; `A2 = √θ` and
/// `A1` is the smallest constant that works at every grid point.
pub fn decay_bound(spec: &SolitonSpec, grid: &TimeGrid) -> Result<(f64, f64)> {
    if spec.convention != ProfileConvention::Corrected {
        return Err(Error::InvalidInput(
            "decay bound is only defined for the corrected profile".into(),
        ));
    }
    let a2 = spec.theta.sqrt();
    let a1 = grid
        .t()
        .iter()
        .map(|&t| (spec.profile(t).abs() + spec.profile_derivative(t).abs()) * (a2 * t.abs()).exp())
        .fold(0.0, f64::max);
    Ok((a1, a2))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiResult {
    pub omega: Vec<f64>,
    pub kappa: Vec<C64>,
    pub gain: Vec<f64>,
    /// `(4γP0/|β2|)^{1/2}`, present only for anomalous dispersion.
    pub band_edge: Option<f64>,
}

/// `κ(ω) = (|ωβ2|/2)·(ω² + sgn(β2)·4γP0/|β2|)^{1/2}`, principal root.
pub fn mi_dispersion(beta2: f64, gamma: f64, p0: f64, omega: &[f64]) -> Result<MiResult> {
    if beta2 == 0.0 || !beta2.is_finite() {
        return Err(Error::InvalidInput("beta2 must be nonzero".into()));
    }
    if !(gamma > 0.0 && p0 > 0.0) {
        return Err(Error::InvalidInput("gamma and P0 must be positive".into()));
    }
    let shift = beta2.signum() * 4.0 * gamma * p0 / beta2.abs();
    let kappa: Vec<C64> = omega
        .iter()
        .map(|&w| (w * beta2).abs() / 2.0 * C64::new(w * w + shift, 0.0).sqrt())
        .collect();
    Ok(MiResult {
        omega: omega.to_vec(),
        gain: kappa.iter().map(|k| k.im.abs()).collect(),
        kappa,
        band_edge: (beta2 < 0.0).then(|| (4.0 * gamma * p0 / beta2.abs()).sqrt()),
    })
}

/// Physical `(β2, γ)` equivalent to the normalized `i Q_Z + Q_TT + ρ|Q|²Q = 0`
/// (up to complex conjugation): `β2 = −2ρ`, `γ = 1`.
pub fn snlse_mi_parameters(rho: f64) -> (f64, f64) {
    (-2.0 * rho, 1.0)
}

/// Settings of the seeded-sideband growth experiment.
#[derive(Clone, Debug)]
pub struct MiExperiment {
    pub p0: f64,
    pub rho: f64,
    pub seed_amplitude: f64,
    /// Frequency resolution; the window is `2π/d_omega`.
    pub d_omega: f64,
    pub n: usize,
    pub z_end: f64,
    pub dz: f64,
    /// Width of the early and late windows used for the growth estimate.
    pub window: f64,
    pub store_every: usize,
}

impl Default for MiExperiment {
    fn default() -> Self {
        MiExperiment {
            p0: 1.0,
            rho: 1.0,
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

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MiMeasurement {
    /// Requested frequency.
    pub omega: f64,
    /// Grid frequency actually seeded.
    pub omega_grid: f64,
    /// Measured exponential rate of the sideband amplitude.
    pub growth: f64,
}

/// Seed `√P0(1 + ε cos ωT)` and measure the growth rate of the `ω` mode:
/// the log-ratio of its peak amplitude in the last and first windows over
/// the distance between the two peaks. One run per frequency, in parallel.
pub fn measure_mi(exp: &MiExperiment, omegas: &[f64]) -> Result<Vec<MiMeasurement>> {
    let cw = CwSpec::new(exp.p0, exp.rho)?;
    if !(exp.d_omega > 0.0) || !(exp.window > 0.0) || 2.0 * exp.window > exp.z_end {
        return Err(Error::InvalidInput(
            "need d_omega > 0 and 0 < 2·window <= z_end".into(),
        ));
    }
    let length = 2.0 * std::f64::consts::PI / exp.d_omega;
    let grid = TimeGrid::new(exp.n, -length / 2.0, length / 2.0)?;
    let eq = EquationSpec::Snlse { rho: exp.rho };
    let cfg = StepperConfig {
        dz: exp.dz,
        scheme: Scheme::Strang,
        store_every: exp.store_every,
        guard_tol: None,
        guard_fraction: 0.25,
    };
    omegas
        .par_iter()
        .map(|&omega| {
            let k = (omega / exp.d_omega).round();
            let bin = k as usize;
            if k < 1.0 || bin >= exp.n / 2 {
                return Err(Error::InvalidInput(format!(
                    "omega = {omega} is not resolvable on this grid"
                )));
            }
            let w = k * exp.d_omega;
            let u0 = Envelope::from_fn(grid.clone(), 0.0, |t| {
                cw.value(0.0) * (1.0 + exp.seed_amplitude * (w * t).cos())
            })?;
            let traj = propagate(&eq, &u0, exp.z_end, &cfg)?;
            let series: Vec<(f64, f64)> = traj
                .snapshots
                .iter()
                .map(|s| (s.z, grid.forward(s.field.values())[bin].norm()))
                .collect();
            let peak = |lo: f64, hi: f64| {
                series
                    .iter()
                    .filter(|(z, _)| *z >= lo - 1e-12 && *z <= hi + 1e-12)
                    .fold((lo, 0.0f64), |best, &(z, a)| if a > best.1 { (z, a) } else { best })
            };
            let early = peak(0.0, exp.window);
            let late = peak(exp.z_end - exp.window, exp.z_end);
            Ok(MiMeasurement {
                omega,
                omega_grid: w,
                growth: (late.1 / early.1).ln() / (late.0 - early.0),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VParameter {
    pub v: f64,
    pub single_mode: bool,
}

/// `V = (2π/λ)·a·√(n1² − n2²)`; single-mode iff `V < 2.405`.
pub fn vparam_single_mode(core_radius: f64, wavelength: f64, n1: f64, n2: f64) -> Result<VParameter> {
    if !(core_radius > 0.0 && wavelength > 0.0 && n2 > 0.0) {
        return Err(Error::InvalidInput(
            "radius, wavelength and n2 must be positive".into(),
        ));
    }
    if !(n1 > n2) {
        return Err(Error::InvalidInput(format!(
            "n1 = {n1} must exceed n2 = {n2} for guidance"
        )));
    }
    let v = 2.0 * std::f64::consts::PI / wavelength * core_radius * (n1 * n1 - n2 * n2).sqrt();
    Ok(VParameter {
        v,
        single_mode: is_single_mode(v),
    })
}

pub fn is_single_mode(v: f64) -> bool {
    v < SINGLE_MODE_CUTOFF
}

/// `L₊ = −∂² + 1 − 3R²` and `L₋ = −∂² + 1 − R²` about `R = √2·sech`.
pub struct LinearizedOps {
    grid: Arc<TimeGrid>,
    r: Vec<f64>,
}

impl LinearizedOps {
    pub fn new(grid: &Arc<TimeGrid>) -> LinearizedOps {
        LinearizedOps {
            grid: grid.clone(),
            r: grid.t().iter().map(|&t| 2f64.sqrt() * sech(t)).collect(),
        }
    }

    pub fn ground_state(&self) -> &[f64] {
        &self.r
    }

    /// `R'` evaluated in closed form.
    pub fn ground_state_derivative(&self) -> Vec<f64> {
        self.grid
            .t()
            .iter()
            .map(|&t| -(2f64.sqrt()) * sech(t) * t.tanh())
            .collect()
    }

    fn apply(&self, v: &[f64], k: f64) -> Vec<f64> {
        let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        let d2 = self.grid.derivative(&c, 2);
        v.iter()
            .zip(&d2)
            .zip(&self.r)
            .map(|((&x, dd), &r)| -dd.re + x - k * r * r * x)
            .collect()
    }

    pub fn l_plus(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v, 3.0)
    }

    pub fn l_minus(&self, v: &[f64]) -> Vec<f64> {
        self.apply(v, 1.0)
    }

    pub fn l2(&self, v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() * self.grid.dt()).sqrt()
    }

    /// `(L₋V, V)`.
    pub fn minus_form(&self, v: &[f64]) -> f64 {
        self.l_minus(v).iter().zip(v).map(|(a, b)| a * b).sum::<f64>() * self.grid.dt()
    }
}

/// A smooth, well-localized random field: a sum of `count` Gaussians with
/// random centres (inner half of the window), widths, amplitudes and phases.
pub fn random_smooth(grid: &Arc<TimeGrid>, seed: u64, count: usize, amplitude: f64) -> Envelope {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = grid.length();
    let mid = 0.5 * (grid.t_min() + grid.t_max());
    let bumps: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                mid + rng.gen_range(-0.125..0.125) * span,
                rng.gen_range(0.75..2.0),
                rng.gen_range(0.2..1.0) * amplitude,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    Envelope::from_fn(grid.clone(), 0.0, |t| {
        bumps
            .iter()
            .map(|&(c, w, a, p)| C64::from_polar(a * (-((t - c) / w).powi(2)).exp(), p))
            .sum()
    })
    .expect("gaussian sums are finite")
}
