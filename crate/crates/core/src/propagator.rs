//! Split-step Fourier propagation for the NLSE family and the PDE residual
//! used as the oracle for every equation-level claim.
//!
//! Models (all with `∂_tt ↔ −ω²`):
//!
//! * NLSE  — `i u_z + u_tt + c1·e^{−c2 z}|u|²u = 0`
//! * TNLSE — the NLSE plus `(c2²/4)·t²·u`
//! * SNLSE — `i Q_Z + Q_TT + ρ|Q|²Q = 0`
//! * general — `i v_z + f v_tt + g|v|²v + (V0 + V1 t + V2 t²)v + i h v = 0`

use std::sync::Arc;

use serde::Serialize;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::grid::{norms, Envelope, NormReport, TimeGrid, C64};

/// Real coefficient functions of the general non-autonomous equation.
#[derive(Clone, Debug)]
pub struct GeneralCoefficients {
    pub f: Coefficient,
    pub g: Coefficient,
    pub h: Coefficient,
    pub v0: Coefficient,
    pub v1: Coefficient,
    pub v2: Coefficient,
}

impl GeneralCoefficients {
    /// `f`, `g` with no gain and no potential.
    pub fn new(f: Coefficient, g: Coefficient) -> GeneralCoefficients {
        GeneralCoefficients {
            f,
            g,
            h: Coefficient::zero(),
            v0: Coefficient::zero(),
            v1: Coefficient::zero(),
            v2: Coefficient::zero(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum EquationSpec {
    Nlse { c1: f64, c2: f64 },
    Tnlse { c1: f64, c2: f64 },
    Snlse { rho: f64 },
    General(GeneralCoefficients),
}

fn check_sign(name: &str, s: f64) -> Result<()> {
    if s == 1.0 || s == -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} = {s} must be +1 or -1")))
    }
}

impl EquationSpec {
    /// Fiber model in physical units: `f = β2/2`, `g = −γe^{−αz}` and the
    /// integrable potential `V2 = α²/(2β2)`.
    pub fn dimensional_fiber(alpha: f64, beta2: f64, gamma: f64) -> Result<EquationSpec> {
        if beta2 == 0.0 || !(alpha.is_finite() && beta2.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidInput("need finite alpha, gamma and beta2 != 0".into()));
        }
        let mut c = GeneralCoefficients::new(
            Coefficient::Constant(beta2 / 2.0),
            Coefficient::Exponential { a: -gamma, b: -alpha },
        );
        c.v2 = Coefficient::Constant(alpha * alpha / (2.0 * beta2));
        Ok(EquationSpec::General(c))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EquationSpec::Nlse { c1, c2 } | EquationSpec::Tnlse { c1, c2 } => {
                check_sign("c1", *c1)?;
                if !(c2.is_finite() && *c2 > 0.0) {
                    return Err(Error::InvalidInput(format!("c2 = {c2} must be positive")));
                }
                Ok(())
            }
            EquationSpec::Snlse { rho } => check_sign("rho", *rho),
            EquationSpec::General(_) => Ok(()),
        }
    }

    /// The same equation written with explicit coefficient functions.
    pub fn to_general(&self) -> GeneralCoefficients {
        match self {
            EquationSpec::Nlse { c1, c2 } => GeneralCoefficients::new(
                Coefficient::Constant(1.0),
                Coefficient::Exponential { a: *c1, b: -*c2 },
            ),
            EquationSpec::Tnlse { c1, c2 } => {
                let mut c = GeneralCoefficients::new(
                    Coefficient::Constant(1.0),
                    Coefficient::Exponential { a: *c1, b: -*c2 },
                );
                c.v2 = Coefficient::Constant(c2 * c2 / 4.0);
                c
            }
            EquationSpec::Snlse { rho } => {
                GeneralCoefficients::new(Coefficient::Constant(1.0), Coefficient::Constant(*rho))
            }
            EquationSpec::General(c) => c.clone(),
        }
    }

    /// Coefficient of the quartic term in the reported energy functional.
    pub fn energy_coefficient(&self, z: f64) -> f64 {
        match self {
            EquationSpec::Nlse { c1, .. } | EquationSpec::Tnlse { c1, .. } => *c1,
            EquationSpec::Snlse { rho } => *rho,
            EquationSpec::General(c) => c.g.value(z),
        }
    }

    /// `u_z` implied by the equation: `i(f u_tt + g|u|²u + V u) − h u`.
    pub fn rhs(&self, u: &Envelope) -> Vec<C64> {
        let c = self.to_general();
        rhs_general(&c, u.grid(), u.values(), u.z())
    }
}

fn rhs_general(c: &GeneralCoefficients, grid: &TimeGrid, u: &[C64], z: f64) -> Vec<C64> {
    let utt = grid.derivative(u, 2);
    let (f, g, h) = (c.f.value(z), c.g.value(z), c.h.value(z));
    let (v0, v1, v2) = (c.v0.value(z), c.v1.value(z), c.v2.value(z));
    u.iter()
        .zip(&utt)
        .zip(grid.t())
        .map(|((&x, &xtt), &t)| {
            let lin = f * xtt + (g * x.norm_sqr() + v0 + v1 * t + v2 * t * t) * x;
            C64::new(0.0, 1.0) * lin - h * x
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scheme {
    Lie,
    Strang,
}

#[derive(Clone, Debug)]
pub struct StepperConfig {
    pub dz: f64,
    pub scheme: Scheme,
    /// Keep every `store_every`-th step (the final state is always kept).
    pub store_every: usize,
    /// Edge/peak ratio allowed in the guard band; `None` disables monitoring.
    pub guard_tol: Option<f64>,
    /// Fraction of the window (split over both ends) forming the guard band.
    pub guard_fraction: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dz: 1e-3,
            scheme: Scheme::Strang,
            store_every: 1,
            guard_tol: Some(1e-8),
            guard_fraction: 0.25,
        }
    }
}

impl StepperConfig {
    pub fn strang(dz: f64) -> StepperConfig {
        StepperConfig {
            dz,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dz.is_finite() && self.dz > 0.0) {
            return Err(Error::InvalidInput(format!("dz = {} must be positive", self.dz)));
        }
        if self.store_every == 0 {
            return Err(Error::InvalidInput("store_every must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.guard_fraction) {
            return Err(Error::InvalidInput("guard_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub z: f64,
    pub field: Envelope,
    pub norms: NormReport,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// Non-fatal observations (aliasing risk, unmonitored guard band, ...).
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn zs(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.z).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Precomputed pieces of the pointwise (potential + nonlinear) sub-step.
struct Stepper<'a> {
    grid: &'a TimeGrid,
    coef: GeneralCoefficients,
    constant_dispersion: Option<f64>,
    static_potential: bool,
    potential: Vec<f64>,
    lin_cache: Vec<(f64, Vec<C64>)>,
    scratch: Vec<C64>,
}

impl<'a> Stepper<'a> {
    fn new(grid: &'a TimeGrid, coef: GeneralCoefficients) -> Stepper<'a> {
        let constant_dispersion = match coef.f {
            Coefficient::Constant(f) => Some(f),
            _ => None,
        };
        let static_potential = [&coef.v0, &coef.v1, &coef.v2]
            .iter()
            .all(|c| matches!(c, Coefficient::Constant(_)));
        let potential = if static_potential {
            let (v0, v1, v2) = (coef.v0.value(0.0), coef.v1.value(0.0), coef.v2.value(0.0));
            grid.t().iter().map(|t| v0 + v1 * t + v2 * t * t).collect()
        } else {
            Vec::new()
        };
        Stepper {
            grid,
            coef,
            constant_dispersion,
            static_potential,
            potential,
            lin_cache: Vec::new(),
            scratch: vec![C64::new(0.0, 0.0); grid.scratch_len()],
        }
    }

    /// Exact flow of `i u_z + f u_tt = 0` from `za` to `zb`.
    fn linear(&mut self, u: &mut [C64], za: f64, zb: f64) {
        let big_f = match self.constant_dispersion {
            Some(f) => f * (zb - za),
            None => self.coef.f.integral(za, zb),
        };
        let omega = self.grid.omega();
        let factor: &[C64] = if self.constant_dispersion.is_some() {
            let pos = self
                .lin_cache
                .iter()
                .position(|(key, _)| (key - big_f).abs() <= 1e-15 * big_f.abs());
            let pos = match pos {
                Some(p) => p,
                None => {
                    let table = omega
                        .iter()
                        .map(|w| C64::from_polar(1.0, -w * w * big_f))
                        .collect();
                    self.lin_cache.push((big_f, table));
                    self.lin_cache.len() - 1
                }
            };
            &self.lin_cache[pos].1
        } else {
            let table: Vec<C64> = omega
                .iter()
                .map(|w| C64::from_polar(1.0, -w * w * big_f))
                .collect();
            self.lin_cache.clear();
            self.lin_cache.push((big_f, table));
            &self.lin_cache[0].1
        };
        self.grid.fft_in_place(u, &mut self.scratch);
        for (x, f) in u.iter_mut().zip(factor) {
            *x *= f;
        }
        self.grid.ifft_in_place(u, &mut self.scratch);
    }

    /// Exact flow of the pointwise part from `za` to `zb` (exact for the
    /// NLSE/TNLSE/SNLSE coefficient forms, midpoint-based otherwise).
    fn pointwise(&self, u: &mut [C64], za: f64, zb: f64) {
        let c = &self.coef;
        let dz = zb - za;
        let mid = 0.5 * (za + zb);
        let (nl, damp) = if c.h.is_zero() {
            (c.g.integral(za, zb), 1.0)
        } else {
            let h = c.h.value(mid);
            let eff = if (h * dz).abs() < 1e-12 {
                dz
            } else {
                (1.0 - (-2.0 * h * dz).exp()) / (2.0 * h)
            };
            (c.g.value(mid) * eff, (-c.h.integral(za, zb)).exp())
        };
        if self.static_potential {
            for (x, v) in u.iter_mut().zip(&self.potential) {
                let phase = nl * x.norm_sqr() + v * dz;
                *x *= C64::from_polar(damp, phase);
            }
        } else {
            let (i0, i1, i2) = (
                c.v0.integral(za, zb),
                c.v1.integral(za, zb),
                c.v2.integral(za, zb),
            );
            for (x, t) in u.iter_mut().zip(self.grid.t()) {
                let phase = nl * x.norm_sqr() + i0 + i1 * t + i2 * t * t;
                *x *= C64::from_polar(damp, phase);
            }
        }
    }

    fn step(&mut self, u: &mut [C64], z: f64, dz: f64, scheme: Scheme) {
        match scheme {
            Scheme::Lie => {
                self.pointwise(u, z, z + dz);
                self.linear(u, z, z + dz);
            }
            Scheme::Strang => {
                let mid = z + 0.5 * dz;
                self.pointwise(u, z, mid);
                self.linear(u, z, z + dz);
                self.pointwise(u, mid, z + dz);
            }
        }
    }
}

fn rms_width(u: &Envelope) -> Option<f64> {
    let m: f64 = u.values().iter().map(|v| v.norm_sqr()).sum();
    if m == 0.0 {
        return None;
    }
    let mean: f64 = u.values().iter().zip(u.grid().t()).map(|(v, t)| t * v.norm_sqr()).sum::<f64>() / m;
    let var: f64 = u
        .values()
        .iter()
        .zip(u.grid().t())
        .map(|(v, t)| (t - mean).powi(2) * v.norm_sqr())
        .sum::<f64>()
        / m;
    Some(var.sqrt())
}

/// Propagate `u0` from `u0.z()` to `z_end`.
///
/// The step count is `ceil((z_end − z0)/dz)` with the step shrunk uniformly
/// so the last snapshot lands exactly on `z_end`.
pub fn propagate(
    eq: &EquationSpec,
    u0: &Envelope,
    z_end: f64,
    cfg: &StepperConfig,
) -> Result<Trajectory> {
    eq.validate()?;
    cfg.validate()?;
    let z0 = u0.z();
    if !(z_end.is_finite() && z_end >= z0) {
        return Err(Error::InvalidInput(format!(
            "z_end = {z_end} must not precede the initial z = {z0}"
        )));
    }
    let grid: Arc<TimeGrid> = u0.grid().clone();
    let mut traj = Trajectory::default();
    let snapshot = |field: Envelope| {
        let n = norms(&field, eq.energy_coefficient(field.z()));
        Snapshot {
            z: field.z(),
            field,
            norms: n,
        }
    };

    let mut monitor = cfg.guard_tol;
    if let Some(tol) = cfg.guard_tol {
        let r0 = u0.guard_ratio(cfg.guard_fraction);
        if r0 > tol {
            traj.warnings.push(format!(
                "initial field is not localized (guard ratio {r0:.3e}); guard-band monitoring disabled"
            ));
            monitor = None;
        }
    }
    if monitor.is_some() {
        if let Some(w) = rms_width(u0) {
            if grid.length() < 10.0 * w {
                traj.warnings.push(format!(
                    "window {} is narrower than 10x the rms width {w:.4}",
                    grid.length()
                ));
            }
        }
    }
    if let EquationSpec::Tnlse { c2, .. } = eq {
        let tmax = grid.t_min().abs().max(grid.t_max().abs());
        if c2 * c2 / 4.0 * tmax * tmax * cfg.dz >= std::f64::consts::FRAC_PI_4 {
            traj.warnings.push(format!(
                "t² phase per step (c2²/4)·t_max²·dz = {:.3} exceeds π/4; chirp may alias",
                c2 * c2 / 4.0 * tmax * tmax * cfg.dz
            ));
        }
    }

    traj.snapshots.push(snapshot(u0.clone()));
    let span = z_end - z0;
    if span == 0.0 {
        return Ok(traj);
    }
    let steps = ((span / cfg.dz) - 1e-9).ceil().max(1.0) as usize;
    let dz = span / steps as f64;

    let mut stepper = Stepper::new(&grid, eq.to_general());
    let mut u = u0.values().to_vec();
    let mut z = z0;
    for k in 1..=steps {
        stepper.step(&mut u, z, dz, cfg.scheme);
        let z_new = if k == steps { z_end } else { z0 + k as f64 * dz };
        if u.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::Diverged { last_good_z: z });
        }
        z = z_new;
        if k % cfg.store_every == 0 || k == steps {
            let field = Envelope::new(grid.clone(), u.clone(), z)?;
            if let Some(tol) = monitor {
                let ratio = field.guard_ratio(cfg.guard_fraction);
                if ratio > tol {
                    return Err(Error::GuardBreach { z, ratio, tol });
                }
            }
            traj.snapshots.push(snapshot(field));
        }
    }
    Ok(traj)
}

/// One interior point of [`residual`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub z: f64,
    pub l2: f64,
}

/// `‖i u_z + f u_tt + g|u|²u + V u + i h u‖_{L²}` at each interior snapshot,
/// with `u_z` from the (non-uniform) three-point centred stencil.
pub fn residual(eq: &EquationSpec, traj: &Trajectory) -> Result<Vec<ResidualPoint>> {
    let s = &traj.snapshots;
    if s.len() < 3 {
        return Err(Error::TooFewSnapshots {
            need: 3,
            got: s.len(),
        });
    }
    let coef = eq.to_general();
    let grid = s[0].field.grid().clone();
    if s.iter().any(|x| !x.field.grid().same_as(&grid)) {
        return Err(Error::GridMismatch);
    }
    let mut out = Vec::with_capacity(s.len() - 2);
    for k in 1..s.len() - 1 {
        let (za, zb, zc) = (s[k - 1].z, s[k].z, s[k + 1].z);
        let (h1, h2) = (zb - za, zc - zb);
        let wa = -h2 / (h1 * (h1 + h2));
        let wb = (h2 - h1) / (h1 * h2);
        let wc = h1 / (h2 * (h1 + h2));
        let rhs = rhs_general(&coef, &grid, s[k].field.values(), zb);
        let r: Vec<C64> = (0..grid.n())
            .map(|j| {
                let uz = wa * s[k - 1].field.values()[j]
                    + wb * s[k].field.values()[j]
                    + wc * s[k + 1].field.values()[j];
                uz - rhs[j]
            })
            .collect();
        out.push(ResidualPoint {
            z: zb,
            l2: grid.l2_of(&r),
        });
    }
    Ok(out)
}

/// A trajectory built from analytic samples `u(z, t)` at the given `zs`.
pub fn sampled_trajectory(
    grid: &Arc<TimeGrid>,
    eq: &EquationSpec,
    zs: &[f64],
    f: impl Fn(f64, f64) -> C64,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    for &z in zs {
        let field = Envelope::from_fn(grid.clone(), z, |t| f(z, t))?;
        let n = norms(&field, eq.energy_coefficient(z));
        traj.snapshots.push(Snapshot { z, field, norms: n });
    }
    Ok(traj)
}

/// Remove a gain/loss term: if `v` solves the general equation with `h`,
/// then `u = v·exp(+∫₀^z h)` solves the same equation with `h ≡ 0` and the
/// nonlinearity rescaled to `g·exp(−2∫₀^z h)`.
pub fn eliminate_gain(c: &GeneralCoefficients) -> GeneralCoefficients {
    let h = c.h.clone();
    let g = c.g.clone();
    let big_h = {
        let h = h.clone();
        move |z: f64| integrate_from_zero(&h, z)
    };
    let g_new = {
        let g = g.clone();
        let big_h = big_h.clone();
        move |z: f64| g.value(z) * (-2.0 * big_h(z)).exp()
    };
    let dg = {
        let (g, h, big_h) = (g.clone(), h.clone(), big_h.clone());
        move |z: f64| (g.d1(z) - 2.0 * h.value(z) * g.value(z)) * (-2.0 * big_h(z)).exp()
    };
    let d2g = {
        let (g, h, big_h) = (g, h, big_h);
        move |z: f64| {
            let e = (-2.0 * big_h(z)).exp();
            let (gv, g1, g2) = (g.value(z), g.d1(z), g.d2(z));
            let (hv, h1) = (h.value(z), h.d1(z));
            (g2 - 4.0 * hv * g1 - 2.0 * h1 * gv + 4.0 * hv * hv * gv) * e
        }
    };
    GeneralCoefficients {
        f: c.f.clone(),
        g: Coefficient::analytic(g_new, dg, d2g),
        h: Coefficient::zero(),
        v0: c.v0.clone(),
        v1: c.v1.clone(),
        v2: c.v2.clone(),
    }
}

fn integrate_from_zero(c: &Coefficient, z: f64) -> f64 {
    match c {
        Coefficient::Constant(_) | Coefficient::Exponential { .. } => c.integral(0.0, z),
        _ => {
            // Composite Simpson with enough panels for smooth coefficients.
            let panels = 64;
            let h = z / panels as f64;
            (0..panels)
                .map(|k| c.integral(k as f64 * h, (k + 1) as f64 * h))
                .sum()
        }
    }
}
