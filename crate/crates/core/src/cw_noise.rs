//! Linearized CW-plus-noise propagation in a lossy fiber with normal
//! dispersion.
//!
//! For each angular frequency `ω` the spectral perturbation `(A, B)` of the
//! modulus and the phase correction `Φ` obey
//!
//! ```text
//! A_z = (β2/2)ω² B + S(ω)·e^{−αz/2}
//! B_z = −(β2/2)ω² A
//! Φ_z = 2γP0 e^{−αz} A + γP0(√P0/2) e^{−2αz} E(ω) + (β2/2)(√P0/2) e^{−αz} E(ω)
//! ```
//!
//! with `S(ω) = √(P0/2)·ω·e^{−ω²P0/(8π)}` and `E(ω) = e^{−P0ω²/(16π)}`.
//!
//! Two closed forms are provided. [`Convention::Consistent`] solves the
//! system above exactly (oscillatory homogeneous modes).
//! [`Convention::ExponentialModes`] uses real homogeneous modes
//! `e^{±(β2ω²/2)z}`, which belong to the opposite sign in the `B` equation;
//! those forms do not satisfy the system and [`cross_check`] flags them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CwNoiseParams {
    pub alpha: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub p0: f64,
}

impl CwNoiseParams {
    pub fn new(alpha: f64, beta2: f64, gamma: f64, p0: f64) -> Result<CwNoiseParams> {
        let p = CwNoiseParams {
            alpha,
            beta2,
            gamma,
            p0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta2, self.gamma, self.p0];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput(
                "alpha, beta2 (normal dispersion), gamma and P0 must all be positive".into(),
            ));
        }
        Ok(())
    }

    /// Nonlinear phase `φ_NL(z) = γP0(1 − e^{−αz})/α`.
    pub fn phi_nl(&self, z: f64) -> f64 {
        -self.gamma * self.p0 * (-self.alpha * z).exp_m1() / self.alpha
    }

    /// `S(ω) = √(P0/2)·ω·e^{−ω²P0/(8π)}`.
    pub fn forcing(&self, omega: f64) -> f64 {
        (self.p0 / 2.0).sqrt() * omega * (-omega * omega * self.p0 / (8.0 * std::f64::consts::PI)).exp()
    }

    /// `E(ω) = e^{−P0ω²/(16π)}`.
    pub fn phase_gaussian(&self, omega: f64) -> f64 {
        (-self.p0 * omega * omega / (16.0 * std::f64::consts::PI)).exp()
    }

    /// `k = β2ω²/2`.
    pub fn k(&self, omega: f64) -> f64 {
        0.5 * self.beta2 * omega * omega
    }

    /// `±√(α/β2)` and `±√(2α/β2)`, ascending.
    pub fn singular_omegas(&self) -> [f64; 4] {
        let a = (self.alpha / self.beta2).sqrt();
        let b = (2.0 * self.alpha / self.beta2).sqrt();
        [-b, -a, a, b]
    }

    /// Right-hand side of the system at `(z, ω)`.
    pub fn system_rhs(&self, omega: f64, z: f64, y: [f64; 3]) -> [f64; 3] {
        let k = self.k(omega);
        let e = self.phase_gaussian(omega);
        let h = 0.5 * self.p0.sqrt();
        [
            k * y[1] + self.forcing(omega) * (-0.5 * self.alpha * z).exp(),
            -k * y[0],
            2.0 * self.gamma * self.p0 * (-self.alpha * z).exp() * y[0]
                + self.gamma * self.p0 * h * (-2.0 * self.alpha * z).exp() * e
                + 0.5 * self.beta2 * h * (-self.alpha * z).exp() * e,
        ]
    }
}

/// `θ_z = γP0e^{−αz}|1 + c|² + (β2/2)θ_t²`.
pub fn phase_equation_rhs(p: &CwNoiseParams, z: f64, c: C64, theta_t: f64) -> f64 {
    p.gamma * p.p0 * (-p.alpha * z).exp() * (C64::new(1.0, 0.0) + c).norm_sqr()
        + 0.5 * p.beta2 * theta_t * theta_t
}

/// Gaussian ansatz `φ_t² = |c|² = e^{−αz}e^{−4πt²/P0}`.
pub fn gaussian_ansatz(p: &CwNoiseParams, z: f64, t: f64) -> f64 {
    (-p.alpha * z).exp() * (-4.0 * std::f64::consts::PI * t * t / p.p0).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    Consistent,
    ExponentialModes,
}

/// Initial spectra at one frequency. `a_z0` defaults to the value implied
/// by the first equation, `(β2/2)ω²B(0) + S(ω)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct InitialData {
    pub a0: f64,
    pub b0: f64,
    pub phi0: f64,
    pub a_z0: Option<f64>,
}

/// Closed-form `(A, B, Φ)` at one frequency with fitted constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub omega: f64,
    pub convention: Convention,
    /// Particular-solution amplitude of `e^{−αz/2}` in `A`.
    pub particular: f64,
    pub c1: f64,
    pub c2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    params: CwNoiseParams,
}

fn slope_default(p: &CwNoiseParams, omega: f64, init: &InitialData) -> f64 {
    p.k(omega) * init.b0 + p.forcing(omega)
}

/// Fit the closed form at `omega` to `init`.
///
/// The exponential-mode forms are singular at `±√(α/β2)` and `±√(2α/β2)`; inside
/// `exclusion_radius` of those a [`Error::SingularFrequency`] is returned.
pub fn closed_form(
    p: &CwNoiseParams,
    convention: Convention,
    omega: f64,
    init: &InitialData,
    exclusion_radius: f64,
) -> Result<ClosedForm> {
    p.validate()?;
    let k = p.k(omega);
    let s = p.forcing(omega);
    let alpha = p.alpha;
    let implied = slope_default(p, omega, init);
    let a_z0 = init.a_z0.unwrap_or(implied);
    let mut cf = ClosedForm {
        omega,
        convention,
        particular: 0.0,
        c1: 0.0,
        c2: 0.0,
        kappa1: 0.0,
        kappa2: 0.0,
        params: *p,
    };
    match convention {
        Convention::Consistent => {
            if (a_z0 - implied).abs() > 1e-12 * (1.0 + implied.abs()) {
                return Err(Error::InvalidInput(format!(
                    "A_z(0) = {a_z0} contradicts the first equation (expects {implied})"
                )));
            }
            cf.particular = -2.0 * alpha * s / (alpha * alpha + 4.0 * k * k);
            cf.c1 = init.a0 - cf.particular;
            cf.c2 = if k == 0.0 {
                init.b0
            } else {
                init.b0 - 2.0 * k * cf.particular / alpha
            };
        }
        Convention::ExponentialModes => {
            for root in p.singular_omegas() {
                if (omega - root).abs() < exclusion_radius {
                    return Err(Error::SingularFrequency {
                        omega,
                        root,
                        radius: exclusion_radius,
                    });
                }
            }
            let d = 4.0 * k * k - alpha * alpha;
            cf.particular = 2.0 * alpha * s / d;
            if k == 0.0 {
                cf.c1 = init.a0 - cf.particular;
                cf.c2 = 0.0;
            } else {
                let sum = init.a0 - cf.particular;
                let diff = (a_z0 + 0.5 * alpha * cf.particular) / k;
                cf.c1 = 0.5 * (sum - diff);
                cf.c2 = 0.5 * (sum + diff);
            }
        }
    }
    let (_, b_free, phi_free) = cf.eval_free(0.0);
    cf.kappa1 = init.b0 - b_free;
    cf.kappa2 = init.phi0 - phi_free;
    Ok(cf)
}

impl ClosedForm {
    /// `(A, B, Φ)` without the additive constants `κ1`, `κ2`.
    fn eval_free(&self, z: f64) -> (f64, f64, f64) {
        let p = &self.params;
        let (alpha, k) = (p.alpha, p.k(self.omega));
        let gp = p.gamma * p.p0;
        let h = 0.5 * p.p0.sqrt();
        let e = p.phase_gaussian(self.omega);
        let kp = self.particular;
        let decay = (-0.5 * alpha * z).exp();
        match self.convention {
            Convention::Consistent => {
                let (sn, cs) = (k * z).sin_cos();
                let a = kp * decay + self.c1 * cs + self.c2 * sn;
                // B = B0 − k∫A, written so that B(0) is carried by κ1.
                let int_a = kp * (2.0 / alpha) * (1.0 - decay)
                    + if k == 0.0 {
                        self.c1 * z
                    } else {
                        self.c1 / k * sn + self.c2 / k * (1.0 - cs)
                    };
                let b = -k * int_a;
                // ∫₀^z e^{(−α + ik)s} ds.
                let w = C64::new(-alpha, k);
                let osc = ((w * z).exp() - 1.0) / w;
                let phi = 2.0 * gp * (kp * 2.0 / (3.0 * alpha) * (1.0 - (-1.5 * alpha * z).exp())
                    + self.c1 * osc.re
                    + self.c2 * osc.im)
                    + gp * h * e * (1.0 - (-2.0 * alpha * z).exp()) / (2.0 * alpha)
                    + 0.5 * p.beta2 * h * e * (1.0 - (-alpha * z).exp()) / alpha;
                (a, b, phi)
            }
            Convention::ExponentialModes => {
                let bw = p.beta2 * self.omega * self.omega;
                let a = kp * decay + self.c1 * (-k * z).exp() + self.c2 * (k * z).exp();
                let s = p.forcing(self.omega);
                let d = bw * bw - alpha * alpha;
                let b = if k == 0.0 {
                    0.0
                } else {
                    -k * (-4.0 * s / d * decay - 2.0 * self.c1 / bw * (-k * z).exp()
                        + 2.0 * self.c2 / bw * (k * z).exp())
                };
                let phi = 2.0
                    * gp
                    * (-4.0 / 3.0 * s / d * (-1.5 * alpha * z).exp()
                        - 2.0 * self.c1 * (-k * z - alpha * z).exp() / (bw + 2.0 * alpha)
                        + 2.0 * self.c2 * (k * z - alpha * z).exp() / (bw - 2.0 * alpha))
                    - gp / (2.0 * alpha) * h * (-2.0 * alpha * z).exp() * e
                    - p.beta2 / (2.0 * alpha) * h * (-alpha * z).exp() * e;
                (a, b, phi)
            }
        }
    }

    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        let (a, b, phi) = self.eval_free(z);
        (a, b + self.kappa1, phi + self.kappa2)
    }

    /// True when a mode `e^{+(β2ω²/2)z}` is present (exponential-mode forms only).
    pub fn has_growing_mode(&self) -> bool {
        self.convention == Convention::ExponentialModes && self.c2 != 0.0 && self.omega != 0.0
    }
}

/// One frequency of a numerically integrated solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemTrajectory {
    pub omega: f64,
    pub z: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Classical RK4 on the three linear ODEs, independently per frequency.
/// Values are kept every `sample_every` steps (and at `z_end`).
pub fn integrate_system(
    p: &CwNoiseParams,
    z_end: f64,
    omegas: &[f64],
    init: &(dyn Fn(f64) -> InitialData + Sync),
    dz: f64,
    sample_every: usize,
) -> Result<Vec<SystemTrajectory>> {
    p.validate()?;
    if !(z_end >= 0.0 && dz > 0.0) || sample_every == 0 {
        return Err(Error::InvalidInput(
            "need z_end >= 0, dz > 0 and sample_every >= 1".into(),
        ));
    }
    const LIMIT: f64 = 2.5;
    omegas
        .par_iter()
        .map(|&omega| {
            let rate = p.k(omega).max(2.0 * p.alpha).max(2.0 * p.gamma * p.p0);
            if dz * rate > LIMIT {
                return Err(Error::StepSize {
                    dz,
                    rate,
                    limit: LIMIT,
                });
            }
            let d = init(omega);
            let steps = ((z_end / dz) - 1e-9).ceil().max(0.0) as usize;
            let h = if steps == 0 { 0.0 } else { z_end / steps as f64 };
            let mut y = [d.a0, d.b0, d.phi0];
            let mut out = SystemTrajectory {
                omega,
                z: vec![0.0],
                a: vec![y[0]],
                b: vec![y[1]],
                phi: vec![y[2]],
            };
            let f = |z: f64, y: [f64; 3]| p.system_rhs(omega, z, y);
            let add = |y: [f64; 3], k: [f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
            for n in 0..steps {
                let z = n as f64 * h;
                let k1 = f(z, y);
                let k2 = f(z + 0.5 * h, add(y, k1, 0.5 * h));
                let k3 = f(z + 0.5 * h, add(y, k2, 0.5 * h));
                let k4 = f(z + h, add(y, k3, h));
                for i in 0..3 {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Diverged { last_good_z: z });
                }
                if (n + 1) % sample_every == 0 || n + 1 == steps {
                    out.z.push(if n + 1 == steps { z_end } else { (n + 1) as f64 * h });
                    out.a.push(y[0]);
                    out.b.push(y[1]);
                    out.phi.push(y[2]);
                }
            }
            Ok(out)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossCheckEntry {
    pub omega: f64,
    /// Largest error over z, relative to each component's peak magnitude.
    pub max_rel_err: f64,
    pub mismatch: bool,
    /// Set when the closed form could not be evaluated (singular ω).
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheckReport {
    pub convention: Convention,
    pub tol: f64,
    pub entries: Vec<CrossCheckEntry>,
    pub any_mismatch: bool,
}

/// Compare the closed form with the integrated system at every sample.
pub fn cross_check(
    p: &CwNoiseParams,
    convention: Convention,
    trajectories: &[SystemTrajectory],
    init: &(dyn Fn(f64) -> InitialData + Sync),
    exclusion_radius: f64,
    tol: f64,
) -> CrossCheckReport {
    let entries: Vec<CrossCheckEntry> = trajectories
        .par_iter()
        .map(|tr| {
            let cf = match closed_form(p, convention, tr.omega, &init(tr.omega), exclusion_radius) {
                Ok(cf) => cf,
                Err(_) => {
                    return CrossCheckEntry {
                        omega: tr.omega,
                        max_rel_err: f64::INFINITY,
                        mismatch: true,
                        singular: true,
                    }
                }
            };
            let vals: Vec<(f64, f64, f64)> = tr.z.iter().map(|&z| cf.eval(z)).collect();
            let comp = |num: &[f64], pick: fn(&(f64, f64, f64)) -> f64| {
                let scale = num.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let err = num
                    .iter()
                    .zip(&vals)
                    .map(|(x, v)| (pick(v) - x).abs())
                    .fold(0.0f64, f64::max);
                if err == 0.0 {
                    0.0
                } else if scale == 0.0 {
                    f64::INFINITY
                } else {
                    err / scale
                }
            };
            let e = comp(&tr.a, |v| v.0).max(comp(&tr.b, |v| v.1)).max(comp(&tr.phi, |v| v.2));
            CrossCheckEntry {
                omega: tr.omega,
                max_rel_err: e,
                mismatch: !(e <= tol),
                singular: false,
            }
        })
        .collect();
    CrossCheckReport {
        convention,
        tol,
        any_mismatch: entries.iter().any(|e| e.mismatch),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> CwNoiseParams {
        CwNoiseParams::new(0.2, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn phase_equation_examples() {
        let p = params();
        let z = 0.7;
        assert!((phase_equation_rhs(&p, z, C64::new(0.0, 0.0), 0.0) - (-0.2f64 * z).exp()).abs() < 1e-15);
        // Ansatz at the origin: φ_t² = 1, so the dispersive term is β2/2.
        let th = gaussian_ansatz(&p, 0.0, 0.0).sqrt();
        assert!((phase_equation_rhs(&p, 0.0, C64::new(0.0, 0.0), th) - 1.0 - 0.5).abs() < 1e-15);
        // ∫ e^{−4πt²/P0} dt = √P0/2 by trapezoid on a wide grid.
        let h = 1e-3;
        let s: f64 = (-5000..=5000).map(|j| gaussian_ansatz(&p, 0.0, j as f64 * h)).sum::<f64>() * h;
        assert!((s - 0.5).abs() < 1e-12);
        // φ_NL is the integral of the unperturbed rate.
        assert!((p.phi_nl(1.0) - (1.0 - (-0.2f64).exp()) / 0.2).abs() < 1e-15);
    }

    #[test]
    fn exponential_modes_particular_value() {
        let p = params();
        let init = InitialData {
            a0: 0.0,
            b0: 0.0,
            phi0: 0.0,
            a_z0: None,
        };
        let mut cf = closed_form(&p, Convention::ExponentialModes, 1.0, &init, 1e-3).unwrap();
        cf.c1 = 0.0;
        cf.c2 = 0.0;
        cf.kappa1 = 0.0;
        let want = 2.0 * 0.2 * 0.5f64.sqrt() * (-1.0 / (8.0 * std::f64::consts::PI)).exp() / (1.0 - 0.04);
        assert!((cf.eval(0.0).0 - want).abs() < 1e-15);
        // 0.28337 is what a rounded e^{−1/(8π)} ≈ 0.96105 gives; the exact
        // factor is 0.960992 and A = 0.283135.
        assert!((cf.eval(0.0).0 - 0.283135).abs() < 5e-7);
        assert!((cf.eval(0.0).0 - 0.28337).abs() < 3e-4);
    }

    #[test]
    fn zero_frequency_is_homogeneous() {
        let p = params();
        let init = InitialData {
            a0: 0.3,
            b0: -0.1,
            phi0: 0.0,
            a_z0: None,
        };
        for conv in [Convention::ExponentialModes, Convention::Consistent] {
            let cf = closed_form(&p, conv, 0.0, &init, 1e-3).unwrap();
            assert_eq!(cf.particular, 0.0);
            for &z in &[0.0, 1.0, 4.0] {
                let (a, b, _) = cf.eval(z);
                assert!((a - 0.3).abs() < 1e-15 && (b + 0.1).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exponential_modes_solve_their_second_order_equation() {
        let p = params();
        let init = InitialData {
            a0: 0.05,
            b0: 0.02,
            phi0: 0.0,
            a_z0: Some(-0.01),
        };
        for &w in &[0.3, 0.9, 1.3] {
            let cf = closed_form(&p, Convention::ExponentialModes, w, &init, 1e-3).unwrap();
            let k = p.k(w);
            let s = p.forcing(w);
            let h = 1e-2;
            for &z in &[0.5, 2.0, 4.0] {
                let a = |z: f64| cf.eval(z).0;
                let azz = (-a(z + 2.0 * h) + 16.0 * a(z + h) - 30.0 * a(z) + 16.0 * a(z - h) - a(z - 2.0 * h))
                    / (12.0 * h * h);
                let want = k * k * a(z) - 0.5 * p.alpha * s * (-0.5 * p.alpha * z).exp();
                assert!((azz - want).abs() <= 1e-8 * want.abs().max(a(z).abs()), "ω {w} z {z}: {azz} vs {want}, a {}", a(z));
            }
            assert!((cf.eval(0.0).0 - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_set_is_exact() {
        let p = params();
        let s = p.singular_omegas();
        assert_eq!(s[2], 0.2f64.sqrt());
        assert_eq!(s[3], 0.4f64.sqrt());
        assert_eq!(s[0], -s[3]);
        let init = InitialData::default();
        match closed_form(&p, Convention::ExponentialModes, s[1] + 5e-4, &init, 1e-3) {
            Err(Error::SingularFrequency { root, .. }) => assert_eq!(root, s[1]),
            other => panic!("expected singular frequency, got {other:?}"),
        }
        assert!(closed_form(&p, Convention::ExponentialModes, s[1] + 2e-3, &init, 1e-3).is_ok());
        assert!(closed_form(&p, Convention::Consistent, s[1], &init, 1e-3).is_ok());
    }

    #[test]
    fn inconsistent_slope_rejected() {
        let p = params();
        let init = InitialData {
            a_z0: Some(1.0),
            ..Default::default()
        };
        assert!(closed_form(&p, Convention::Consistent, 0.7, &init, 1e-3).is_err());
        assert!(closed_form(&p, Convention::ExponentialModes, 0.7, &init, 1e-3).is_ok());
        assert!(CwNoiseParams::new(0.2, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_data_without_forcing_stays_zero() {
        // P0 → 0 limit: tiny power, zero initial data; all forcing vanishes to
        // within P0-scaled round-off.
        let p = CwNoiseParams::new(0.2, 1.0, 1.0, 1e-300).unwrap();
        let tr = integrate_system(&p, 5.0, &[0.5, 1.0], &|_| InitialData::default(), 1e-2, 10).unwrap();
        for t in &tr {
            assert!(t.a.iter().chain(&t.b).chain(&t.phi).all(|x| x.abs() < 1e-140));
        }
    }

    #[test]
    fn integrated_b_obeys_second_row() {
        let p = params();
        let init = |_: f64| InitialData {
            a0: 0.1,
            b0: 0.0,
            phi0: 0.0,
            a_z0: None,
        };
        let tr = integrate_system(&p, 2.0, &[0.8], &init, 1e-3, 1).unwrap();
        let t = &tr[0];
        let k = p.k(0.8);
        for j in 1..t.z.len() - 1 {
            let bz = (t.b[j + 1] - t.b[j - 1]) / (t.z[j + 1] - t.z[j - 1]);
            assert!((bz + k * t.a[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn step_size_failure_reported() {
        let p = params();
        let r = integrate_system(&p, 1.0, &[10.0], &|_| InitialData::default(), 0.1, 1);
        assert!(matches!(r, Err(Error::StepSize { .. })));
    }

    #[test]
    fn consistent_matches_integration_exponential_modes_do_not() {
        let p = params();
        let omegas = [0.0, 0.15, 0.3, 0.8, 1.0, 1.7, -0.9];
        let init = |w: f64| InitialData {
            a0: 0.01 * w,
            b0: 0.005,
            phi0: 0.1,
            a_z0: None,
        };
        let tr = integrate_system(&p, 5.0, &omegas, &init, 1e-3, 10).unwrap();
        let ok = cross_check(&p, Convention::Consistent, &tr, &init, 1e-3, 1e-6);
        assert!(!ok.any_mismatch, "{:?}", ok.entries);
        let expo = cross_check(&p, Convention::ExponentialModes, &tr, &init, 1e-3, 1e-6);
        assert!(expo.any_mismatch);
    }

    proptest! {
        #[test]
        fn consistent_form_satisfies_system(w in -2.0f64..2.0, z in 0.01f64..5.0, a0 in -1.0f64..1.0, b0 in -1.0f64..1.0) {
            let p = params();
            let init = InitialData { a0, b0, phi0: 0.0, a_z0: None };
            let cf = closed_form(&p, Convention::Consistent, w, &init, 1e-3).unwrap();
            let h = 1e-3;
            let d = |i: usize| {
                let f = |z: f64| { let v = cf.eval(z); [v.0, v.1, v.2][i] };
                (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
            };
            let (a, b, phi) = cf.eval(z);
            let rhs = p.system_rhs(w, z, [a, b, phi]);
            for i in 0..3 {
                prop_assert!((d(i) - rhs[i]).abs() < 1e-8 * (1.0 + rhs[i].abs()));
            }
        }

        #[test]
        fn bounded_without_growing_mode(w in 0.05f64..2.0) {
            let p = params();
            prop_assume!(p.singular_omegas().iter().all(|r| (w - r).abs() > 1e-3));
            let cf = closed_form(&p, Convention::ExponentialModes, w, &InitialData::default(), 1e-3).unwrap();
            let mut bounded = cf;
            bounded.c2 = 0.0;
            prop_assert!(!bounded.has_growing_mode());
            let a0 = bounded.eval(0.0).0.abs();
            let a_far = bounded.eval(50.0).0.abs();
            prop_assert!(a_far <= a0.max(bounded.c1.abs()) + bounded.particular.abs() + 1e-12);
        }
    }
}
