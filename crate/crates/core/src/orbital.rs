//! Orbital-stability metrics.
//!
//! The orbit of `Q` is `{Q(· + T0)e^{iΓ}}`; its distance to `Ψ` is
//!
//! ```text
//! d_θ(Ψ, Q) = inf_{T0, Γ} ‖∂_T(Ψ(·+T0)e^{iΓ} − Q)‖² + θ‖Ψ(·+T0)e^{iΓ} − Q‖²
//! ```
//!
//! By Parseval this equals `N(Ψ) + N(Q) − 2 Re(e^{iΓ}C(T0))` with the
//! weighted correlation `C(T0) = Σ (ω² + θ) Ψ̂ conj(Q̂) e^{iωT0}`. The optimal
//! phase is `−arg C` in closed form, every grid shift is scored with one FFT,
//! and the best shift is polished to machine precision.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Envelope, TimeGrid, C64};
use crate::transform::TransformMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitalDistance {
    pub theta_weight: f64,
    pub t0_star: f64,
    /// In `[0, 2π)`.
    pub gamma_star: f64,
    /// The squared-norm infimum, `d_θ²`.
    pub value: f64,
}

impl OrbitalDistance {
    /// `d_θ` itself.
    pub fn distance(&self) -> f64 {
        self.value.sqrt()
    }
}

/// Spectral weights `w_d ω² + w_l` against a grid-periodic correlation.
struct Correlation {
    /// `X_k = (w_d ω_k² + w_l) ψ̂_k conj(q̂_k)`, Nyquist dropped.
    x: Vec<C64>,
    omega: Vec<f64>,
    norm_psi: f64,
    norm_q: f64,
    scale: f64,
}

impl Correlation {
    fn new(grid: &TimeGrid, psi: &[C64], q: &[C64], wd: f64, wl: f64) -> Correlation {
        let n = grid.n();
        let (ps, qs) = (grid.forward(psi), grid.forward(q));
        let scale = grid.dt() / n as f64;
        let mut x = vec![C64::new(0.0, 0.0); n];
        let (mut np, mut nq) = (0.0, 0.0);
        for k in 0..n {
            if k == n / 2 {
                continue;
            }
            let w = grid.omega()[k];
            let wt = wd * w * w + wl;
            x[k] = wt * ps[k] * qs[k].conj();
            np += wt * ps[k].norm_sqr();
            nq += wt * qs[k].norm_sqr();
        }
        Correlation {
            x,
            omega: grid.omega().to_vec(),
            norm_psi: np * scale,
            norm_q: nq * scale,
            scale,
        }
    }

    /// `(C(T0), C'(T0))`.
    fn at(&self, t0: f64) -> (C64, C64) {
        let mut c = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for (x, &w) in self.x.iter().zip(&self.omega) {
            let term = x * C64::from_polar(1.0, w * t0);
            c += term;
            d += term * C64::new(0.0, w);
        }
        (c * self.scale, d * self.scale)
    }

    /// Best shift over all grid translations, then polished.
    fn minimize(&self, grid: &TimeGrid) -> (f64, f64, f64) {
        let n = grid.n();
        let dt = grid.dt();
        // C(m·dt) = scale · Σ X_k e^{2πikm/n}: an unnormalized inverse DFT.
        let corr: Vec<C64> = grid.inverse(&self.x).into_iter().map(|c| c * (n as f64 * self.scale)).collect();
        let (m_best, _) = corr
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |acc, (m, c)| if c.norm() > acc.1 { (m, c.norm()) } else { acc });
        let mut centre = m_best as f64 * dt;
        if m_best > n / 2 {
            centre -= grid.length();
        }
        // The slope of |C|², 2 Re(conj(C) C'), changes sign across the peak.
        let slope = |t: f64| {
            let (c, d) = self.at(t);
            (c.conj() * d).re
        };
        let (mut lo, mut hi) = (centre - dt, centre + dt);
        let t0 = if slope(lo) > 0.0 && slope(hi) < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if slope(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        } else {
            golden_max(|t| self.at(t).0.norm(), lo, hi)
        };
        let (c, _) = self.at(t0);
        let gamma = (-c.arg()).rem_euclid(TAU);
        let value = (self.norm_psi + self.norm_q - 2.0 * c.norm()).max(0.0);
        (t0, gamma % TAU, value)
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

fn check_pair(a: &Envelope, b: &Envelope, theta: f64) -> Result<()> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidInput(format!("theta = {theta} must be positive")));
    }
    Ok(())
}

/// `d_θ(Ψ, O_Q)` with its minimizing shift and phase.
pub fn orbital_distance(psi: &Envelope, q: &Envelope, theta: f64) -> Result<OrbitalDistance> {
    check_pair(psi, q, theta)?;
    let c = Correlation::new(psi.grid(), psi.values(), q.values(), 1.0, theta);
    let (t0_star, gamma_star, value) = c.minimize(psi.grid());
    Ok(OrbitalDistance {
        theta_weight: theta,
        t0_star,
        gamma_star,
        value,
    })
}

/// Transformed metric between two TNLSE-frame fields at a common `z`:
///
/// `e^{2az}‖D(w_s − v)‖² + θ‖w_s − v‖²`, `D f = f_t − 2ib·t·f`,
///
/// minimized over the transformed orbit `w_s`, i.e. shifts and phases of the
/// SNLSE-frame field carried through the map. With `b = c2/4` the operator
/// `D` is the chirp-compensated derivative `f_t − i(c2/2)t f`. Maps with
/// `s`, `amp` ≠ 1 are normalized so the result equals `d_θ` of the pulled
/// fields. The reported shift `t0_star` is in the SNLSE time `T`.
pub fn transformed_orbital_distance(
    w: &Envelope,
    v: &Envelope,
    theta: f64,
    map: &TransformMap,
) -> Result<OrbitalDistance> {
    check_pair(w, v, theta)?;
    if (w.z() - v.z()).abs() > 1e-12 * (1.0 + w.z().abs()) {
        return Err(Error::InvalidInput("fields must be taken at a common z".into()));
    }
    let z = v.z();
    map.forward_coords(z, 0.0)?;
    let grid = v.grid();
    // Removing the chirp turns D into an ordinary derivative and maps the
    // transformed orbit onto plain translations and phases.
    let dechirp = |f: &Envelope| -> Vec<C64> {
        f.values()
            .iter()
            .zip(grid.t())
            .map(|(x, &t)| x * C64::from_polar(1.0, -map.b * t * t))
            .collect()
    };
    let amp2 = map.amp * map.amp;
    let wd = (2.0 * map.a * z).exp() / (amp2 * map.s);
    let wl = theta * map.s / amp2;
    let c = Correlation::new(grid, &dechirp(w), &dechirp(v), wd, wl);
    let (t0, gamma_star, value) = c.minimize(grid);
    Ok(OrbitalDistance {
        theta_weight: theta,
        t0_star: t0 * map.dilation(z),
        gamma_star,
        value,
    })
}

/// `Q = (√P0 + A)e^{i(c + Ω)}` with `c` the mean of the unwrapped phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusPhase {
    pub a: Vec<f64>,
    pub omega: Vec<f64>,
    pub omega_t: Vec<f64>,
    pub reference_phase: f64,
    pub a_h1: f64,
    pub a_sup: f64,
    pub omega_t_l2: f64,
}

impl ModulusPhase {
    /// `‖A‖_{H¹} < √P0/2`, which is enough for `√P0 + A` to stay positive.
    pub fn delta0_gate(&self, p0: f64) -> bool {
        self.a_h1 < 0.5 * p0.sqrt()
    }
}

pub fn modulus_phase(q: &Envelope, p0: f64) -> Result<ModulusPhase> {
    if !(p0.is_finite() && p0 > 0.0) {
        return Err(Error::InvalidInput(format!("P0 = {p0} must be positive")));
    }
    let grid = q.grid();
    let vals = q.values();
    let max = q.sup();
    let (j_min, min) = vals
        .iter()
        .map(|x| x.norm())
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, m)| if m < acc.1 { (j, m) } else { acc });
    if !(max > 0.0) || min < 1e-8 * max {
        return Err(Error::ZeroModulus { t: grid.t()[j_min] });
    }
    let a: Vec<f64> = vals.iter().map(|x| x.norm() - p0.sqrt()).collect();
    let mut phase = Vec::with_capacity(vals.len());
    let mut prev = vals[0].arg();
    phase.push(prev);
    for x in &vals[1..] {
        let raw = x.arg();
        let last = *phase.last().unwrap();
        let step = (raw - prev + PI).rem_euclid(TAU) - PI;
        phase.push(last + step);
        prev = raw;
    }
    let reference_phase = phase.iter().sum::<f64>() / phase.len() as f64;
    let omega: Vec<f64> = phase.iter().map(|p| p - reference_phase).collect();
    let qt = grid.derivative(vals, 1);
    let omega_t: Vec<f64> = vals.iter().zip(&qt).map(|(x, d)| (x.conj() * d).im / x.norm_sqr()).collect();
    let ac: Vec<C64> = a.iter().map(|&x| C64::new(x, 0.0)).collect();
    let at = grid.derivative(&ac, 1);
    let a_h1 = (grid.mass_of(&ac) + grid.mass_of(&at)).sqrt();
    let omega_t_l2 = (omega_t.iter().map(|x| x * x).sum::<f64>() * grid.dt()).sqrt();
    let a_sup = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(ModulusPhase {
        a,
        omega,
        omega_t,
        reference_phase,
        a_h1,
        a_sup,
        omega_t_l2,
    })
}

/// `H(z, τ) = (c2/2)e^{c2 z}(4τ²e^{−2c2 z} + 1)^{1/2} + 1`.
pub fn h_factor(c2: f64, z: f64, tau: f64) -> f64 {
    0.5 * c2 * (c2 * z).exp() * (4.0 * tau * tau * (-2.0 * c2 * z).exp() + 1.0).sqrt() + 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalWindowDistance {
    /// `min_Γ ‖w e^{iΓ} − v‖_{H¹(t0−τ, t0+τ)}`.
    pub value: f64,
    pub gamma: f64,
    /// Initializer supplied by the caller (e.g. `π − Ω(Z, T0)`) and the
    /// norm it achieves.
    pub gamma_initial: f64,
    pub value_at_initial: f64,
    pub h_factor: f64,
}

/// Local H¹ comparison on a window. Derivatives use fourth-order central
/// differences (the fields need not be periodic); the integral is the
/// trapezoid rule with linear end cells. The minimizing phase is
/// `arg⟨v, w⟩_{H¹}`.
#[allow(clippy::too_many_arguments)]
pub fn local_h1_window_distance(
    w: &Envelope,
    v: &Envelope,
    t0: f64,
    tau: f64,
    gamma_initial: f64,
    c2: f64,
    z: f64,
) -> Result<LocalWindowDistance> {
    if !w.grid().same_as(v.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = w.grid();
    let dt = grid.dt();
    let (lo, hi) = (t0 - tau, t0 + tau);
    if !(tau > 0.0) || lo < grid.t_min() + 3.0 * dt || hi > grid.t_max() - 3.0 * dt {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] must lie inside the grid with a 3-point margin"
        )));
    }
    let fd = |f: &[C64], j: usize| (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * dt);
    let (wv, vv) = (w.values(), v.values());
    let t = grid.t();
    // Pointwise (|w|²+|w_t|², |v|²+|v_t|², w·conj v + w_t·conj v_t).
    let point = |j: usize| {
        let (wd, vd) = (fd(wv, j), fd(vv, j));
        (
            wv[j].norm_sqr() + wd.norm_sqr(),
            vv[j].norm_sqr() + vd.norm_sqr(),
            wv[j] * vv[j].conj() + wd * vd.conj(),
        )
    };
    let j_first = ((lo - t[0]) / dt).ceil() as usize;
    let j_last = ((hi - t[0]) / dt).floor() as usize;
    let (mut nw, mut nv, mut cross) = (0.0, 0.0, C64::new(0.0, 0.0));
    let mut add = |j: usize, weight: f64| {
        let (a, b, c) = point(j);
        nw += weight * a;
        nv += weight * b;
        cross += weight * c;
    };
    for j in j_first..j_last {
        add(j, 0.5 * dt);
        add(j + 1, 0.5 * dt);
    }
    // Partial cells at both ends, integrand interpolated linearly.
    let left = t[j_first] - lo;
    let right = hi - t[j_last];
    add(j_first - 1, 0.5 * left * left / dt);
    add(j_first, left - 0.5 * left * left / dt);
    add(j_last, right - 0.5 * right * right / dt);
    add(j_last + 1, 0.5 * right * right / dt);
    let at = |g: f64| (nw + nv - 2.0 * (C64::from_polar(1.0, g) * cross).re).max(0.0).sqrt();
    let gamma = (-cross.arg()).rem_euclid(TAU) % TAU;
    Ok(LocalWindowDistance {
        value: at(gamma),
        gamma,
        gamma_initial,
        value_at_initial: at(gamma_initial),
        h_factor: h_factor(c2, z, tau),
    })
}

/// `E[Q] = ∫ ½|Q_T|² − ¼|Q|⁴ + θ|Q|² dT`.
pub fn lyapunov(q: &Envelope, theta: f64) -> f64 {
    let grid = q.grid();
    let qt = grid.derivative(q.values(), 1);
    q.values()
        .iter()
        .zip(&qt)
        .map(|(x, d)| {
            let m = x.norm_sqr();
            0.5 * d.norm_sqr() - 0.25 * m * m + theta * m
        })
        .sum::<f64>()
        * grid.dt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::SolitonSpec;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn grid() -> Arc<TimeGrid> {
        TimeGrid::new(512, -20.0, 20.0).unwrap()
    }

    fn soliton(g: &Arc<TimeGrid>) -> Envelope {
        SolitonSpec::corrected(1.0).unwrap().envelope(g, 0.0)
    }

    /// H¹_θ distance without minimization.
    fn direct(a: &Envelope, b: &Envelope, theta: f64) -> f64 {
        let g = a.grid();
        let diff: Vec<C64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
        g.mass_of(&g.derivative(&diff, 1)) + theta * g.mass_of(&diff)
    }

    #[test]
    fn orbit_member_has_zero_distance() {
        let g = grid();
        let q = soliton(&g);
        let d = orbital_distance(&q, &q, 1.0).unwrap();
        assert!(d.value < 1e-12);
        assert!(d.t0_star.abs() < 1e-10);
        assert!(d.gamma_star.min(TAU - d.gamma_star) < 1e-10);
    }

    #[test]
    fn recovers_shift_and_phase() {
        let g = grid();
        let q = soliton(&g);
        let s = 3.7 * g.dt();
        let gam = 1.2;
        let spec = SolitonSpec::corrected(1.0).unwrap();
        let psi = Envelope::from_fn(g.clone(), 0.0, |t| spec.value(0.0, t + s) * C64::from_polar(1.0, gam)).unwrap();
        let d = orbital_distance(&psi, &q, 1.0).unwrap();
        assert!(d.value < 1e-8, "{}", d.value);
        assert!((d.t0_star + s).abs() < g.dt() / 10.0);
        assert!((d.gamma_star - (-gam).rem_euclid(TAU)).abs() < 1e-6);
    }

    #[test]
    fn perturbation_bounded_by_unshifted_candidate() {
        let g = grid();
        let q = soliton(&g);
        let psi = Envelope::from_fn(g.clone(), 0.0, |t| q_at(t) + 0.01 * (-t * t).exp()).unwrap();
        fn q_at(t: f64) -> C64 {
            SolitonSpec::corrected(1.0).unwrap().value(0.0, t)
        }
        let theta = 1.0;
        let d = orbital_distance(&psi, &q, theta).unwrap();
        assert!(d.value > 0.0);
        let cand = direct(&psi, &q, theta);
        assert!(d.value <= cand * (1.0 + 1e-10));
        let pert = Envelope::from_fn(g.clone(), 0.0, |t| C64::new(0.01 * (-t * t).exp(), 0.0)).unwrap();
        let h1 = g.mass_of(pert.values()) + g.mass_of(&g.derivative(pert.values(), 1));
        assert!(d.value <= (1.0 + theta) * h1);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = soliton(&grid());
        let b = soliton(&TimeGrid::new(256, -20.0, 20.0).unwrap());
        assert!(orbital_distance(&a, &b, 1.0).is_err());
        assert!(orbital_distance(&a, &a, 0.0).is_err());
    }

    #[test]
    fn transformed_metric_equals_pulled_metric() {
        let map = TransformMap::dimensionless(1.0, 0.2, 1.0).unwrap();
        let spec = SolitonSpec::corrected(1.0).unwrap();
        for &z in &[0.0, 0.7] {
            let gq = TimeGrid::new(512, -20.0, 20.0).unwrap();
            let big_z = map.big_z(z);
            let q = spec.envelope(&gq, big_z);
            let qw = Envelope::from_fn(gq.clone(), big_z, |t| {
                spec.value(big_z, t - 0.3) * (1.0 + 0.05 * (-(t * t)).exp()) * C64::from_polar(1.0, 0.4)
            })
            .unwrap();
            let v = map.push_refit(&q).unwrap();
            let w = map.push_refit(&qw).unwrap();
            let td = transformed_orbital_distance(&w, &v, 1.0, &map).unwrap();
            let d = orbital_distance(&map.pull_refit(&w).unwrap(), &map.pull_refit(&v).unwrap(), 1.0).unwrap();
            assert!((td.value - d.value).abs() < 1e-10 * (1.0 + d.value), "z {z}: {} vs {}", td.value, d.value);
            assert!((td.t0_star - d.t0_star).abs() < 1e-8);
            assert!(transformed_orbital_distance(&v, &v, 1.0, &map).unwrap().value < 1e-12);
        }
    }

    #[test]
    fn modulus_phase_constant_and_constructed() {
        let p0 = 2.0f64;
        let g = TimeGrid::new(1024, -10.0 * PI, 10.0 * PI).unwrap();
        let cw = Envelope::from_fn(g.clone(), 0.0, |_| C64::from_polar(p0.sqrt(), 0.3)).unwrap();
        let mp = modulus_phase(&cw, p0).unwrap();
        assert!(mp.a.iter().all(|x| x.abs() < 1e-14));
        assert!(mp.omega_t.iter().all(|x| x.abs() < 1e-12));
        assert!((mp.reference_phase - 0.3).abs() < 1e-14);

        let q = Envelope::from_fn(g.clone(), 0.0, |t| {
            C64::from_polar(p0.sqrt() + 0.01 * t.cos(), 0.02 * t.sin())
        })
        .unwrap();
        let mp = modulus_phase(&q, p0).unwrap();
        for (j, &t) in g.t().iter().enumerate() {
            assert!((mp.a[j] - 0.01 * t.cos()).abs() < 1e-10);
            assert!((mp.omega[j] - 0.02 * t.sin()).abs() < 1e-10);
            assert!((mp.omega_t[j] - 0.02 * t.cos()).abs() < 1e-10);
        }
        // ‖0.02 cos‖² over 10 periods = 0.0004·10π.
        assert!((mp.omega_t_l2 - (0.0004 * 10.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn modulus_phase_unwraps_and_rejects_zero() {
        let g = TimeGrid::new(512, -10.0, 10.0).unwrap();
        let q = Envelope::from_fn(g.clone(), 0.0, |t| C64::from_polar(1.0, 2.0 * t)).unwrap();
        let mp = modulus_phase(&q, 1.0).unwrap();
        let span = mp.omega.last().unwrap() - mp.omega[0];
        assert!((span - 2.0 * (g.t()[511] - g.t()[0])).abs() < 1e-9);
        let z = Envelope::from_fn(g.clone(), 0.0, |t| C64::new(t.sin(), 0.0)).unwrap();
        assert!(matches!(modulus_phase(&z, 1.0), Err(Error::ZeroModulus { .. })));
    }

    #[test]
    fn h_factor_example() {
        assert!((h_factor(0.2, 0.0, 1.0) - (0.1 * 5f64.sqrt() + 1.0)).abs() < 1e-15);
        assert!((h_factor(0.2, 0.0, 1.0) - 1.22361).abs() < 1e-5);
    }

    #[test]
    fn local_window_identity_and_phase() {
        let g = TimeGrid::new(1024, -20.0, 20.0).unwrap();
        let v = Envelope::from_fn(g.clone(), 0.0, |t| C64::from_polar(1.0 + 0.1 * t.cos(), 0.05 * t * t)).unwrap();
        let r = local_h1_window_distance(&v, &v, 0.3, 2.0, 0.0, 0.2, 0.0).unwrap();
        assert!(r.value < 1e-7 && r.gamma.min(TAU - r.gamma) < 1e-12);
        let w = Envelope::from_fn(g.clone(), 0.0, |t| {
            C64::from_polar(1.0 + 0.1 * t.cos(), 0.05 * t * t - 0.8)
        })
        .unwrap();
        let r = local_h1_window_distance(&w, &v, 0.3, 2.0, PI, 0.2, 0.0).unwrap();
        assert!(r.value < 1e-7);
        assert!((r.gamma - 0.8).abs() < 1e-12);
        assert!(r.value_at_initial > r.value);
        assert!(local_h1_window_distance(&w, &v, 19.0, 2.0, 0.0, 0.2, 0.0).is_err());
    }

    #[test]
    fn local_window_quadrature() {
        // ‖1‖²_{H¹(a,b)} = b − a for a constant, independent of alignment.
        let g = TimeGrid::new(1024, -10.0, 10.0).unwrap();
        let one = Envelope::from_fn(g.clone(), 0.0, |_| C64::new(1.0, 0.0)).unwrap();
        let zero = Envelope::zeros(g.clone(), 0.0);
        let r = local_h1_window_distance(&one, &zero, 0.0137, 3.3, 0.0, 0.2, 0.0).unwrap();
        assert!((r.value * r.value - 6.6).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_of_ground_state() {
        // For R = √2 sech T: ∫|R'|² = 4/3, ∫|R|⁴ = 16/3, ∫|R|² = 4.
        let g = TimeGrid::new(1024, -30.0, 30.0).unwrap();
        let e = lyapunov(&soliton(&g), 1.0);
        assert!((e - (2.0 / 3.0 - 4.0 / 3.0 + 4.0)).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn invariant_under_joint_symmetry(s in -3.0f64..3.0, gam in 0.0f64..6.0, eps in 0.0f64..0.1) {
            let g = grid();
            let spec = SolitonSpec::corrected(1.0).unwrap();
            let psi_f = |t: f64| spec.value(0.0, t) + eps * (-(t - 0.5) * (t - 0.5)).exp();
            let psi = Envelope::from_fn(g.clone(), 0.0, psi_f).unwrap();
            let q = soliton(&g);
            let rot = C64::from_polar(1.0, gam);
            let psi2 = Envelope::from_fn(g.clone(), 0.0, |t| psi_f(t + s) * rot).unwrap();
            let q2 = Envelope::from_fn(g.clone(), 0.0, |t| spec.value(0.0, t + s) * rot).unwrap();
            let a = orbital_distance(&psi, &q, 1.0).unwrap().value;
            let b = orbital_distance(&psi2, &q2, 1.0).unwrap().value;
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
        }

        #[test]
        fn delta0_gate_implies_positive_modulus(c in proptest::collection::vec(-0.3f64..0.3, 4)) {
            let p0 = 1.0;
            let g = TimeGrid::new(512, -10.0 * PI, 10.0 * PI).unwrap();
            let q = Envelope::from_fn(g.clone(), 0.0, |t| {
                let a = c[0] * (0.5 * t).cos() + c[1] * (0.2 * t).sin() + c[2] * (-(t * t)).exp() + c[3] * (t).cos();
                C64::new(1.0 + a, 0.0)
            }).unwrap();
            if let Ok(mp) = modulus_phase(&q, p0) {
                if mp.delta0_gate(p0) {
                    prop_assert!(mp.a_sup < 0.5);
                }
            }
        }
    }
}
