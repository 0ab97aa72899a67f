//! Distance between the lossy NLSE and its integrable (chirped) companion
//! started from the same data, together with the a-priori budget that
//! bounds it.
//!
//! With `Z(z) = (1 − e^{−2c2 z})/(2c2)` and a constant `Ĉ` measured along the
//! run,
//!
//! ```text
//! η(Z, δ) = δ + (8/Ĉ)[(c2/2 + 1)δ + 1](e^{ĈZ/2} − 1) − 4Z
//! H(L)    = (8/Ĉ)(e^{ĈZ(L)/2} − 1) − 4Z(L)
//! G(L, ε) = ε(4/c2)(1 − e^{−c2 L})^{−1}·exp(−(C|c1|/c2)(e^{c2 L} − 1))
//! ```
//!
//! and the Gronwall envelope `(c2²/4)·z·e^{2c2 L}·η(Z(L), δ)·e^{C|c1|z}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Envelope;
use crate::propagator::{propagate, EquationSpec, StepperConfig, Trajectory};
use crate::transform::TransformMap;

/// `‖v − u‖_{L²}`.
pub fn distance(v: &Envelope, u: &Envelope) -> Result<f64> {
    if !v.grid().same_as(u.grid()) {
        return Err(Error::GridMismatch);
    }
    let diff: Vec<_> = v.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
    Ok(v.grid().l2_of(&diff))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosenessBudget {
    pub delta: f64,
    pub eps: f64,
    pub l: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_tilde: f64,
    /// The unspecified constant `C` of the Lipschitz/Strichartz estimate.
    pub c_strichartz: f64,
}

impl ClosenessBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.c2 > 0.0 && self.c_tilde > 0.0 && self.l >= 0.0 && self.delta >= 0.0) {
            return Err(Error::InvalidInput(
                "budget needs c2 > 0, c_tilde > 0, L >= 0, delta >= 0".into(),
            ));
        }
        Ok(())
    }

    /// `Z(z) = (1 − e^{−2c2 z})/(2c2)`.
    pub fn big_z(&self, z: f64) -> f64 {
        -(-2.0 * self.c2 * z).exp_m1() / (2.0 * self.c2)
    }

    pub fn eta(&self, big_z: f64) -> Result<f64> {
        if !(big_z >= 0.0 && big_z < 1.0 / (2.0 * self.c2)) {
            return Err(Error::Domain(format!(
                "Z = {big_z} outside [0, 1/(2c2)) = [0, {})",
                1.0 / (2.0 * self.c2)
            )));
        }
        let c = self.c_tilde;
        Ok(self.delta
            + 8.0 / c * ((self.c2 / 2.0 + 1.0) * self.delta + 1.0) * (0.5 * c * big_z).exp_m1()
            - 4.0 * big_z)
    }

    pub fn h_of(&self, l: f64) -> f64 {
        let zl = self.big_z(l);
        8.0 / self.c_tilde * (0.5 * self.c_tilde * zl).exp_m1() - 4.0 * zl
    }

    pub fn g_of(&self, l: f64, eps: f64) -> f64 {
        let k = self.c_strichartz * self.c1.abs() / self.c2;
        eps * 4.0 / self.c2 / (-(-self.c2 * l).exp_m1()) * (-k * (self.c2 * l).exp_m1()).exp()
    }

    /// δ below which the final bound is `< ε` (reported, not enforced).
    pub fn suggested_delta(&self) -> f64 {
        let zl = self.big_z(self.l);
        let denom = 1.0
            + 8.0 / self.c_tilde * (self.c2.abs() / 2.0 + 1.0) * (0.5 * self.c_tilde * zl).exp_m1();
        (self.g_of(self.l, self.eps) - self.h_of(self.l)) / denom
    }

    /// Bound on `‖t²v(z)‖`: `e^{2c2 z}·η(Z(z), δ)`.
    pub fn wt2_bound(&self, z: f64) -> Result<f64> {
        Ok((2.0 * self.c2 * z).exp() * self.eta(self.big_z(z))?)
    }

    /// Bound on `d(z)` for `z ∈ [0, L]`.
    pub fn gronwall_envelope(&self, z: f64) -> Result<f64> {
        if !(0.0..=self.l * (1.0 + 1e-12)).contains(&z) {
            return Err(Error::Domain(format!("z = {z} outside [0, L = {}]", self.l)));
        }
        let eta_l = self.eta(self.big_z(self.l))?;
        Ok(self.c2 * self.c2 / 4.0
            * z
            * (2.0 * self.c2 * self.l).exp()
            * eta_l
            * (self.c_strichartz * self.c1.abs() * z).exp())
    }
}

#[derive(Clone, Debug)]
pub struct ClosenessOptions {
    pub eps: f64,
    pub c_strichartz: f64,
    /// Use this δ instead of the measured weighted norms of `v0`.
    pub delta: Option<f64>,
}

impl Default for ClosenessOptions {
    fn default() -> Self {
        ClosenessOptions {
            eps: 1e-2,
            c_strichartz: 1.0,
            delta: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosenessPoint {
    pub z: f64,
    pub d: f64,
    pub envelope: f64,
    /// `‖t²v(z)‖`.
    pub wt2: f64,
    pub wt2_bound: f64,
    /// Centred difference of `d`; `None` at the ends.
    pub d_prime: Option<f64>,
    /// `3M²d + (c2²/4)‖t²v‖`.
    pub raw_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosenessReport {
    pub delta_measured: f64,
    pub delta: f64,
    pub wt2_initial: f64,
    pub wt1d_initial: f64,
    pub c_tilde: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub suggested_delta: f64,
    pub budget: ClosenessBudget,
    pub snapshots: Vec<ClosenessPoint>,
    /// Smallest `raw_rhs − d′` over interior snapshots.
    pub raw_min_slack: f64,
    pub raw_ok: bool,
    pub envelope_ok: bool,
    pub wt2_ok: bool,
    pub verdict: String,
    pub warnings: Vec<String>,
}

impl ClosenessReport {
    pub fn max_distance(&self) -> f64 {
        self.snapshots.iter().map(|p| p.d).fold(0.0, f64::max)
    }
}

/// Propagate the chirped (integrable) and the plain lossy equation from `v0`
/// over `[0, L]` concurrently and compare them against the budget.
pub fn run_closeness(
    v0: &Envelope,
    c1: f64,
    c2: f64,
    l: f64,
    cfg: &StepperConfig,
    opts: &ClosenessOptions,
) -> Result<ClosenessReport> {
    if !(l > 0.0) {
        return Err(Error::InvalidInput(format!("L = {l} must be positive")));
    }
    let v0 = v0.clone().with_z(0.0);
    let tn = EquationSpec::Tnlse { c1, c2 };
    let nl = EquationSpec::Nlse { c1, c2 };
    tn.validate()?;
    let (rv, ru) = rayon::join(|| propagate(&tn, &v0, l, cfg), || propagate(&nl, &v0, l, cfg));
    let (tv, tu): (Trajectory, Trajectory) = (rv?, ru?);
    let mut warnings = tv.warnings.clone();
    warnings.extend(tu.warnings.iter().cloned());

    let n0 = &tv.snapshots[0].norms;
    let delta_measured = n0.wt2.max(n0.wt1d);
    let delta = opts.delta.unwrap_or(delta_measured);
    if n0.wt2 > delta || n0.wt1d > delta {
        warnings.push(format!(
            "initial weighted norms ({:.4e}, {:.4e}) exceed delta = {delta:.4e}",
            n0.wt2, n0.wt1d
        ));
    }

    // Ĉ from the standard-equation frame.
    let map = TransformMap::dimensionless(c1, c2, c1)?;
    let mut c_tilde = 0.0f64;
    for s in &tv.snapshots {
        let q = map.pull_refit(&s.field)?;
        let qtt = q.grid().derivative(q.values(), 2);
        c_tilde = c_tilde.max(2.0 * q.grid().l2_of(&qtt)).max(q.sup().powi(2));
    }
    let m = tv
        .snapshots
        .iter()
        .chain(&tu.snapshots)
        .map(|s| s.norms.sup)
        .fold(0.0, f64::max);
    if c_tilde == 0.0 {
        // Zero data: every bound collapses to its δ-free form.
        c_tilde = f64::MIN_POSITIVE.sqrt();
    }
    let budget = ClosenessBudget {
        delta,
        eps: opts.eps,
        l,
        c1,
        c2,
        c_tilde,
        c_strichartz: opts.c_strichartz,
    };
    budget.validate()?;

    if tv.len() != tu.len() {
        return Err(Error::InvalidInput("trajectories are not aligned".into()));
    }
    let d: Vec<f64> = tv
        .snapshots
        .iter()
        .zip(&tu.snapshots)
        .map(|(a, b)| distance(&a.field, &b.field))
        .collect::<Result<_>>()?;
    let zs = tv.zs();
    let mut points = Vec::with_capacity(zs.len());
    let mut raw_min_slack = f64::INFINITY;
    let (mut envelope_ok, mut wt2_ok) = (true, true);
    for k in 0..zs.len() {
        let z = zs[k];
        let wt2 = tv.snapshots[k].norms.wt2;
        let d_prime = (k > 0 && k + 1 < zs.len()).then(|| {
            let (h1, h2) = (z - zs[k - 1], zs[k + 1] - z);
            (-h2 / (h1 * (h1 + h2))) * d[k - 1]
                + ((h2 - h1) / (h1 * h2)) * d[k]
                + (h1 / (h2 * (h1 + h2))) * d[k + 1]
        });
        let raw_rhs = 3.0 * m * m * d[k] + c2 * c2 / 4.0 * wt2;
        if let Some(dp) = d_prime {
            raw_min_slack = raw_min_slack.min(raw_rhs - dp);
        }
        let envelope = budget.gronwall_envelope(z)?;
        let wt2_bound = budget.wt2_bound(z)?;
        if k > 0 && d[k] >= envelope {
            envelope_ok = false;
        }
        if wt2 >= wt2_bound {
            wt2_ok = false;
        }
        points.push(ClosenessPoint {
            z,
            d: d[k],
            envelope,
            wt2,
            wt2_bound,
            d_prime,
            raw_rhs,
        });
    }
    if !raw_min_slack.is_finite() {
        warnings.push("fewer than three snapshots; raw inequality not checked".into());
        raw_min_slack = 0.0;
    }
    let raw_ok = raw_min_slack >= 0.0;
    let verdict = match (raw_ok, envelope_ok, wt2_ok) {
        (true, true, true) => "bound holds".to_string(),
        _ => {
            let mut parts = Vec::new();
            if !raw_ok {
                parts.push("raw differential inequality");
            }
            if !envelope_ok {
                parts.push("Gronwall envelope");
            }
            if !wt2_ok {
                parts.push("weighted-norm bound");
            }
            format!("violated: {}", parts.join(", "))
        }
    };
    Ok(ClosenessReport {
        delta_measured,
        delta,
        wt2_initial: n0.wt2,
        wt1d_initial: n0.wt1d,
        c_tilde,
        m,
        suggested_delta: budget.suggested_delta(),
        budget,
        snapshots: points,
        raw_min_slack,
        raw_ok,
        envelope_ok,
        wt2_ok,
        verdict,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{TimeGrid, C64};
    use proptest::prelude::*;

    fn budget() -> ClosenessBudget {
        ClosenessBudget {
            delta: 0.01,
            eps: 0.01,
            l: 1.0,
            c1: 1.0,
            c2: 0.2,
            c_tilde: 2.0,
            c_strichartz: 1.0,
        }
    }

    #[test]
    fn distance_basics() {
        let g = TimeGrid::new(2048, -40.0, 40.0).unwrap();
        let s = Envelope::from_fn(g.clone(), 0.0, |t| C64::new(2f64.sqrt() / t.cosh(), 0.0)).unwrap();
        let zero = Envelope::zeros(g.clone(), 0.0);
        assert_eq!(distance(&s, &s).unwrap(), 0.0);
        assert!((distance(&zero, &s).unwrap() - 2.0).abs() < 1e-12);
        let other = TimeGrid::new(1024, -40.0, 40.0).unwrap();
        assert!(matches!(distance(&s, &Envelope::zeros(other, 0.0)), Err(Error::GridMismatch)));
    }

    #[test]
    fn eta_values() {
        let b = budget();
        assert_eq!(b.eta(0.0).unwrap(), 0.01);
        let want = 0.01 + 4.0 * (1.1 * 0.01 + 1.0) * (0.5f64.exp() - 1.0) - 2.0;
        assert!((b.eta(0.5).unwrap() - want).abs() < 1e-14);
        assert!((b.eta(0.5).unwrap() - 0.63337).abs() < 1e-4);
        assert!(b.eta(2.5).is_err() && b.eta(-0.1).is_err());
    }

    #[test]
    fn envelope_vanishes_at_origin_and_g_positive() {
        let b = budget();
        assert_eq!(b.gronwall_envelope(0.0).unwrap(), 0.0);
        assert!(b.gronwall_envelope(2.0).is_err());
        for &l in &[1e-3, 0.1, 1.0, 5.0] {
            assert!(b.g_of(l, 0.01) > 0.0);
        }
        // G − H → +∞ as L → 0.
        assert!(b.g_of(1e-6, 0.01) - b.h_of(1e-6) > 1e3);
    }

    #[test]
    fn zero_data_gives_zero_distance() {
        let g = TimeGrid::new(256, -20.0, 20.0).unwrap();
        let cfg = StepperConfig::strang(1e-2);
        let r = run_closeness(&Envelope::zeros(g, 0.0), 1.0, 0.1, 0.5, &cfg, &Default::default()).unwrap();
        assert!(r.snapshots.iter().all(|p| p.d == 0.0));
        assert_eq!(r.delta_measured, 0.0);
    }

    #[test]
    fn vanishing_loss_merges_the_models() {
        let g = TimeGrid::new(512, -30.0, 30.0).unwrap();
        let v0 = Envelope::from_fn(g, 0.0, |t| C64::new(0.05 * (-t * t).exp(), 0.0)).unwrap();
        let cfg = StepperConfig {
            store_every: 50,
            ..StepperConfig::strang(1e-3)
        };
        let r = run_closeness(&v0, 1.0, 1e-6, 1.0, &cfg, &Default::default()).unwrap();
        assert_eq!(r.snapshots[0].d, 0.0);
        assert!(r.max_distance() < 1e-12, "{}", r.max_distance());
    }

    proptest! {
        #[test]
        fn eta_increasing(delta in 0.0f64..1.0, c2 in 0.01f64..1.0, c in 0.01f64..5.0, a in 0.0f64..0.99, b in 0.0f64..0.99) {
            let bud = ClosenessBudget { delta, c2, c_tilde: c, ..budget() };
            let zmax = 1.0 / (2.0 * c2);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(bud.eta(hi * zmax).unwrap() > bud.eta(lo * zmax).unwrap());
        }

        #[test]
        fn distance_is_a_metric(seed in 0u64..1000, phase in 0.0f64..6.3) {
            let g = TimeGrid::new(128, -20.0, 20.0).unwrap();
            let f = |s: u64| crate::solutions::random_smooth(&g, s, 3, 1.0);
            let (a, b, c) = (f(seed), f(seed + 1), f(seed + 2));
            let dab = distance(&a, &b).unwrap();
            prop_assert!((dab - distance(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert!(dab <= distance(&a, &c).unwrap() + distance(&c, &b).unwrap() + 1e-12);
            let rot = |e: &Envelope| {
                let r = C64::from_polar(1.0, phase);
                Envelope::new(g.clone(), e.values().iter().map(|x| x * r).collect(), 0.0).unwrap()
            };
            prop_assert!((distance(&rot(&a), &rot(&b)).unwrap() - dab).abs() < 1e-12);
        }
    }
}
