//! Painlevé compatibility condition for the general non-autonomous NLSE
//!
//! `i v_z + f v_tt + g|v|²v + (V0 + V1 t + V2 t²)v + i h v = 0`.
//!
//! The equation passes the test iff `V2` is tied to `f`, `g`, `h` by
//!
//! ```text
//! (4f²g g_z − 2f f_z g²)h − 4f²g²h² − 2f²g²h_z − g²f f_zz + f²g g_zz
//!     − 2f²g_z² + f_z²g² + f_z g f g_z + 4V2 f³g² = 0,
//! ```
//!
//! while `V0` and `V1` stay arbitrary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::{EquationSpec, GeneralCoefficients};

struct Jet {
    f: f64,
    f1: f64,
    f2: f64,
    g: f64,
    g1: f64,
    g2: f64,
    h: f64,
    h1: f64,
}

fn jet(fam: &GeneralCoefficients, z: f64) -> Result<Jet> {
    let j = Jet {
        f: fam.f.value(z),
        f1: fam.f.d1(z),
        f2: fam.f.d2(z),
        g: fam.g.value(z),
        g1: fam.g.d1(z),
        g2: fam.g.d2(z),
        h: fam.h.value(z),
        h1: fam.h.d1(z),
    };
    if j.f == 0.0 || !j.f.is_finite() {
        return Err(Error::SingularCoefficient { which: "f", z });
    }
    if j.g == 0.0 || !j.g.is_finite() {
        return Err(Error::SingularCoefficient { which: "g", z });
    }
    Ok(j)
}

/// Everything in the compatibility relation except the `4V2f³g²` term.
fn relation_without_v2(j: &Jet) -> f64 {
    let (f, f1, f2, g, g1, g2, h, h1) = (j.f, j.f1, j.f2, j.g, j.g1, j.g2, j.h, j.h1);
    (4.0 * f * f * g * g1 - 2.0 * f * f1 * g * g) * h
        - 4.0 * f * f * g * g * h * h
        - 2.0 * f * f * g * g * h1
        - g * g * f * f2
        + f * f * g * g2
        - 2.0 * f * f * g1 * g1
        + f1 * f1 * g * g
        + f1 * g * f * g1
}

/// The `V2(z)` that makes the family integrable at `z`.
pub fn compatibility_v2(fam: &GeneralCoefficients, z: f64) -> Result<f64> {
    let j = jet(fam, z)?;
    Ok(-relation_without_v2(&j) / (4.0 * j.f.powi(3) * j.g * j.g))
}

/// Left-hand side of the compatibility relation for a given `V2`, divided by
/// the scale of its largest term (so `0` means satisfied).
pub fn compatibility_residual(fam: &GeneralCoefficients, v2: f64, z: f64) -> Result<f64> {
    let j = jet(fam, z)?;
    let rest = relation_without_v2(&j);
    let lead = 4.0 * v2 * j.f.powi(3) * j.g * j.g;
    let scale = rest.abs().max(lead.abs());
    Ok(if scale == 0.0 { 0.0 } else { (rest + lead).abs() / scale })
}

#[derive(Clone, Debug)]
pub struct IntegrabilityOptions {
    pub z_min: f64,
    pub z_max: f64,
    pub samples: usize,
    /// `None` picks 1e−8 for analytic and 1e−4 for tabulated coefficients.
    pub tol: Option<f64>,
}

impl Default for IntegrabilityOptions {
    fn default() -> Self {
        IntegrabilityOptions {
            z_min: 0.0,
            z_max: 1.0,
            samples: 65,
            tol: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub max_deviation: f64,
    /// z of the largest deviation.
    pub worst_z: f64,
    pub tol: f64,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Compare the equation's own `V2` against the required one on a uniform
/// sample of `[z_min, z_max]`.
pub fn is_integrable(eq: &EquationSpec, opts: &IntegrabilityOptions) -> Result<IntegrabilityReport> {
    eq.validate()?;
    if !(opts.z_max >= opts.z_min) || opts.samples == 0 {
        return Err(Error::InvalidInput("need z_max >= z_min and samples >= 1".into()));
    }
    let fam = eq.to_general();
    let tabulated = [&fam.f, &fam.g, &fam.h, &fam.v2]
        .iter()
        .any(|c| c.is_tabulated());
    let tol = opts.tol.unwrap_or(if tabulated { 1e-4 } else { 1e-8 });
    let mut worst = (0.0, opts.z_min);
    for k in 0..opts.samples {
        let z = if opts.samples == 1 {
            opts.z_min
        } else {
            opts.z_min + (opts.z_max - opts.z_min) * k as f64 / (opts.samples - 1) as f64
        };
        let need = compatibility_v2(&fam, z)?;
        let dev = relative_gap(fam.v2.value(z), need);
        if dev > worst.0 {
            worst = (dev, z);
        }
    }
    Ok(IntegrabilityReport {
        integrable: worst.0 < tol,
        max_deviation: worst.0,
        worst_z: worst.1,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;
    use proptest::prelude::*;

    #[test]
    fn fiber_family_gives_constant_potential() {
        let (alpha, beta2, gamma) = (0.046, -20.0, 1.3);
        let fam = GeneralCoefficients::new(
            Coefficient::Constant(beta2 / 2.0),
            Coefficient::Exponential { a: -gamma, b: -alpha },
        );
        for &z in &[0.0, 1.0, 17.5] {
            let v2 = compatibility_v2(&fam, z).unwrap();
            assert!((v2 - alpha * alpha / (2.0 * beta2)).abs() < 1e-15);
        }
        let eq = EquationSpec::dimensional_fiber(alpha, beta2, gamma).unwrap();
        assert!(is_integrable(&eq, &Default::default()).unwrap().integrable);
    }

    #[test]
    fn constants_need_no_potential() {
        let fam = GeneralCoefficients::new(Coefficient::Constant(0.7), Coefficient::Constant(-2.0));
        assert_eq!(compatibility_v2(&fam, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn unit_dispersion_exponential_gain() {
        // f = 1, g = e^{-0.4z}: V2 = (2g_z² − g g_zz)/(4g²) = (0.32 − 0.16)/4.
        let fam = GeneralCoefficients::new(
            Coefficient::Constant(1.0),
            Coefficient::Exponential { a: 1.0, b: -0.4 },
        );
        assert!((compatibility_v2(&fam, 0.0).unwrap() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn model_verdicts() {
        let opts = IntegrabilityOptions::default();
        let t = is_integrable(&EquationSpec::Tnlse { c1: 1.0, c2: 0.2 }, &opts).unwrap();
        assert!(t.integrable && t.max_deviation < 1e-15);
        let n = is_integrable(&EquationSpec::Nlse { c1: 1.0, c2: 0.2 }, &opts).unwrap();
        assert!(!n.integrable && (n.max_deviation - 1.0).abs() < 1e-15);
        let s = is_integrable(&EquationSpec::Snlse { rho: -1.0 }, &opts).unwrap();
        assert!(s.integrable && s.max_deviation == 0.0);
    }

    #[test]
    fn vanishing_coefficients_are_singular() {
        let fam = GeneralCoefficients::new(Coefficient::Constant(1.0), Coefficient::analytic(|z| z, |_| 1.0, |_| 0.0));
        assert!(matches!(
            compatibility_v2(&fam, 0.0),
            Err(Error::SingularCoefficient { which: "g", .. })
        ));
        let fam = GeneralCoefficients::new(Coefficient::zero(), Coefficient::Constant(1.0));
        assert!(compatibility_v2(&fam, 0.0).is_err());
    }

    #[test]
    fn tabulated_family_uses_loose_tolerance() {
        let dz = 0.01;
        let g: Vec<f64> = (0..201).map(|k| (-0.2 * k as f64 * dz).exp()).collect();
        let mut fam = GeneralCoefficients::new(
            Coefficient::Constant(1.0),
            Coefficient::tabulated(0.0, dz, g).unwrap(),
        );
        fam.v2 = Coefficient::Constant(0.01);
        let r = is_integrable(&EquationSpec::General(fam), &IntegrabilityOptions { z_max: 2.0, ..Default::default() })
            .unwrap();
        assert_eq!(r.tol, 1e-4);
        assert!(r.integrable, "deviation {}", r.max_deviation);
    }

    #[test]
    fn constant_gain_requires_h_squared() {
        // With the gain removed, g e^{-2hz} requires V2 = h²; the general
        // relation must agree with that directly.
        let h = 0.3;
        let mut fam = GeneralCoefficients::new(Coefficient::Constant(1.0), Coefficient::Constant(2.0));
        fam.h = Coefficient::Constant(h);
        assert!((compatibility_v2(&fam, 0.5).unwrap() - h * h).abs() < 1e-15);
        let clean = crate::propagator::eliminate_gain(&fam);
        assert!((compatibility_v2(&clean, 0.5).unwrap() - h * h).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn solved_potential_satisfies_relation(
            a in 0.2f64..3.0, p in -1.0f64..1.0, b in -2.0f64..2.0, q in -1.0f64..1.0, z in 0.0f64..2.0,
            w in 0.1f64..2.0,
        ) {
            prop_assume!(b.abs() > 0.05);
            let f = Coefficient::analytic(
                move |z| a * (2.0 + (w * z).sin()),
                move |z| a * w * (w * z).cos(),
                move |z| -a * w * w * (w * z).sin(),
            );
            let fam = GeneralCoefficients::new(f, Coefficient::Exponential { a: b, b: p + q });
            let v2 = compatibility_v2(&fam, z).unwrap();
            prop_assert!(compatibility_residual(&fam, v2, z).unwrap() < 1e-10);
        }
    }
}
