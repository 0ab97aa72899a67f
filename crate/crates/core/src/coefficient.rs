//! Real coefficient functions of the propagation coordinate `z`, with the
//! first and second derivatives the integrability condition needs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of `z`.
///
/// Analytic variants supply exact derivatives; `Sampled` and `Tabulated`
/// fall back to 4th-order central differences (one-sided at table ends).
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `a·e^{b z}`
    Exponential { a: f64, b: f64 },
    Analytic { f: ScalarFn, df: ScalarFn, d2f: ScalarFn },
    /// A closure without derivatives; differences use step `h`.
    Sampled { f: ScalarFn, h: f64 },
    /// Values on the uniform grid `z0 + k·dz`.
    Tabulated { z0: f64, dz: f64, values: Vec<f64> },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Exponential { a, b } => write!(f, "Exponential({a}·e^({b}z))"),
            Coefficient::Analytic { .. } => write!(f, "Analytic(..)"),
            Coefficient::Sampled { h, .. } => write!(f, "Sampled(h = {h})"),
            Coefficient::Tabulated { z0, dz, values } => {
                write!(f, "Tabulated(z0 = {z0}, dz = {dz}, {} nodes)", values.len())
            }
        }
    }
}

impl Coefficient {
    pub fn zero() -> Coefficient {
        Coefficient::Constant(0.0)
    }

    pub fn analytic(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Coefficient {
        Coefficient::Analytic {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }

    pub fn sampled(f: impl Fn(f64) -> f64 + Send + Sync + 'static, h: f64) -> Coefficient {
        Coefficient::Sampled { f: Arc::new(f), h }
    }

    pub fn tabulated(z0: f64, dz: f64, values: Vec<f64>) -> Result<Coefficient> {
        if values.len() < 5 {
            return Err(Error::InvalidInput(
                "tabulated coefficients need at least 5 nodes".into(),
            ));
        }
        if !(dz > 0.0) || !z0.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("tabulated coefficient is not finite/uniform".into()));
        }
        Ok(Coefficient::Tabulated { z0, dz, values })
    }

    /// True when derivatives come from finite differences of tabulated data.
    pub fn is_tabulated(&self) -> bool {
        matches!(self, Coefficient::Tabulated { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Constant(c) => *c == 0.0,
            Coefficient::Exponential { a, .. } => *a == 0.0,
            Coefficient::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
            _ => false,
        }
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Exponential { a, b } => a * (b * z).exp(),
            Coefficient::Analytic { f, .. } | Coefficient::Sampled { f, .. } => f(z),
            Coefficient::Tabulated { z0, dz, values } => table_interp(*z0, *dz, values, z),
        }
    }

    pub fn d1(&self, z: f64) -> f64 {
        match self {
            Coefficient::Constant(_) => 0.0,
            Coefficient::Exponential { a, b } => a * b * (b * z).exp(),
            Coefficient::Analytic { df, .. } => df(z),
            Coefficient::Sampled { f, h } => {
                let h = *h;
                (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
            }
            Coefficient::Tabulated { z0, dz, values } => {
                let d: Vec<f64> = (0..values.len()).map(|k| node_d1(values, k, *dz)).collect();
                table_interp(*z0, *dz, &d, z)
            }
        }
    }

    pub fn d2(&self, z: f64) -> f64 {
        match self {
            Coefficient::Constant(_) => 0.0,
            Coefficient::Exponential { a, b } => a * b * b * (b * z).exp(),
            Coefficient::Analytic { d2f, .. } => d2f(z),
            Coefficient::Sampled { f, h } => {
                let h = *h;
                (-f(z + 2.0 * h) + 16.0 * f(z + h) - 30.0 * f(z) + 16.0 * f(z - h)
                    - f(z - 2.0 * h))
                    / (12.0 * h * h)
            }
            Coefficient::Tabulated { z0, dz, values } => {
                let d: Vec<f64> = (0..values.len()).map(|k| node_d2(values, k, *dz)).collect();
                table_interp(*z0, *dz, &d, z)
            }
        }
    }

    /// `∫_a^b c(s) ds`: exact for constants and exponentials, Simpson's rule
    /// otherwise (the propagator only integrates over single sub-steps).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => c * (b - a),
            Coefficient::Exponential { a: amp, b: rate } => {
                if *rate == 0.0 {
                    amp * (b - a)
                } else {
                    amp * ((rate * b).exp() - (rate * a).exp()) / rate
                }
            }
            _ => (b - a) / 6.0 * (self.value(a) + 4.0 * self.value(0.5 * (a + b)) + self.value(b)),
        }
    }
}

fn node_d1(v: &[f64], k: usize, h: f64) -> f64 {
    let n = v.len();
    if k >= 2 && k + 2 < n {
        (-v[k + 2] + 8.0 * v[k + 1] - 8.0 * v[k - 1] + v[k - 2]) / (12.0 * h)
    } else if k == 0 {
        (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    } else if k == 1 {
        (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h)
    } else if k == n - 1 {
        -(-25.0 * v[n - 1] + 48.0 * v[n - 2] - 36.0 * v[n - 3] + 16.0 * v[n - 4] - 3.0 * v[n - 5])
            / (12.0 * h)
    } else {
        -(-3.0 * v[n - 1] - 10.0 * v[n - 2] + 18.0 * v[n - 3] - 6.0 * v[n - 4] + v[n - 5])
            / (12.0 * h)
    }
}

fn node_d2(v: &[f64], k: usize, h: f64) -> f64 {
    let n = v.len();
    let h2 = 12.0 * h * h;
    if k >= 2 && k + 2 < n {
        (-v[k + 2] + 16.0 * v[k + 1] - 30.0 * v[k] + 16.0 * v[k - 1] - v[k - 2]) / h2
    } else if k == 0 {
        (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4]) / h2
    } else if k == 1 {
        (11.0 * v[0] - 20.0 * v[1] + 6.0 * v[2] + 4.0 * v[3] - v[4]) / h2
    } else if k == n - 1 {
        (35.0 * v[n - 1] - 104.0 * v[n - 2] + 114.0 * v[n - 3] - 56.0 * v[n - 4] + 11.0 * v[n - 5])
            / h2
    } else {
        (11.0 * v[n - 1] - 20.0 * v[n - 2] + 6.0 * v[n - 3] + 4.0 * v[n - 4] - v[n - 5]) / h2
    }
}

/// Cubic Lagrange interpolation on the four nearest nodes (clamped).
fn table_interp(z0: f64, dz: f64, v: &[f64], z: f64) -> f64 {
    let n = v.len();
    let x = (z - z0) / dz;
    let start = (x.floor() as i64 - 1).clamp(0, n as i64 - 4) as usize;
    let mut acc = 0.0;
    for i in 0..4 {
        let xi = (start + i) as f64;
        let mut w = 1.0;
        for j in 0..4 {
            if j != i {
                let xj = (start + j) as f64;
                w *= (x - xj) / (xi - xj);
            }
        }
        acc += w * v[start + i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_derivatives_and_integral() {
        let c = Coefficient::Exponential { a: 2.0, b: -0.4 };
        let z = 0.7;
        assert!((c.value(z) - 2.0 * (-0.28f64).exp()).abs() < 1e-15);
        assert!((c.d1(z) + 0.8 * (-0.28f64).exp()).abs() < 1e-15);
        assert!((c.d2(z) - 0.32 * (-0.28f64).exp()).abs() < 1e-15);
        let exact = 2.0 * ((-0.4f64 * 1.5).exp() - 1.0) / -0.4;
        assert!((c.integral(0.0, 1.5) - exact).abs() < 1e-14);
    }

    #[test]
    fn sampled_matches_analytic() {
        let s = Coefficient::sampled(|z| (0.3 * z).sin(), 1e-3);
        let z = 0.4;
        assert!((s.d1(z) - 0.3 * (0.12f64).cos()).abs() < 1e-11);
        assert!((s.d2(z) + 0.09 * (0.12f64).sin()).abs() < 1e-7);
    }

    #[test]
    fn tabulated_differences_are_fourth_order() {
        let dz = 0.01;
        let vals: Vec<f64> = (0..201).map(|k| (-0.4 * k as f64 * dz).exp()).collect();
        let c = Coefficient::tabulated(0.0, dz, vals).unwrap();
        for &z in &[0.0, 0.01, 0.5, 1.99, 2.0] {
            let e = (-0.4f64 * z).exp();
            assert!((c.value(z) - e).abs() < 1e-10, "value at {z}");
            assert!((c.d1(z) + 0.4 * e).abs() < 1e-8, "d1 at {z}");
            assert!((c.d2(z) - 0.16 * e).abs() < 1e-5, "d2 at {z}");
        }
    }

    #[test]
    fn short_tables_rejected() {
        assert!(Coefficient::tabulated(0.0, 0.1, vec![1.0; 4]).is_err());
    }
}
