//! Periodic time grid, FFT plumbing, spectral derivatives and the norms used
//! throughout the diagnostics.
//!
//! Transform convention: `û(ω) = Σ u(t_j) e^{-iω(t_j - t_min)}`, so that
//! `∂_t ↔ iω` and `∂_tt ↔ -ω²`. The inverse carries the `1/n` factor.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Uniform periodic time axis `t_j = t_min + j·dt`, `j = 0..n`, with the
/// matching angular-frequency axis in FFT ordering.
#[derive(Clone)]
pub struct TimeGrid {
    n: usize,
    t_min: f64,
    t_max: f64,
    dt: f64,
    t: Vec<f64>,
    omega: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeGrid")
            .field("n", &self.n)
            .field("t_min", &self.t_min)
            .field("t_max", &self.t_max)
            .field("dt", &self.dt)
            .finish()
    }
}

impl TimeGrid {
    pub fn new(n: usize, t_min: f64, t_max: f64) -> Result<Arc<TimeGrid>> {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n.max(1));
        let inv = planner.plan_fft_inverse(n.max(1));
        Self::with_plans(n, t_min, t_max, fwd, inv)
    }

    fn with_plans(
        n: usize,
        t_min: f64,
        t_max: f64,
        fwd: Arc<dyn Fft<f64>>,
        inv: Arc<dyn Fft<f64>>,
    ) -> Result<Arc<TimeGrid>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(t_min.is_finite() && t_max.is_finite()) || t_max <= t_min {
            return Err(Error::InvalidGrid(format!(
                "bounds [{t_min}, {t_max}] must be finite and increasing"
            )));
        }
        let dt = (t_max - t_min) / n as f64;
        let t = (0..n).map(|j| t_min + j as f64 * dt).collect();
        let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
        let omega = (0..n).map(|k| signed_index(k, n) as f64 * dw).collect();
        Ok(Arc::new(TimeGrid {
            n,
            t_min,
            t_max,
            dt,
            t,
            omega,
            fwd,
            inv,
        }))
    }

    /// A grid with the same sample count (and FFT plans) over a new window.
    pub fn rescaled(&self, t_min: f64, t_max: f64) -> Result<Arc<TimeGrid>> {
        Self::with_plans(self.n, t_min, t_max, self.fwd.clone(), self.inv.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn length(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Spacing of the angular-frequency axis, `2π/(n·dt)`.
    pub fn d_omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length()
    }

    /// Largest representable angular frequency, `π/dt`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dt
    }

    /// Grids are interchangeable when they sample the same points.
    pub fn same_as(&self, other: &TimeGrid) -> bool {
        let tol = 1e-12 * self.length().max(1.0);
        self.n == other.n
            && (self.t_min - other.t_min).abs() <= tol
            && (self.t_max - other.t_max).abs() <= tol
    }

    pub fn scratch_len(&self) -> usize {
        self.fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len())
    }

    /// In-place unnormalized forward DFT.
    pub fn fft_in_place(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.fwd.process_with_scratch(buf, scratch);
    }

    /// In-place inverse DFT including the `1/n` normalization.
    pub fn ifft_in_place(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inv.process_with_scratch(buf, scratch);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|x| *x *= s);
    }

    pub fn forward(&self, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse(&self, spectrum: &[C64]) -> Vec<C64> {
        let mut buf = spectrum.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|x| *x *= s);
        buf
    }

    /// `Σ |u_j|² dt`.
    pub fn mass_of(&self, values: &[C64]) -> f64 {
        values.iter().map(|x| x.norm_sqr()).sum::<f64>() * self.dt
    }

    pub fn l2_of(&self, values: &[C64]) -> f64 {
        self.mass_of(values).sqrt()
    }

    /// `∫ a · conj(b) dt` by the (spectrally exact) rectangle rule.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<C64>() * self.dt
    }

    /// Spectral derivative of raw samples; order 1 drops the Nyquist mode,
    /// order 2 keeps it with `ω² = (π/dt)²`.
    pub fn derivative(&self, values: &[C64], order: u32) -> Vec<C64> {
        let mut spec = self.forward(values);
        let half = self.n / 2;
        for (k, (s, &w)) in spec.iter_mut().zip(&self.omega).enumerate() {
            match order {
                1 => {
                    if k == half {
                        *s = C64::new(0.0, 0.0);
                    } else {
                        *s *= C64::new(0.0, w);
                    }
                }
                _ => *s *= -w * w,
            }
        }
        self.inverse(&spec)
    }

    /// Samples of `u(· + shift)` for the band-limited interpolant of `values`.
    pub fn translate(&self, values: &[C64], shift: f64) -> Vec<C64> {
        let mut spec = self.forward(values);
        let half = self.n / 2;
        for (k, (s, &w)) in spec.iter_mut().zip(&self.omega).enumerate() {
            if k == half {
                // Split the Nyquist mode evenly between ±π/dt.
                *s *= (w * shift).cos();
            } else {
                *s *= C64::from_polar(1.0, w * shift);
            }
        }
        self.inverse(&spec)
    }

    /// Evaluate the trigonometric interpolant of `values` at the `m` uniformly
    /// spaced points `x0 + j·step` (chirp-z / Bluestein zoom transform).
    pub fn interpolate_uniform(&self, values: &[C64], x0: f64, step: f64, m: usize) -> Vec<C64> {
        if m == 0 {
            return Vec::new();
        }
        let n = self.n;
        let half = n / 2;
        let spec = self.forward(values);
        let dw = self.d_omega();
        let phi = dw * step;
        let shift = x0 - self.t_min;

        // Coefficients for k = -n/2 ..= n/2, index m_k = k + n/2.
        let count = n + 1;
        let mut a = vec![C64::new(0.0, 0.0); count];
        for (idx, slot) in a.iter_mut().enumerate() {
            let k = idx as i64 - half as i64;
            let c = if k == half as i64 || k == -(half as i64) {
                spec[half] * 0.5
            } else {
                spec[k.rem_euclid(n as i64) as usize]
            };
            *slot = c / n as f64 * C64::from_polar(1.0, k as f64 * dw * shift);
        }

        let len = (count + m - 1).next_power_of_two();
        let mut b = vec![C64::new(0.0, 0.0); len];
        for (idx, &ai) in a.iter().enumerate() {
            let q = (idx * idx) as f64;
            b[idx] = ai * C64::from_polar(1.0, 0.5 * phi * q);
        }
        let mut h = vec![C64::new(0.0, 0.0); len];
        for d in 0..m {
            let q = (d * d) as f64;
            h[d] = C64::from_polar(1.0, -0.5 * phi * q);
        }
        for d in 1..count {
            let q = (d * d) as f64;
            h[len - d] = C64::from_polar(1.0, -0.5 * phi * q);
        }

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        fwd.process(&mut b);
        fwd.process(&mut h);
        for (x, y) in b.iter_mut().zip(&h) {
            *x *= y;
        }
        inv.process(&mut b);
        let norm = 1.0 / len as f64;

        (0..m)
            .map(|j| {
                let jf = j as f64;
                let post = C64::from_polar(1.0, 0.5 * phi * jf * jf - half as f64 * phi * jf);
                b[j] * norm * post
            })
            .collect()
    }
}

fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Complex samples of a field on a [`TimeGrid`] at propagation coordinate `z`.
#[derive(Clone, Debug)]
pub struct Envelope {
    grid: Arc<TimeGrid>,
    values: Vec<C64>,
    z: f64,
}

impl Envelope {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<C64>, z: f64) -> Result<Envelope> {
        if values.len() != grid.n() {
            return Err(Error::InvalidInput(format!(
                "{} samples supplied for a grid of {}",
                values.len(),
                grid.n()
            )));
        }
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        if !z.is_finite() {
            return Err(Error::InvalidInput(format!("z = {z} is not finite")));
        }
        Ok(Envelope { grid, values, z })
    }

    pub fn from_fn(grid: Arc<TimeGrid>, z: f64, f: impl Fn(f64) -> C64) -> Result<Envelope> {
        let values = grid.t().iter().map(|&t| f(t)).collect();
        Envelope::new(grid, values, z)
    }

    pub fn zeros(grid: Arc<TimeGrid>, z: f64) -> Envelope {
        let values = vec![C64::new(0.0, 0.0); grid.n()];
        Envelope { grid, values, z }
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn with_z(mut self, z: f64) -> Envelope {
        self.z = z;
        self
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2(&self) -> f64 {
        self.grid.l2_of(&self.values)
    }

    /// Largest modulus inside the outer `fraction` of the window (half on
    /// each side), relative to the global peak. Zero fields report 0.
    pub fn guard_ratio(&self, fraction: f64) -> f64 {
        let n = self.grid.n();
        let edge = ((fraction.clamp(0.0, 1.0) * n as f64) / 2.0).ceil() as usize;
        let peak = self.sup();
        if peak == 0.0 || edge == 0 {
            return 0.0;
        }
        let lo = self.values[..edge].iter();
        let hi = self.values[n - edge..].iter();
        lo.chain(hi).map(|v| v.norm()).fold(0.0, f64::max) / peak
    }

    /// CSV with header `t,re,im`; floats at 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["t", "re", "im"])?;
        for (t, v) in self.grid.t().iter().zip(&self.values) {
            w.write_record([fmt_f64(*t), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Read a `t,re,im` CSV; the grid is reconstructed from the `t` column,
    /// which must be uniform.
    pub fn read_csv<R: Read>(reader: R, z: f64) -> Result<Envelope> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["t", "re", "im"] {
            return Err(Error::InvalidInput(format!(
                "expected header t,re,im, found {}",
                cols.join(",")
            )));
        }
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad number in CSV: {e}")))
            };
            ts.push(parse(0)?);
            vs.push(C64::new(parse(1)?, parse(2)?));
        }
        if ts.len() < 2 {
            return Err(Error::InvalidInput("envelope CSV needs at least 2 rows".into()));
        }
        let n = ts.len();
        let dt = (ts[n - 1] - ts[0]) / (n - 1) as f64;
        for (j, t) in ts.iter().enumerate() {
            if (t - (ts[0] + j as f64 * dt)).abs() > 1e-9 * dt.abs().max(1e-300) * n as f64 {
                return Err(Error::InvalidInput(format!("t column is not uniform at row {j}")));
            }
        }
        let grid = TimeGrid::new(n, ts[0], ts[0] + n as f64 * dt)?;
        Envelope::new(grid, vs, z)
    }

    pub fn read_csv_path(path: impl AsRef<Path>, z: f64) -> Result<Envelope> {
        let file = std::fs::File::open(path)?;
        Envelope::read_csv(std::io::BufReader::new(file), z)
    }
}

/// Shortest unambiguous text for CSV/JSON output: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Derivative of an envelope, `order ∈ {1, 2}`.
pub fn spectral_derivative(u: &Envelope, order: u32) -> Result<Envelope> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidInput(format!("derivative order {order} not in {{1, 2}}")));
    }
    let d = u.grid.derivative(&u.values, order);
    Envelope::new(u.grid.clone(), d, u.z)
}

/// Norms, weighted norms and conserved functionals of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
    pub sup: f64,
    pub wt2: f64,
    pub wt1d: f64,
    pub mass: f64,
    pub energy: f64,
    pub zhidkov1: f64,
}

/// Compute the [`NormReport`]; `c1` is the coefficient of the quartic term in
/// `energy = ½∫|u_t|² − (c1/4)∫|u|⁴`.
pub fn norms(u: &Envelope, c1: f64) -> NormReport {
    let g = &u.grid;
    let dt = g.dt();
    let ut = g.derivative(&u.values, 1);
    let utt = g.derivative(&u.values, 2);
    let mass = g.mass_of(&u.values);
    let d1 = g.mass_of(&ut);
    let d2 = g.mass_of(&utt);
    let quartic: f64 = u.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * dt;
    let wt2 = (u
        .values
        .iter()
        .zip(g.t())
        .map(|(v, t)| t.powi(4) * v.norm_sqr())
        .sum::<f64>()
        * dt)
        .sqrt();
    let wt1d = (ut
        .iter()
        .zip(g.t())
        .map(|(v, t)| t * t * v.norm_sqr())
        .sum::<f64>()
        * dt)
        .sqrt();
    let sup = u.sup();
    NormReport {
        l2: mass.sqrt(),
        h1: (mass + d1).sqrt(),
        h2: (mass + d1 + d2).sqrt(),
        sup,
        wt2,
        wt1d,
        mass,
        energy: 0.5 * d1 - 0.25 * c1 * quartic,
        zhidkov1: sup + d1.sqrt(),
    }
}
