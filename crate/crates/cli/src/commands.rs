//! One function per subcommand. Each one builds and validates every library
//! object from its config before any computation starts, then fills the
//! artifact set.

use std::sync::Arc;

use anyhow::{bail, Result};
use fiberlab::closeness::{run_closeness, ClosenessOptions};
use fiberlab::cw_noise::{closed_form, cross_check, integrate_system, Convention, CwNoiseParams, InitialData};
use fiberlab::orbital::{lyapunov, orbital_distance};
use fiberlab::painleve::{compatibility_v2, is_integrable, IntegrabilityOptions};
use fiberlab::propagator::ResidualPoint;
use fiberlab::solutions::{
    measure_mi, mi_dispersion, random_smooth, snlse_mi_parameters, vparam_single_mode, CwSpec, MiExperiment,
    ProfileConvention, SolitonSpec, SINGLE_MODE_CUTOFF,
};
use fiberlab::transform::{ledger_row, LedgerRow, TransformMap};
use fiberlab::{
    propagate, residual, Coefficient, Envelope, EquationSpec, Error, GeneralCoefficients, NormReport, Scheme,
    StepperConfig, TimeGrid, C64,
};
use serde::Serialize;

use crate::config::*;
use crate::output::{csv_table, Artifacts};

pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn warn(&self, msg: &str) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    pub fn info(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn build_grid(g: &GridConfig) -> Result<Arc<TimeGrid>> {
    Ok(TimeGrid::new(g.n, g.t_min, g.t_max)?)
}

fn build_stepper(s: &StepperSection) -> Result<StepperConfig> {
    let cfg = StepperConfig {
        dz: s.dz,
        scheme: match s.scheme {
            SchemeName::Lie => Scheme::Lie,
            SchemeName::Strang => Scheme::Strang,
        },
        store_every: s.store_every,
        guard_tol: s.guard_tol,
        guard_fraction: s.guard_fraction,
    };
    cfg.validate()?;
    if let Some(tol) = s.guard_tol {
        if !(tol > 0.0) {
            return Err(invalid("guard_tol must be positive or null").into());
        }
    }
    Ok(cfg)
}

fn build_coefficient(c: &CoefficientConfig) -> Result<Coefficient> {
    Ok(match c {
        CoefficientConfig::Constant(v) => {
            if !v.is_finite() {
                return Err(invalid("coefficient constant must be finite").into());
            }
            Coefficient::Constant(*v)
        }
        CoefficientConfig::Exponential { a, b } => {
            if !(a.is_finite() && b.is_finite()) {
                return Err(invalid("exponential coefficient must be finite").into());
            }
            Coefficient::Exponential { a: *a, b: *b }
        }
        CoefficientConfig::Tabulated { z0, dz, values } => Coefficient::tabulated(*z0, *dz, values.clone())?,
    })
}

fn build_equation(e: &EquationConfig) -> Result<EquationSpec> {
    let eq = match e {
        EquationConfig::Nlse { c1, c2 } => EquationSpec::Nlse { c1: *c1, c2: *c2 },
        EquationConfig::Tnlse { c1, c2 } => EquationSpec::Tnlse { c1: *c1, c2: *c2 },
        EquationConfig::Snlse { rho } => EquationSpec::Snlse { rho: *rho },
        EquationConfig::Dimensional { alpha, beta2, gamma } => EquationSpec::dimensional_fiber(*alpha, *beta2, *gamma)?,
        EquationConfig::General { f, g, h, v0, v1, v2 } => EquationSpec::General(GeneralCoefficients {
            f: build_coefficient(f)?,
            g: build_coefficient(g)?,
            h: build_coefficient(h)?,
            v0: build_coefficient(v0)?,
            v1: build_coefficient(v1)?,
            v2: build_coefficient(v2)?,
        }),
    };
    eq.validate()?;
    Ok(eq)
}

fn build_initial(i: &InitialConfig, grid: &Arc<TimeGrid>, seed: u64, log: &Log) -> Result<Envelope> {
    let env = match i {
        InitialConfig::Soliton {
            theta,
            profile,
            shift,
            perturbation,
        } => {
            let conv = match profile {
                ProfileName::Corrected => ProfileConvention::Corrected,
                ProfileName::SechTheta => ProfileConvention::SechTheta,
            };
            let spec = SolitonSpec::new(*theta, conv)?;
            if let Some(w) = spec.warning() {
                log.warn(&w);
            }
            Envelope::from_fn(grid.clone(), 0.0, |t| {
                spec.value(0.0, t - shift) + perturbation * (-t * t).exp()
            })?
        }
        InitialConfig::Cw { p0, rho } => CwSpec::new(*p0, *rho)?.envelope(grid, 0.0),
        InitialConfig::Gaussian {
            amplitude,
            width,
            center,
            chirp,
        } => {
            if !(*width > 0.0) {
                return Err(invalid("gaussian width must be positive").into());
            }
            Envelope::from_fn(grid.clone(), 0.0, |t| {
                C64::from_polar(amplitude * (-((t - center) / width).powi(2)).exp(), chirp * t * t)
            })?
        }
        InitialConfig::Random { count, amplitude } => {
            if *count == 0 || !amplitude.is_finite() {
                return Err(invalid("random initial data needs count >= 1 and a finite amplitude").into());
            }
            random_smooth(grid, seed, *count, *amplitude)
        }
        InitialConfig::Csv { path } => {
            let u = Envelope::read_csv_path(path, 0.0)?;
            let g = u.grid();
            let tol = 1e-9 * grid.dt();
            if g.n() != grid.n() || (g.t_min() - grid.t_min()).abs() > tol || (g.t_max() - grid.t_max()).abs() > tol {
                return Err(invalid(format!(
                    "{} holds {} points on [{}, {}), expected the configured grid",
                    path.display(),
                    g.n(),
                    g.t_min(),
                    g.t_max()
                ))
                .into());
            }
            Envelope::new(grid.clone(), u.into_values(), 0.0)?
        }
    };
    Ok(env)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!(invalid(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

fn envelope_csv(u: &Envelope) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    u.write_csv(&mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct PropagateIndex<'a> {
    z: Vec<f64>,
    files: Vec<String>,
    norms: Vec<NormReport>,
    warnings: &'a [String],
    residual: Option<Vec<ResidualPoint>>,
    config: &'a PropagateConfig,
}

pub fn propagate_cmd(cfg: &PropagateConfig, art: &mut Artifacts, log: &Log) -> Result<()> {
    let grid = build_grid(&cfg.grid)?;
    let eq = build_equation(&cfg.equation)?;
    let stepper = build_stepper(&cfg.stepper)?;
    if !(cfg.z_end.is_finite() && cfg.z_end >= 0.0) {
        bail!(invalid("z_end must be finite and non-negative"));
    }
    let u0 = build_initial(&cfg.initial, &grid, cfg.seed, log)?;

    let traj = propagate(&eq, &u0, cfg.z_end, &stepper)?;
    for w in &traj.warnings {
        log.warn(w);
    }
    let res = if cfg.residual { Some(residual(&eq, &traj)?) } else { None };
    let mut files = Vec::with_capacity(traj.len());
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshots/snapshot_{k:05}.csv");
        art.add(name.clone(), envelope_csv(&s.field)?);
        files.push(name);
    }
    let index = PropagateIndex {
        z: traj.zs(),
        files,
        norms: traj.snapshots.iter().map(|s| s.norms).collect(),
        warnings: &traj.warnings,
        residual: res,
        config: cfg,
    };
    art.add_json("index.json", &index)?;
    Ok(())
}

#[derive(Serialize)]
struct TransformReport {
    direction: Direction,
    input_z: f64,
    output_z: f64,
    output_grid: GridConfig,
    ledger: LedgerRow,
}

pub fn transform_cmd(cfg: &TransformConfig, art: &mut Artifacts, _log: &Log) -> Result<()> {
    let map = TransformMap::scaled(cfg.c1, cfg.c2, cfg.rho)?;
    let input = Envelope::read_csv_path(&cfg.input, cfg.z)?;
    let (out, ledger) = match cfg.direction {
        Direction::Push => {
            let v = map.push_refit(&input)?;
            let row = ledger_row(&map, &v, &input);
            (v, row)
        }
        Direction::Pull => {
            let q = map.pull_refit(&input)?;
            let row = ledger_row(&map, &input, &q);
            (q, row)
        }
    };
    art.add("field.csv", envelope_csv(&out)?);
    let g = out.grid();
    art.add_json(
        "ledger.json",
        &TransformReport {
            direction: cfg.direction,
            input_z: cfg.z,
            output_z: out.z(),
            output_grid: GridConfig {
                n: g.n(),
                t_min: g.t_min(),
                t_max: g.t_max(),
            },
            ledger,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct V2Sample {
    z: f64,
    v2: f64,
    required_v2: Option<f64>,
}

#[derive(Serialize)]
struct PainleveOutput {
    integrable: bool,
    max_deviation: f64,
    worst_z: f64,
    tol: f64,
    samples: Vec<V2Sample>,
}

pub fn painleve_cmd(cfg: &PainleveConfig, art: &mut Artifacts, _log: &Log) -> Result<()> {
    let eq = build_equation(&cfg.equation)?;
    let opts = IntegrabilityOptions {
        z_min: cfg.z_min,
        z_max: cfg.z_max,
        samples: cfg.samples,
        tol: cfg.tol,
    };
    let report = is_integrable(&eq, &opts)?;
    let fam = eq.to_general();
    let zs = RangeConfig {
        min: cfg.z_min,
        max: cfg.z_max,
        count: cfg.samples,
    }
    .values();
    let samples = zs
        .into_iter()
        .map(|z| V2Sample {
            z,
            v2: fam.v2.value(z),
            required_v2: compatibility_v2(&fam, z).ok(),
        })
        .collect();
    art.add_json(
        "painleve.json",
        &PainleveOutput {
            integrable: report.integrable,
            max_deviation: report.max_deviation,
            worst_z: report.worst_z,
            tol: report.tol,
            samples,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MiRow {
    omega: f64,
    omega_grid: f64,
    growth: f64,
    predicted: f64,
}

#[derive(Serialize)]
struct MiOutput {
    p0: f64,
    beta2: f64,
    gamma: f64,
    band_edge: Option<f64>,
    measurements: Option<Vec<MiRow>>,
}

pub fn mi_cmd(cfg: &MiConfig, art: &mut Artifacts, _log: &Log) -> Result<()> {
    if cfg.omega.count == 0 {
        bail!(invalid("omega.count must be at least 1"));
    }
    let omegas = cfg.omega.values();
    let curve = mi_dispersion(cfg.beta2, cfg.gamma, cfg.p0, &omegas)?;
    let experiment = match &cfg.measure {
        Some(m) => {
            positive("measure.dz", m.dz)?;
            if m.omegas.is_empty() {
                bail!(invalid("measure.omegas must not be empty"));
            }
            Some(MiExperiment {
                p0: cfg.p0,
                rho: m.rho,
                seed_amplitude: m.seed_amplitude,
                d_omega: m.d_omega,
                n: m.n,
                z_end: m.z_end,
                dz: m.dz,
                window: m.window,
                store_every: m.store_every,
            })
        }
        None => None,
    };

    let measurements = match (&experiment, &cfg.measure) {
        (Some(exp), Some(m)) => {
            let measured = measure_mi(exp, &m.omegas)?;
            let (b2, g) = snlse_mi_parameters(exp.rho);
            let grid_omegas: Vec<f64> = measured.iter().map(|x| x.omega_grid).collect();
            let theory = mi_dispersion(b2, g, exp.p0, &grid_omegas)?;
            Some(
                measured
                    .iter()
                    .zip(&theory.kappa)
                    .map(|(x, k)| MiRow {
                        omega: x.omega,
                        omega_grid: x.omega_grid,
                        growth: x.growth,
                        predicted: k.im,
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    let rows = curve
        .omega
        .iter()
        .zip(&curve.kappa)
        .zip(&curve.gain)
        .map(|((w, k), g)| vec![*w, k.re, k.im, *g]);
    art.add("mi.csv", csv_table(&["omega", "re_kappa", "im_kappa", "gain"], rows));
    art.add_json(
        "mi.json",
        &MiOutput {
            p0: cfg.p0,
            beta2: cfg.beta2,
            gamma: cfg.gamma,
            band_edge: curve.band_edge,
            measurements,
        },
    )?;
    Ok(())
}

pub fn closeness_cmd(cfg: &ClosenessConfig, art: &mut Artifacts, log: &Log) -> Result<()> {
    let grid = build_grid(&cfg.grid)?;
    let stepper = build_stepper(&cfg.stepper)?;
    positive("l", cfg.l)?;
    positive("eps", cfg.eps)?;
    positive("c_strichartz", cfg.c_strichartz)?;
    if let Some(d) = cfg.delta {
        positive("delta", d)?;
    }
    EquationSpec::Tnlse { c1: cfg.c1, c2: cfg.c2 }.validate()?;
    let v0 = build_initial(&cfg.initial, &grid, cfg.seed, log)?;
    let opts = ClosenessOptions {
        eps: cfg.eps,
        c_strichartz: cfg.c_strichartz,
        delta: cfg.delta,
    };
    let report = run_closeness(&v0, cfg.c1, cfg.c2, cfg.l, &stepper, &opts)?;
    for w in &report.warnings {
        log.warn(w);
    }
    log.info(&format!("closeness verdict: {}", report.verdict));
    art.add_json("closeness.json", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct Excluded {
    omega: f64,
    reason: String,
}

#[derive(Serialize)]
struct CwNoiseOutput {
    convention: ConventionName,
    singular_omegas: [f64; 4],
    exclusion_radius: f64,
    excluded: Vec<Excluded>,
    mismatch_reported: bool,
    cross_check: fiberlab::cw_noise::CrossCheckReport,
}

pub fn cw_noise_cmd(cfg: &CwNoiseConfig, art: &mut Artifacts, log: &Log) -> Result<()> {
    let p = CwNoiseParams::new(cfg.alpha, cfg.beta2, cfg.gamma, cfg.p0)?;
    if cfg.omegas.is_empty() || cfg.omegas.iter().any(|w| !w.is_finite()) {
        bail!(invalid("omegas must be a non-empty list of finite numbers"));
    }
    if !(cfg.z_end.is_finite() && cfg.z_end >= 0.0) || cfg.sample_every == 0 {
        bail!(invalid("need finite z_end >= 0 and sample_every >= 1"));
    }
    positive("dz", cfg.dz)?;
    positive("tol", cfg.tol)?;
    if !(cfg.exclusion_radius >= 0.0) {
        bail!(invalid("exclusion_radius must be non-negative"));
    }
    let convention = match cfg.convention {
        ConventionName::Consistent => Convention::Consistent,
        ConventionName::ExponentialModes => Convention::ExponentialModes,
    };
    let ni = cfg.initial;
    let init = move |_: f64| InitialData {
        a0: ni.a0,
        b0: ni.b0,
        phi0: ni.phi0,
        a_z0: ni.a_z0,
    };
    let mut forms = Vec::with_capacity(cfg.omegas.len());
    let mut excluded = Vec::new();
    for &w in &cfg.omegas {
        match closed_form(&p, convention, w, &init(w), cfg.exclusion_radius) {
            Ok(cf) => forms.push(Some(cf)),
            Err(e @ Error::SingularFrequency { .. }) => {
                log.warn(&e.to_string());
                excluded.push(Excluded {
                    omega: w,
                    reason: e.to_string(),
                });
                forms.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }

    let traj = integrate_system(&p, cfg.z_end, &cfg.omegas, &init, cfg.dz, cfg.sample_every)?;
    let report = cross_check(&p, convention, &traj, &init, cfg.exclusion_radius, cfg.tol);
    for e in report.entries.iter().filter(|e| e.mismatch && !e.singular) {
        log.warn(&format!(
            "closed form disagrees with the integrated system at omega = {} (max rel err {:.3e})",
            e.omega, e.max_rel_err
        ));
    }
    let mut closed_rows = Vec::new();
    let mut rk_rows = Vec::new();
    for (tr, cf) in traj.iter().zip(&forms) {
        for (j, &z) in tr.z.iter().enumerate() {
            rk_rows.push(vec![tr.omega, z, tr.a[j], tr.b[j], tr.phi[j]]);
            if let Some(cf) = cf {
                let (a, b, phi) = cf.eval(z);
                closed_rows.push(vec![tr.omega, z, a, b, phi]);
            }
        }
    }
    let header = ["omega", "z", "A", "B", "Phi"];
    art.add("cw_noise.csv", csv_table(&header, closed_rows));
    art.add("cw_noise_integrated.csv", csv_table(&header, rk_rows));
    art.add_json(
        "cw_noise.json",
        &CwNoiseOutput {
            convention: cfg.convention,
            singular_omegas: p.singular_omegas(),
            exclusion_radius: cfg.exclusion_radius,
            excluded,
            mismatch_reported: report.any_mismatch,
            cross_check: report,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct OrbitalRow {
    #[serde(rename = "Z")]
    z: f64,
    d_theta: f64,
    #[serde(rename = "T0_star")]
    t0_star: f64,
    #[serde(rename = "Gamma_star")]
    gamma_star: f64,
    #[serde(rename = "E")]
    e: f64,
}

#[derive(Serialize)]
struct OrbitalOutput {
    theta: f64,
    perturbation: f64,
    warnings: Vec<String>,
    series: Vec<OrbitalRow>,
}

pub fn orbital_cmd(cfg: &OrbitalConfig, art: &mut Artifacts, log: &Log) -> Result<()> {
    let grid = build_grid(&cfg.grid)?;
    let stepper = build_stepper(&cfg.stepper)?;
    let spec = SolitonSpec::corrected(cfg.theta)?;
    if !(cfg.z_end.is_finite() && cfg.z_end >= 0.0) || !cfg.perturbation.is_finite() {
        bail!(invalid("need finite z_end >= 0 and a finite perturbation"));
    }
    let reference = spec.envelope(&grid, 0.0);
    let q0 = Envelope::from_fn(grid.clone(), 0.0, |t| spec.value(0.0, t) + cfg.perturbation * (-t * t).exp())?;

    let traj = propagate(&EquationSpec::Snlse { rho: 1.0 }, &q0, cfg.z_end, &stepper)?;
    for w in &traj.warnings {
        log.warn(w);
    }
    let mut series = Vec::with_capacity(traj.len());
    for s in &traj.snapshots {
        let d = orbital_distance(&s.field, &reference, cfg.theta)?;
        series.push(OrbitalRow {
            z: s.z,
            d_theta: d.distance(),
            t0_star: d.t0_star,
            gamma_star: d.gamma_star,
            e: lyapunov(&s.field, cfg.theta),
        });
    }
    art.add_json(
        "orbital.json",
        &OrbitalOutput {
            theta: cfg.theta,
            perturbation: cfg.perturbation,
            warnings: traj.warnings.clone(),
            series,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct VparamOutput {
    v: f64,
    single_mode: bool,
    cutoff: f64,
}

pub fn vparam_cmd(cfg: &VparamConfig, art: &mut Artifacts, _log: &Log) -> Result<()> {
    let v = vparam_single_mode(cfg.core_radius, cfg.wavelength, cfg.n1, cfg.n2)?;
    art.add_json(
        "vparam.json",
        &VparamOutput {
            v: v.v,
            single_mode: v.single_mode,
            cutoff: SINGLE_MODE_CUTOFF,
        },
    )?;
    Ok(())
}
