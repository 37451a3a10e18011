//! The run driver: step, inject noise, filter, record, stop.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::filters::FilterSpec;
use crate::ground_state::{classify_steady, Classification};
use crate::noise::{NoiseSource, PerturbationConfig};
use crate::schemes::{SchemeConfig, Stepper};
use crate::spectral::{energy, residual, PeriodicGrid1D, SpectralField1D};

pub const DEFAULT_T_MAX: f64 = 1e5;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_RECORD_EVERY: usize = 100;
/// Energy level below which the energy inequality is asserted.
pub const THEOREM_ENERGY_CAP: f64 = FRAC_PI_2 - 0.001;
/// Max-norm bound under which the energy inequality is asserted.
pub const THEOREM_MAX_NORM: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub filter: FilterSpec,
    pub t_max: f64,
    pub tol: f64,
    pub record_every: usize,
    pub perturbation: Option<PerturbationConfig>,
    /// Evaluates the discrete energy inequality on every step.
    pub theorem_mode: bool,
}

impl RunConfig {
    pub fn new(scheme: SchemeConfig) -> Self {
        Self {
            scheme,
            filter: FilterSpec::None,
            t_max: DEFAULT_T_MAX,
            tol: DEFAULT_TOL,
            record_every: DEFAULT_RECORD_EVERY,
            perturbation: None,
            theorem_mode: false,
        }
    }

    pub fn with_filter(mut self, filter: FilterSpec) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn with_perturbation(mut self, p: Option<PerturbationConfig>) -> Self {
        self.perturbation = p;
        self
    }

    pub fn with_theorem_mode(mut self, on: bool) -> Self {
        self.theorem_mode = on;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.scheme.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.filter.validate()?;
        if !(self.tol > 0.0) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid("t_max", format!("must be positive, got {}", self.t_max)));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        if let Some(p) = &self.perturbation {
            p.validate()?;
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        (self.t_max / self.scheme.tau).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    TolReached,
    TMaxReached,
    SchemeError,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TolReached => "tol_reached",
            StopReason::TMaxReached => "t_max_reached",
            StopReason::SchemeError => "scheme_error",
        })
    }
}

/// Per-step checks of the perturbed convergence theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremDiagnostics {
    /// Largest `E(w) + ‖w-u‖²/(5τ) + κ²/2‖∂ₓ(w-u)‖² - E(u)` over steps whose
    /// input satisfies the hypotheses.
    pub max_energy_excess: f64,
    /// Steps whose input violated `‖u‖∞ <= 1.1` or `E(u) <= π/2 - 0.001`.
    pub hypothesis_violations: usize,
    /// Extremes of `E(vⁿ)` over `n >= 1`.
    pub min_energy: f64,
    pub max_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// `‖N(vⁿ) - vⁿ‖∞ / τ`; NaN at `t = 0`.
    pub residuals: Vec<f64>,
    /// `‖κ²u'' + u - u³‖₂`.
    pub steady_residuals: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub u_at_zero: Vec<f64>,
    pub parity_defects: Vec<f64>,
    pub final_state: SpectralField1D,
    pub stop_reason: StopReason,
    /// Set when `stop_reason` is `SchemeError`.
    pub error: Option<Error>,
    pub steps: usize,
    /// `supₙ ‖vⁿ‖∞` over every step, recorded or not.
    pub sup_max_abs: f64,
    pub theorem: Option<TheoremDiagnostics>,
}

impl RunRecord {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("records start at t = 0")
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("records start at t = 0")
    }

    pub fn classify(&self, kappa: f64) -> Result<Classification> {
        classify_steady(&self.final_state, kappa)
    }

    /// Writes `t,energy,residual,max_abs,u_at_zero`.
    pub fn write_series_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,energy,residual,max_abs,u_at_zero")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.10e},{:.16e},{:.6e},{:.16e},{:.16e}",
                self.times[i], self.energies[i], self.residuals[i], self.max_abs[i], self.u_at_zero[i]
            )?;
        }
        Ok(())
    }

    /// Writes `t,steady_residual,parity_defect`.
    pub fn write_diagnostics_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,steady_residual,parity_defect")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.10e},{:.6e},{:.6e}",
                self.times[i], self.steady_residuals[i], self.parity_defects[i]
            )?;
        }
        Ok(())
    }
}

/// Runs `vⁿ⁺¹ = F(N(vⁿ) + εⁿ⁺¹)` from `v⁰ = F(u⁰ + ε⁰)`, where `N` is the
/// configured scheme and `F` the configured filter.
///
/// Stops when `‖N(vⁿ) - vⁿ‖∞/τ` drops below the effective tolerance or when
/// `t_max` is reached. A failing step ends the run with a partial record.
pub fn run(u0: &SpectralField1D, cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let grid = u0.grid().clone();
    let kappa = cfg.scheme.kappa;
    let tau = cfg.scheme.tau;
    let mut stepper = Stepper::new(cfg.scheme, &grid)?;
    let mut noise = cfg.perturbation.as_ref().map(NoiseSource::new);

    let perturb = |v: SpectralField1D, noise: &mut Option<NoiseSource>| -> Result<SpectralField1D> {
        let v = match noise {
            Some(src) => v.add(&src.sample_1d(&grid)?)?,
            None => v,
        };
        cfg.filter.apply_1d(&v)
    };

    let mut v = perturb(u0.clone(), &mut noise)?;
    let mut rec = RunRecord {
        times: Vec::new(),
        energies: Vec::new(),
        residuals: Vec::new(),
        steady_residuals: Vec::new(),
        max_abs: Vec::new(),
        u_at_zero: Vec::new(),
        parity_defects: Vec::new(),
        final_state: v.clone(),
        stop_reason: StopReason::TMaxReached,
        error: None,
        steps: 0,
        sup_max_abs: v.max_abs(),
        theorem: None,
    };
    let record = |rec: &mut RunRecord, t: f64, v: &SpectralField1D, res: f64| -> Result<()> {
        rec.times.push(t);
        rec.energies.push(energy(v, kappa)?.total);
        rec.residuals.push(res);
        rec.steady_residuals.push(residual(v, kappa)?);
        rec.max_abs.push(v.max_abs());
        rec.u_at_zero.push(v.value_at_zero());
        rec.parity_defects.push(v.parity_defect());
        Ok(())
    };
    record(&mut rec, 0.0, &v, f64::NAN)?;

    let mut theorem = cfg.theorem_mode.then_some(TheoremDiagnostics {
        max_energy_excess: f64::NEG_INFINITY,
        hypothesis_violations: 0,
        min_energy: f64::INFINITY,
        max_energy: f64::NEG_INFINITY,
    });
    let mut e_v = if cfg.theorem_mode {
        energy(&v, kappa)?.total
    } else {
        f64::NAN
    };

    let max_steps = cfg.max_steps();
    let mut n = 0;
    while n < max_steps {
        let w = match stepper.step(&v) {
            Ok(w) => w,
            Err(e) => {
                rec.stop_reason = StopReason::SchemeError;
                rec.error = Some(e);
                break;
            }
        };
        let res = w.max_distance(&v)? / tau;
        if !res.is_finite() {
            rec.stop_reason = StopReason::SchemeError;
            rec.error = Some(Error::NonFinite { step: n + 1 });
            break;
        }
        if let Some(th) = theorem.as_mut() {
            if v.max_abs() <= THEOREM_MAX_NORM && e_v <= THEOREM_ENERGY_CAP {
                let d = w.sub(&v)?;
                let lhs = energy(&w, kappa)?.total
                    + d.l2_norm().powi(2) / (5.0 * tau)
                    + 0.5 * kappa * kappa * d.derivative().l2_norm().powi(2);
                th.max_energy_excess = th.max_energy_excess.max(lhs - e_v);
            } else {
                th.hypothesis_violations += 1;
            }
        }
        v = perturb(w, &mut noise)?;
        n += 1;
        rec.sup_max_abs = rec.sup_max_abs.max(v.max_abs());
        if let Some(th) = theorem.as_mut() {
            e_v = energy(&v, kappa)?.total;
            th.min_energy = th.min_energy.min(e_v);
            th.max_energy = th.max_energy.max(e_v);
        }
        let done = res < cfg.tol;
        if done || n % cfg.record_every == 0 || n == max_steps {
            record(&mut rec, n as f64 * tau, &v, res)?;
        }
        if done {
            rec.stop_reason = StopReason::TolReached;
            break;
        }
    }
    if rec.stop_reason == StopReason::SchemeError && rec.times.last() != Some(&(n as f64 * tau)) {
        record(&mut rec, n as f64 * tau, &v, f64::NAN)?;
    }
    rec.steps = n;
    rec.final_state = v;
    rec.theorem = theorem;
    Ok(rec)
}

/// Initial data families used by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `A · mean_i sin(kᵢ x)`.
    SineMix { amplitude: f64, modes: Vec<u32> },
}

impl InitialCondition {
    pub fn sin(l: u32) -> Self {
        InitialCondition::SineMix {
            amplitude: 1.0,
            modes: vec![l],
        }
    }

    pub fn mix(modes: &[u32]) -> Self {
        InitialCondition::SineMix {
            amplitude: 1.0,
            modes: modes.to_vec(),
        }
    }

    pub fn scaled(self, a: f64) -> Self {
        match self {
            InitialCondition::SineMix { amplitude, modes } => InitialCondition::SineMix {
                amplitude: amplitude * a,
                modes,
            },
        }
    }

    pub fn sample(&self, grid: &PeriodicGrid1D) -> SpectralField1D {
        match self {
            InitialCondition::SineMix { amplitude, modes } => {
                let w = amplitude / modes.len() as f64;
                SpectralField1D::from_fn(grid, |x| {
                    w * modes.iter().map(|&k| (k as f64 * x).sin()).sum::<f64>()
                })
            }
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::SineMix { amplitude, modes } => {
                if *amplitude != 1.0 {
                    write!(f, "{amplitude}*")?;
                }
                match modes.as_slice() {
                    [1] => write!(f, "sin"),
                    [l] => write!(f, "sin:{l}"),
                    ms => {
                        let parts: Vec<String> = ms.iter().map(u32::to_string).collect();
                        write!(f, "mix:{}", parts.join(","))
                    }
                }
            }
        }
    }
}

/// Accepts `sin`, `sin:L`, `mix:K1,K2,...`, each optionally prefixed by an
/// amplitude `A*`.
impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (amplitude, body) = match s.split_once('*') {
            Some((a, rest)) => (
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad amplitude `{a}`")))?,
                rest.trim(),
            ),
            None => (1.0, s),
        };
        let parse_mode = |m: &str| -> Result<u32> {
            match m.trim().parse::<u32>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(Error::Parse(format!("bad mode `{m}`"))),
            }
        };
        let modes = if body == "sin" {
            vec![1]
        } else if let Some(l) = body.strip_prefix("sin:") {
            vec![parse_mode(l)?]
        } else if let Some(list) = body.strip_prefix("mix:") {
            list.split(',').map(parse_mode).collect::<Result<Vec<_>>>()?
        } else {
            return Err(Error::Parse(format!("unknown initial condition `{s}`")));
        };
        Ok(InitialCondition::SineMix { amplitude, modes })
    }
}

/// One row of a `κ` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kappa: f64,
    pub max_abs_final: f64,
    /// Classifier verdict, or the error that prevented a verdict.
    pub verdict: String,
    pub energy_final: f64,
    pub stop_reason: Option<StopReason>,
}

/// Independent runs per `κ`, executed in parallel and returned in input order.
pub fn sweep_kappa(kappas: &[f64], base: &RunConfig, u0: &SpectralField1D) -> Vec<SweepRow> {
    kappas
        .par_iter()
        .map(|&kappa| {
            let cfg = base.clone().with_kappa(kappa);
            match run(u0, &cfg) {
                Ok(rec) => {
                    let verdict = match rec.classify(kappa) {
                        Ok(c) => c.verdict.to_string(),
                        Err(e) => format!("unclassified ({e})"),
                    };
                    SweepRow {
                        kappa,
                        max_abs_final: rec.final_state.max_abs(),
                        verdict,
                        energy_final: rec.final_energy(),
                        stop_reason: Some(rec.stop_reason),
                    }
                }
                Err(e) => SweepRow {
                    kappa,
                    max_abs_final: f64::NAN,
                    verdict: format!("error ({e})"),
                    energy_final: f64::NAN,
                    stop_reason: None,
                },
            }
        })
        .collect()
}

/// Writes `kappa,max_abs_final,verdict,energy_final`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "kappa,max_abs_final,verdict,energy_final")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},\"{}\",{:.16e}",
            r.kappa,
            r.max_abs_final,
            r.verdict.replace('"', "'"),
            r.energy_final
        )?;
    }
    Ok(())
}

/// `u₀ eᵗ`, the exact solution of `u' = u`.
pub fn amplification_demo(u0: f64, t_end: f64) -> f64 {
    u0 * t_end.exp()
}

/// Forward Euler trace of `u' = u` with `steps` steps, starting at `t = 0`.
pub fn forward_euler_trace(u0: f64, t_end: f64, steps: usize) -> Vec<(f64, f64)> {
    let dt = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut u = u0;
    out.push((0.0, u));
    for i in 1..=steps {
        u += dt * u;
        out.push((i as f64 * dt, u));
    }
    out
}
