//! Named reproduction experiments.
//!
//! Every experiment writes into `<out>/<name>/`: CSV data, SVG plots, PGM
//! snapshots where relevant, and a `meta.txt` sidecar echoing the parameters
//! together with one `check.*` line per assertion. `--fast` shrinks the grid
//! and the time horizon; the tolerances it loosens are listed in the
//! parameters of each experiment.

use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use acfilter_core::dynamics::DEFAULT_T_MAX;
use acfilter_core::{
    amplification_demo, forward_euler_trace, profile, run, run_2d, sign_changes, solve_n_peak, sweep_kappa,
    write_profile_csv, write_sweep_csv, FilterSpec, GroundCurve, InitialCondition, NoiseParity, PerturbationConfig,
    PeriodicGrid1D, PeriodicGrid2D, RunConfig, RunRecord, SchemeConfig, SchemeKind, SpectralField1D,
    SpectralField2D, StopReason, SweepRow, Verdict,
};
use anyhow::{anyhow, Result};
use rayon::prelude::*;

use crate::output::{self, Meta};
use crate::plot::{heatmap_svg, write_pgm, LinePlot, Series};

/// Seed used when none is given on the command line.
pub const DEFAULT_SEED: u64 = 2024;
/// Amplitude of the even-mode noise that emulates round-off.
pub const ROUNDOFF_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub out: PathBuf,
    pub fast: bool,
    pub seed: u64,
}

impl Settings {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            fast: false,
            seed: DEFAULT_SEED,
        }
    }

    pub fn fast(mut self, fast: bool) -> Self {
        self.fast = fast;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// One registry entry.
#[derive(Clone, Copy)]
pub struct ExperimentSpec {
    pub name: &'static str,
    pub summary: &'static str,
    body: fn(&mut Context) -> Result<()>,
}

impl std::fmt::Debug for ExperimentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExperimentSpec").field("name", &self.name).finish()
    }
}

pub const REGISTRY: &[ExperimentSpec] = &[
    ExperimentSpec {
        name: "fig_wrong_steady",
        summary: "unfiltered IMEX with even round-off noise at kappa = 0.9 drifts to u = +-1",
        body: fig_wrong_steady,
    },
    ExperimentSpec {
        name: "fig_filtered_steady",
        summary: "odd-filtered IMEX at kappa = 0.9 converges to the ground state U_0.9",
        body: fig_filtered_steady,
    },
    ExperimentSpec {
        name: "fig_umax_sweep",
        summary: "max|u_inf| against kappa with and without the odd filter",
        body: fig_umax_sweep,
    },
    ExperimentSpec {
        name: "fig_energy_curve",
        summary: "ground-state energy E0(kappa) and profile overlays",
        body: fig_energy_curve,
    },
    ExperimentSpec {
        name: "ex1_initials",
        summary: "kappa = 0.1, four odd initial data converge to the same 2pi-periodic steady state",
        body: ex1_initials,
    },
    ExperimentSpec {
        name: "ex2_threshold",
        summary: "kappa = 0.999 keeps a nonzero steady state, kappa = 1.001 decays to zero",
        body: ex2_threshold,
    },
    ExperimentSpec {
        name: "ex3_metastable",
        summary: "kappa = sqrt(0.001), filtered runs stall in multi-interface states",
        body: ex3_metastable,
    },
    ExperimentSpec {
        name: "ex4_2d",
        summary: "2D sin(x)sin(y) at kappa = 0.1 with and without the sine-sine filter",
        body: ex4_2d,
    },
    ExperimentSpec {
        name: "amplification_demo",
        summary: "u' = u from u0 = 1e-15 reaches u(35) = 1.5860",
        body: amplification,
    },
    ExperimentSpec {
        name: "scheme_comparison",
        summary: "all four schemes break parity without the filter (kappa = 1, N = 128, tau = 0.01)",
        body: scheme_comparison,
    },
];

pub fn find(name: &str) -> Result<&'static ExperimentSpec> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        anyhow!("unknown experiment `{name}`; available: {}", names.join(", "))
    })
}

/// Outcome of one assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: &'static str,
    pub dir: PathBuf,
    pub params: Meta,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// State handed to an experiment body.
pub struct Context {
    pub fast: bool,
    pub seed: u64,
    pub dir: PathBuf,
    params: Meta,
    checks: Vec<Check>,
}

impl Context {
    fn param(&mut self, key: &str, value: impl Display) {
        self.params.set(key, value);
    }

    fn check(&mut self, name: &str, passed: bool, measured: impl Display, expected: impl Display) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            measured: measured.to_string(),
            expected: expected.to_string(),
        });
    }

    fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn svg(&self, file: &str, plot: &LinePlot) -> Result<()> {
        output::write_text(&self.path(file), &plot.to_svg())
    }

    fn even_noise(&self) -> Option<PerturbationConfig> {
        Some(PerturbationConfig::new(ROUNDOFF_EPS, NoiseParity::Even, self.seed))
    }

    /// `full` normally, `fast` under `--fast`.
    fn pick<T>(&self, full: T, fast: T) -> T {
        if self.fast {
            fast
        } else {
            full
        }
    }
}

/// Runs one experiment and writes its `meta.txt`. Failed assertions are
/// returned in the report, not as errors.
pub fn run_experiment(spec: &ExperimentSpec, settings: &Settings) -> Result<Report> {
    let dir = settings.out.join(spec.name);
    std::fs::create_dir_all(&dir)?;
    let mut ctx = Context {
        fast: settings.fast,
        seed: settings.seed,
        dir: dir.clone(),
        params: Meta::new(),
        checks: Vec::new(),
    };
    (spec.body)(&mut ctx)?;

    let mut meta = Meta::new();
    meta.set("experiment", spec.name)
        .set("summary", spec.summary)
        .set("fast", settings.fast)
        .set("seed", settings.seed);
    for (k, v) in ctx.params.entries() {
        meta.set(k.as_str(), v);
    }
    for c in &ctx.checks {
        meta.set(
            format!("check.{}", c.name),
            format!(
                "{} (measured {}; expected {})",
                if c.passed { "pass" } else { "FAIL" },
                c.measured,
                c.expected
            ),
        );
    }
    let report = Report {
        name: spec.name,
        dir,
        params: ctx.params,
        checks: ctx.checks,
    };
    meta.set("status", if report.passed() { "pass" } else { "fail" });
    meta.write(&report.dir.join("meta.txt"))?;
    Ok(report)
}

/// Runs several experiments concurrently, each in its own directory.
pub fn run_many(names: &[&str], settings: &Settings) -> Vec<(String, Result<Report>)> {
    names
        .par_iter()
        .map(|name| (name.to_string(), find(name).and_then(|spec| run_experiment(spec, settings))))
        .collect()
}

fn grid(n: usize) -> Result<PeriodicGrid1D> {
    Ok(PeriodicGrid1D::new(n)?)
}

fn imex(tau: f64, kappa: f64) -> Result<RunConfig> {
    Ok(RunConfig::new(SchemeConfig::imex1(tau, kappa)?))
}

fn points(u: &SpectralField1D) -> Vec<(f64, f64)> {
    u.grid().nodes().into_iter().zip(u.values().iter().copied()).collect()
}

fn series(times: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    times.iter().copied().zip(ys.iter().copied()).collect()
}

fn write_profile(path: &Path, u: &SpectralField1D) -> Result<()> {
    let mut w = output::create(path)?;
    write_profile_csv(u, &mut w)?;
    w.flush()?;
    Ok(())
}

fn verdict_of(rec: &RunRecord, kappa: f64) -> String {
    match rec.classify(kappa) {
        Ok(c) => format!("{} (match {:.2e})", c.verdict, c.match_error),
        Err(e) => format!("unclassified ({e})"),
    }
}

fn fig_wrong_steady(ctx: &mut Context) -> Result<()> {
    let (kappa, tau) = (0.9, 0.01);
    let n = ctx.pick(256, 128);
    let t_max = ctx.pick(DEFAULT_T_MAX, 2000.0);
    ctx.param("kappa", kappa);
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("t_max", t_max);
    ctx.param("init", "sin");
    ctx.param("filter", FilterSpec::None);
    ctx.param("perturbation", format!("even, eps_star = {ROUNDOFF_EPS:e}"));

    let g = grid(n)?;
    let u0 = InitialCondition::sin(1).sample(&g);
    let cfg = imex(tau, kappa)?.with_perturbation(ctx.even_noise()).with_t_max(t_max);
    let rec = run(&u0, &cfg)?;
    output::write_series(&ctx.dir, "series.csv", &rec)?;
    write_profile(&ctx.path("final.csv"), &rec.final_state)?;
    ctx.param("stop_reason", rec.stop_reason);
    ctx.param("final_time", rec.final_time());

    let oracle = profile(kappa, &g)?;
    ctx.svg(
        "u_at_zero.svg",
        &LinePlot::new("u(0, t) without filter, kappa = 0.9", "t", "u(0, t)")
            .with(Series::line("u(0, t)", series(&rec.times, &rec.u_at_zero))),
    )?;
    ctx.svg(
        "final.svg",
        &LinePlot::new("computed vs correct steady state, kappa = 0.9", "x", "u")
            .with(Series::line("u0 = sin x", points(&u0)))
            .with(Series::line("computed u_inf", points(&rec.final_state)))
            .with(Series::line("ground state U_0.9", points(&oracle.profile))),
    )?;

    let verdict = rec.classify(kappa).map(|c| c.verdict);
    let max = rec.final_state.max_abs();
    ctx.check(
        "verdict_constant",
        matches!(verdict, Ok(Verdict::PlusOne | Verdict::MinusOne)),
        verdict_of(&rec, kappa),
        "plus_one or minus_one",
    );
    ctx.check("max_abs", max >= 0.999, format!("{max:.12}"), ">= 0.999");
    Ok(())
}

fn fig_filtered_steady(ctx: &mut Context) -> Result<()> {
    let (kappa, tau) = (0.9, 0.01);
    let n = ctx.pick(256, 128);
    let tol = ctx.pick(1e-12, 1e-8);
    let bound = ctx.pick(1e-5, 1e-3);
    ctx.param("kappa", kappa);
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("tol", tol);
    ctx.param("init", "sin");
    ctx.param("filter", FilterSpec::Odd);
    ctx.param("oracle_tolerance", bound);

    let g = grid(n)?;
    let u0 = InitialCondition::sin(1).sample(&g);
    let rec = run(&u0, &imex(tau, kappa)?.with_filter(FilterSpec::Odd).with_tol(tol))?;
    output::write_series(&ctx.dir, "series.csv", &rec)?;
    write_profile(&ctx.path("final.csv"), &rec.final_state)?;
    let oracle = profile(kappa, &g)?;
    write_profile(&ctx.path("oracle.csv"), &oracle.profile)?;
    ctx.param("stop_reason", rec.stop_reason);
    ctx.param("final_time", rec.final_time());
    ctx.param("verdict", verdict_of(&rec, kappa));

    ctx.svg(
        "final.svg",
        &LinePlot::new("filtered steady state, kappa = 0.9", "x", "u")
            .with(Series::line("u0 = sin x", points(&u0)))
            .with(Series::line("computed u_inf", points(&rec.final_state)))
            .with(Series::markers("oracle U_0.9", points(&oracle.profile).into_iter().step_by(8).collect())),
    )?;
    ctx.svg(
        "residual.svg",
        &LinePlot::new("step residual", "t", "|u(n+1) - u(n)|/tau")
            .log_y()
            .with(Series::line("residual", series(&rec.times, &rec.residuals))),
    )?;

    let err = rec.final_state.max_distance(&oracle.profile)?;
    ctx.check(
        "oracle_distance",
        err <= bound,
        format!("{err:.3e}"),
        format!("<= {bound:e}"),
    );
    ctx.check(
        "stop_reason",
        rec.stop_reason == StopReason::TolReached,
        rec.stop_reason,
        StopReason::TolReached,
    );
    Ok(())
}

fn fig_umax_sweep(ctx: &mut Context) -> Result<()> {
    let tau = 0.01;
    let n = ctx.pick(256, 128);
    let tol = ctx.pick(1e-12, 1e-10);
    let t_max = ctx.pick(DEFAULT_T_MAX, 2000.0);
    let peak_tol = ctx.pick(1e-4, 1e-3);
    let first = ctx.pick(1, 2);
    let kappas: Vec<f64> = (first..=19).map(|i| 0.05 * i as f64).collect();
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("tol_filtered", tol);
    ctx.param("tol_unfiltered", acfilter_core::dynamics::DEFAULT_TOL);
    ctx.param("t_max", t_max);
    ctx.param("kappas", format!("{:.2}..{:.2} step 0.05", kappas[0], kappas[kappas.len() - 1]));
    ctx.param("init", "sin");
    ctx.param("perturbation_unfiltered", format!("even, eps_star = {ROUNDOFF_EPS:e}"));
    ctx.param("peak_tolerance", peak_tol);

    let g = grid(n)?;
    let u0 = InitialCondition::sin(1).sample(&g);
    let base = imex(tau, 0.5)?.with_t_max(t_max);
    let filtered = sweep_kappa(&kappas, &base.clone().with_filter(FilterSpec::Odd).with_tol(tol), &u0);
    let broken = sweep_kappa(&kappas, &base.with_perturbation(ctx.even_noise()), &u0);
    for (file, rows) in [("sweep_filtered.csv", &filtered), ("sweep_unfiltered.csv", &broken)] {
        let mut w = output::create(&ctx.path(file))?;
        write_sweep_csv(rows, &mut w)?;
        w.flush()?;
    }

    let oracle: Vec<(f64, f64)> = (2..=199)
        .map(|i| 0.005 * i as f64)
        .filter_map(|k| Some((k, solve_n_peak(k).ok()?)))
        .collect();
    let pts = |rows: &[SweepRow]| -> Vec<(f64, f64)> { rows.iter().map(|r| (r.kappa, r.max_abs_final)).collect() };
    ctx.svg(
        "umax.svg",
        &LinePlot::new("max|u_inf| against kappa", "kappa", "max|u_inf|")
            .with(Series::line("peak N_kappa (oracle)", oracle))
            .with(Series::markers("with odd filter", pts(&filtered)))
            .with(Series::markers("without filter", pts(&broken))),
    )?;

    let mut worst: f64 = 0.0;
    for r in filtered.iter().filter(|r| r.kappa >= 0.1 - 1e-9) {
        worst = worst.max((r.max_abs_final - solve_n_peak(r.kappa)?).abs());
    }
    ctx.check(
        "filtered_matches_peak",
        worst <= peak_tol,
        format!("max |max|u_inf| - N_kappa| = {worst:.3e} for kappa in [0.1, 0.95]"),
        format!("<= {peak_tol:e}"),
    );
    let high: Vec<&SweepRow> = broken.iter().filter(|r| r.kappa >= 0.75 - 1e-9).collect();
    let min_high = high.iter().map(|r| r.max_abs_final).fold(f64::INFINITY, f64::min);
    ctx.check(
        "unfiltered_breaks",
        high.iter().all(|r| (r.max_abs_final - 1.0).abs() <= 1e-6),
        format!("min max|u_inf| = {min_high:.9} for kappa >= 0.75"),
        "max|u_inf| = 1 for every kappa >= 0.75",
    );
    Ok(())
}

fn fig_energy_curve(ctx: &mut Context) -> Result<()> {
    let count = ctx.pick(99, 49);
    let kappas: Vec<f64> = (1..=count).map(|i| i as f64 / (count + 1) as f64).collect();
    let overlay = [0.1, 0.3, 0.5, 0.7, 0.9];
    ctx.param("kappas", format!("{count} points, uniform in (0, 1)"));
    ctx.param("overlay_kappas", "0.1 0.3 0.5 0.7 0.9");

    let rows: Vec<(f64, Result<GroundCurve, String>)> = kappas
        .par_iter()
        .map(|&k| (k, GroundCurve::new(k).map_err(|e| e.to_string())))
        .collect();
    let mut w = output::create(&ctx.path("energy_curve.csv"))?;
    writeln!(w, "kappa,energy0,n_peak")?;
    let mut curve = Vec::new();
    let mut skipped = Vec::new();
    for (k, c) in &rows {
        match c {
            Ok(c) => {
                writeln!(w, "{k:.17e},{:.17e},{:.17e}", c.energy(), c.n_peak())?;
                curve.push((*k, c.energy()));
            }
            Err(e) => skipped.push(format!("{k}: {e}")),
        }
    }
    w.flush()?;
    ctx.param("skipped", if skipped.is_empty() { "none".to_string() } else { skipped.join("; ") });

    let g = grid(512)?;
    let overlays = overlay
        .iter()
        .map(|&k| Ok((k, GroundCurve::new(k)?.sample(&g))))
        .collect::<Result<Vec<_>>>()?;
    let mut w = output::create(&ctx.path("profiles.csv"))?;
    let head: Vec<String> = overlay.iter().map(|k| format!("u_kappa_{k}")).collect();
    writeln!(w, "x,{}", head.join(","))?;
    for (i, x) in g.nodes().iter().enumerate() {
        let vals: Vec<String> = overlays.iter().map(|(_, u)| format!("{:.17e}", u.values()[i])).collect();
        writeln!(w, "{x:.17e},{}", vals.join(","))?;
    }
    w.flush()?;

    let slope_line = 4.0 * SQRT_2 / 3.0;
    ctx.svg(
        "energy_curve.svg",
        &LinePlot::new("ground-state energy", "kappa", "E0(kappa)")
            .with(Series::line("E0(kappa)", curve.clone()))
            .with(Series::line("4 sqrt2/3 kappa", vec![(0.0, 0.0), (0.8, 0.8 * slope_line)]))
            .with(Series::line("pi/2", vec![(0.0, FRAC_PI_2), (1.0, FRAC_PI_2)])),
    )?;
    let mut plot = LinePlot::new("ground states U_kappa", "x", "U");
    for (k, u) in &overlays {
        plot = plot.with(Series::line(format!("kappa = {k}"), points(u)));
    }
    ctx.svg("profiles.svg", &plot)?;

    let increasing = curve.windows(2).all(|w| w[1].1 > w[0].1);
    ctx.check(
        "monotone",
        increasing && skipped.is_empty(),
        format!("strictly increasing: {increasing}, rows skipped: {}", skipped.len()),
        "strictly increasing, no rows skipped",
    );
    let slope = GroundCurve::new(0.01)?.energy() / 0.01;
    let rel = (slope - slope_line).abs() / slope_line;
    ctx.check(
        "small_kappa_slope",
        rel <= 0.01,
        format!("E0(0.01)/0.01 = {slope:.6} (rel. deviation {rel:.2e})"),
        format!("within 1% of {slope_line:.5}"),
    );
    let max_e = curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    ctx.check("below_half_pi", max_e < FRAC_PI_2, format!("max E0 = {max_e:.9}"), "< pi/2");
    Ok(())
}

fn ex1_initials(ctx: &mut Context) -> Result<()> {
    let kappa = 0.1;
    let n = ctx.pick(256, 128);
    let tau = ctx.pick(0.01, 0.1);
    let tol = ctx.pick(1e-12, 1e-10);
    let bound = ctx.pick(1e-4, 1e-3);
    let inits = ["sin", "mix:1,2", "mix:1,4", "mix:1,8"];
    ctx.param("kappa", kappa);
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("tol", tol);
    ctx.param("filter", FilterSpec::Odd);
    ctx.param("inits", inits.join(" "));
    ctx.param("alignment_tolerance", bound);

    let g = grid(n)?;
    let cfg = imex(tau, kappa)?.with_filter(FilterSpec::Odd).with_tol(tol);
    let runs = inits
        .par_iter()
        .map(|ic| {
            let u0 = ic.parse::<InitialCondition>()?.sample(&g);
            let rec = run(&u0, &cfg)?;
            Ok((u0, rec))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut initial_plot = LinePlot::new("initial data, kappa = 0.1", "x", "u0");
    let mut final_plot = LinePlot::new("steady states, kappa = 0.1", "x", "u_inf");
    for (i, (ic, (u0, rec))) in inits.iter().zip(&runs).enumerate() {
        let tag = ic.replace([':', ','], "_");
        output::write_series(&ctx.dir, &format!("series_{tag}.csv"), rec)?;
        write_profile(&ctx.path(&format!("final_{tag}.csv")), &rec.final_state)?;
        ctx.param(
            &format!("run{i}"),
            format!(
                "{ic}: {} at t = {}, verdict {}",
                rec.stop_reason,
                rec.final_time(),
                verdict_of(rec, kappa)
            ),
        );
        initial_plot = initial_plot.with(Series::line(*ic, points(u0)));
        final_plot = final_plot.with(Series::line(*ic, points(&rec.final_state)));
    }
    ctx.svg("initials.svg", &initial_plot)?;
    ctx.svg("finals.svg", &final_plot)?;

    // Odd 2pi-periodic states are matched up to the sign flip u -> -u.
    let mut worst: f64 = 0.0;
    for a in 0..runs.len() {
        for b in a + 1..runs.len() {
            let (ua, ub) = (&runs[a].1.final_state, &runs[b].1.final_state);
            let d = ua.max_distance(ub)?.min(ua.max_distance(&ub.scale(-1.0))?);
            worst = worst.max(d);
        }
    }
    ctx.check(
        "same_steady_state",
        worst <= bound,
        format!("max pairwise aligned distance {worst:.3e}"),
        format!("<= {bound:e}"),
    );
    let all_ground = runs
        .iter()
        .all(|(_, r)| matches!(r.classify(kappa).map(|c| c.verdict), Ok(Verdict::Ground { j: 1, .. })));
    ctx.check(
        "period_2pi",
        all_ground,
        runs.iter().map(|(_, r)| verdict_of(r, kappa)).collect::<Vec<_>>().join(", "),
        "ground[j=1] for every initial datum",
    );
    Ok(())
}

fn ex2_threshold(ctx: &mut Context) -> Result<()> {
    let n = ctx.pick(256, 64);
    let tau = ctx.pick(0.01, 0.1);
    ctx.param("kappas", "0.999 1.001");
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("init", "sin");
    ctx.param("filter", FilterSpec::Odd);

    let g = grid(n)?;
    let u0 = InitialCondition::sin(1).sample(&g);
    let recs = [0.999, 1.001]
        .par_iter()
        .map(|&k| Ok(run(&u0, &imex(tau, k)?.with_filter(FilterSpec::Odd))?))
        .collect::<Result<Vec<_>>>()?;
    let (below, above) = (&recs[0], &recs[1]);
    output::write_series(&ctx.dir, "series_k0.999.csv", below)?;
    output::write_series(&ctx.dir, "series_k1.001.csv", above)?;
    write_profile(&ctx.path("final_k0.999.csv"), &below.final_state)?;
    write_profile(&ctx.path("final_k1.001.csv"), &above.final_state)?;
    ctx.param("stop_k0.999", format!("{} at t = {}", below.stop_reason, below.final_time()));
    ctx.param("stop_k1.001", format!("{} at t = {}", above.stop_reason, above.final_time()));
    ctx.svg(
        "max_abs.svg",
        &LinePlot::new("max|u| against time", "t", "max|u|")
            .log_y()
            .with(Series::line("kappa = 0.999", series(&below.times, &below.max_abs)))
            .with(Series::line("kappa = 1.001", series(&above.times, &above.max_abs))),
    )?;

    let (a, b) = (below.final_state.max_abs(), above.final_state.max_abs());
    ctx.check("below_threshold_nonzero", a >= 0.01, format!("{a:.6}"), ">= 0.01");
    ctx.check("above_threshold_zero", b <= 1e-6, format!("{b:.3e}"), "<= 1e-6");
    Ok(())
}

fn ex3_metastable(ctx: &mut Context) -> Result<()> {
    let kappa = 0.001f64.sqrt();
    let n = 256;
    let tau = ctx.pick(0.01, 0.05);
    let tol = ctx.pick(1e-12, 1e-10);
    let inits = ["mix:1,2", "mix:1,8"];
    ctx.param("kappa", kappa);
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("tol", tol);
    ctx.param("t_max", DEFAULT_T_MAX);
    ctx.param("filter", FilterSpec::Odd);
    ctx.param("inits", inits.join(" "));

    let g = grid(n)?;
    let e0 = GroundCurve::new(kappa)?.energy();
    let ground = profile(kappa, &g)?;
    let ground_changes = sign_changes(&ground.profile, 1e-12);
    ctx.param("energy0", e0);
    ctx.param("ground_sign_changes", ground_changes);
    let cfg = imex(tau, kappa)?.with_filter(FilterSpec::Odd).with_tol(tol);
    let runs = inits
        .par_iter()
        .map(|ic| {
            let u0 = ic.parse::<InitialCondition>()?.sample(&g);
            let rec = run(&u0, &cfg)?;
            Ok((u0, rec))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut plot = LinePlot::new("metastable states, kappa = sqrt(0.001)", "x", "u")
        .with(Series::line("ground state", points(&ground.profile)));
    for (ic, (u0, rec)) in inits.iter().zip(&runs) {
        let tag = ic.replace([':', ','], "_");
        output::write_series(&ctx.dir, &format!("series_{tag}.csv"), rec)?;
        write_profile(&ctx.path(&format!("final_{tag}.csv")), &rec.final_state)?;
        plot = plot
            .with(Series::line(format!("u0 = {ic}"), points(u0)))
            .with(Series::line(format!("u_inf from {ic}"), points(&rec.final_state)));

        let res = rec.residuals.last().copied().unwrap_or(f64::NAN);
        let e = rec.final_energy();
        let sc = sign_changes(&rec.final_state, 1e-12);
        let verdict = rec.classify(kappa).map(|c| c.verdict);
        ctx.param(
            &format!("stop_{tag}"),
            format!("{} at t = {}, residual {res:.3e}", rec.stop_reason, rec.final_time()),
        );
        ctx.check(
            &format!("{tag}.residual"),
            res <= 10.0 * tol,
            format!("{res:.3e} ({})", rec.stop_reason),
            format!("<= 10 tol = {:e}", 10.0 * tol),
        );
        ctx.check(
            &format!("{tag}.energy_above_ground"),
            e > e0,
            format!("E = {e:.9} ({:.4} E0)", e / e0),
            format!("> E0 = {e0:.9}"),
        );
        ctx.check(
            &format!("{tag}.extra_sign_changes"),
            sc >= ground_changes + 2,
            sc,
            format!(">= {}", ground_changes + 2),
        );
        ctx.check(
            &format!("{tag}.verdict_ground_j_ge_2"),
            matches!(verdict, Ok(Verdict::Ground { j, .. }) if j >= 2),
            verdict_of(rec, kappa),
            "ground[j >= 2]",
        );
    }
    ctx.svg("metastable.svg", &plot)?;
    Ok(())
}

fn ex4_2d(ctx: &mut Context) -> Result<()> {
    let (kappa, tau) = (0.1, 0.01);
    let n = ctx.pick(256, 64);
    let t_max = 300.0;
    let keep = ctx.pick(1e-12, 1e-11);
    let broken = ctx.pick(0.1, 0.05);
    let deadline = 1e4;
    let snaps = [0.0, 50.0, 100.0, 200.0, 300.0];
    ctx.param("kappa", kappa);
    ctx.param("tau", tau);
    ctx.param("modes", format!("{n}x{n}"));
    ctx.param("t_max", t_max);
    ctx.param("init", "sin(x) sin(y)");
    ctx.param("perturbation_unfiltered", format!("even, eps_star = {ROUNDOFF_EPS:e}"));
    ctx.param("snapshot_times", "0 50 100 200 300");
    ctx.param("filtered_defect_bound", keep);
    ctx.param("broken_defect_level", broken);

    let g = PeriodicGrid2D::new(n, n)?;
    let u0 = SpectralField2D::from_fn(&g, |x, y| x.sin() * y.sin());
    let base = imex(tau, kappa)?.with_t_max(t_max).with_record_every(10);
    let configs = [
        ("filtered", base.clone().with_filter(FilterSpec::Sym2d)),
        ("unfiltered", base.with_perturbation(ctx.even_noise())),
    ];
    let recs = configs
        .par_iter()
        .map(|(_, cfg)| Ok(run_2d(&u0, cfg, &snaps)?))
        .collect::<Result<Vec<_>>>()?;

    let mut defects = LinePlot::new("2D symmetry defects", "t", "defect").log_y();
    for ((tag, _), rec) in configs.iter().zip(&recs) {
        output::write_series_2d(&ctx.path(&format!("series_{tag}.csv")), rec)?;
        output::write_field_2d(&ctx.path(&format!("final_{tag}.csv")), &rec.final_state)?;
        for (t, u) in &rec.snapshots {
            let stem = format!("{tag}_t{t:06.1}");
            let mut w = output::create(&ctx.path(&format!("{stem}.pgm")))?;
            write_pgm(&mut w, u.values(), u.nx(), u.ny())?;
            w.flush()?;
            output::write_text(
                &ctx.path(&format!("{stem}.svg")),
                &heatmap_svg(&format!("{tag}, t = {t}"), u.values(), u.nx(), u.ny()),
            )?;
        }
        defects = defects
            .with(Series::line(format!("{tag} x-defect"), series(&rec.times, &rec.defect_x)))
            .with(Series::line(format!("{tag} y-defect"), series(&rec.times, &rec.defect_y)));
        ctx.param(&format!("stop_{tag}"), format!("{} at t = {}", rec.stop_reason, rec.final_time()));
    }
    ctx.svg("defects.svg", &defects)?;

    let max_filtered = recs[0].max_defect();
    ctx.check(
        "filtered_symmetric",
        max_filtered <= keep,
        format!("{max_filtered:.3e}"),
        format!("<= {keep:e}"),
    );
    let onset = recs[1].first_time_defect_exceeds(broken);
    ctx.check(
        "unfiltered_breaks",
        onset.is_some_and(|t| t < deadline),
        match onset {
            Some(t) => format!("defect > {broken} at t = {t}"),
            None => format!("defect stayed <= {broken} up to t = {}", recs[1].final_time()),
        },
        format!("defect > {broken} before t = {deadline:e}"),
    );
    Ok(())
}

fn amplification(ctx: &mut Context) -> Result<()> {
    let (u0, t_end) = (1e-15, 35.0);
    let steps = 40_000;
    ctx.param("u0", u0);
    ctx.param("t_end", t_end);
    ctx.param("euler_steps", steps);

    let trace = forward_euler_trace(u0, 40.0, steps);
    let mut w = output::create(&ctx.path("trace.csv"))?;
    writeln!(w, "t,exact,forward_euler")?;
    for &(t, ue) in trace.iter().step_by(100) {
        writeln!(w, "{t:.10e},{:.17e},{ue:.17e}", amplification_demo(u0, t))?;
    }
    w.flush()?;
    ctx.svg(
        "amplification.svg",
        &LinePlot::new("u' = u from u0 = 1e-15", "t", "u(t)")
            .log_y()
            .with(Series::line("exact", trace.iter().step_by(100).map(|&(t, _)| (t, amplification_demo(u0, t))).collect()))
            .with(Series::line("forward Euler", trace.iter().step_by(100).copied().collect()))
            .with(Series::line("u = 1", vec![(0.0, 1.0), (40.0, 1.0)])),
    )?;

    let u35 = amplification_demo(u0, t_end);
    let rel = (u35 - 1.5860).abs() / 1.5860;
    ctx.check("u35", rel <= 1e-3, format!("{u35:.6} (rel. deviation {rel:.1e})"), "1.5860 within 1e-3");
    let z = amplification_demo(0.0, t_end);
    ctx.check("exact_zero_stays_zero", z == 0.0, z, 0);
    Ok(())
}

fn scheme_comparison(ctx: &mut Context) -> Result<()> {
    let (kappa, tau, n) = (1.0, 0.01, 128);
    let t_max = ctx.pick(200.0, 80.0);
    ctx.param("kappa", kappa);
    ctx.param("tau", tau);
    ctx.param("modes", n);
    ctx.param("t_max", t_max);
    ctx.param("init", "sin");
    ctx.param("filter", FilterSpec::None);
    ctx.param("perturbation", format!("even, eps_star = {ROUNDOFF_EPS:e}, same seed for every scheme"));

    let g = grid(n)?;
    let u0 = InitialCondition::sin(1).sample(&g);
    let noise = ctx.even_noise();
    let recs = SchemeKind::ALL
        .par_iter()
        .map(|&kind| {
            let cfg = RunConfig::new(SchemeConfig::new(kind, tau, kappa)?)
                .with_perturbation(noise)
                .with_t_max(t_max)
                .with_record_every(10);
            Ok((kind, run(&u0, &cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut plot = LinePlot::new("parity defect without filter, kappa = 1", "t", "max|u(x) + u(-x)|").log_y();
    for (kind, rec) in &recs {
        let mut w = output::create(&ctx.path(&format!("defect_{kind}.csv")))?;
        rec.write_diagnostics_csv(&mut w)?;
        w.flush()?;
        output::write_series(&ctx.dir, &format!("series_{kind}.csv"), rec)?;
        plot = plot.with(Series::line(kind.to_string(), series(&rec.times, &rec.parity_defects)));

        let initial = rec.parity_defects[0];
        let peak = rec.parity_defects.iter().copied().fold(0.0, f64::max);
        ctx.param(&format!("stop_{kind}"), format!("{} at t = {}", rec.stop_reason, rec.final_time()));
        ctx.check(
            &format!("{kind}.defect_growth"),
            initial <= 1e-10 && peak >= 0.1,
            format!("defect {initial:.2e} at t = 0, peak {peak:.3e}"),
            "from <= 1e-10 to >= 0.1",
        );
    }
    ctx.svg("parity_defect.svg", &plot)?;
    Ok(())
}
