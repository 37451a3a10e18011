//! Command-line surface of the `acfilter` binary.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use acfilter_core::{
    classify_steady, energy, profile, read_profile_csv, residual, run, run_2d, sign_changes, sweep_kappa,
    write_profile_csv, write_sweep_csv, FilterSpec, InitialCondition, NoiseParity, PerturbationConfig,
    PeriodicGrid1D, PeriodicGrid2D, RunConfig, SchemeConfig, SchemeKind, SpectralField2D,
};
use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use crate::experiments::{self, Settings, DEFAULT_SEED, REGISTRY, ROUNDOFF_EPS};
use crate::output::{self, sidecar_path, Meta};
use crate::plot::{heatmap_svg, write_pgm, LinePlot, Series};

#[derive(Debug, Parser)]
#[command(name = "acfilter", version, about = "Spectral Allen-Cahn solver with parity-preserving filters")]
pub struct Cli {
    /// Output directory. `ground-state` also accepts a `.csv` file path.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Smaller grids and shorter horizons, with looser tolerances.
    #[arg(long, global = true)]
    pub fast: bool,

    /// Seed of every injected noise stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the odd ground state U_kappa and write its profile.
    GroundState(GroundStateArgs),
    /// Run the 1D dynamics.
    Simulate(SimulateArgs),
    /// Run the 2D dynamics.
    Simulate2d(Simulate2dArgs),
    /// Run independent simulations over a list of kappa values.
    Sweep(SweepArgs),
    /// Match a steady profile (CSV `x,u`) against the catalogue.
    Classify(ClassifyArgs),
    /// Run named experiments; `all` runs the whole registry.
    Experiment(ExperimentArgs),
    /// Print the experiment registry.
    ListExperiments,
}

#[derive(Debug, Args)]
pub struct GroundStateArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 256)]
    pub modes: usize,
}

/// Noise injection. Unfiltered runs inject even noise of size 1e-13 unless
/// `--no-inject` is given; filtered runs inject only with `--perturb`.
#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// H1 norm of every injected field.
    #[arg(long, value_name = "EPS_STAR")]
    pub perturb: Option<f64>,
    #[arg(long, default_value = "even")]
    pub perturb_parity: NoiseParity,
    /// Disable injection, leaving native round-off as the only perturbation.
    #[arg(long, conflicts_with = "perturb")]
    pub no_inject: bool,
}

impl NoiseArgs {
    pub fn resolve(&self, filter: FilterSpec, seed: u64) -> Result<Option<PerturbationConfig>> {
        if self.no_inject {
            return Ok(None);
        }
        let eps = match (self.perturb, filter.is_active()) {
            (Some(e), _) => e,
            (None, false) => ROUNDOFF_EPS,
            (None, true) => return Ok(None),
        };
        let cfg = PerturbationConfig::new(eps, self.perturb_parity, seed);
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value_t = 256)]
    pub modes: usize,
    #[arg(long, default_value_t = 1e5)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// imex1, ieuler, bdf2x or strang.
    #[arg(long, default_value = "imex1")]
    pub scheme: SchemeKind,
    /// none, odd or gap:L.
    #[arg(long, default_value = "none")]
    pub filter: FilterSpec,
    /// sin, sin:L or mix:K1,K2,..., optionally prefixed by `A*`.
    #[arg(long, default_value = "sin")]
    pub init: InitialCondition,
    #[arg(long, default_value_t = 100)]
    pub record_every: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct Simulate2dArgs {
    #[arg(long, default_value_t = 0.1)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    /// Grid size as NX,NY.
    #[arg(long, default_value = "64,64", value_parser = parse_modes_2d)]
    pub modes: (usize, usize),
    #[arg(long, default_value_t = 300.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// none or sym2d.
    #[arg(long, default_value = "none")]
    pub filter: FilterSpec,
    #[arg(long, default_value_t = 10)]
    pub record_every: usize,
    /// Times at which PGM and SVG snapshots are written.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated kappa values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub kappas: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub tau: f64,
    #[arg(long, default_value_t = 256)]
    pub modes: usize,
    #[arg(long, default_value_t = 1e5)]
    pub tmax: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value = "imex1")]
    pub scheme: SchemeKind,
    #[arg(long, default_value = "odd")]
    pub filter: FilterSpec,
    #[arg(long, default_value = "sin")]
    pub init: InitialCondition,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// CSV with header `x,u`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(required = true, value_name = "NAME")]
    pub names: Vec<String>,
}

fn parse_modes_2d(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected NX,NY, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad grid size `{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Runs the parsed command line. Returns `false` when an experiment
/// assertion failed.
pub fn execute(cli: Cli) -> Result<bool> {
    let out = cli.out.clone();
    match cli.command {
        Command::GroundState(a) => ground_state(&a, &out).map(|_| true),
        Command::Simulate(a) => simulate(&a, &out, cli.seed).map(|_| true),
        Command::Simulate2d(a) => simulate2d(&a, &out, cli.seed).map(|_| true),
        Command::Sweep(a) => sweep(&a, &out, cli.seed).map(|_| true),
        Command::Classify(a) => classify(&a).map(|_| true),
        Command::Experiment(a) => {
            let settings = Settings::new(out).fast(cli.fast).seed(cli.seed);
            experiment(&a, &settings)
        }
        Command::ListExperiments => {
            for e in REGISTRY {
                println!("{:<20} {}", e.name, e.summary);
            }
            Ok(true)
        }
    }
}

fn ground_state(a: &GroundStateArgs, out: &Path) -> Result<()> {
    let csv = if out.extension().is_some_and(|e| e == "csv") {
        out.to_path_buf()
    } else {
        out.join("ground_state.csv")
    };
    let g = PeriodicGrid1D::new(a.modes)?;
    let gs = profile(a.kappa, &g)?;
    let mut w = output::create(&csv)?;
    write_profile_csv(&gs.profile, &mut w)?;
    w.flush()?;
    let mut meta = Meta::new();
    meta.set("kappa", a.kappa)
        .set("modes", a.modes)
        .set("n_peak", format!("{:.17e}", gs.n_peak))
        .set("deficit", format!("{:.17e}", gs.deficit))
        .set("energy0", format!("{:.17e}", gs.energy0))
        .set("energy_from_profile", format!("{:.17e}", gs.energy_from_profile()));
    meta.write(&sidecar_path(&csv))?;
    println!(
        "kappa = {}: N = {:.15}, E0 = {:.15} -> {}",
        a.kappa,
        gs.n_peak,
        gs.energy0,
        csv.display()
    );
    Ok(())
}

fn simulate(a: &SimulateArgs, out: &Path, seed: u64) -> Result<()> {
    let g = PeriodicGrid1D::new(a.modes)?;
    let perturbation = a.noise.resolve(a.filter, seed)?;
    let cfg = RunConfig::new(SchemeConfig::new(a.scheme, a.tau, a.kappa)?)
        .with_filter(a.filter)
        .with_t_max(a.tmax)
        .with_tol(a.tol)
        .with_record_every(a.record_every)
        .with_perturbation(perturbation);
    let u0 = a.init.sample(&g);
    let rec = run(&u0, &cfg)?;

    output::write_series(out, "series.csv", &rec)?;
    let mut w = output::create(&out.join("diagnostics.csv"))?;
    rec.write_diagnostics_csv(&mut w)?;
    w.flush()?;
    let mut w = output::create(&out.join("final.csv"))?;
    write_profile_csv(&rec.final_state, &mut w)?;
    w.flush()?;
    let final_pts: Vec<(f64, f64)> = g.nodes().into_iter().zip(rec.final_state.values().iter().copied()).collect();
    let init_pts: Vec<(f64, f64)> = g.nodes().into_iter().zip(u0.values().iter().copied()).collect();
    output::write_text(
        &out.join("final.svg"),
        &LinePlot::new(format!("kappa = {}, {} , filter {}", a.kappa, a.scheme, a.filter), "x", "u")
            .with(Series::line("u0", init_pts))
            .with(Series::line("final", final_pts))
            .to_svg(),
    )?;

    let (verdict, match_error) = match rec.classify(a.kappa) {
        Ok(c) => (c.verdict.to_string(), format!("{:.6e}", c.match_error)),
        Err(e) => (format!("unclassified ({e})"), "n/a".to_string()),
    };
    let mut meta = Meta::new();
    meta.set("kappa", a.kappa)
        .set("tau", a.tau)
        .set("modes", a.modes)
        .set("t_max", a.tmax)
        .set("tol", a.tol)
        .set("scheme", a.scheme)
        .set("filter", a.filter)
        .set("init", &a.init)
        .set("record_every", a.record_every)
        .set(
            "perturbation",
            match &perturbation {
                Some(p) => format!("{} eps_star = {:e} seed = {}", p.parity, p.eps_star, p.seed),
                None => "none".into(),
            },
        )
        .set("stop_reason", rec.stop_reason)
        .set("steps", rec.steps)
        .set("final_time", rec.final_time())
        .set("final_energy", format!("{:.17e}", rec.final_energy()))
        .set("max_abs_final", format!("{:.17e}", rec.final_state.max_abs()))
        .set("verdict", &verdict)
        .set("match_error", match_error);
    if let Some(e) = &rec.error {
        meta.set("error", e);
    }
    meta.write(&out.join("meta.txt"))?;
    println!(
        "{} at t = {} after {} steps; max|u| = {:.12}; verdict {verdict}",
        rec.stop_reason,
        rec.final_time(),
        rec.steps,
        rec.final_state.max_abs()
    );
    Ok(())
}

fn simulate2d(a: &Simulate2dArgs, out: &Path, seed: u64) -> Result<()> {
    let (nx, ny) = a.modes;
    let g = PeriodicGrid2D::new(nx, ny)?;
    let perturbation = a.noise.resolve(a.filter, seed)?;
    let cfg = RunConfig::new(SchemeConfig::imex1(a.tau, a.kappa)?)
        .with_filter(a.filter)
        .with_t_max(a.tmax)
        .with_tol(a.tol)
        .with_record_every(a.record_every)
        .with_perturbation(perturbation);
    let u0 = SpectralField2D::from_fn(&g, |x, y| x.sin() * y.sin());
    let rec = run_2d(&u0, &cfg, &a.snapshots)?;

    output::write_series_2d(&out.join("series.csv"), &rec)?;
    output::write_field_2d(&out.join("final.csv"), &rec.final_state)?;
    for (t, u) in &rec.snapshots {
        let stem = format!("snapshot_t{t:06.1}");
        let mut w = output::create(&out.join(format!("{stem}.pgm")))?;
        write_pgm(&mut w, u.values(), nx, ny)?;
        w.flush()?;
        output::write_text(
            &out.join(format!("{stem}.svg")),
            &heatmap_svg(&format!("t = {t}"), u.values(), nx, ny),
        )?;
    }
    let mut meta = Meta::new();
    meta.set("kappa", a.kappa)
        .set("tau", a.tau)
        .set("modes", format!("{nx},{ny}"))
        .set("t_max", a.tmax)
        .set("tol", a.tol)
        .set("filter", a.filter)
        .set("init", "sin(x) sin(y)")
        .set(
            "perturbation",
            match &perturbation {
                Some(p) => format!("{} eps_star = {:e} seed = {}", p.parity, p.eps_star, p.seed),
                None => "none".into(),
            },
        )
        .set("stop_reason", rec.stop_reason)
        .set("steps", rec.steps)
        .set("final_time", rec.final_time())
        .set("max_defect", format!("{:.6e}", rec.max_defect()))
        .set("max_abs_final", format!("{:.17e}", rec.final_state.max_abs()));
    meta.write(&out.join("meta.txt"))?;
    println!(
        "{} at t = {}; max symmetry defect {:.3e}",
        rec.stop_reason,
        rec.final_time(),
        rec.max_defect()
    );
    Ok(())
}

fn sweep(a: &SweepArgs, out: &Path, seed: u64) -> Result<()> {
    let g = PeriodicGrid1D::new(a.modes)?;
    let cfg = RunConfig::new(SchemeConfig::new(a.scheme, a.tau, a.kappas[0])?)
        .with_filter(a.filter)
        .with_t_max(a.tmax)
        .with_tol(a.tol)
        .with_perturbation(a.noise.resolve(a.filter, seed)?);
    let rows = sweep_kappa(&a.kappas, &cfg, &a.init.sample(&g));
    let mut w = output::create(&out.join("sweep.csv"))?;
    write_sweep_csv(&rows, &mut w)?;
    w.flush()?;
    output::write_text(
        &out.join("sweep.svg"),
        &LinePlot::new(format!("max|u_inf| against kappa, filter {}", a.filter), "kappa", "max|u_inf|")
            .with(Series::markers(
                "max|u_inf|",
                rows.iter().map(|r| (r.kappa, r.max_abs_final)).collect(),
            ))
            .to_svg(),
    )?;
    for r in &rows {
        println!("kappa = {:<8} max|u| = {:.12}  {}", r.kappa, r.max_abs_final, r.verdict);
    }
    Ok(())
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display()))?;
    let u = read_profile_csv(BufReader::new(file))?;
    println!("modes: {}", u.len());
    println!("energy: {:.15}", energy(&u, a.kappa)?.total);
    println!("steady_residual: {:.6e}", residual(&u, a.kappa)?);
    println!("sign_changes: {}", sign_changes(&u, 1e-12));
    let c = classify_steady(&u, a.kappa)?;
    println!("verdict: {}", c.verdict);
    println!("match_error: {:.6e}", c.match_error);
    Ok(())
}

fn experiment(a: &ExperimentArgs, settings: &Settings) -> Result<bool> {
    let names: Vec<&str> = if a.names.iter().any(|n| n == "all") {
        REGISTRY.iter().map(|e| e.name).collect()
    } else {
        a.names.iter().map(String::as_str).collect()
    };
    for n in &names {
        experiments::find(n)?;
    }
    let mut all_passed = true;
    let mut errors = Vec::new();
    for (name, result) in experiments::run_many(&names, settings) {
        match result {
            Ok(report) => {
                let status = if report.passed() { "pass" } else { "FAIL" };
                println!("[{status}] {name} -> {}", report.dir.display());
                for c in &report.checks {
                    let tag = if c.passed { "ok  " } else { "FAIL" };
                    println!("    {tag} {}: measured {}; expected {}", c.name, c.measured, c.expected);
                }
                all_passed &= report.passed();
            }
            Err(e) => errors.push(format!("{name}: {e:#}")),
        }
    }
    if !errors.is_empty() {
        bail!("experiments failed to run: {}", errors.join("; "));
    }
    Ok(all_passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_2d_parser() {
        assert_eq!(parse_modes_2d("64,32"), Ok((64, 32)));
        assert!(parse_modes_2d("64").is_err());
        assert!(parse_modes_2d("a,b").is_err());
    }

    #[test]
    fn unfiltered_runs_inject_by_default() {
        let n = NoiseArgs {
            perturb: None,
            perturb_parity: NoiseParity::Even,
            no_inject: false,
        };
        let p = n.resolve(FilterSpec::None, 5).unwrap().unwrap();
        assert_eq!((p.eps_star, p.seed), (ROUNDOFF_EPS, 5));
        assert!(n.resolve(FilterSpec::Odd, 5).unwrap().is_none());
        let off = NoiseArgs { no_inject: true, ..n.clone() };
        assert!(off.resolve(FilterSpec::None, 5).unwrap().is_none());
        let explicit = NoiseArgs { perturb: Some(1e-12), ..n };
        assert_eq!(explicit.resolve(FilterSpec::Odd, 5).unwrap().unwrap().eps_star, 1e-12);
    }

    #[test]
    fn cli_parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["acfilter", "experiment", "amplification_demo", "--fast", "--seed", "3"]).unwrap();
        assert!(cli.fast);
        assert_eq!(cli.seed, 3);
        let cli = Cli::try_parse_from([
            "acfilter", "simulate", "--kappa", "0.9", "--filter", "gap:2", "--init", "0.5*mix:1,3", "--scheme", "strang",
        ])
        .unwrap();
        match cli.command {
            Command::Simulate(a) => {
                assert_eq!(a.filter, FilterSpec::Gap(2));
                assert_eq!(a.scheme, SchemeKind::Strang);
                assert_eq!(a.init, InitialCondition::mix(&[1, 3]).scaled(0.5));
            }
            other => panic!("parsed {other:?}"),
        }
        assert!(Cli::try_parse_from(["acfilter", "simulate", "--kappa", "0.9", "--filter", "bogus"]).is_err());
    }
}
