//! Time-stepping schemes for `∂ₜu = κ²∂ₓₓu - (u³ - u)`.
//!
//! `imex1` is the reference scheme; implicit Euler, BDF2 with extrapolation
//! and Strang splitting are standard companions used to show that the loss of
//! parity is not specific to one discretization.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectral::{check_kappa, PeriodicGrid1D, SpectralField1D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchemeKind {
    #[default]
    Imex1,
    ImplicitEuler,
    Bdf2x,
    Strang,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Imex1,
        SchemeKind::ImplicitEuler,
        SchemeKind::Bdf2x,
        SchemeKind::Strang,
    ];
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Imex1 => "imex1",
            SchemeKind::ImplicitEuler => "ieuler",
            SchemeKind::Bdf2x => "bdf2x",
            SchemeKind::Strang => "strang",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "imex1" => Ok(SchemeKind::Imex1),
            "ieuler" | "implicit_euler" => Ok(SchemeKind::ImplicitEuler),
            "bdf2x" => Ok(SchemeKind::Bdf2x),
            "strang" => Ok(SchemeKind::Strang),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub tau: f64,
    pub kappa: f64,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind, tau: f64, kappa: f64) -> Result<Self> {
        let cfg = Self { kind, tau, kappa };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn imex1(tau: f64, kappa: f64) -> Result<Self> {
        Self::new(SchemeKind::Imex1, tau, kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        check_kappa(self.kappa)
    }
}

/// Inner tolerance of the implicit Euler fixed-point solve (max-norm).
pub const IMPLICIT_EULER_TOL: f64 = 1e-13;
/// Iteration cap of the implicit Euler fixed-point solve.
pub const IMPLICIT_EULER_MAX_ITER: usize = 100;

/// Per-run stepping state: cached Fourier symbols and, for BDF2, the
/// previous input state.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SchemeConfig,
    grid: PeriodicGrid1D,
    /// `1 / (1 + κ²τk²)`
    inv_symbol: Vec<f64>,
    /// `1 / (3 + 2κ²τk²)`
    bdf_symbol: Vec<f64>,
    /// `exp(-κ²k²τ/2)`
    half_heat: Vec<f64>,
    prev: Option<SpectralField1D>,
}

impl Stepper {
    pub fn new(cfg: SchemeConfig, grid: &PeriodicGrid1D) -> Result<Self> {
        cfg.validate()?;
        let n = grid.n_modes();
        let k2t = cfg.kappa * cfg.kappa * cfg.tau;
        let ksq: Vec<f64> = (0..n).map(|i| (grid.wavenumber(i).pow(2)) as f64).collect();
        Ok(Self {
            cfg,
            grid: grid.clone(),
            inv_symbol: ksq.iter().map(|k| 1.0 / (1.0 + k2t * k)).collect(),
            bdf_symbol: ksq.iter().map(|k| 1.0 / (3.0 + 2.0 * k2t * k)).collect(),
            half_heat: ksq.iter().map(|k| (-0.5 * k2t * k).exp()).collect(),
            prev: None,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// The cached `1 / (1 + κ²τk²)` multipliers in storage order.
    pub fn inverse_symbol(&self) -> &[f64] {
        &self.inv_symbol
    }

    /// Forgets the BDF2 history.
    pub fn reset(&mut self) {
        self.prev = None;
    }

    fn check_grid(&self, u: &SpectralField1D) -> Result<()> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Advances `u` by one step of the configured scheme.
    pub fn step(&mut self, u: &SpectralField1D) -> Result<SpectralField1D> {
        self.check_grid(u)?;
        match self.cfg.kind {
            SchemeKind::Imex1 => Ok(self.imex1(u)),
            SchemeKind::ImplicitEuler => self.implicit_euler(u),
            SchemeKind::Strang => self.strang(u),
            SchemeKind::Bdf2x => {
                let w = match self.prev.take() {
                    Some(prev) => self.bdf2x(u, &prev),
                    None => self.imex1(u),
                };
                self.prev = Some(u.clone());
                Ok(w)
            }
        }
    }

    fn solve_diagonal(&self, rhs: &[f64]) -> SpectralField1D {
        let mut coeffs = self.grid.forward(rhs).expect("length matches grid");
        for (c, m) in coeffs.iter_mut().zip(&self.inv_symbol) {
            *c *= *m;
        }
        SpectralField1D::from_coeffs(&self.grid, coeffs).expect("length matches grid")
    }

    /// `w = (1 - κ²τ∂ₓₓ)⁻¹[u - τ(u³ - u)]`.
    pub fn imex1(&self, u: &SpectralField1D) -> SpectralField1D {
        let tau = self.cfg.tau;
        let rhs: Vec<f64> = u.values().iter().map(|&v| v - tau * (v * v * v - v)).collect();
        self.solve_diagonal(&rhs)
    }

    /// Backward Euler, solved by fixed-point iteration on the IMEX map.
    pub fn implicit_euler(&self, u: &SpectralField1D) -> Result<SpectralField1D> {
        let tau = self.cfg.tau;
        let mut w = self.imex1(u);
        let mut last_update = f64::INFINITY;
        for _ in 0..IMPLICIT_EULER_MAX_ITER {
            let rhs: Vec<f64> = u
                .values()
                .iter()
                .zip(w.values())
                .map(|(&v, &x)| v - tau * (x * x * x - x))
                .collect();
            let next = self.solve_diagonal(&rhs);
            last_update = next.max_distance(&w)?;
            w = next;
            if last_update <= IMPLICIT_EULER_TOL {
                return Ok(w);
            }
        }
        Err(Error::InnerSolveFailed {
            iterations: IMPLICIT_EULER_MAX_ITER,
            last_update,
        })
    }

    /// `(3w - 4uₙ + uₙ₋₁)/(2τ) = κ²∂ₓₓw - f(2uₙ - uₙ₋₁)`.
    pub fn bdf2x(&self, u_now: &SpectralField1D, u_prev: &SpectralField1D) -> SpectralField1D {
        let tau = self.cfg.tau;
        let rhs: Vec<f64> = u_now
            .values()
            .iter()
            .zip(u_prev.values())
            .map(|(&a, &b)| {
                let e = 2.0 * a - b;
                4.0 * a - b - 2.0 * tau * (e * e * e - e)
            })
            .collect();
        let mut coeffs = self.grid.forward(&rhs).expect("length matches grid");
        for (c, m) in coeffs.iter_mut().zip(&self.bdf_symbol) {
            *c *= *m;
        }
        SpectralField1D::from_coeffs(&self.grid, coeffs).expect("length matches grid")
    }

    fn half_diffusion(&self, coeffs: &mut [Complex64]) {
        for (c, m) in coeffs.iter_mut().zip(&self.half_heat) {
            *c *= *m;
        }
    }

    /// Half diffusion, exact reaction over `τ`, half diffusion.
    pub fn strang(&self, u: &SpectralField1D) -> Result<SpectralField1D> {
        let mut coeffs = u.coeffs().to_vec();
        self.half_diffusion(&mut coeffs);
        let mid = self.grid.inverse(&coeffs)?;
        let reacted = mid
            .into_iter()
            .map(|v| reaction_flow(v, self.cfg.tau))
            .collect::<Result<Vec<_>>>()?;
        let mut coeffs = self.grid.forward(&reacted)?;
        self.half_diffusion(&mut coeffs);
        SpectralField1D::from_coeffs(&self.grid, coeffs)
    }
}

/// Exact flow of `u' = u - u³` over time `t`:
/// `u / sqrt(u² + (1 - u²) e^{-2t})`.
pub fn reaction_flow(u: f64, t: f64) -> Result<f64> {
    let decay = (-2.0 * t).exp();
    let denom = u * u + (1.0 - u * u) * decay;
    if !(denom > 0.0) {
        return Err(Error::ReactionBlowUp(u));
    }
    Ok(u / denom.sqrt())
}

pub fn imex1_step(u: &SpectralField1D, cfg: &SchemeConfig) -> SpectralField1D {
    Stepper::new(*cfg, u.grid())
        .expect("validated scheme config")
        .imex1(u)
}

pub fn implicit_euler_step(u: &SpectralField1D, cfg: &SchemeConfig) -> Result<SpectralField1D> {
    Stepper::new(*cfg, u.grid())?.implicit_euler(u)
}

pub fn bdf2x_step(
    u_now: &SpectralField1D,
    u_prev: &SpectralField1D,
    cfg: &SchemeConfig,
) -> Result<SpectralField1D> {
    if u_now.grid() != u_prev.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(Stepper::new(*cfg, u_now.grid())?.bdf2x(u_now, u_prev))
}

pub fn strang_step(u: &SpectralField1D, cfg: &SchemeConfig) -> Result<SpectralField1D> {
    Stepper::new(*cfg, u.grid())?.strang(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::odd_filter_1d;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> PeriodicGrid1D {
        PeriodicGrid1D::new(n).unwrap()
    }

    fn cfg(kind: SchemeKind, tau: f64, kappa: f64) -> SchemeConfig {
        SchemeConfig::new(kind, tau, kappa).unwrap()
    }

    #[test]
    fn parse_schemes() {
        for k in SchemeKind::ALL {
            assert_eq!(k.to_string().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("sav1".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::imex1(0.0, 0.9).is_err());
        assert!(SchemeConfig::imex1(0.01, 0.0).is_err());
        assert!(SchemeConfig::imex1(f64::NAN, 0.9).is_err());
    }

    #[test]
    fn inverse_symbol_range() {
        let s = Stepper::new(cfg(SchemeKind::Imex1, 0.01, 0.9), &grid(64)).unwrap();
        assert_eq!(s.inverse_symbol()[0], 1.0);
        assert!(s.inverse_symbol().iter().all(|&m| m > 0.0 && m <= 1.0));
    }

    #[test]
    fn all_schemes_fix_constant_states() {
        let g = grid(64);
        for kind in SchemeKind::ALL {
            let mut st = Stepper::new(cfg(kind, 0.01, 0.9), &g).unwrap();
            for c in [0.0, 1.0, -1.0] {
                st.reset();
                let u = SpectralField1D::constant(&g, c);
                let w1 = st.step(&u).unwrap();
                let w2 = st.step(&w1).unwrap();
                assert_eq!(w2.values(), u.values(), "{kind} at {c}");
            }
        }
    }

    #[test]
    fn imex_matches_single_mode_formula() {
        // For u = a sin x, the cubic produces sin x and sin 3x components.
        let g = grid(32);
        let (tau, kappa, a) = (0.1, 0.5, 0.3);
        let u = SpectralField1D::from_fn(&g, |x| a * x.sin());
        let w = imex1_step(&u, &cfg(SchemeKind::Imex1, tau, kappa));
        // a³ sin³x = a³(3 sin x - sin 3x)/4
        let c1 = (a + tau * a - tau * 0.75 * a * a * a) / (1.0 + kappa * kappa * tau);
        let c3 = (tau * 0.25 * a * a * a) / (1.0 + 9.0 * kappa * kappa * tau);
        for (x, v) in g.nodes().iter().zip(w.values()) {
            assert_abs_diff_eq!(*v, c1 * x.sin() + c3 * (3.0 * x).sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn imex_commutes_with_odd_filter_on_odd_data() {
        let g = grid(128);
        let c = cfg(SchemeKind::Imex1, 0.01, 0.9);
        let u = odd_filter_1d(&SpectralField1D::from_fn(&g, |x| x.sin() + 0.3 * (2.0 * x).sin()));
        let a = odd_filter_1d(&imex1_step(&u, &c));
        let b = imex1_step(&odd_filter_1d(&u), &c);
        assert!(a.max_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn implicit_euler_is_first_order_close_to_imex() {
        // ‖IE(u) - IMEX(u)‖ = O(τ²): halving τ divides the gap by ~4.
        let g = grid(64);
        let u = SpectralField1D::from_fn(&g, f64::sin);
        let gap = |tau: f64| {
            let c = cfg(SchemeKind::ImplicitEuler, tau, 0.9);
            let ie = implicit_euler_step(&u, &c).unwrap();
            ie.max_distance(&imex1_step(&u, &c)).unwrap()
        };
        let ratio = gap(0.002) / gap(0.001);
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn implicit_euler_reports_nonconvergence() {
        let g = grid(32);
        let u = SpectralField1D::from_fn(&g, |x| 3.0 * x.sin());
        let err = implicit_euler_step(&u, &cfg(SchemeKind::ImplicitEuler, 2.0, 0.9)).unwrap_err();
        assert!(matches!(err, Error::InnerSolveFailed { .. }));
    }

    #[test]
    fn reaction_flow_matches_closed_form() {
        let expected = 0.5 / (0.25 + 0.75 * (-2.0f64).exp()).sqrt();
        assert_abs_diff_eq!(reaction_flow(0.5, 1.0).unwrap(), expected, epsilon = 1e-15);
        assert_eq!(reaction_flow(1.0, 3.0).unwrap(), 1.0);
        assert_eq!(reaction_flow(0.0, 3.0).unwrap(), 0.0);
        assert!(reaction_flow(2.0, 1.0).unwrap() > 1.0);
        assert!(reaction_flow(f64::NAN, 1.0).is_err());
    }
}
