//! Machine-error model: random perturbations `εⁿ` with `‖εⁿ‖_{H¹} = ε*`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ac2d::{PeriodicGrid2D, SpectralField2D};
use crate::error::{invalid, Error, Result};
use crate::filters::{odd_filter_1d, sym_filter_2d};
use crate::spectral::{PeriodicGrid1D, SpectralField1D};

/// Symmetry class of the injected noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseParity {
    /// Sine content only; invisible to the odd filter's kernel.
    Odd,
    /// Cosine content only, including the mean.
    #[default]
    Even,
    Unconstrained,
}

impl fmt::Display for NoiseParity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseParity::Odd => "odd",
            NoiseParity::Even => "even",
            NoiseParity::Unconstrained => "unconstrained",
        })
    }
}

impl FromStr for NoiseParity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "odd" => Ok(NoiseParity::Odd),
            "even" => Ok(NoiseParity::Even),
            "unconstrained" | "any" => Ok(NoiseParity::Unconstrained),
            other => Err(Error::Parse(format!("unknown noise parity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    /// H¹ norm of every injected field.
    pub eps_star: f64,
    pub parity: NoiseParity,
    /// Noise lives on wavenumbers `|k| <= max_mode` (per axis in 2D).
    pub max_mode: u32,
    pub seed: u64,
}

impl PerturbationConfig {
    pub const DEFAULT_MAX_MODE: u32 = 8;

    pub fn new(eps_star: f64, parity: NoiseParity, seed: u64) -> Self {
        Self {
            eps_star,
            parity,
            max_mode: Self::DEFAULT_MAX_MODE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_star.is_finite() && self.eps_star >= 0.0) {
            return Err(invalid("eps_star", format!("must be >= 0, got {}", self.eps_star)));
        }
        if self.max_mode == 0 {
            return Err(invalid("max_mode", "noise band needs at least one mode"));
        }
        Ok(())
    }
}

/// Deterministic stream of perturbation fields.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    cfg: PerturbationConfig,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(cfg: &PerturbationConfig) -> Self {
        Self {
            cfg: *cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        }
    }

    pub fn config(&self) -> &PerturbationConfig {
        &self.cfg
    }

    fn coeff(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    pub fn sample_1d(&mut self, grid: &PeriodicGrid1D) -> Result<SpectralField1D> {
        let band = (self.cfg.max_mode as usize).min(grid.n_modes() / 2 - 1);
        let parity = self.cfg.parity;
        let mut cos_amp = vec![0.0; band + 1];
        let mut sin_amp = vec![0.0; band + 1];
        for k in 0..=band {
            if parity != NoiseParity::Odd {
                cos_amp[k] = self.coeff();
            }
            if parity != NoiseParity::Even && k > 0 {
                sin_amp[k] = self.coeff();
            }
        }
        let mut field = SpectralField1D::from_fn(grid, |x| {
            (0..=band)
                .map(|k| {
                    let kx = k as f64 * x;
                    cos_amp[k] * kx.cos() + sin_amp[k] * kx.sin()
                })
                .sum()
        });
        if parity == NoiseParity::Odd {
            field = odd_filter_1d(&field);
        }
        Ok(rescale(field.h1_norm(), self.cfg.eps_star, |a| field.scale(a)))
    }

    pub fn sample_2d(&mut self, grid: &PeriodicGrid2D) -> Result<SpectralField2D> {
        let bx = (self.cfg.max_mode as usize).min(grid.nx() / 2 - 1);
        let by = (self.cfg.max_mode as usize).min(grid.ny() / 2 - 1);
        let parity = self.cfg.parity;
        // (k1, k2, amplitude, x-phase, y-phase) per mode pair.
        let mut terms = Vec::with_capacity((bx + 1) * (by + 1));
        for k1 in 0..=bx {
            for k2 in 0..=by {
                let a = self.coeff();
                let (px, py) = match parity {
                    NoiseParity::Even => (0.0, 0.0),
                    NoiseParity::Odd => (-std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2),
                    NoiseParity::Unconstrained => (
                        self.rng.gen_range(0.0..std::f64::consts::TAU),
                        self.rng.gen_range(0.0..std::f64::consts::TAU),
                    ),
                };
                terms.push((k1 as f64, k2 as f64, a, px, py));
            }
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut values = vec![0.0; nx * ny];
        let mut cx = vec![0.0; nx];
        let mut cy = vec![0.0; ny];
        for &(k1, k2, a, px, py) in &terms {
            for (i, c) in cx.iter_mut().enumerate() {
                *c = a * (k1 * grid.node_x(i) + px).cos();
            }
            for (j, c) in cy.iter_mut().enumerate() {
                *c = (k2 * grid.node_y(j) + py).cos();
            }
            for (row, &c) in values.chunks_mut(ny).zip(&cx) {
                for (v, &d) in row.iter_mut().zip(&cy) {
                    *v += c * d;
                }
            }
        }
        let mut field = SpectralField2D::from_values(grid, values)?;
        if parity == NoiseParity::Odd {
            field = sym_filter_2d(&field);
        }
        Ok(rescale(field.h1_norm(), self.cfg.eps_star, |a| field.scale(a)))
    }
}

fn rescale<T>(norm: f64, target: f64, scale: impl FnOnce(f64) -> T) -> T {
    if norm > 0.0 {
        scale(target / norm)
    } else {
        scale(0.0)
    }
}
