//! Allen–Cahn on the square torus `[-π, π)²`: tensor-product grid, IMEX
//! stepping and the filtered / perturbed run driver.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dynamics::{RunConfig, StopReason};
use crate::error::{invalid, Error, Result};
use crate::noise::NoiseSource;
use crate::schemes::SchemeKind;
use crate::spectral::{check_kappa, nan_max, wavenumber};

/// Tensor grid with `nx × ny` nodes; values are stored row-major with the
/// `x` index outermost.
#[derive(Clone)]
pub struct PeriodicGrid2D {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid2D")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl PartialEq for PeriodicGrid2D {
    fn eq(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }
}

impl PeriodicGrid2D {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        for n in [nx, ny] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidModes(n));
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node_x(&self, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / self.nx as f64
    }

    pub fn node_y(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        (2.0 * PI / self.nx as f64) * (2.0 * PI / self.ny as f64)
    }

    /// Wavenumbers `(k₁, k₂)` of flat storage index `idx`.
    pub fn wavenumbers(&self, idx: usize) -> (i64, i64) {
        (wavenumber(idx / self.ny, self.nx), wavenumber(idx % self.ny, self.ny))
    }

    fn is_nyquist(&self, idx: usize) -> bool {
        idx / self.ny == self.nx / 2 || idx % self.ny == self.ny / 2
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let (nx, ny) = (self.nx, self.ny);
        if forward {
            self.fwd_y.process(buf);
        } else {
            self.inv_y.process(buf);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                t[j * nx + i] = buf[i * ny + j];
            }
        }
        if forward {
            self.fwd_x.process(&mut t);
        } else {
            self.inv_x.process(&mut t);
        }
        for i in 0..nx {
            for j in 0..ny {
                buf[i * ny + j] = t[j * nx + i];
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Result<Vec<Complex64>> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: values.len(),
            });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        let scale = 1.0 / self.len() as f64;
        for (idx, c) in buf.iter_mut().enumerate() {
            let parity = (idx / self.ny + idx % self.ny) % 2;
            *c *= if parity == 0 { scale } else { -scale };
        }
        Ok(buf)
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: coeffs.len(),
            });
        }
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if (idx / self.ny + idx % self.ny).is_multiple_of(2) {
                    c
                } else {
                    -c
                }
            })
            .collect();
        self.transform(&mut buf, false);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }
}

/// Real field on the 2D tensor grid with its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    grid: PeriodicGrid2D,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField2D {
    pub fn from_values(grid: &PeriodicGrid2D, values: Vec<f64>) -> Result<Self> {
        let coeffs = grid.forward(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    pub fn from_fn(grid: &PeriodicGrid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                values.push(f(grid.node_x(i), grid.node_y(j)));
            }
        }
        Self::from_values(grid, values).expect("length matches grid")
    }

    pub fn constant(grid: &PeriodicGrid2D, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()]).expect("length matches grid")
    }

    pub fn zeros(grid: &PeriodicGrid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_coeffs(grid: &PeriodicGrid2D, coeffs: Vec<Complex64>) -> Result<Self> {
        let values = grid.inverse(&coeffs)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    pub(crate) fn from_parts(grid: &PeriodicGrid2D, values: Vec<f64>, coeffs: Vec<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            values,
            coeffs,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid2D {
        &self.grid
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.ny + j]
    }

    /// Coefficient of `(k₁, k₂)`; zero outside the representable band.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let (nx, ny) = (self.grid.nx as i64, self.grid.ny as i64);
        if k1 < -nx / 2 || k1 >= nx / 2 || k2 < -ny / 2 || k2 >= ny / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let i = k1.rem_euclid(nx) as usize;
        let j = k2.rem_euclid(ny) as usize;
        self.coeffs[i * self.grid.ny + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| nan_max(m, v.abs()))
    }

    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, nan_max))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_parts(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_parts(
            &self.grid,
            self.values.iter().map(|v| a * v).collect(),
            self.coeffs.iter().map(|c| c * a).collect(),
        )
    }

    /// `max |u(x, y) + u(-x, y)|` over the grid.
    pub fn defect_x(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            let mi = (nx - i) % nx;
            for j in 0..ny {
                worst = worst.max((self.values[i * ny + j] + self.values[mi * ny + j]).abs());
            }
        }
        worst
    }

    /// `max |u(x, y) + u(x, -y)|` over the grid.
    pub fn defect_y(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                let mj = (ny - j) % ny;
                worst = worst.max((self.values[i * ny + j] + self.values[i * ny + mj]).abs());
            }
        }
        worst
    }

    fn apply_multiplier(&self, m: impl Fn(i64, i64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if self.grid.is_nyquist(idx) {
                    Complex64::new(0.0, 0.0)
                } else {
                    let (k1, k2) = self.grid.wavenumbers(idx);
                    c * m(k1, k2)
                }
            })
            .collect();
        Self::from_coeffs(&self.grid, coeffs).expect("length matches grid")
    }

    pub fn dx(&self) -> Self {
        self.apply_multiplier(|k1, _| Complex64::new(0.0, k1 as f64))
    }

    pub fn dy(&self) -> Self {
        self.apply_multiplier(|_, k2| Complex64::new(0.0, k2 as f64))
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.cell_area() * self.values.iter().map(|&v| f(v)).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate(|v| v * v).sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        let gx = self.dx().l2_norm();
        let gy = self.dy().l2_norm();
        (self.l2_norm().powi(2) + gx * gx + gy * gy).sqrt()
    }
}

/// `E(u) = ∫∫ (κ²/2 |∇u|² + ¼(1 - u²)²) dx dy`.
pub fn energy_2d(u: &SpectralField2D, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let gx = u.dx();
    let gy = u.dy();
    let grad: f64 = gx
        .values
        .iter()
        .zip(&gy.values)
        .map(|(a, b)| a * a + b * b)
        .sum::<f64>()
        * u.grid.cell_area();
    Ok(0.5 * kappa * kappa * grad + u.integrate(|v| 0.25 * (1.0 - v * v).powi(2)))
}

/// One IMEX step `w = (1 - κ²τΔ)⁻¹[u - τ(u³ - u)]`.
pub fn imex1_step_2d(u: &SpectralField2D, tau: f64, kappa: f64) -> Result<SpectralField2D> {
    check_kappa(kappa)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let grid = &u.grid;
    let rhs: Vec<f64> = u.values.iter().map(|&v| v - tau * (v * v * v - v)).collect();
    let mut coeffs = grid.forward(&rhs)?;
    let k2 = kappa * kappa;
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let (a, b) = grid.wavenumbers(idx);
        *c /= 1.0 + k2 * tau * ((a * a + b * b) as f64);
    }
    SpectralField2D::from_coeffs(grid, coeffs)
}

/// Diagnostics of a 2D run, recorded every `record_every` steps.
#[derive(Debug, Clone)]
pub struct RunRecord2D {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs: Vec<f64>,
    pub defect_x: Vec<f64>,
    pub defect_y: Vec<f64>,
    pub snapshots: Vec<(f64, SpectralField2D)>,
    pub final_state: SpectralField2D,
    pub stop_reason: StopReason,
    pub steps: usize,
}

impl RunRecord2D {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("record holds the initial state")
    }

    pub fn max_defect(&self) -> f64 {
        self.defect_x
            .iter()
            .chain(&self.defect_y)
            .fold(0.0, |m, &d| nan_max(m, d))
    }

    /// First recorded time at which either symmetry defect exceeds `level`.
    pub fn first_time_defect_exceeds(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(self.defect_x.iter().zip(&self.defect_y))
            .find(|(_, (dx, dy))| dx.max(**dy) > level)
            .map(|(t, _)| *t)
    }
}

/// Runs the 2D IMEX loop: step, inject noise, filter, record.
///
/// Only the `imex1` scheme is available in 2D. `snapshot_times` are rounded
/// to the nearest step.
pub fn run_2d(u0: &SpectralField2D, cfg: &RunConfig, snapshot_times: &[f64]) -> Result<RunRecord2D> {
    cfg.validate()?;
    if cfg.scheme.kind != SchemeKind::Imex1 {
        return Err(invalid("scheme", "2D runs support imex1 only"));
    }
    let tau = cfg.scheme.tau;
    let kappa = cfg.scheme.kappa;
    let mut noise = cfg.perturbation.as_ref().map(NoiseSource::new);
    let grid = u0.grid().clone();

    let perturb = |v: SpectralField2D, noise: &mut Option<NoiseSource>| -> Result<SpectralField2D> {
        let v = match noise {
            Some(src) => v.add(&src.sample_2d(&grid)?)?,
            None => v,
        };
        cfg.filter.apply_2d(&v)
    };

    let mut v = perturb(u0.clone(), &mut noise)?;
    let max_steps = cfg.max_steps();
    let snapshot_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|t| (t / tau).round().max(0.0) as usize)
        .collect();

    let mut rec = RunRecord2D {
        times: Vec::new(),
        energies: Vec::new(),
        residuals: Vec::new(),
        max_abs: Vec::new(),
        defect_x: Vec::new(),
        defect_y: Vec::new(),
        snapshots: Vec::new(),
        final_state: v.clone(),
        stop_reason: StopReason::TMaxReached,
        steps: 0,
    };
    let record = |rec: &mut RunRecord2D, t: f64, v: &SpectralField2D, res: f64| -> Result<()> {
        rec.times.push(t);
        rec.energies.push(energy_2d(v, kappa)?);
        rec.residuals.push(res);
        rec.max_abs.push(v.max_abs());
        rec.defect_x.push(v.defect_x());
        rec.defect_y.push(v.defect_y());
        Ok(())
    };
    record(&mut rec, 0.0, &v, f64::NAN)?;
    if snapshot_steps.contains(&0) {
        rec.snapshots.push((0.0, v.clone()));
    }

    let mut n = 0;
    while n < max_steps {
        let w = imex1_step_2d(&v, tau, kappa)?;
        let res = w.max_distance(&v)? / tau;
        if !res.is_finite() {
            rec.stop_reason = StopReason::SchemeError;
            break;
        }
        v = perturb(w, &mut noise)?;
        n += 1;
        let t = n as f64 * tau;
        let done = res < cfg.tol;
        if snapshot_steps.contains(&n) {
            rec.snapshots.push((t, v.clone()));
        }
        if done || n % cfg.record_every == 0 || n == max_steps {
            record(&mut rec, t, &v, res)?;
        }
        if done {
            rec.stop_reason = StopReason::TolReached;
            break;
        }
    }
    rec.steps = n;
    rec.final_state = v;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{imex1_step, SchemeConfig};
    use crate::spectral::{PeriodicGrid1D, SpectralField1D};
    use approx::assert_abs_diff_eq;

    #[test]
    fn transform_of_sine_product() {
        let g = PeriodicGrid2D::new(16, 8).unwrap();
        let u = SpectralField2D::from_fn(&g, |x, y| x.sin() * y.sin());
        assert_abs_diff_eq!(u.coeff(1, 1).re, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(u.coeff(-1, 1).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(u.coeff(-1, -1).re, -0.25, epsilon = 1e-15);
        let back = SpectralField2D::from_coeffs(&g, u.coeffs().to_vec()).unwrap();
        assert!(back.max_distance(&u).unwrap() < 1e-15);
    }

    #[test]
    fn energy_of_constants_2d() {
        let g = PeriodicGrid2D::new(16, 16).unwrap();
        assert_abs_diff_eq!(
            energy_2d(&SpectralField2D::zeros(&g), 0.1).unwrap(),
            PI * PI,
            epsilon = 1e-13
        );
        assert_eq!(energy_2d(&SpectralField2D::constant(&g, 1.0), 0.1).unwrap(), 0.0);
    }

    #[test]
    fn imex_2d_fixes_constants() {
        let g = PeriodicGrid2D::new(16, 16).unwrap();
        for c in [0.0, 1.0, -1.0] {
            let u = SpectralField2D::constant(&g, c);
            let w = imex1_step_2d(&u, 0.01, 0.1).unwrap();
            assert!(w.max_distance(&u).unwrap() < 1e-15);
        }
    }

    #[test]
    fn imex_2d_reduces_to_1d_for_y_independent_fields() {
        let (nx, ny) = (32, 16);
        let g = PeriodicGrid2D::new(nx, ny).unwrap();
        let f = |x: f64| x.sin() + 0.3 * (2.0 * x).cos();
        let u2 = SpectralField2D::from_fn(&g, |x, _| f(x));
        let w2 = imex1_step_2d(&u2, 0.01, 0.4).unwrap();
        let g1 = PeriodicGrid1D::new(nx).unwrap();
        let u1 = SpectralField1D::from_fn(&g1, f);
        let w1 = imex1_step(&u1, &SchemeConfig::imex1(0.01, 0.4).unwrap());
        for i in 0..nx {
            for j in 0..ny {
                assert!((w2.value(i, j) - w1.values()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn defects_vanish_for_sine_product() {
        let g = PeriodicGrid2D::new(16, 16).unwrap();
        let u = SpectralField2D::from_fn(&g, |x, y| x.sin() * y.sin());
        assert!(u.defect_x() < 1e-15 && u.defect_y() < 1e-15);
        let v = SpectralField2D::from_fn(&g, |x, y| x.cos() * y.sin());
        assert!(v.defect_x() > 1.0);
    }
}
