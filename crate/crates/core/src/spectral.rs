//! Periodic grid on `[-π, π)`, the discrete Fourier pair, spectral
//! differentiation and the energy / residual functionals.
//!
//! Coefficients use the normalization
//!
//! ```text
//! û(k) = (1/N) Σ_j u(x_j) exp(-i k x_j),     x_j = -π + 2πj/N,
//! ```
//!
//! stored in FFT order: index `i` holds wavenumber `i` for `i < N/2` and
//! `i - N` otherwise, so index `N/2` is the Nyquist mode `k = -N/2`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Uniform periodic grid with `N` nodes on `[-π, π)`.
#[derive(Clone)]
pub struct PeriodicGrid1D {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid1D").field("n", &self.n).finish()
    }
}

impl PartialEq for PeriodicGrid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl PeriodicGrid1D {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidModes(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the node at `x = 0`.
    pub fn zero_index(&self) -> usize {
        self.n / 2
    }

    /// Index of the node mirrored through the origin, `x_{N-j mod N} = -x_j`.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Wavenumber carried by storage index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.n)
    }

    /// Storage index of wavenumber `k`, for `-N/2 <= k < N/2`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(k.rem_euclid(self.n as i64) as usize)
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    pub fn forward(&self, values: &[f64]) -> Result<Vec<Complex64>> {
        if values.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: values.len(),
            });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (i, c) in buf.iter_mut().enumerate() {
            // exp(-i k x_j) = (-1)^k exp(-2πi kj/N) because x_0 = -π.
            *c *= if i % 2 == 0 { scale } else { -scale };
        }
        Ok(buf)
    }

    /// Synthesizes point values; the imaginary part of the synthesis is
    /// discarded.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: coeffs.len(),
            });
        }
        let mut buf: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c } else { -c })
            .collect();
        self.inv.process(&mut buf);
        Ok(buf.into_iter().map(|c| c.re).collect())
    }
}

pub(crate) fn wavenumber(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// A real periodic grid function together with its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField1D {
    grid: PeriodicGrid1D,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField1D {
    pub fn from_values(grid: &PeriodicGrid1D, values: Vec<f64>) -> Result<Self> {
        let coeffs = grid.forward(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    pub fn from_fn(grid: &PeriodicGrid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::from_values(grid, values).expect("length matches grid")
    }

    pub fn constant(grid: &PeriodicGrid1D, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.n_modes()]).expect("length matches grid")
    }

    pub fn zeros(grid: &PeriodicGrid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_coeffs(grid: &PeriodicGrid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        let values = grid.inverse(&coeffs)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            coeffs,
        })
    }

    /// Caller guarantees `values` and `coeffs` form a transform pair.
    pub(crate) fn from_parts(grid: &PeriodicGrid1D, values: Vec<f64>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_modes());
        debug_assert_eq!(coeffs.len(), grid.n_modes());
        Self {
            grid: grid.clone(),
            values,
            coeffs,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero outside the representable band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| nan_max(m, v.abs()))
    }

    pub fn value_at_zero(&self) -> f64 {
        self.values[self.grid.zero_index()]
    }

    /// `max_j |u(x_j) + u(-x_j)|`, zero for an exactly odd grid function.
    pub fn parity_defect(&self) -> f64 {
        (0..self.len())
            .map(|j| (self.values[j] + self.values[self.grid.mirror_index(j)]).abs())
            .fold(0.0, nan_max)
    }

    fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `a·self + b·other`, computed on both representations.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(u, v)| u * a + v * b)
            .collect();
        Ok(Self::from_parts(&self.grid, values, coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_parts(
            &self.grid,
            self.values.iter().map(|v| a * v).collect(),
            self.coeffs.iter().map(|c| c * a).collect(),
        )
    }

    /// Applies a Fourier multiplier `m(k)`; the Nyquist coefficient is zeroed.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex64) -> Self {
        let nyq = self.grid.nyquist_index();
        let coeffs: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * m(self.grid.wavenumber(i))
                }
            })
            .collect();
        Self::from_coeffs(&self.grid, coeffs).expect("length matches grid")
    }

    pub fn derivative(&self) -> Self {
        self.apply_multiplier(|k| Complex64::new(0.0, k as f64))
    }

    pub fn second_derivative(&self) -> Self {
        self.apply_multiplier(|k| Complex64::new(-((k * k) as f64), 0.0))
    }

    /// Periodic trapezoidal integral of a pointwise integrand.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.spacing() * self.values.iter().map(|&v| f(v)).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate(|v| v * v).sqrt()
    }

    /// `‖v‖_{H¹}² = ‖v‖₂² + ‖∂ₓv‖₂²`.
    pub fn h1_norm(&self) -> f64 {
        let dv = self.derivative();
        (self.l2_norm().powi(2) + dv.l2_norm().powi(2)).sqrt()
    }

    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let h = self.grid.spacing();
        Ok((h * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>())
        .sqrt())
    }

    pub fn max_distance(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, nan_max))
    }
}

/// Energy split into its gradient and double-well parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    pub gradient_part: f64,
    pub potential_part: f64,
}

/// `max` that propagates NaN, so a blown-up field never looks small.
pub(crate) fn nan_max(m: f64, v: f64) -> f64 {
    if v.is_nan() || v > m {
        v
    } else {
        m
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive and finite, got {kappa}")));
    }
    Ok(())
}

/// `E(u) = ∫ (κ²/2 (∂ₓu)² + ¼(1 - u²)²) dx` by the periodic trapezoidal rule.
pub fn energy(u: &SpectralField1D, kappa: f64) -> Result<EnergyReport> {
    check_kappa(kappa)?;
    let du = u.derivative();
    let gradient_part = 0.5 * kappa * kappa * du.integrate(|v| v * v);
    let potential_part = u.integrate(|v| 0.25 * (1.0 - v * v).powi(2));
    Ok(EnergyReport {
        total: gradient_part + potential_part,
        gradient_part,
        potential_part,
    })
}

/// `‖κ²u'' + u - u³‖_{L²}`.
pub fn residual(u: &SpectralField1D, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let k2 = kappa * kappa;
    let uxx = u.second_derivative();
    let h = u.grid().spacing();
    let sum: f64 = u
        .values()
        .iter()
        .zip(uxx.values())
        .map(|(&v, &d)| (k2 * d + v - v * v * v).powi(2))
        .sum();
    Ok((h * sum).sqrt())
}

/// Writes the `x,u` profile CSV with 17 significant digits.
pub fn write_profile_csv<W: Write>(u: &SpectralField1D, mut out: W) -> std::io::Result<()> {
    writeln!(out, "x,u")?;
    for (x, v) in u.grid().nodes().iter().zip(u.values()) {
        writeln!(out, "{x:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Reads an `x,u` profile CSV; the node count fixes the grid.
pub fn read_profile_csv<R: BufRead>(input: R) -> Result<SpectralField1D> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty profile".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    if header.trim() != "x,u" {
        return Err(Error::Parse(format!("expected header `x,u`, got `{header}`")));
    }
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (_, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 2)))?;
        values.push(
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?,
        );
    }
    let grid = PeriodicGrid1D::new(values.len())?;
    SpectralField1D::from_values(&grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> PeriodicGrid1D {
        PeriodicGrid1D::new(n).unwrap()
    }

    #[test]
    fn rejects_bad_mode_counts() {
        assert_eq!(PeriodicGrid1D::new(7).unwrap_err(), Error::InvalidModes(7));
        assert_eq!(PeriodicGrid1D::new(6).unwrap_err(), Error::InvalidModes(6));
        assert!(PeriodicGrid1D::new(8).is_ok());
    }

    #[test]
    fn nodes_start_at_minus_pi() {
        let g = grid(16);
        assert_eq!(g.node(0), -PI);
        assert_abs_diff_eq!(g.node(8), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.node(1) - g.node(0), g.spacing(), epsilon = 1e-15);
    }

    #[test]
    fn forward_rejects_length_mismatch() {
        let g = grid(16);
        assert_eq!(
            g.forward(&[0.0; 10]).unwrap_err(),
            Error::LengthMismatch {
                expected: 16,
                actual: 10
            }
        );
    }

    #[test]
    fn forward_constant() {
        let u = SpectralField1D::constant(&grid(32), 1.0);
        assert_abs_diff_eq!(u.coeff(0).re, 1.0, epsilon = 1e-15);
        for k in 1..16 {
            assert!(u.coeff(k).norm() < 1e-15);
            assert!(u.coeff(-k).norm() < 1e-15);
        }
    }

    #[test]
    fn forward_sine_and_cosine() {
        let g = grid(32);
        let s = SpectralField1D::from_fn(&g, f64::sin);
        assert_abs_diff_eq!(s.coeff(1).im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeff(-1).im, 0.5, epsilon = 1e-15);
        assert!(s.coeff(1).re.abs() < 1e-15);
        let c = SpectralField1D::from_fn(&g, |x| (2.0 * x).cos());
        assert_abs_diff_eq!(c.coeff(2).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.coeff(-2).re, 0.5, epsilon = 1e-15);
        for k in -16i64..16 {
            if k.abs() != 2 {
                assert!(c.coeff(k).norm() < 1e-15, "k = {k}");
            }
        }
    }

    #[test]
    fn second_derivative_of_modes() {
        let g = grid(64);
        let s3 = SpectralField1D::from_fn(&g, |x| (3.0 * x).sin());
        let d = s3.second_derivative();
        for (x, v) in g.nodes().iter().zip(d.values()) {
            assert_abs_diff_eq!(*v, -9.0 * (3.0 * x).sin(), epsilon = 1e-12);
        }
        let s = SpectralField1D::from_fn(&g, f64::sin).second_derivative();
        for (x, v) in g.nodes().iter().zip(s.values()) {
            assert_abs_diff_eq!(*v, -x.sin(), epsilon = 1e-12);
        }
        let c = SpectralField1D::constant(&g, 2.5).second_derivative();
        assert!(c.max_abs() < 1e-14);
    }

    #[test]
    fn second_derivative_zeroes_nyquist() {
        let g = grid(16);
        let alt = SpectralField1D::from_fn(&g, |x| (8.0 * x).cos());
        assert!(alt.coeff(-8).norm() > 0.9);
        assert_eq!(alt.second_derivative().max_abs(), 0.0);
    }

    #[test]
    fn energy_of_constants() {
        let g = grid(64);
        let e0 = energy(&SpectralField1D::zeros(&g), 0.3).unwrap();
        assert_abs_diff_eq!(e0.total, PI / 2.0, epsilon = 1e-14);
        assert_eq!(e0.gradient_part, 0.0);
        let e1 = energy(&SpectralField1D::constant(&g, 1.0), 0.3).unwrap();
        assert_eq!(e1.total, 0.0);
    }

    #[test]
    fn energy_of_sine() {
        // κ²/2 ∫cos² + ¼∫cos⁴ with ∫cos² = π and ∫cos⁴ = 3π/4 on [-π, π].
        let kappa: f64 = 0.9;
        let expected = 0.5 * kappa * kappa * PI + 0.25 * 0.75 * PI;
        let u = SpectralField1D::from_fn(&grid(64), f64::sin);
        let e = energy(&u, kappa).unwrap();
        assert_abs_diff_eq!(e.total, expected, epsilon = 1e-13);
        assert_abs_diff_eq!(e.total, 1.8614, epsilon = 1e-4);
        assert_abs_diff_eq!(e.total, e.gradient_part + e.potential_part, epsilon = 1e-15);
    }

    #[test]
    fn energy_rejects_nonpositive_kappa() {
        let u = SpectralField1D::zeros(&grid(8));
        assert!(energy(&u, 0.0).is_err());
        assert!(residual(&u, -1.0).is_err());
    }

    #[test]
    fn residual_of_constants_and_sine() {
        let g = grid(64);
        for c in [0.0, 1.0, -1.0] {
            assert!(residual(&SpectralField1D::constant(&g, c), 0.7).unwrap() < 1e-15);
        }
        // ∫(a sin x - sin³x)² = a²π - 2a·3π/4 + 5π/8 with a = 1 - κ².
        let kappa: f64 = 0.9;
        let a = 1.0 - kappa * kappa;
        let expected = (a * a * PI - 1.5 * a * PI + 0.625 * PI).sqrt();
        let r = residual(&SpectralField1D::from_fn(&g, f64::sin), kappa).unwrap();
        assert_abs_diff_eq!(r, expected, epsilon = 1e-12);
    }

    #[test]
    fn profile_csv_round_trip() {
        let g = grid(16);
        let u = SpectralField1D::from_fn(&g, |x| (x + 0.3).sin() / 3.0);
        let mut buf = Vec::new();
        write_profile_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,u\n"));
        assert_eq!(text.lines().count(), 17);
        let back = read_profile_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn read_profile_rejects_bad_header() {
        assert!(read_profile_csv(&b"a,b\n1,2\n"[..]).is_err());
    }
}
