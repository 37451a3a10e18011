//! Symmetry-preserving Fourier filters.
//!
//! Every filter is an orthogonal projection in coefficient space followed by
//! one synthesis. The synthesized values are then written in exactly odd form
//! (`u(-x_j) = -u(x_j)` bit for bit), which only removes transform round-off
//! since the projected coefficients already describe an odd function.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::ac2d::SpectralField2D;
use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralField1D;

/// Filter applied once per time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterSpec {
    #[default]
    None,
    /// Sine-series projection: `û(0) = 0`, `Re û(k) = 0`.
    Odd,
    /// Sine-series projection restricted to multiples of the gap `L`.
    Gap(u32),
    /// Two-dimensional sine-sine projection.
    Sym2d,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if let FilterSpec::Gap(0) = self {
            return Err(invalid("filter", "spectral gap L must be >= 1"));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        !matches!(self, FilterSpec::None)
    }

    pub fn apply_1d(&self, u: &SpectralField1D) -> Result<SpectralField1D> {
        match *self {
            FilterSpec::None => Ok(u.clone()),
            FilterSpec::Odd => Ok(odd_filter_1d(u)),
            FilterSpec::Gap(l) => gap_filter_1d(u, l),
            FilterSpec::Sym2d => Err(invalid("filter", "sym2d applies to 2D fields only")),
        }
    }

    pub fn apply_2d(&self, u: &SpectralField2D) -> Result<SpectralField2D> {
        match *self {
            FilterSpec::None => Ok(u.clone()),
            FilterSpec::Sym2d => Ok(sym_filter_2d(u)),
            _ => Err(invalid("filter", format!("`{self}` applies to 1D fields only"))),
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterSpec::None => write!(f, "none"),
            FilterSpec::Odd => write!(f, "odd"),
            FilterSpec::Gap(l) => write!(f, "gap:{l}"),
            FilterSpec::Sym2d => write!(f, "sym2d"),
        }
    }
}

impl FromStr for FilterSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = match s.trim() {
            "none" => FilterSpec::None,
            "odd" => FilterSpec::Odd,
            "sym2d" => FilterSpec::Sym2d,
            other => {
                let l = other
                    .strip_prefix("gap:")
                    .ok_or_else(|| Error::Parse(format!("unknown filter `{other}`")))?;
                FilterSpec::Gap(
                    l.parse()
                        .map_err(|_| Error::Parse(format!("bad spectral gap `{l}`")))?,
                )
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Keeps only the sine content of `u`.
pub fn odd_filter_1d(u: &SpectralField1D) -> SpectralField1D {
    let coeffs = project_sine(u.coeffs(), 1);
    synthesize_odd(u, coeffs)
}

/// Keeps only `sin(L m x)`, `m >= 1`.
pub fn gap_filter_1d(u: &SpectralField1D, gap: u32) -> Result<SpectralField1D> {
    FilterSpec::Gap(gap).validate()?;
    let coeffs = project_sine(u.coeffs(), gap as usize);
    Ok(synthesize_odd(u, coeffs))
}

fn project_sine(coeffs: &[Complex64], gap: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let half = n / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..half {
        if k % gap != 0 {
            continue;
        }
        // Im û(k) = -Im û(-k) for a real field; averaging the pair makes the
        // relation exact.
        let b = 0.5 * (coeffs[k].im - coeffs[n - k].im);
        out[k] = Complex64::new(0.0, b);
        out[n - k] = Complex64::new(0.0, -b);
    }
    out
}

fn synthesize_odd(u: &SpectralField1D, coeffs: Vec<Complex64>) -> SpectralField1D {
    let grid = u.grid();
    let mut values = grid.inverse(&coeffs).expect("length matches grid");
    make_odd(&mut values);
    SpectralField1D::from_parts(grid, values, coeffs)
}

/// Rewrites grid values (nodes `x_j = -π + 2πj/N`) into exactly odd form.
pub(crate) fn make_odd(values: &mut [f64]) {
    let n = values.len();
    values[0] = 0.0;
    values[n / 2] = 0.0;
    for j in 1..n / 2 {
        let a = 0.5 * (values[j] - values[n - j]);
        values[j] = a;
        values[n - j] = -a;
    }
}

/// The four-step 2D filter: zero the axes, drop imaginary parts, then
/// antisymmetrize in `k₁` and afterwards in `k₂`.
pub fn sym_filter_2d(u: &SpectralField2D) -> SpectralField2D {
    let (nx, ny) = (u.nx(), u.ny());
    let idx = |i: usize, j: usize| i * ny + j;
    let src = u.coeffs();
    let mut c = vec![Complex64::new(0.0, 0.0); nx * ny];
    for i in 1..nx {
        for j in 1..ny {
            c[idx(i, j)] = Complex64::new(src[idx(i, j)].re, 0.0);
        }
    }
    let mut tmp = vec![Complex64::new(0.0, 0.0); nx * ny];
    for i in 0..nx {
        let mi = (nx - i) % nx;
        for j in 0..ny {
            tmp[idx(i, j)] = (c[idx(i, j)] - c[idx(mi, j)]) * 0.5;
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            let mj = (ny - j) % ny;
            c[idx(i, j)] = (tmp[idx(i, j)] - tmp[idx(i, mj)]) * 0.5;
        }
    }
    let mut values = u.grid().inverse(&c).expect("length matches grid");
    make_odd_2d(&mut values, nx, ny);
    SpectralField2D::from_parts(u.grid(), values, c)
}

/// Rewrites tensor-grid values into exact antisymmetry in `x` and in `y`.
pub(crate) fn make_odd_2d(values: &mut [f64], nx: usize, ny: usize) {
    let mut column = vec![0.0; nx];
    for j in 0..ny {
        for i in 0..nx {
            column[i] = values[i * ny + j];
        }
        make_odd(&mut column);
        for i in 0..nx {
            values[i * ny + j] = column[i];
        }
    }
    for row in values.chunks_mut(ny) {
        make_odd(row);
    }
}
