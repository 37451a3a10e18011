//! The odd zero-up ground state `U_κ`, its peak value `N_κ`, its energy and
//! the classification of steady states against the catalogue
//! `{0, ±1, ±U_{jκ}(jx + c)}`.
//!
//! Everything is computed from the first integral of `κ²u'' + u - u³ = 0`.
//! With `U = N sin θ` the profile on `[0, π/2]` is
//!
//! ```text
//! x(θ) = √2 κ ∫₀^θ dψ / √(2 - N²(1 + sin²ψ)),
//! ```
//!
//! and the peak is fixed by `x(π/2) = π/2`, i.e. `g(N) = π / (2√2 κ)`.
//!
//! Internally the peak is carried as the deficit `m = 1 - N²` and the angle
//! as `φ = π/2 - θ`, so that the integrand reads `1/√(2m + (1 - m) sin²φ)`.
//! For small `κ` the deficit underflows any representation of `N` near one
//! (`m ≈ 1e-97` at `κ = 0.01`) while it is still an ordinary `f64`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spectral::{energy, PeriodicGrid1D, SpectralField1D};

const GL_POINTS: usize = 20;
/// Largest supported `ln(1/m)`; keeps the deficit a normal `f64`.
const MAX_LOG_DEFICIT: f64 = 700.0;
/// Tolerance on `|g(N) - π/(2√2κ)|`, relative once the target exceeds one.
pub const PEAK_SOLVE_TOL: f64 = 1e-12;
/// L² distance under which a field is reported as a constant state.
pub const CONSTANT_MATCH_TOL: f64 = 1e-4;
/// Largest L² mismatch accepted for a catalogue member.
pub const CLASSIFY_MATCH_TOL: f64 = 1e-2;

fn rule() -> GaussLegendre {
    GaussLegendre::new(GL_POINTS)
}

/// `1/√(2m + (1 - m) sin²φ)`
fn integrand(phi: f64, m: f64) -> f64 {
    let s = phi.sin();
    1.0 / (2.0 * m + (1.0 - m) * s * s).sqrt()
}

/// Panel edges on `[0, π/2]` in `φ`: four uniform panels, with the first one
/// refined geometrically down to the width `√(2m)` of the peak region.
fn panel_edges(m: f64) -> Vec<f64> {
    let peak_width = if m < 1.0 {
        (2.0 * m / (1.0 - m)).sqrt()
    } else {
        f64::INFINITY
    };
    let mut edges = vec![0.0];
    let mut inner = Vec::new();
    let mut e = FRAC_PI_2 / 8.0;
    while e > 0.25 * peak_width {
        inner.push(e);
        e *= 0.5;
    }
    if !inner.is_empty() {
        inner.push(e);
    }
    inner.reverse();
    edges.extend(inner);
    for q in 1..=4 {
        let v = FRAC_PI_2 * q as f64 / 4.0;
        if v > *edges.last().expect("nonempty") {
            edges.push(v);
        }
    }
    edges
}

/// `g` in terms of the deficit `m = 1 - N² ∈ (0, 1]`.
pub fn g_of_deficit(m: f64) -> f64 {
    let gl = rule();
    gl.integrate_panels(&panel_edges(m), |phi| integrand(phi, m))
}

/// `m·(-dg/dm) = ½ m ∫ (1 + cos²φ) D^{-3/2} dφ`, the derivative of `g`
/// with respect to `ln(1/m)`.
fn dg_dlog(m: f64) -> f64 {
    let gl = rule();
    let d = gl.integrate_panels(&panel_edges(m), |phi| {
        let s = phi.sin();
        let c = phi.cos();
        let den = 2.0 * m + (1.0 - m) * s * s;
        (1.0 + c * c) / (den * den.sqrt())
    });
    0.5 * m * d
}

/// `g(N) = ∫₀^{π/2} dθ / √(2 - N²(1 + sin²θ))` for `0 <= N < 1`.
pub fn g_of_n(n: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&n) {
        return Err(Error::PeakOutOfRange(n));
    }
    Ok(g_of_deficit((1.0 - n) * (1.0 + n)))
}

/// Target value `π / (2√2 κ)` of `g`.
pub fn g_target(kappa: f64) -> f64 {
    PI / (2.0 * SQRT_2 * kappa)
}

fn check_subcritical(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::KappaOutOfRange(kappa));
    }
    Ok(())
}

/// Peak value of `U_κ` in both representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// `N_κ`; rounds to 1 for `κ` below about 0.057.
    pub n: f64,
    /// `1 - N_κ²`, accurate for all supported `κ`.
    pub deficit: f64,
}

/// Solves `g(N) = π/(2√2κ)` by Newton's method in `y = ln(1/m)`,
/// falling back to bisection whenever an iterate leaves the bracket.
pub fn solve_peak(kappa: f64) -> Result<Peak> {
    check_subcritical(kappa)?;
    let target = g_target(kappa);
    let tol = PEAK_SOLVE_TOL * target.max(1.0);
    let h = |y: f64| g_of_deficit((-y).exp()) - target;

    let (mut lo, mut hi) = (0.0_f64, MAX_LOG_DEFICIT);
    if h(hi) < 0.0 {
        return Err(invalid(
            "kappa",
            format!("{kappa} is too small: the peak deficit underflows f64"),
        ));
    }
    // g ≈ ln(2√2) + y/2 for small m.
    let mut y = (2.0 * (target - (2.0 * SQRT_2).ln())).clamp(0.5, MAX_LOG_DEFICIT - 1.0);
    let mut best = f64::INFINITY;
    for _ in 0..200 {
        let r = h(y);
        best = best.min(r.abs());
        if r.abs() <= tol {
            let deficit = (-y).exp();
            return Ok(Peak {
                n: (-(-y).exp_m1()).sqrt(),
                deficit,
            });
        }
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let slope = dg_dlog((-y).exp());
        let next = y - r / slope;
        y = if next > lo && next < hi && slope > 0.0 {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 4.0 * f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    Err(Error::PeakSolveFailed { residual: best })
}

/// `N_κ ∈ (0, 1)`.
pub fn solve_n_peak(kappa: f64) -> Result<f64> {
    solve_peak(kappa).map(|p| p.n)
}

/// The unique `m ≥ 1` with `1/(m+1) <= κ < 1/m`.
pub fn m_kappa(kappa: f64) -> Result<u32> {
    check_subcritical(kappa)?;
    let mut m = ((1.0 / kappa).floor() as u32).max(1);
    while kappa < 1.0 / (m as f64 + 1.0) {
        m += 1;
    }
    while m > 1 && kappa >= 1.0 / m as f64 {
        m -= 1;
    }
    Ok(m)
}

/// Pointwise evaluator of `U_κ` on the whole torus.
#[derive(Debug, Clone)]
pub struct GroundCurve {
    kappa: f64,
    peak: Peak,
    edges: Vec<f64>,
    /// `G(φ)` at each panel edge.
    cumulative: Vec<f64>,
    gl: GaussLegendre,
}

impl GroundCurve {
    pub fn new(kappa: f64) -> Result<Self> {
        let peak = solve_peak(kappa)?;
        let m = peak.deficit;
        let gl = rule();
        let edges = panel_edges(m);
        let mut cumulative = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in edges.windows(2) {
            acc += gl.integrate(w[0], w[1], |phi| integrand(phi, m));
            cumulative.push(acc);
        }
        Ok(Self {
            kappa,
            peak,
            edges,
            cumulative,
            gl,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn peak(&self) -> Peak {
        self.peak
    }

    pub fn n_peak(&self) -> f64 {
        self.peak.n
    }

    /// `g(N_κ)` as accumulated over the panels.
    pub fn g_total(&self) -> f64 {
        *self.cumulative.last().expect("nonempty")
    }

    /// `x(θ)` of the parametrization; `x(π/2) = π/2` up to the solve tolerance.
    pub fn x_of_theta(&self, theta: f64) -> f64 {
        let phi = FRAC_PI_2 - theta;
        SQRT_2 * self.kappa * (self.g_total() - self.big_g(phi))
    }

    /// Panel edges mapped to `(θ, x)` pairs, increasing in `θ`.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let theta: Vec<f64> = self.edges.iter().rev().map(|phi| FRAC_PI_2 - phi).collect();
        let x = self
            .cumulative
            .iter()
            .rev()
            .map(|g| FRAC_PI_2 - SQRT_2 * self.kappa * g)
            .collect();
        (theta, x)
    }

    /// `G(φ) = ∫₀^φ integrand`.
    fn big_g(&self, phi: f64) -> f64 {
        let m = self.peak.deficit;
        let p = match self.edges.iter().rposition(|&e| e <= phi) {
            Some(p) => p.min(self.edges.len() - 2),
            None => 0,
        };
        self.cumulative[p] + self.gl.integrate(self.edges[p], phi, |t| integrand(t, m))
    }

    /// Angle `φ ∈ [0, π/2]` with `G(φ) = target`.
    fn invert(&self, target: f64) -> f64 {
        let m = self.peak.deficit;
        let last = self.edges.len() - 1;
        if target >= self.cumulative[last] {
            return FRAC_PI_2;
        }
        if target <= 0.0 {
            return 0.0;
        }
        let p = self
            .cumulative
            .partition_point(|&g| g <= target)
            .saturating_sub(1)
            .min(last - 1);
        let (a, b) = (self.edges[p], self.edges[p + 1]);
        let (ga, gb) = (self.cumulative[p], self.cumulative[p + 1]);
        let (mut lo, mut hi) = (a, b);
        let mut phi = a + (b - a) * (target - ga) / (gb - ga);
        for _ in 0..60 {
            let r = ga + self.gl.integrate(a, phi, |t| integrand(t, m)) - target;
            if r > 0.0 {
                hi = phi;
            } else {
                lo = phi;
            }
            let next = phi - r / integrand(phi, m);
            let next = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if (next - phi).abs() <= 1e-16 * phi.abs().max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
                return next;
            }
            phi = next;
        }
        phi
    }

    /// `U_κ` on `[0, π/2]`.
    fn eval_quarter(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let target = (FRAC_PI_2 - y) / (SQRT_2 * self.kappa);
        let phi = self.invert(target);
        self.peak.n * phi.cos()
    }

    /// `U_κ(x)` for any real `x`: odd, `2π`-periodic and symmetric about `π/2`.
    pub fn eval(&self, x: f64) -> f64 {
        let mut sign = if x < 0.0 { -1.0 } else { 1.0 };
        let mut y = x.abs() % (2.0 * PI);
        if y > PI {
            y = 2.0 * PI - y;
            sign = -sign;
        }
        if y > FRAC_PI_2 {
            y = PI - y;
        }
        sign * self.eval_quarter(y)
    }

    /// `E_κ⁽⁰⁾ = ∫ (½(U² - 1)² - ¼(N² - 1)²) dx`, integrated in `φ`.
    pub fn energy(&self) -> f64 {
        let m = self.peak.deficit;
        let quarter = self.gl.integrate_panels(&self.edges, |phi| {
            let (s, c) = phi.sin_cos();
            let one_minus_u2 = s * s + m * c * c;
            (0.5 * one_minus_u2 * one_minus_u2 - 0.25 * m * m) * integrand(phi, m)
        });
        4.0 * SQRT_2 * self.kappa * quarter
    }

    /// Samples `U_κ` on a grid.
    pub fn sample(&self, grid: &PeriodicGrid1D) -> SpectralField1D {
        SpectralField1D::from_fn(grid, |x| self.eval(x))
    }
}

/// Ground state sampled on a grid together with its scalar data.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub kappa: f64,
    pub n_peak: f64,
    /// `1 - N_κ²`
    pub deficit: f64,
    pub theta_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    pub profile: SpectralField1D,
    pub energy0: f64,
    curve: GroundCurve,
}

impl GroundState {
    pub fn curve(&self) -> &GroundCurve {
        &self.curve
    }

    /// Energy of the sampled profile through the general energy functional;
    /// agrees with `energy0` once the grid resolves the profile.
    pub fn energy_from_profile(&self) -> f64 {
        energy(&self.profile, self.kappa)
            .expect("kappa is positive")
            .total
    }
}

/// Builds `U_κ` and samples it on `grid`.
pub fn profile(kappa: f64, grid: &PeriodicGrid1D) -> Result<GroundState> {
    let curve = GroundCurve::new(kappa)?;
    let (theta_nodes, x_nodes) = curve.nodes();
    Ok(GroundState {
        kappa,
        n_peak: curve.peak.n,
        deficit: curve.peak.deficit,
        theta_nodes,
        x_nodes,
        profile: curve.sample(grid),
        energy0: curve.energy(),
        curve,
    })
}

pub fn ground_energy(gs: &GroundState) -> f64 {
    gs.energy0
}

/// Outcome of matching a steady state against the catalogue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Zero,
    PlusOne,
    MinusOne,
    /// `sign · U_{jκ}(jx + shift)` with `shift ∈ [-π/2, π/2)`.
    ///
    /// `-U(y) = U(y + π)`, so each state has two `(sign, shift)` forms; the
    /// one with the shift in the half-open half period is reported.
    Ground { j: u32, sign: i8, shift: f64 },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Zero => write!(f, "zero"),
            Verdict::PlusOne => write!(f, "plus_one"),
            Verdict::MinusOne => write!(f, "minus_one"),
            Verdict::Ground { j, sign, shift } => {
                let s = if *sign > 0 { '+' } else { '-' };
                write!(f, "ground[j={j} sign={s} c={shift:.6}]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// L² distance between the field and the reported catalogue member.
    pub match_error: f64,
}

/// Number of sign changes of `u` around the circle, ignoring samples with
/// `|u| <= floor · max|u|`. The ground state `U_κ` has two.
pub fn sign_changes(u: &SpectralField1D, floor: f64) -> usize {
    let cut = floor * u.max_abs();
    let signs: Vec<bool> = u
        .values()
        .iter()
        .filter(|v| v.abs() > cut)
        .map(|&v| v > 0.0)
        .collect();
    if signs.is_empty() {
        return 0;
    }
    (0..signs.len())
        .filter(|&i| signs[i] != signs[(i + 1) % signs.len()])
        .count()
}

/// Puts `(sign, c)` into canonical form: `c ∈ [-π/2, π/2)`.
pub fn canonical_shift(sign: i8, c: f64) -> (i8, f64) {
    let mut c = (c + PI).rem_euclid(2.0 * PI) - PI;
    let mut sign = sign;
    if c >= FRAC_PI_2 {
        c -= PI;
        sign = -sign;
    } else if c < -FRAC_PI_2 {
        c += PI;
        sign = -sign;
    }
    (sign, c)
}

/// Matches a near-steady `u` against `{0, ±1, ±U_{jκ}(jx + c)}`.
///
/// The caller is expected to pass a field with small residual.
pub fn classify_steady(u: &SpectralField1D, kappa: f64) -> Result<Classification> {
    crate::spectral::check_kappa(kappa)?;
    let grid = u.grid();
    let consts = [
        (Verdict::Zero, 0.0),
        (Verdict::PlusOne, 1.0),
        (Verdict::MinusOne, -1.0),
    ];
    let mut best_const = (Verdict::Zero, f64::INFINITY);
    for (v, c) in consts {
        let d = u.l2_distance(&SpectralField1D::constant(grid, c))?;
        if d < best_const.1 {
            best_const = (v, d);
        }
    }
    if best_const.1 <= CONSTANT_MATCH_TOL {
        return Ok(Classification {
            verdict: best_const.0,
            match_error: best_const.1,
        });
    }
    if kappa >= 1.0 {
        return Err(Error::NonConstantAboveThreshold(kappa));
    }

    let mut best: Option<Classification> = None;
    for j in 1..=m_kappa(kappa)? {
        let cand = fit_candidate(u, j, kappa)?;
        if best.is_none_or(|b| cand.match_error < b.match_error) {
            best = Some(cand);
        }
    }
    let best = best.expect("m_kappa >= 1");
    if best.match_error > CLASSIFY_MATCH_TOL {
        return Err(Error::Unclassified {
            best: best.match_error.min(best_const.1),
            threshold: CLASSIFY_MATCH_TOL,
        });
    }
    Ok(best)
}

/// Best `U_{jκ}(j(x + d))` for continuous `d`: circular cross-correlation on
/// grid shifts, parabolic refinement, then golden-section search on the L²
/// mismatch.
fn fit_candidate(u: &SpectralField1D, j: u32, kappa: f64) -> Result<Classification> {
    let curve = GroundCurve::new(j as f64 * kappa)?;
    let grid = u.grid();
    let n = grid.n_modes();
    let h = grid.spacing();
    let xs = grid.nodes();
    let jf = j as f64;
    let w: Vec<f64> = xs.iter().map(|&x| curve.eval(jf * x)).collect();
    let uv = u.values();

    // corr[l] = Σ u(x_i) W(x_i + l h)
    let corr: Vec<f64> = (0..n)
        .map(|l| (0..n).map(|i| uv[i] * w[(i + l) % n]).sum())
        .collect();
    let l_star = (0..n)
        .max_by(|&a, &b| corr[a].total_cmp(&corr[b]))
        .expect("nonempty grid");
    let (cm, c0, cp) = (corr[(l_star + n - 1) % n], corr[l_star], corr[(l_star + 1) % n]);
    let curvature = cm - 2.0 * c0 + cp;
    let delta = if curvature < 0.0 {
        (0.5 * (cm - cp) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let d0 = (l_star as f64 + delta) * h;

    let mismatch = |d: f64| -> f64 {
        let s: f64 = xs
            .iter()
            .zip(uv)
            .map(|(&x, &v)| (v - curve.eval(jf * (x + d))).powi(2))
            .sum();
        (h * s).sqrt()
    };
    let (d, err) = golden_min(&mismatch, d0 - h, d0 + h, 1e-12);
    let (sign, shift) = canonical_shift(1, jf * d);
    Ok(Classification {
        verdict: Verdict::Ground { j, sign, shift },
        match_error: err,
    })
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Complete elliptic integral of the first kind via the AGM, used as an
    /// independent oracle: `g(N) = K(k)/√(2 - N²)` with `k² = N²/(2 - N²)`.
    fn g_by_agm(n: f64) -> f64 {
        let m = (1.0 - n) * (1.0 + n);
        let (mut a, mut b) = (1.0f64, (2.0 * m / (1.0 + m)).sqrt());
        for _ in 0..60 {
            let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
            a = an;
            b = bn;
        }
        PI / (2.0 * a) / (1.0 + m).sqrt()
    }

    fn bisect_peak(kappa: f64) -> f64 {
        let target = g_target(kappa);
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-15);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g_by_agm(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn g_at_zero() {
        assert_abs_diff_eq!(g_of_n(0.0).unwrap(), PI / (2.0 * SQRT_2), epsilon = 1e-14);
        assert_abs_diff_eq!(g_of_n(0.0).unwrap(), 1.110_720_7, epsilon = 1e-7);
    }

    #[test]
    fn g_matches_agm_oracle() {
        for n in [0.1, 0.5, 0.9, 0.99, 0.999_999] {
            let q = g_of_n(n).unwrap();
            assert_abs_diff_eq!(q, g_by_agm(n), epsilon = 1e-12 * q.max(1.0));
        }
    }

    #[test]
    fn g_is_monotone_and_domain_checked() {
        assert!(g_of_n(0.9).unwrap() > g_of_n(0.5).unwrap());
        assert!(g_of_n(0.5).unwrap() > g_of_n(0.0).unwrap());
        let mut prev = g_of_n(0.0).unwrap();
        for i in 1..999 {
            let v = g_of_n(i as f64 * 1e-3).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(g_of_n(1.0).is_err());
        assert!(g_of_n(-0.1).is_err());
    }

    #[test]
    fn peak_solve_matches_bisection() {
        for kappa in [0.3, 0.6, 0.9, 0.99] {
            let n = solve_n_peak(kappa).unwrap();
            assert_abs_diff_eq!(n, bisect_peak(kappa), epsilon = 1e-10);
            assert_abs_diff_eq!(g_of_n(n).unwrap(), g_target(kappa), epsilon = 1e-10);
        }
    }

    #[test]
    fn peak_limits() {
        assert!(solve_n_peak(0.9999).unwrap() <= 0.05);
        assert!(solve_n_peak(0.3).unwrap() > solve_n_peak(0.6).unwrap());
        let p = solve_peak(0.01).unwrap();
        assert!(p.deficit > 0.0 && p.deficit < 1e-90);
        assert!(solve_n_peak(1.0).is_err());
        assert!(solve_n_peak(0.0).is_err());
        assert!(solve_n_peak(1e-4).is_err());
    }

    #[test]
    fn m_kappa_examples() {
        assert_eq!(m_kappa(0.9).unwrap(), 1);
        assert_eq!(m_kappa(0.45).unwrap(), 2);
        assert_eq!(m_kappa(0.5).unwrap(), 1);
        assert_eq!(m_kappa(0.1).unwrap(), 9);
        assert_eq!(m_kappa(0.0999).unwrap(), 10);
        assert_eq!(m_kappa(0.001f64.sqrt()).unwrap(), 31);
        assert!(m_kappa(1.0).is_err());
    }

    #[test]
    fn curve_endpoints_and_symmetry() {
        for kappa in [0.05, 0.3, 0.9] {
            let c = GroundCurve::new(kappa).unwrap();
            assert_eq!(c.eval(0.0), 0.0);
            assert_abs_diff_eq!(c.eval(FRAC_PI_2), c.n_peak(), epsilon = 1e-12);
            assert_abs_diff_eq!(c.eval(PI), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.x_of_theta(FRAC_PI_2), FRAC_PI_2, epsilon = 1e-10);
            for x in [0.1, 0.7, 1.3] {
                assert_eq!(c.eval(-x), -c.eval(x));
                assert_abs_diff_eq!(c.eval(PI - x), c.eval(x), epsilon = 1e-14);
            }
            let (theta, xs) = c.nodes();
            assert!(theta.windows(2).all(|w| w[1] > w[0]));
            assert!(xs.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn profile_is_monotone_on_first_quarter() {
        let c = GroundCurve::new(0.2).unwrap();
        let mut prev = 0.0;
        for i in 1..=400 {
            let v = c.eval(FRAC_PI_2 * i as f64 / 400.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn profile_solves_the_steady_equation() {
        let g = PeriodicGrid1D::new(256).unwrap();
        let gs = profile(0.9, &g).unwrap();
        assert!(crate::spectral::residual(&gs.profile, 0.9).unwrap() <= 1e-6);
    }

    #[test]
    fn energy_routes_agree() {
        let g = PeriodicGrid1D::new(1024).unwrap();
        for kappa in [0.2, 0.5, 0.9] {
            let gs = profile(kappa, &g).unwrap();
            assert_abs_diff_eq!(gs.energy_from_profile(), ground_energy(&gs), epsilon = 1e-8);
        }
    }

    #[test]
    fn energy_limits() {
        let e = GroundCurve::new(0.01).unwrap().energy() / 0.01;
        assert!((e - 4.0 * SQRT_2 / 3.0).abs() <= 0.01 * 4.0 * SQRT_2 / 3.0, "{e}");
        let e3 = GroundCurve::new(0.3).unwrap().energy();
        let e6 = GroundCurve::new(0.6).unwrap().energy();
        assert!(e3 < e6);
        let near_one = GroundCurve::new(0.999).unwrap().energy();
        assert!(near_one > 1.50 && near_one < FRAC_PI_2);
    }

    #[test]
    fn sign_change_counts() {
        let g = PeriodicGrid1D::new(128).unwrap();
        let s = SpectralField1D::from_fn(&g, f64::sin);
        assert_eq!(sign_changes(&s, 1e-12), 2);
        let s3 = SpectralField1D::from_fn(&g, |x| (3.0 * x).sin());
        assert_eq!(sign_changes(&s3, 1e-12), 6);
        assert_eq!(sign_changes(&SpectralField1D::constant(&g, 1.0), 1e-12), 0);
        assert_eq!(sign_changes(&SpectralField1D::zeros(&g), 1e-12), 0);
    }

    #[test]
    fn canonical_shift_folds_sign() {
        assert_eq!(canonical_shift(1, 0.0), (1, 0.0));
        let (s, c) = canonical_shift(1, 3.0);
        assert_eq!(s, -1);
        assert_abs_diff_eq!(c, 3.0 - PI, epsilon = 1e-15);
        let (s, c) = canonical_shift(-1, -2.0);
        assert_eq!(s, 1);
        assert_abs_diff_eq!(c, PI - 2.0, epsilon = 1e-15);
    }

    #[test]
    fn classify_constants() {
        let g = PeriodicGrid1D::new(64).unwrap();
        let c = classify_steady(&SpectralField1D::constant(&g, 1.0), 0.9).unwrap();
        assert_eq!(c.verdict, Verdict::PlusOne);
        let c = classify_steady(&SpectralField1D::constant(&g, -1.0), 0.9).unwrap();
        assert_eq!(c.verdict, Verdict::MinusOne);
        let c = classify_steady(&SpectralField1D::zeros(&g), 1.2).unwrap();
        assert_eq!(c.verdict, Verdict::Zero);
        let s = SpectralField1D::from_fn(&g, f64::sin);
        assert_eq!(
            classify_steady(&s, 1.2).unwrap_err(),
            Error::NonConstantAboveThreshold(1.2)
        );
    }

    #[test]
    fn classify_ground_state() {
        let g = PeriodicGrid1D::new(256).unwrap();
        let gs = profile(0.9, &g).unwrap();
        let c = classify_steady(&gs.profile, 0.9).unwrap();
        match c.verdict {
            Verdict::Ground { j, sign, shift } => {
                assert_eq!((j, sign), (1, 1));
                assert!(shift.abs() < 1e-6);
            }
            v => panic!("unexpected {v}"),
        }
        assert!(c.match_error <= 1e-6);
    }

    #[test]
    fn classify_rescaled_ground_state() {
        let g = PeriodicGrid1D::new(256).unwrap();
        let curve = GroundCurve::new(0.8).unwrap();
        let u = SpectralField1D::from_fn(&g, |x| curve.eval(2.0 * x));
        let c = classify_steady(&u, 0.4).unwrap();
        match c.verdict {
            Verdict::Ground { j, sign, shift } => {
                assert_eq!((j, sign), (2, 1));
                assert!(shift.abs() < 1e-6);
            }
            v => panic!("unexpected {v}"),
        }
    }

    #[test]
    fn classify_rejects_non_steady_shapes() {
        let g = PeriodicGrid1D::new(128).unwrap();
        let u = SpectralField1D::from_fn(&g, |x| 0.5 * x.sin() + 0.4 * (3.0 * x).cos());
        assert!(matches!(
            classify_steady(&u, 0.45).unwrap_err(),
            Error::Unclassified { .. }
        ));
    }
}
