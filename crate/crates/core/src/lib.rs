//! Spectral Allen–Cahn dynamics on the periodic torus with symmetry-preserving
//! Fourier filters.
//!
//! The crate provides the pseudo-spectral substrate ([`spectral`]), the
//! parity and spectral-gap filters ([`filters`]), the time-stepping schemes
//! ([`schemes`]), an independent oracle for the odd ground state and a
//! steady-state classifier ([`ground_state`]), the filtered and perturbed run
//! driver ([`dynamics`], [`noise`]) and the two-dimensional extension
//! ([`ac2d`]).
//!
//! ```
//! use acfilter_core::{run, FilterSpec, PeriodicGrid1D, RunConfig, SchemeConfig, SpectralField1D};
//!
//! let grid = PeriodicGrid1D::new(64).unwrap();
//! let u0 = SpectralField1D::from_fn(&grid, f64::sin);
//! let cfg = RunConfig::new(SchemeConfig::imex1(0.1, 0.9).unwrap())
//!     .with_filter(FilterSpec::Odd)
//!     .with_t_max(1.0);
//! let rec = run(&u0, &cfg).unwrap();
//! assert_eq!(rec.final_state.parity_defect(), 0.0);
//! ```

pub mod ac2d;
pub mod dynamics;
pub mod error;
pub mod filters;
pub mod ground_state;
pub mod noise;
pub mod quadrature;
pub mod schemes;
pub mod spectral;

pub use ac2d::{energy_2d, imex1_step_2d, run_2d, PeriodicGrid2D, RunRecord2D, SpectralField2D};
pub use dynamics::{
    amplification_demo, forward_euler_trace, run, sweep_kappa, write_sweep_csv, InitialCondition,
    RunConfig, RunRecord, StopReason, SweepRow, TheoremDiagnostics,
};
pub use error::{Error, Result};
pub use filters::{gap_filter_1d, odd_filter_1d, sym_filter_2d, FilterSpec};
pub use ground_state::{
    classify_steady, g_of_n, ground_energy, m_kappa, profile, sign_changes, solve_n_peak, solve_peak, Classification,
    GroundCurve, GroundState, Verdict,
};
pub use noise::{NoiseParity, NoiseSource, PerturbationConfig};
pub use schemes::{SchemeConfig, SchemeKind, Stepper};
pub use spectral::{energy, read_profile_csv, residual, write_profile_csv, EnergyReport, PeriodicGrid1D, SpectralField1D};
