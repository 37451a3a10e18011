use std::f64::consts::{FRAC_PI_2, PI};

use acfilter_core::*;
use proptest::prelude::*;

fn grid(n: usize) -> PeriodicGrid1D {
    PeriodicGrid1D::new(n).unwrap()
}

/// Trigonometric polynomial with random coefficients on modes `0..=k_max`.
fn trig_field(g: &PeriodicGrid1D, a: &[f64], b: &[f64]) -> SpectralField1D {
    SpectralField1D::from_fn(g, |x| {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (&ak, &bk))| ak * (k as f64 * x).cos() + bk * (k as f64 * x).sin())
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0f64..1.0, 12),
        prop::collection::vec(-1.0f64..1.0, 12),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_and_round_trip((a, b) in coeffs()) {
        let g = grid(64);
        let u = trig_field(&g, &a, &b);
        let lhs = u.values().iter().map(|v| v * v).sum::<f64>() * g.spacing();
        let rhs = 2.0 * PI * u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
        let back = g.inverse(u.coeffs()).unwrap();
        let err = back.iter().zip(u.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 100.0 * f64::EPSILON * u.max_abs().max(1.0));
    }

    #[test]
    fn energy_is_nonnegative((a, b) in coeffs(), kappa in 0.01f64..2.0) {
        let u = trig_field(&grid(64), &a, &b);
        let e = energy(&u, kappa).unwrap();
        prop_assert!(e.gradient_part >= 0.0 && e.potential_part >= 0.0);
        prop_assert_eq!(e.total, e.gradient_part + e.potential_part);
    }

    #[test]
    fn filters_are_idempotent_projections((a, b) in coeffs(), (c, d) in coeffs(), gap in 1u32..5, s in -3.0f64..3.0) {
        let g = grid(64);
        let u = trig_field(&g, &a, &b);
        let v = trig_field(&g, &c, &d);
        for f in [FilterSpec::Odd, FilterSpec::Gap(gap)] {
            let fu = f.apply_1d(&u).unwrap();
            prop_assert_eq!(&f.apply_1d(&fu).unwrap(), &fu);
            prop_assert!(fu.l2_norm() <= u.l2_norm() * (1.0 + 1e-14));
            prop_assert!(fu.parity_defect() <= 10.0 * f64::EPSILON * fu.max_abs());
            let lhs = f.apply_1d(&u.combine(s, &v, 1.0).unwrap()).unwrap();
            let rhs = fu.combine(s, &f.apply_1d(&v).unwrap(), 1.0).unwrap();
            prop_assert!(lhs.max_distance(&rhs).unwrap() <= 1e-13);
        }
        prop_assert_eq!(gap_filter_1d(&u, 1).unwrap(), odd_filter_1d(&u));
    }

    #[test]
    fn gap_filter_output_lies_in_gap_span((a, b) in coeffs(), gap in 2u32..5) {
        let g = grid(64);
        let f = gap_filter_1d(&trig_field(&g, &a, &b), gap).unwrap();
        for i in 0..g.n_modes() {
            let k = g.wavenumber(i);
            if k % gap as i64 != 0 || k == 0 {
                prop_assert_eq!(f.coeffs()[i].norm(), 0.0);
            }
            prop_assert_eq!(f.coeffs()[i].re, 0.0);
        }
    }

    #[test]
    fn sym_filter_2d_cone((a, b) in coeffs()) {
        let g = PeriodicGrid2D::new(16, 16).unwrap();
        let u = SpectralField2D::from_fn(&g, |x, y| {
            (0..6).map(|k| a[k] * (k as f64 * x + b[k]).cos() * ((k + 1) as f64 * y - a[k + 6]).sin()).sum()
        });
        let f = sym_filter_2d(&u);
        prop_assert_eq!(&sym_filter_2d(&f), &f);
        for k1 in -7i64..8 {
            for k2 in -7i64..8 {
                let c = f.coeff(k1, k2);
                prop_assert_eq!(c.im, 0.0);
                prop_assert!((c + f.coeff(-k1, k2)).norm() <= 1e-17);
                prop_assert!((c + f.coeff(k1, -k2)).norm() <= 1e-17);
            }
        }
        prop_assert!(f.defect_x() <= 10.0 * f64::EPSILON * f.max_abs());
        prop_assert!(f.defect_y() <= 10.0 * f64::EPSILON * f.max_abs());
    }

    #[test]
    fn imex_commutes_with_odd_filter((_, b) in coeffs(), tau in 0.001f64..0.5, kappa in 0.05f64..1.5) {
        let g = grid(64);
        let u = odd_filter_1d(&trig_field(&g, &[0.0; 12], &b));
        let cfg = SchemeConfig::imex1(tau, kappa).unwrap();
        let lhs = odd_filter_1d(&schemes::imex1_step(&u, &cfg));
        let rhs = schemes::imex1_step(&u, &cfg);
        prop_assert!(lhs.max_distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn all_schemes_fix_constant_states(c in prop::sample::select(vec![0.0, 1.0, -1.0]), tau in 0.001f64..0.5, kappa in 0.05f64..1.5) {
        let g = grid(32);
        let u = SpectralField1D::constant(&g, c);
        for kind in [SchemeKind::Imex1, SchemeKind::ImplicitEuler, SchemeKind::Bdf2x, SchemeKind::Strang] {
            let mut st = Stepper::new(SchemeConfig::new(kind, tau, kappa).unwrap(), &g).unwrap();
            let w1 = st.step(&u).unwrap();
            let w2 = st.step(&w1).unwrap();
            prop_assert!(w2.max_distance(&u).unwrap() <= 1e-15, "{kind}");
        }
    }

    #[test]
    fn peak_solve_satisfies_quarter_period(kappa in 0.02f64..0.999) {
        let p = solve_peak(kappa).unwrap();
        prop_assert!(p.deficit > 0.0 && p.deficit < 1.0);
        prop_assert!(p.n > 0.0 && p.n <= 1.0);
        let c = GroundCurve::new(kappa).unwrap();
        prop_assert!((c.x_of_theta(FRAC_PI_2) - FRAC_PI_2).abs() <= 1e-10);
    }

    #[test]
    fn profiles_are_pointwise_ordered(k1 in 0.05f64..0.9, dk in 0.01f64..0.09) {
        let (a, b) = (GroundCurve::new(k1).unwrap(), GroundCurve::new(k1 + dk).unwrap());
        for i in 1..=50 {
            let x = FRAC_PI_2 * i as f64 / 50.0;
            prop_assert!(a.eval(x) > b.eval(x));
        }
        prop_assert!(a.energy() < b.energy());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classifier_round_trip(kappa in 0.12f64..0.95, j_pick in 0u32..8, positive in any::<bool>(), c in -PI..PI) {
        let m = m_kappa(kappa).unwrap();
        let j = 1 + j_pick % m;
        let g = grid(256);
        let curve = GroundCurve::new(j as f64 * kappa).unwrap();
        let s = if positive { 1.0 } else { -1.0 };
        let u = SpectralField1D::from_fn(&g, |x| s * curve.eval(j as f64 * x + c));
        let cls = classify_steady(&u, kappa).unwrap();
        let (esign, ec) = ground_state::canonical_shift(if positive { 1 } else { -1 }, c);
        match cls.verdict {
            Verdict::Ground { j: fj, sign, shift } => {
                prop_assert_eq!(fj, j);
                prop_assert_eq!(sign, esign);
                let dc = (shift - ec).abs();
                prop_assert!(dc.min(PI - dc) <= 2.0 * PI / 256.0, "shift {} vs {}", shift, ec);
            }
            v => prop_assert!(false, "unexpected verdict {}", v),
        }
        prop_assert!(cls.match_error <= 1e-6);
    }

    #[test]
    fn filtered_runs_keep_parity_and_dissipate(amp in 0.1f64..1.0, k2 in -0.5f64..0.5, kappa in 0.2f64..1.2, tau in 0.01f64..0.5) {
        let g = grid(64);
        let u0 = SpectralField1D::from_fn(&g, |x| amp * x.sin() + k2 * (2.0 * x).sin() + 0.1 * (3.0 * x).cos());
        let cfg = RunConfig::new(SchemeConfig::imex1(tau, kappa).unwrap())
            .with_filter(FilterSpec::Odd)
            .with_record_every(1)
            .with_t_max(20.0);
        let rec = run(&u0, &cfg).unwrap();
        for (d, m) in rec.parity_defects.iter().zip(&rec.max_abs) {
            prop_assert!(*d <= 1e-12 * m);
        }
        for w in rec.energies.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn energy_inequality_holds_per_step(amp in 0.05f64..0.5, k2 in -0.2f64..0.2, kappa in 0.3f64..1.5, tau in 0.001f64..0.5) {
        let g = grid(64);
        let u0 = odd_filter_1d(&SpectralField1D::from_fn(&g, |x| amp * x.sin() + k2 * (2.0 * x).sin()));
        prop_assume!(energy(&u0, kappa).unwrap().total <= FRAC_PI_2 - 0.002);
        let cfg = RunConfig::new(SchemeConfig::imex1(tau, kappa).unwrap())
            .with_filter(FilterSpec::Odd)
            .with_theorem_mode(true)
            .with_t_max(10.0);
        let rec = run(&u0, &cfg).unwrap();
        let th = rec.theorem.unwrap();
        prop_assert!(th.max_energy_excess <= 1e-12, "excess {}", th.max_energy_excess);
        prop_assert!(rec.sup_max_abs <= 1.1);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), parity in prop::sample::select(vec![NoiseParity::Odd, NoiseParity::Even, NoiseParity::Unconstrained])) {
        let g = grid(32);
        let u0 = SpectralField1D::from_fn(&g, f64::sin);
        let cfg = RunConfig::new(SchemeConfig::imex1(0.05, 0.8).unwrap())
            .with_perturbation(Some(PerturbationConfig::new(1e-6, parity, seed)))
            .with_record_every(3)
            .with_t_max(3.0);
        let a = format!("{:?}", run(&u0, &cfg).unwrap());
        let b = format!("{:?}", run(&u0, &cfg).unwrap());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn unfiltered_runs_stay_below_max_norm_bound() {
    let g = grid(128);
    for kappa in [0.3, 0.9] {
        for tau in [0.01, 0.1, 0.5] {
            let cfg = RunConfig::new(SchemeConfig::imex1(tau, kappa).unwrap())
                .with_perturbation(Some(PerturbationConfig::new(1e-13, NoiseParity::Even, 5)))
                .with_t_max(300.0);
            let rec = run(&SpectralField1D::from_fn(&g, f64::sin), &cfg).unwrap();
            assert!(rec.sup_max_abs <= 1.1, "kappa {kappa} tau {tau}: {}", rec.sup_max_abs);
        }
    }
}

#[test]
fn odd_noise_with_odd_filter_keeps_exact_oddness() {
    let g = grid(128);
    let cfg = RunConfig::new(SchemeConfig::imex1(0.01, 0.9).unwrap())
        .with_filter(FilterSpec::Odd)
        .with_perturbation(Some(PerturbationConfig::new(1e-12, NoiseParity::Odd, 11)))
        .with_record_every(1)
        .with_t_max(5.0);
    let rec = run(&SpectralField1D::from_fn(&g, f64::sin), &cfg).unwrap();
    assert!(rec.parity_defects.iter().all(|&d| d == 0.0));
}
