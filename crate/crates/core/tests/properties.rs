use brownmeasure::brown::BrownMeasure;
use brownmeasure::characteristics::{self, InitialData};
use brownmeasure::subordination as sub;
use brownmeasure::{jn, maps, rmt, Complex64, Measure, MeasureSpec};
use proptest::prelude::*;

fn preset(k: usize) -> (Measure, f64) {
    let (spec, t) = match k % 4 {
        0 => (MeasureSpec::semicircle(1.0), 1.0),
        1 => (MeasureSpec::bernoulli(2.0 / 3.0), 1.05),
        2 => (MeasureSpec::uniform(-1.0, 1.0), 0.1),
        _ => (MeasureSpec::from_preset("quadratic").unwrap(), 0.25),
    };
    (Measure::new(&spec).unwrap(), t)
}

fn atomic() -> impl Strategy<Value = (Measure, f64)> {
    (prop::collection::vec((-2.0..2.0f64, 0.05..1.0f64), 2..=8), 0.05..4.0f64).prop_filter_map(
        "atoms too close",
        |(atoms, t)| {
            let mut xs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
            xs.sort_by(f64::total_cmp);
            if xs.windows(2).any(|w| w[1] - w[0] < 1e-2) {
                return None;
            }
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let atoms: Vec<(f64, f64)> = atoms.iter().map(|&(x, w)| (x, w / total)).collect();
            Some((Measure::new(&MeasureSpec::atomic(&atoms)).unwrap(), t))
        },
    )
}

fn any_measure() -> impl Strategy<Value = (Measure, f64)> {
    prop_oneof![(0usize..4).prop_map(preset), atomic()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn p0_decreasing_and_bounded((m, _) in any_measure(), a0 in -3.0..3.0f64, v in 0.01..3.0f64, dv in 1e-3..1.0f64) {
        let (p, q) = (m.p0(a0, v), m.p0(a0, v + dv));
        prop_assert!(q < p);
        prop_assert!(p <= 1.0 / (v * v));
    }

    #[test]
    fn p0_below_inverse_t_at_sqrt_t((m, t) in any_measure(), a0 in -3.0..3.0f64) {
        prop_assert!(m.p0(a0, t.sqrt()) < 1.0 / t - 1e-12);
    }

    #[test]
    fn cauchy_schwarz_is_strict((m, _) in any_measure(), a0 in -3.0..3.0f64, v in 0.01..3.0f64) {
        let q = m.q_integrals(a0, v);
        prop_assert!(q.q0 * q.q2 - q.q1 * q.q1 > 0.0);
    }

    #[test]
    fn cauchy_symmetry((m, _) in any_measure(), x in -3.0..3.0f64, y in 0.01..3.0f64) {
        let z = Complex64::new(x, y);
        let g = m.cauchy(z).unwrap();
        let gc = m.cauchy(z.conj()).unwrap();
        prop_assert!(g.im < 0.0);
        prop_assert!((gc - g.conj()).norm() <= 1e-14 * (1.0 + g.norm()));
    }

    #[test]
    fn subordination_bounds((m, t) in any_measure(), a0 in -3.0..3.0f64, da in 1e-3..0.5f64) {
        let bp = sub::boundary_point(&m, t, a0).unwrap();
        prop_assert!(bp.v < t.sqrt());
        prop_assert!(sub::a_t(&m, t, a0 + da).unwrap() > bp.a);
        if bp.v > 0.0 {
            prop_assert!(bp.slope > 0.0 && bp.slope < 2.0);
            let z = Complex64::new(a0, bp.v);
            let j = sub::j_t(&m, t, z).unwrap();
            prop_assert!((j.im - 2.0 * bp.v).abs() < 1e-9);
            prop_assert!(sub::h_t(&m, t, z).unwrap().im.abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trip(k in 0usize..4, s in 0.005..0.995f64) {
        let (m, t) = preset(k);
        let bm = BrownMeasure::new(&m, t).unwrap();
        let om = bm.omega_intervals();
        let (lo, hi) = om[0];
        let a = lo + (hi - lo) * s;
        let a0 = bm.a0_of_a(a).unwrap();
        prop_assert!((sub::a_t(&m, t, a0).unwrap() - a).abs() < 1e-10);
        // da0/da > 1/2 is the same statement as a slope below 2.
        prop_assert!(bm.boundary_point(a0).unwrap().slope < 2.0);
    }

    #[test]
    fn q_t_ignores_height_and_increases(k in 0usize..4, s in 0.01..0.98f64, h in 0.0..0.99f64) {
        let (m, t) = preset(k);
        let bm = BrownMeasure::new(&m, t).unwrap();
        let (lo, hi) = bm.omega_intervals()[0];
        let a = lo + (hi - lo) * s;
        let b = h * bm.b_t(a).unwrap();
        let q = maps::q_t(&bm, Complex64::new(a, b)).unwrap();
        prop_assert_eq!(q, maps::q_t(&bm, Complex64::new(a, 0.0)).unwrap());
        let a2 = a + 0.01 * (hi - lo);
        prop_assert!(maps::q_t(&bm, Complex64::new(a2, 0.0)).unwrap() > q);
    }

    #[test]
    fn u_t_matches_j_t_on_boundary(k in 0usize..4, s in 0.01..0.99f64) {
        let (m, t) = preset(k);
        let bm = BrownMeasure::new(&m, t).unwrap();
        let br = bm.branches()[0];
        let a0 = br.lambda.0 + (br.lambda.1 - br.lambda.0) * s;
        let v = sub::v_t(&m, t, a0).unwrap();
        let z = Complex64::new(a0, v);
        let u = maps::u_t(&bm, z).unwrap();
        prop_assert!((u - sub::j_t(&m, t, z).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn constants_of_motion((m, _) in any_measure(), a0 in -2.0..2.0f64, b0 in -1.0..1.0f64, eps0 in 0.1..1.0f64) {
        let init = InitialData::new(a0, b0, eps0);
        let mom = characteristics::initial_momenta(&m, &init).unwrap();
        let h0 = characteristics::hamiltonian(mom.p_a0, mom.p_b0, eps0, mom.p0);
        let c0 = eps0 * mom.p0 * mom.p0;
        let scale = 0.25 * (mom.p_a0.powi(2) + mom.p_b0.powi(2)) + c0;
        let life = characteristics::lifetime(&m, &init).unwrap();
        for k in 1..=10 {
            let s = characteristics::flow(&m, &init, life * k as f64 / 11.0).unwrap();
            prop_assert_eq!(s.p_a, mom.p_a0);
            prop_assert_eq!(s.p_b, mom.p_b0);
            prop_assert!((s.eps * s.p_eps * s.p_eps - c0).abs() <= 1e-14 * c0);
            prop_assert!((s.hamiltonian() - h0).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn jn_poisson_identity(k in 0usize..4, s in 0.01..0.99f64) {
        let (m, t) = preset(k);
        let bm = BrownMeasure::new(&m, t).unwrap();
        let (lo, hi) = bm.omega_intervals()[0];
        let a = lo + (hi - lo) * s;
        let g = jn::solve_g(&m, t, a).unwrap();
        let p0 = m.p0(a + t * g.re, t * g.im);
        prop_assert!((p0 - 1.0 / t).abs() < 1e-10 * (1.0 / t));
    }

    #[test]
    fn gue_is_hermitian(seed in any::<u64>(), n in 2usize..12) {
        let y = rmt::sample_gue(n, seed);
        for i in 0..n {
            prop_assert_eq!(y[(i, i)].im, 0.0);
            for j in 0..i {
                prop_assert_eq!(y[(i, j)], y[(j, i)].conj());
            }
        }
    }

    #[test]
    fn deterministic_x_is_sorted_quantiles(k in 0usize..4, n in 2usize..64) {
        let (m, _) = preset(k);
        let x = rmt::deterministic_x(&m, n).unwrap();
        prop_assert!(x.windows(2).all(|w| w[0] <= w[1]));
        // The empirical law of x is within 1/n of μ in Kolmogorov distance.
        let d = rmt::sup_distance(&x, |u| m.cdf(u));
        prop_assert!(d <= 1.0 / n as f64 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn jn_matches_density_for_atomic_measures((m, t) in atomic(), s in 0.02..0.98f64) {
        let bm = BrownMeasure::new(&m, t).unwrap();
        for (lo, hi) in bm.omega_intervals() {
            let a = lo + (hi - lo) * s;
            let g = jn::solve_g(&m, t, a).unwrap();
            let h = 1e-3 * (1.0 + a.abs()) * ((hi - lo) / 2.0).min(1.0);
            let w = jn::jn_density_with(&m, t, a, g, h).unwrap();
            prop_assert!((w - bm.w_t(a).unwrap()).abs() < 1e-5, "{} vs {}", w, bm.w_t(a).unwrap());
        }
    }
}
