use backscatter::born::{cutoff_chi, q2_hat, CutoffSpec};
use backscatter::dispersion::{ds_r, gaussian_ds_r_closed_form, gaussian_s_r_closed_form, s_r, RadialQuad};
use backscatter::potentials::gaussian_spectrum;
use backscatter::pv::PVScheme;
use backscatter::regularity::{bound_table, counterexample_prediction};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cutoff_is_monotone_and_bounded(c0 in 0.5f64..10.0, a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let spec = CutoffSpec::new(c0).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (x, y) = (cutoff_chi(&spec, lo), cutoff_chi(&spec, hi));
        prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
        prop_assert!(x <= y);
        if hi <= c0 { prop_assert_eq!(y, 0.0); }
        if lo >= 2.0 * c0 { prop_assert_eq!(x, 1.0); }
    }

    #[test]
    fn gaussian_dispersion_matches_closed_form(n in 2usize..=3, eta in 0.2f64..10.0, r in 0.1f64..3.0) {
        let q = gaussian_spectrum(1.0);
        let exact = gaussian_s_r_closed_form(n, eta, r);
        let got = s_r(&q, n, eta, r, RadialQuad::default()).unwrap();
        prop_assert!((got.re - exact).abs() <= 1e-9 * exact.abs().max(1e-300));
        prop_assert_eq!(got.im, 0.0);
        let d_exact = gaussian_ds_r_closed_form(n, eta, r);
        let d = ds_r(&q, n, eta, r, RadialQuad::default()).unwrap().re;
        prop_assert!((d - d_exact).abs() <= 1e-8 * d_exact.abs().max(exact.abs()));
    }

    #[test]
    fn dispersion_is_quadratic_in_the_potential(lambda in 0.1f64..10.0, eta in 0.5f64..8.0, r in 0.2f64..2.0) {
        let q = gaussian_spectrum(1.0);
        let base = s_r(&q, 2, eta, r, RadialQuad::default()).unwrap();
        let scaled = s_r(&q.scaled(lambda), 2, eta, r, RadialQuad::default()).unwrap();
        let defect = (scaled - base * (lambda * lambda)).norm() / scaled.norm();
        prop_assert!(defect <= 1e-13, "defect {defect:e} base {base} scaled {scaled}");
    }

    #[test]
    fn bound_formulas_are_consistent(n in 2usize..=6, beta in 0.0f64..4.0) {
        let t = bound_table(n, beta, 4).unwrap();
        let nf = n as f64;
        // the counterexample order sits exactly on the Q2 ceiling
        if beta > 0.0 {
            let ceiling = t.teo_q2count_alpha_max.unwrap();
            prop_assert!((counterexample_prediction(n, beta) - nf / 2.0 - ceiling).abs() < 1e-12);
        }
        let sup = |j: usize| t.teo_qj_alpha_sup.iter().find(|(k, _)| *k == j).and_then(|(_, a)| *a);
        prop_assert_eq!(sup(2), t.teo_main2_alpha_sup);
        // higher-order terms are at least as regular as Q2
        for j in 3..=4 {
            if let (Some(a), Some(b)) = (sup(j - 1), sup(j)) {
                prop_assert!(b >= a - 1e-12);
            }
        }
        if let Some(m1) = t.teo_main1_alpha_max {
            prop_assert!(m1 <= beta + 1.0 + 1e-12);
            prop_assert!(m1 >= beta - 1e-12 || beta < (nf - 2.0) / 2.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn q2_imaginary_part_is_pi_times_unit_sphere_term(n in 2usize..=3, eta in 1.0f64..12.0) {
        let q = gaussian_spectrum(1.0);
        let v = q2_hat(&q, n, eta, &PVScheme::default(), RadialQuad::default()).unwrap().value;
        let s1 = s_r(&q, n, eta, 1.0, RadialQuad::default()).unwrap().re;
        prop_assert!((v.im - std::f64::consts::PI * s1).abs() <= 1e-10 * s1.abs());
    }
}
