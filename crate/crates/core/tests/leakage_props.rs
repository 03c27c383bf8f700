use fblsec_core::leakage::{ail_approx, ail_exact, saddle_point, DEFAULT_ABS_TOL};
use fblsec_core::montecarlo::ail_mc;
use fblsec_core::sop::{corollary_redundancy_rate, sop, SopParams};
use fblsec_core::{db_to_linear, ChannelStats, FblParams, McConfig, McMode};
use proptest::prelude::*;

fn params(m: u32, n: u32) -> FblParams {
    FblParams::new(m, n, 1e-3, 1000).unwrap()
}

fn stats(rho: f64) -> ChannelStats {
    ChannelStats::new(rho, 1.0, 0.1).unwrap()
}

#[test]
fn exact_and_approx_agree_over_snr_and_rate() {
    for rs in [0.2, 0.5, 1.0] {
        let p = params((rs * 400.0f64).round() as u32, 400);
        for k in 0..=40 {
            let rho = db_to_linear(-10.0 + f64::from(k));
            let exact = ail_exact(&p, rho, &stats(rho), DEFAULT_ABS_TOL).unwrap();
            let approx = ail_approx(&p, rho, &stats(rho)).unwrap().value();
            assert!(exact.quadrature_abs_err().unwrap() <= DEFAULT_ABS_TOL);
            if exact.value() >= 1e-5 {
                let gap = (approx - exact.value()).abs() / exact.value();
                assert!(gap <= 0.15, "rs {rs}, k {k}: {gap}");
            }
        }
    }
}

#[test]
fn exact_ail_non_increasing_in_blocklength() {
    let st = stats(1.0);
    let mut prev = f64::INFINITY;
    for n in 201..=1000 {
        let v = ail_exact(&params(200, n), 1.0, &st, DEFAULT_ABS_TOL)
            .unwrap()
            .value();
        assert!(v <= prev + 2.0 * DEFAULT_ABS_TOL, "n = {n}: {v} > {prev}");
        prev = v;
    }
}

#[test]
fn monte_carlo_brackets_exact_for_most_seeds() {
    let p = params(200, 400);
    let st = stats(1.0);
    let exact = ail_exact(&p, 1.0, &st, DEFAULT_ABS_TOL).unwrap().value();
    let inside = (1..=100u64)
        .filter(|&seed| {
            let mc = McConfig::new(100_000, seed, McMode::Conditional).unwrap();
            let e = ail_mc(&p, Some(1.0), &st, &mc).unwrap();
            (e.value() - exact).abs() <= 3.0 * e.std_error().unwrap()
        })
        .count();
    assert!(inside >= 99, "{inside}/100");
}

#[test]
fn monte_carlo_error_scales_as_inverse_sqrt() {
    let p = params(200, 400);
    let st = stats(1.0);
    let se = |samples| {
        let mc = McConfig::new(samples, 11, McMode::Conditional).unwrap();
        ail_mc(&p, Some(1.0), &st, &mc)
            .unwrap()
            .std_error()
            .unwrap()
    };
    let ratio = se(400_000) / se(100_000);
    assert!((ratio - 0.5).abs() < 0.025, "{ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn approx_is_a_probability_and_equals_sop(
        m in 1u32..500,
        extra in 0u32..1500,
        log_eps in -9.0f64..-0.5,
        db in -10.0f64..40.0,
        mu_e in 0.01f64..3.0,
    ) {
        let n = m + extra;
        let p = FblParams::new(m, n, 10f64.powf(log_eps), 2000).unwrap();
        let rho = db_to_linear(db);
        let st = ChannelStats::new(rho, 1.0, mu_e).unwrap();
        let a = ail_approx(&p, rho, &st).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&a));
        let re = corollary_redundancy_rate(&p, rho).unwrap();
        let s = sop(&SopParams::new(re, st.gbar_e()).unwrap());
        if saddle_point(&p, rho).unwrap().x0 >= 0.0 && a > 1e-300 {
            prop_assert!((s - a).abs() <= 1e-11 * a);
        } else {
            prop_assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn approx_grows_with_eavesdropper_gain(
        db in -5.0f64..20.0,
        mu_e in 0.01f64..1.0,
        factor in 1.01f64..10.0,
    ) {
        let p = params(200, 400);
        let rho = db_to_linear(db);
        let lo = ail_approx(&p, rho, &ChannelStats::new(rho, 1.0, mu_e).unwrap()).unwrap().value();
        let hi = ail_approx(&p, rho, &ChannelStats::new(rho, 1.0, mu_e * factor).unwrap()).unwrap().value();
        prop_assert!(hi >= lo);
    }

    #[test]
    fn exact_is_a_probability(
        m in 10u32..400,
        db in -10.0f64..30.0,
        mu_e in 0.01f64..2.0,
    ) {
        let p = params(m, 400);
        let rho = db_to_linear(db);
        let st = ChannelStats::new(rho, 1.0, mu_e).unwrap();
        let v = ail_exact(&p, rho, &st, DEFAULT_ABS_TOL).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
