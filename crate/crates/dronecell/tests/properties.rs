//! Randomized invariants. Every sampled parameter set must yield proper
//! probability laws, densities bounded by the ambient intensity, and the
//! straight-line exclusion ordering; case counts stay small because most
//! properties sit on quadratures.

use dronecell::density::{intensity_measure, rs_density, sl_density, udm_density_general};
use dronecell::displacement::rs_displacement;
use dronecell::dist::ScalarDistribution;
use dronecell::rate::{conditional_laplace, ChannelParams};
use dronecell::rng::stream_rng;
use proptest::prelude::*;

fn scalar_law() -> impl Strategy<Value = ScalarDistribution> {
    prop_oneof![
        (100.0..1000.0f64).prop_map(|m| ScalarDistribution::rayleigh_from_mean(m).unwrap()),
        (0.5..30.0f64).prop_map(|m| ScalarDistribution::exponential(m).unwrap()),
        ((1u32..6), (1.0..200.0f64))
            .prop_map(|(k, m)| ScalarDistribution::erlang(k, m).unwrap()),
        ((10.0..500.0f64), (0.1..500.0f64))
            .prop_map(|(lo, w)| ScalarDistribution::uniform(lo, lo + w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_laws_behave_like_distributions(
        law in scalar_law(),
        xs in prop::collection::vec(0.0..4000.0f64, 4),
    ) {
        let (lo, hi) = law.support();
        prop_assert_eq!(law.cdf(lo - 1.0), 0.0);
        let far = if hi.is_finite() { hi } else { law.mean() * 60.0 };
        prop_assert!(law.cdf(far) > 1.0 - 1e-9);

        let mut xs = xs;
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut prev = 0.0;
        for &x in &xs {
            let c = law.cdf(x);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(c >= prev, "cdf decreased at {x}");
            prop_assert!(law.pdf(x) >= 0.0);
            prev = c;
        }
    }

    #[test]
    fn sampling_is_reproducible_and_in_support(
        law in scalar_law(),
        seed in any::<u64>(),
    ) {
        let draw = |seed| {
            let mut rng = stream_rng(seed, 0);
            (0..32).map(|_| law.sample(&mut rng)).collect::<Vec<f64>>()
        };
        let a = draw(seed);
        prop_assert_eq!(&a, &draw(seed));
        let (lo, hi) = law.support();
        for &x in &a {
            prop_assert!(x >= lo && x <= hi);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stop_model_displacement_is_a_probability_law(
        v in 5.0..25.0f64,
        t in 5.0..120.0f64,
        mean in 200.0..900.0f64,
    ) {
        let flight = ScalarDistribution::rayleigh_from_mean(mean).unwrap();
        let law = rs_displacement(&flight, v, t).unwrap();
        let reach = v * t;
        prop_assert!((law.max_distance() - reach).abs() <= 1e-9 * reach);
        // The table mass drifts to ~1e-5 for flights much shorter than the
        // horizon; the contract everywhere else is 1e-3.
        prop_assert!((law.total_mass() - 1.0).abs() < 1e-4);
        prop_assert!(law.cdf(reach) > 1.0 - 1e-4);
        prop_assert_eq!(law.cdf_left(0.0), 0.0);
        for &(loc, mass) in law.atoms() {
            prop_assert!((0.0..=reach + 1e-9).contains(&loc));
            prop_assert!((0.0..=1.0).contains(&mass));
        }
        let mut prev = -1.0;
        for i in 0..=20 {
            let l = reach * i as f64 / 20.0;
            prop_assert!(law.pdf(l) >= 0.0);
            let c = law.cdf(l);
            prop_assert!(c >= prev - 1e-12);
            prev = c;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pinned_densities_stay_within_ambient(
        u0 in 50.0..1200.0f64,
        t in 2.0..100.0f64,
        log_l in -6.0..-2.0f64,
        us in prop::collection::vec(0.0..3000.0f64, 6),
    ) {
        let v = 12.5;
        let lambda0 = 10f64.powf(log_l);
        let flight = ScalarDistribution::rayleigh_from_mean(500.0).unwrap();
        let sl = sl_density(lambda0, u0, v, t).unwrap();
        let rs = rs_density(lambda0, u0, v, t, flight).unwrap();
        for density in [&sl, &rs] {
            for &u in &us {
                let val = density.eval(u);
                prop_assert!(val >= 0.0, "negative density at {u}");
                prop_assert!(val <= lambda0 * (1.0 + 1e-9), "density above ambient at {u}");
            }
            let sat = density.saturation_radius();
            prop_assert!((density.eval(sat + 1.0) - lambda0).abs() <= 1e-12 * lambda0);
        }
    }

    #[test]
    fn the_two_stop_model_density_paths_agree(
        u0 in 100.0..1000.0f64,
        t in 5.0..80.0f64,
    ) {
        // The closed construction and the generic one driven by the
        // displacement law must be the same measure.
        let v = 12.5;
        let lambda0 = 1e-3;
        let flight = ScalarDistribution::rayleigh_from_mean(500.0).unwrap();
        let closed = rs_density(lambda0, u0, v, t, flight.clone()).unwrap();
        let disp = rs_displacement(&flight, v, t).unwrap();
        let general = udm_density_general(lambda0, u0, t, disp).unwrap();
        // Pointwise from the first positive node; the exact origin is the
        // polar coordinate singularity, so the disc around it is compared
        // as a mean instead.
        for i in 1..=12 {
            let u = (u0 + v * t + 50.0) * i as f64 / 12.0;
            let a = closed.eval(u);
            let b = general.eval(u);
            prop_assert!(
                (a - b).abs() <= 1e-5 * lambda0,
                "paths disagree at u = {u}: {a} vs {b}"
            );
        }
        let a = closed.annulus_mean(0.0, 25.0).unwrap();
        let b = general.annulus_mean(0.0, 25.0).unwrap();
        prop_assert!(
            (a - b).abs() <= 1e-5 * lambda0,
            "origin disc means disagree: {a} vs {b}"
        );
    }

    #[test]
    fn straight_line_keeps_the_fullest_reachable_disc(
        u0 in 100.0..1000.0f64,
        t in 5.0..80.0f64,
    ) {
        let v = 12.5;
        let lambda0 = 1e-6;
        let flight = ScalarDistribution::rayleigh_from_mean(500.0).unwrap();
        let reach = u0 + v * t;
        let sl = intensity_measure(&sl_density(lambda0, u0, v, t).unwrap(), reach).unwrap();
        let rs = intensity_measure(
            &rs_density(lambda0, u0, v, t, flight).unwrap(),
            reach,
        )
        .unwrap();
        prop_assert!(sl >= rs * (1.0 - 1e-9), "ordering violated: {sl} < {rs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn interference_transform_is_a_decaying_probability(
        u0 in 100.0..1000.0f64,
        t in 2.0..60.0f64,
        ln_s in 0.0..25.0f64,
    ) {
        let density = sl_density(1e-6, u0, 12.5, t).unwrap();
        let ch = ChannelParams::new(100.0, 3.0, 1, 1, 1.0).unwrap();
        let s = ln_s.exp();
        let lo = conditional_laplace(s, &density, &ch, 0).unwrap()[0];
        let hi = conditional_laplace(s * 4.0, &density, &ch, 0).unwrap()[0];
        prop_assert!(lo > 0.0 && lo <= 1.0, "transform out of range: {lo}");
        prop_assert!(hi <= lo * (1.0 + 1e-9), "transform increased in s");
    }
}
