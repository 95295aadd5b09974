use proptest::prelude::*;

use sve_core::histogramming::{histogram_from_radiance, DEFAULT_BINS};
use sve_core::metrics::{mu_tonemap, spearman_rho};
use sve_core::patterns::{class_count, enumerate_assignments};
use sve_core::risk::{build_neighbor_table, snr_risk, sve_risk_hist, sve_risk_wo};
use sve_core::sensor_sim::{expected_readout, normalize_readout, simulate_capture};
use sve_core::{Level, LevelSet, Pattern, RadianceMap, SensorConfig};

fn default_level() -> impl Strategy<Value = Level> {
    (0..9usize).prop_map(|i| LevelSet::default_levels().levels()[i])
}

fn pattern() -> impl Strategy<Value = Pattern> {
    [default_level(), default_level(), default_level(), default_level()]
        .prop_map(|l| Pattern::from_levels(l).unwrap())
}

fn permutation() -> impl Strategy<Value = [usize; 4]> {
    Just([0usize, 1, 2, 3]).prop_shuffle().prop_map(|v| [v[0], v[1], v[2], v[3]])
}

fn small_scene() -> impl Strategy<Value = RadianceMap> {
    prop::collection::vec(-1.0f64..6.5, 64)
        .prop_map(|logs| RadianceMap::new(8, 8, logs.into_iter().map(|l| 10f64.powf(l)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_ignores_slot_order(p in pattern(), perm in permutation()) {
        let c = p.canonicalize();
        prop_assert_eq!(p.permuted(perm).canonicalize(), c);
        let again: Pattern = c.into();
        prop_assert_eq!(again.canonicalize(), c);
    }

    #[test]
    fn enumeration_size_matches_closed_form(l in 1usize..7, m in 1usize..6) {
        let set = LevelSet::new((0..l).map(|i| Level::new(0.001 * (i + 1) as f64, 1.0).unwrap()).collect()).unwrap();
        let listed: Vec<Vec<Level>> = enumerate_assignments(&set, m).collect();
        prop_assert_eq!(listed.len() as u64, class_count(l as u64, m as u64).unwrap());
        for a in &listed {
            prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn risks_are_permutation_invariant(scene in small_scene(), p in pattern(), perm in permutation()) {
        let config = SensorConfig::default();
        let table = build_neighbor_table(3).unwrap();
        let hist = histogram_from_radiance(&scene, DEFAULT_BINS).unwrap();
        let q = p.permuted(perm);
        prop_assert_eq!(sve_risk_hist(&hist, &p, &config, &table), sve_risk_hist(&hist, &q, &config, &table));
        prop_assert_eq!(sve_risk_wo(&hist, &p, &config), sve_risk_wo(&hist, &q, &config));
        prop_assert_eq!(snr_risk(&scene, &p, &config), snr_risk(&scene, &q, &config));
    }

    #[test]
    fn risk_parts_add_up(scene in small_scene(), p in pattern()) {
        let config = SensorConfig::default();
        let table = build_neighbor_table(3).unwrap();
        let hist = histogram_from_radiance(&scene, DEFAULT_BINS).unwrap();
        let r = sve_risk_hist(&hist, &p, &config, &table);
        prop_assert!(r.recoverable >= 0.0 && r.nonrecoverable >= 0.0);
        prop_assert_eq!(r.total, r.recoverable + r.nonrecoverable);
        prop_assert!((hist.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tonemap_is_monotone_on_unit_interval(a in 0.0f64..1.0, b in 0.0f64..1.0, mu in 1.0f64..1e5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (tl, th) = (mu_tonemap(lo, mu), mu_tonemap(hi, mu));
        prop_assert!(tl <= th);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tl) && th <= 1.0 + 1e-12);
    }

    #[test]
    fn spearman_ignores_monotone_transforms(xs in prop::collection::vec(-1e3f64..1e3, 5..40),
                                            ys in prop::collection::vec(-1e3f64..1e3, 40)) {
        let ys = &ys[..xs.len()];
        let Ok(base) = spearman_rho(&xs, ys) else { return Ok(()) };
        let fx: Vec<f64> = xs.iter().map(|x| (x / 100.0).exp() + 3.0).collect();
        let fy: Vec<f64> = ys.iter().map(|y| y.powi(3) - 7.0).collect();
        let moved = spearman_rho(&fx, &fy).unwrap();
        prop_assert!((moved.rho - base.rho).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&base.rho));
    }

    #[test]
    fn captures_are_reproducible(scene in small_scene(), p in pattern(), seed in any::<u64>()) {
        let config = SensorConfig::default();
        let a = simulate_capture(&scene, &p, &config, seed, true).unwrap();
        let b = simulate_capture(&scene, &p, &config, seed, true).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn noise_free_readout_inverts_within_one_step(level in default_level(), frac in 0.01f64..0.95) {
        let config = SensorConfig::default();
        let theta = frac * config.cutoff(level);
        let v = expected_readout(theta, level, &config);
        let code = config.quantize(v);
        let back = normalize_readout(code, level, &config);
        prop_assert!(!back.saturated);
        let step = config.adc_lsb_base / (level.alpha * level.tau * config.qe);
        prop_assert!((back.theta - theta).abs() <= step + 1e-9 * theta, "{} vs {}", back.theta, theta);
    }
}
