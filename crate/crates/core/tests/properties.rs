use netbell::bellfunc::{bounds, evaluate, evaluate_state, s_functional};
use netbell::cli::format_sig;
use netbell::expsim::{fidelity_from_visibility, sample_replication, visibility_from_fidelity, ShotPlan};
use netbell::quantum::{correlation_table, generalized_ghz, ghz, standard_settings, CorrelationTable, MeasurementScenario, Observable};
use proptest::prelude::*;

fn scenario(n: usize, angles: &[(f64, f64)]) -> MeasurementScenario {
    let mut it = angles.iter().map(|&(t, p)| Observable::from_angles(t, p));
    MeasurementScenario::new((0..n).map(|_| vec![it.next().unwrap(), it.next().unwrap()]).collect()).unwrap()
}

fn angles(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU), 2 * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampling_conserves_events(n in 3usize..5, vis in 0.0f64..=1.0, total in 16u64..5000, seed: u64, rep in 0u64..4) {
        let table = correlation_table(&ghz(n).unwrap().with_visibility(vis).unwrap(), &standard_settings(n).unwrap()).unwrap();
        let plan = ShotPlan::equal(table.settings_shape(), total, seed).unwrap();
        let record = sample_replication(&table, &plan, rep).unwrap();
        let sampled: f64 = (0..record.counts.len()).map(|k| record.events(k)).sum();
        prop_assert_eq!(sampled as u64, plan.total_events());
        for (k, &e) in plan.events_per_setting.iter().enumerate() {
            prop_assert_eq!(record.events(k), e as f64);
        }
    }

    #[test]
    fn fidelity_round_trip(n in 2usize..8, vis in 0.0f64..=1.0) {
        let back = visibility_from_fidelity(n, fidelity_from_visibility(n, vis)).unwrap();
        prop_assert!((back - vis).abs() <= 1e-12);
    }

    #[test]
    fn format_sig_keeps_digits(x in -1e9f64..1e9, digits in 1usize..18) {
        let s = format_sig(x, digits);
        let back: f64 = s.parse().unwrap();
        let scale = if x == 0.0 { 1.0 } else { 10f64.powf(x.abs().log10().floor()) };
        prop_assert!((back - x).abs() <= 0.5 * scale * 10f64.powi(1 - digits as i32) * (1.0 + 1e-9) + 4.0 * f64::EPSILON * x.abs(), "{} -> {}", x, s);
        let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        if x != 0.0 {
            prop_assert_eq!(mantissa.trim_start_matches('0').len(), digits, "{}", s);
        }
    }

    #[test]
    fn quantum_values_respect_quantum_bound(n in 3usize..6, xi in -1.0f64..=1.0, a in angles(5)) {
        let s = evaluate_state(&s_functional(n).unwrap(), &generalized_ghz(n, xi).unwrap(), &scenario(n, &a[..2 * n])).unwrap();
        prop_assert!(s <= bounds(n).unwrap().quantum + 1e-9);
    }

    #[test]
    fn white_noise_scales_s(n in 3usize..5, vis in 0.0f64..=1.0, a in angles(4)) {
        let f = s_functional(n).unwrap();
        let sc = scenario(n, &a[..2 * n]);
        let pure = evaluate_state(&f, &ghz(n).unwrap(), &sc).unwrap();
        let noisy = evaluate_state(&f, &ghz(n).unwrap().with_visibility(vis).unwrap(), &sc).unwrap();
        prop_assert!((noisy - vis * pure).abs() < 1e-10);
    }

    #[test]
    fn tables_are_no_signaling_and_survive_csv(n in 3usize..5, xi in -1.0f64..=1.0, vis in 0.0f64..=1.0, a in angles(4)) {
        let state = generalized_ghz(n, xi).unwrap().with_visibility(vis).unwrap();
        let table = correlation_table(&state, &scenario(n, &a[..2 * n])).unwrap();
        prop_assert!(table.no_signaling_violation() < 1e-12);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = CorrelationTable::read_csv(buf.as_slice()).unwrap();
        let f = s_functional(n).unwrap();
        prop_assert_eq!(evaluate(&f, &back).unwrap(), evaluate(&f, &table).unwrap());
    }
}
