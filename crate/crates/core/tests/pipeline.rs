use proptest::prelude::*;
use riscap_core::capacity_bounds::{beamforming_rate, solve_uqp, ub_frobenius, ub_max_trace, UqpOptions};
use riscap_core::channel_model::io::{parse_channel_spec, parse_matrix, write_matrix};
use riscap_core::channel_model::{generate_ensemble, scenarios, DEFAULT_RANK_TOL};
use riscap_core::hsm_vgc::capacity_exact;
use riscap_core::qr_sic::{plan, rate_gaussian_cpsk, rate_hypersphere_cpsk, CsEvaluator};
use riscap_core::{ChannelEnsembleSpec, EquivalentChannel, HsmChannel, McConfig, Normalization};

const FILE: &str = "\
3 4
0.1+0.2i -0.3+0.05i 0.7 0.02-0.4i 1.1i
-0.25 0.6-0.1i 0.05+0.05i -0.2+0.3i 0.4
0.33-0.01i 0.2i -0.45+0.15i 0.12 -0.6-0.2i
";

#[test]
fn file_to_rates() {
    let spec = parse_channel_spec(FILE, 1).unwrap();
    let eq = spec.reduce(DEFAULT_RANK_TOL).unwrap();
    assert_eq!((eq.tau(), eq.n_cols()), (3, 5));
    let (eq, _) = eq.normalized();
    let f = solve_uqp(&eq, &UqpOptions::default()).unwrap().f_star;
    let p = plan(&eq).unwrap();
    let mc = McConfig::new(3, 20_000, 4_096).unwrap();
    for e in [0.1, 10.0, 1e3] {
        let (bf, mt, fr) = (beamforming_rate(f, e), ub_max_trace(eq.tau(), f, e), ub_frobenius(&eq, e));
        assert!(bf <= mt && mt <= fr);
        let g = rate_gaussian_cpsk(&p, e, 1, &mc).unwrap();
        let h = rate_hypersphere_cpsk(&p, e, 1, CsEvaluator::Table).unwrap();
        assert!(g.value <= mt + 3.0 * g.stderr, "{e}: {} > {mt}", g.value);
        assert!(h.value <= mt, "{e}: {} > {mt}", h.value);
    }
}

#[test]
fn matrix_text_round_trips_exactly() {
    let m = parse_matrix(FILE).unwrap();
    assert_eq!(parse_matrix(&write_matrix(&m)).unwrap(), m);
    let h2 = scenarios::h2();
    assert_eq!(parse_matrix(&write_matrix(&h2)).unwrap(), h2);
}

#[test]
fn evaluators_agree_on_h2() {
    let eq = EquivalentChannel::from_full_row_rank(scenarios::h2(), DEFAULT_RANK_TOL).unwrap().normalized().0;
    let p = plan(&eq).unwrap();
    for e in [1.0, 100.0, 1e4] {
        let q = rate_hypersphere_cpsk(&p, e, 2, CsEvaluator::Quadrature).unwrap().value;
        let t = rate_hypersphere_cpsk(&p, e, 2, CsEvaluator::Table).unwrap().value;
        assert!((q - t).abs() < 2e-3, "{e}: {q} vs {t}");
    }
}

#[test]
fn estimates_ignore_thread_count() {
    let ch = HsmChannel::new(4, 50.0).unwrap();
    let mc = McConfig::new(17, 30_000, 1_000).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| capacity_exact(&ch, &mc).unwrap())
    };
    assert_eq!(run(1), run(6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ensemble_members_are_normalized_and_ordered(seed in any::<u64>(), n_r in 1usize..4, n in 1usize..6) {
        let spec = ChannelEnsembleSpec { n_r, n, srr: 1, los_gain_db: 3.0, seed, normalization: Normalization::GramTraceOne };
        for eq in generate_ensemble(&spec, 3).unwrap() {
            prop_assert!((eq.frobenius_sq() - 1.0).abs() < 1e-12);
            prop_assert!(eq.tau() <= n_r.min(n + 1));
            let f = solve_uqp(&eq, &UqpOptions { restarts: 4, ..Default::default() }).unwrap().f_star;
            prop_assert!(f >= 1.0 - 1e-9 && f <= (n + 1) as f64 + 1e-9);
            for e in [1e-2, 1.0, 1e2] {
                prop_assert!(beamforming_rate(f, e) <= ub_max_trace(eq.tau(), f, e) + 1e-12);
            }
        }
    }
}
