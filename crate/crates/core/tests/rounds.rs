use matdot_core::sim::{random_inputs, simulate_round, sweep};
use matdot_core::{
    CodecSpec, DecodeStatus, MatDotSpec, NMatSpec, NMatVariant, PolyDotSpec, PrimeField, StragglerModel,
    SubstitutionRule,
};
use proptest::prelude::*;

fn field() -> PrimeField {
    PrimeField::new(65_521).unwrap()
}

fn spec_for(family: u8, size: usize, extra: usize) -> CodecSpec {
    let f = field();
    match family % 4 {
        0 => CodecSpec::MatDot(MatDotSpec::new(f, size, 2 * size - 1 + extra, false).unwrap()),
        1 => CodecSpec::MatDot(MatDotSpec::new(f, size, 2 * size - 1 + extra, true).unwrap()),
        2 => {
            let k = (2 * size - 1) * 4;
            CodecSpec::PolyDot(PolyDotSpec::new(f, 2 * size, size, 2, k + extra, SubstitutionRule::Standard).unwrap())
        }
        _ => {
            let v = NMatVariant::Basic { m: size };
            let k = matdot_core::nmatrix::nmat_threshold(3, v).unwrap();
            CodecSpec::NMatrix(NMatSpec::new(f, 3, v, k + extra).unwrap())
        }
    }
}

#[test]
fn no_stragglers_always_decodes() {
    for family in 0..4 {
        let spec = spec_for(family, 2, 2);
        let inputs = random_inputs(field(), spec.factors(), 4, 9);
        let out = simulate_round(&spec, &inputs, &StragglerModel::default()).unwrap();
        assert!(out.succeeded(), "{}", spec.label());
        assert!(out.used_workers.len() <= spec.recovery_threshold());
    }
}

#[test]
fn certain_failure_never_decodes() {
    for family in 0..4 {
        let spec = spec_for(family, 2, 2);
        let inputs = random_inputs(field(), spec.factors(), 4, 9);
        let model = StragglerModel {
            fail_prob: 1.0,
            ..StragglerModel::default()
        };
        let out = simulate_round(&spec, &inputs, &model).unwrap();
        assert_eq!(
            out.decode_status,
            DecodeStatus::ThresholdFailure {
                needed: spec.recovery_threshold(),
                got: 0
            }
        );
        assert!(out.wall_time.is_none());
    }
}

#[test]
fn single_trial_sweep_matches_one_round() {
    let spec = spec_for(0, 3, 2);
    let model = StragglerModel {
        fail_prob: 0.2,
        seed: 4,
        ..StragglerModel::default()
    };
    let stats = sweep(std::slice::from_ref(&spec), 6, &model, 1, 5).unwrap();
    let inputs = random_inputs(field(), 2, 6, matdot_core::sim::trial_seed(5, 0));
    let round = StragglerModel {
        seed: matdot_core::sim::trial_seed(4, 0),
        ..model
    };
    let out = simulate_round(&spec, &inputs, &round).unwrap();
    assert_eq!(stats[0].successes, usize::from(out.succeeded()));
    assert_eq!(stats[0].mean_wall_time, out.wall_time);
    assert_eq!(stats[0].costs, out.costs);
}

#[test]
fn kth_finish_time_drops_as_workers_grow() {
    let model = StragglerModel {
        rate: 0.5,
        seed: 12,
        ..StragglerModel::default()
    };
    let specs: Vec<CodecSpec> = [0, 3, 6, 9]
        .iter()
        .map(|&extra| CodecSpec::MatDot(MatDotSpec::new(field(), 3, 5 + extra, false).unwrap()))
        .collect();
    let stats = sweep(&specs, 3, &model, 300, 1).unwrap();
    let times: Vec<f64> = stats.iter().map(|s| s.mean_wall_time.unwrap()).collect();
    assert!(times.windows(2).all(|w| w[0] > w[1]), "{times:?}");
}

#[test]
fn lower_threshold_never_loses_under_straggling() {
    let model = StragglerModel {
        fail_prob: 0.35,
        seed: 3,
        ..StragglerModel::default()
    };
    for p in [9, 11, 13] {
        let md = CodecSpec::MatDot(MatDotSpec::new(field(), 3, p, false).unwrap());
        let poly = CodecSpec::PolyDot(PolyDotSpec::new(field(), 3, 1, 3, p, SubstitutionRule::Standard).unwrap());
        let stats = sweep(&[md, poly], 3, &model, 200, 2).unwrap();
        assert!(stats[0].successes >= stats[1].successes, "P={p}: {stats:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn success_tracks_survivor_count(family in 0u8..4, size in 1usize..=3, extra in 0usize..4,
                                     fail in 0.0f64..0.8, seed in any::<u64>()) {
        let spec = spec_for(family, size, extra);
        let inputs = random_inputs(field(), spec.factors(), 6, seed ^ 1);
        let model = StragglerModel { fail_prob: fail, seed, ..StragglerModel::default() };
        let out = simulate_round(&spec, &inputs, &model).unwrap();
        let survivors = out.completion_order.len();
        let k = spec.recovery_threshold();
        if survivors >= k {
            prop_assert!(out.succeeded());
            prop_assert!(out.used_workers.len() <= k);
        } else if !matches!(&spec, CodecSpec::MatDot(s) if s.is_systematic()) {
            prop_assert_eq!(out.decode_status, DecodeStatus::ThresholdFailure { needed: k, got: survivors });
        }
        prop_assert_eq!(out.costs.fusion_in_symbols, k as u64 * out.costs.per_worker_out_symbols);
        prop_assert_eq!(out.costs.master_out_symbols, spec.workers() as u64 * out.costs.per_worker_in_symbols);
        let order: Vec<_> = out.completion_order.iter().map(|&(w, _)| w).collect();
        prop_assert!(order.starts_with(&out.used_workers));
    }
}
