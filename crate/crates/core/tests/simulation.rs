mod common;

use ldp_freq::long_multidim::{LongMdimConfig, LongMdimProtocol, LongSolution};
use ldp_freq::longitudinal::{LongBudget, LongKind, LongUeVariant};
use ldp_freq::multidim::{FakeMode, Solution};
use ldp_freq::rng::substream;
use ldp_freq::sim::{gen_dataset, run_experiment, run_on_dataset, Dataset, Distribution, ExperimentConfig, Task};
use ldp_freq::{OracleKind, Warning};

use common::{bias_check, skewed_counts, skewed_dataset};

#[test]
fn skewed_fixture_is_exact() {
    assert_eq!(skewed_counts(5, 10_000), vec![5000, 2000, 1000, 1000, 1000]);
    assert_eq!(skewed_counts(4, 10).iter().sum::<usize>(), 10);
    let ds = skewed_dataset(&[5, 3], 1000);
    assert_eq!(ds.true_freq()[0], vec![0.5, 0.2, 0.1, 0.1, 0.1]);
}

#[test]
fn each_collection_is_unbiased() {
    let n = 5000;
    let ds = skewed_dataset(&[5], n);
    for kind in [LongKind::LGrr, LongKind::LUe(LongUeVariant::LOsue)] {
        let cfg = ExperimentConfig {
            collections: 4,
            trials: 40,
            seed: 21,
            ..ExperimentConfig::long(kind, 4.0, 2.0, n, 5)
        };
        let res = run_on_dataset(&cfg, &ds).unwrap();
        for c in 0..4 {
            let runs: Vec<_> = res.runs.iter().filter(|r| r.collection == c).collect();
            assert_eq!(runs.len(), 40);
            for v in 0..5 {
                let mean = runs.iter().map(|r| r.est[0][v]).sum::<f64>() / 40.0;
                assert!(
                    (mean - res.true_freq[0][v]).abs() < 0.02,
                    "{kind} collection {c} value {v}: {mean}"
                );
            }
        }
        // Fresh second-round noise: collections differ.
        assert_ne!(res.runs[0].est, res.runs[1].est);
    }
}

#[test]
fn long_smp_memos_survive_five_collections() {
    let cfg = LongMdimConfig {
        ks: vec![4, 3, 5],
        budget: LongBudget::new(2.0, 1.0).unwrap(),
        solution: LongSolution::LSmp,
        protocol: LongKind::LUe(LongUeVariant::LSue),
        dbit_d: 1,
    };
    let proto = LongMdimProtocol::new(&cfg).unwrap();
    let tuple = [2, 0, 4];
    let mut user = proto.init_user(&tuple, &mut substream(5, &[0])).unwrap();
    let attr = user.attr.unwrap();
    let memo = user.memo(attr, tuple[attr]).cloned();
    for c in 0..5 {
        proto.client(&tuple, &mut user, &mut substream(5, &[1, c])).unwrap();
        assert_eq!(user.attr, Some(attr));
        assert_eq!(user.memo(attr, tuple[attr]).cloned(), memo);
    }
    assert!(memo.is_some());
}

#[test]
fn rsfd_unary_modes_are_unbiased() {
    let n = 6000;
    let ds = skewed_dataset(&[3, 4], n);
    for kind in [OracleKind::Sue, OracleKind::Oue] {
        for fake in [FakeMode::Zero, FakeMode::Rnd] {
            let cfg = ExperimentConfig {
                fake_mode: fake,
                trials: 60,
                seed: 77,
                ..ExperimentConfig::mdim(Solution::Rsfd, kind, 2.0, n, vec![3, 4])
            };
            let check = bias_check(&cfg, &ds, 0.02, 0.02);
            assert!(check.worst < check.tolerance, "{check:?}");
        }
    }
}

#[test]
fn smp_reports_empty_groups() {
    let ds = Dataset::from_rows(vec![2, 2, 2], &[vec![0, 1, 1]]).unwrap();
    let cfg = ExperimentConfig {
        trials: 3,
        ..ExperimentConfig::mdim(Solution::Smp, OracleKind::Grr, 1.0, 1, vec![2, 2, 2])
    };
    let res = run_on_dataset(&cfg, &ds).unwrap();
    let empty = res
        .warnings
        .iter()
        .filter(|w| matches!(w, Warning::EmptyGroup { .. }))
        .count();
    assert!(empty >= 2, "{:?}", res.warnings);
}

#[test]
fn dbit_unsampled_values_are_reported() {
    let cfg = ExperimentConfig {
        seed: 1,
        ..ExperimentConfig::long(LongKind::DBitFlipPm, 2.0, 1.0, 3, 9)
    };
    let res = run_experiment(&cfg).unwrap();
    assert!(res.warnings.iter().any(|w| matches!(w, Warning::NoSamplers { .. })));
}

#[test]
fn dataset_overrides_config_shape() {
    let ds = gen_dataset(Distribution::Zipf(1.5), 400, &[6], 2).unwrap();
    let cfg = ExperimentConfig::single(OracleKind::Ss, 1.0, 1, 3);
    let res = run_on_dataset(&cfg, &ds).unwrap();
    assert_eq!(res.config.n, 400);
    assert_eq!(res.config.ks, vec![6]);
    assert_eq!(res.est_freq[0].len(), 6);
}

#[test]
fn seeds_change_results_and_repeat_exactly() {
    let base = ExperimentConfig::mdim(Solution::Spl, OracleKind::Blh, 3.0, 3000, vec![3, 4]);
    let a = run_experiment(&ExperimentConfig {
        seed: 1,
        ..base.clone()
    })
    .unwrap()
    .without_timing();
    let b = run_experiment(&ExperimentConfig {
        seed: 1,
        ..base.clone()
    })
    .unwrap()
    .without_timing();
    let c = run_experiment(&ExperimentConfig { seed: 2, ..base })
        .unwrap()
        .without_timing();
    assert_eq!(a.to_json(), b.to_json());
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn result_json_has_fixed_field_order() {
    let res = run_experiment(&ExperimentConfig::single(OracleKind::Grr, 1.0, 50, 3))
        .unwrap()
        .without_timing();
    let json = res.to_json();
    let pos = |key: &str| json.find(&format!("\"{key}\":")).unwrap();
    assert!(json.starts_with("{\"config\":{\"task\":\"single\""));
    assert!(pos("config") < pos("true_freq") && pos("true_freq") < pos("est_freq"));
    assert!(pos("est_freq") < pos("mse") && pos("mse") < pos("elapsed_ms"));
    assert_eq!(res.config.task, Task::Single);
}

#[test]
fn scaled_down_reference_runs() {
    let n = 200_000;
    let cases = [
        (ExperimentConfig::single(OracleKind::Grr, 1.0, n, 5), 0.2),
        (
            ExperimentConfig::long(LongKind::LUe(LongUeVariant::LSue), 2.0, 1.0, n, 5),
            0.2,
        ),
        (
            ExperimentConfig::mdim(Solution::Rsfd, OracleKind::Grr, 1.0, n, vec![4, 4, 4]),
            0.25,
        ),
        (
            ExperimentConfig::long_mdim(Solution::Smp, LongKind::LGrr, 2.0, 1.0, n, vec![4, 4, 4]),
            0.25,
        ),
    ];
    for (cfg, center) in cases {
        let res = run_experiment(&ExperimentConfig { seed: 13, ..cfg }).unwrap();
        for e in res.est_freq.iter().flatten() {
            assert!((e - center).abs() < 0.03, "{:?}: {e}", res.config.task);
        }
    }
}
