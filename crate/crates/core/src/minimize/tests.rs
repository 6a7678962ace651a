use super::*;
use crate::kernel::KernelSpec;
use std::f64::consts::PI;

type K = KernelSpec<f64>;

fn quick() -> OptimizerConfig {
    OptimizerConfig {
        n_modes: 4,
        tol_step: 1e-5,
        descent_nodes: 128,
        ..OptimizerConfig::default()
    }
}

#[test]
fn projection_examples() {
    let b = StarShape::unit_disk();
    assert_eq!(project_volume(&b, PI).unwrap().r0(), 1.0);
    let two = StarShape::disk([0.0; 2], 2.0).unwrap();
    assert!((project_volume(&two, PI).unwrap().r0() - 1.0).abs() < 1e-15);
    let s = StarShape::new([0.1, 0.0], 1.3, vec![(2, 0.1, 0.02), (5, 0.0, 0.03)]).unwrap();
    let p = project_volume(&s, PI).unwrap();
    assert!((p.area() - PI).abs() < 1e-12);
    assert_eq!(p.modes(), s.modes());
    assert!(project_volume(&s, 0.0).is_err());
}

#[test]
fn allocations_are_partitions_most_even_first() {
    assert_eq!(allocations(8, 1), vec![vec![8]]);
    assert_eq!(
        allocations(8, 2),
        vec![vec![4, 4], vec![5, 3], vec![6, 2], vec![7, 1]]
    );
    let three = allocations(6, 3);
    assert_eq!(three[0], vec![2, 2, 2]);
    assert_eq!(three.len(), 3);
    assert!(three.iter().all(|a| a.iter().sum::<usize>() == 6));
}

#[test]
fn zero_epsilon_descent_returns_to_the_disk() {
    let start = StarShape::new([0.0; 2], 1.0, vec![(2, 0.1, 0.0), (3, 0.0, 0.05)]).unwrap();
    let t = minimize_single(&K::power(-0.5), 0.0, &start, &quick()).unwrap();
    assert!(t.max_asymmetry() < 5e-3, "{}", t.max_asymmetry());
    assert!(t.converged && t.locally_optimal);
    assert!(t.energies.windows(2).all(|w| w[1] <= w[0]));
    assert!(t.iterations.iter().all(|r| (r.area - PI).abs() < 1e-10));
    assert!(t.final_descent_energy() <= t.start_energy());
}

#[test]
fn small_epsilon_descent_from_elongated_start() {
    let start = StarShape::new([0.0; 2], 1.0, vec![(2, 0.1, 0.0)]).unwrap();
    let t = minimize_single(&K::power(-0.5), 1e-3, &start, &quick()).unwrap();
    assert!(t.max_asymmetry() < 1e-2);
    assert!((t.shapes[0].area() - PI).abs() < 1e-10);
}

#[test]
fn constant_kernel_splits_only_past_the_volume_crossing() {
    // With ℜ(Ω) = |Ω|² two half disks win once 2π√2 + επ²/2 < 2π + επ².
    let crossing = 2.0 * PI * (2f64.sqrt() - 1.0) / (PI * PI / 2.0);
    let cfg = OptimizerConfig {
        mass_grid: 4,
        mass_refinements: 0,
        ..quick()
    };
    let (list, trace) = minimize_generalized(&K::constant(), 0.5 * crossing, 2, &cfg).unwrap();
    assert_eq!(list.len(), 1);
    assert!(trace.energies.windows(2).all(|w| w[1] < w[0]));
    let single = 2.0 * PI + 0.5 * crossing * PI * PI;
    assert!((trace.energy.total - single).abs() < 1e-6);
    let (list, trace) = minimize_generalized(&K::constant(), 2.0 * crossing, 2, &cfg).unwrap();
    assert_eq!(list.len(), 2);
    let split = 2.0 * 2f64.sqrt() * PI + 2.0 * crossing * PI * PI / 2.0;
    assert!(
        (trace.energy.total - split).abs() < 1e-6,
        "{}",
        trace.energy.total
    );
}

#[test]
fn large_epsilon_prefers_two_components() {
    let cfg = OptimizerConfig {
        n_modes: 2,
        mass_grid: 2,
        mass_refinements: 0,
        ..quick()
    };
    let (small, _) = minimize_generalized(&K::power(-0.5), 0.05, 2, &cfg).unwrap();
    assert_eq!(small.len(), 1);
    let (large, trace) = minimize_generalized(&K::power(-0.5), 2.0, 2, &cfg).unwrap();
    assert_eq!(large.len(), 2);
    assert!(trace.locally_optimal);
    assert!((large.total_area() - PI).abs() < 1e-10);
}

#[test]
fn fission_interpolates_the_first_crossing() {
    let row = |e: f64, single: f64, multi: f64| SweepRow {
        epsilon: e,
        best_single_energy: single,
        best_split_energy: single.min(multi),
        best_multi_energy: Some(multi),
        n_components_chosen: if multi < single { 2 } else { 1 },
        asymmetry: 0.0,
        fractions: vec![1.0],
        status: RowStatus::Ok,
    };
    let rows = vec![row(0.1, 1.0, 2.0), row(0.2, 1.0, 1.5), row(0.4, 1.0, 0.5)];
    let (t, b) = fission(&rows);
    assert!((t.unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(b, Some((0.2, 0.4)));
    assert_eq!(fission(&rows[..2]).0, None);
}

#[test]
fn config_validation() {
    assert!(OptimizerConfig::default().validate().is_ok());
    for bad in [
        OptimizerConfig {
            n_modes: 0,
            ..Default::default()
        },
        OptimizerConfig {
            tol_energy: 0.0,
            ..Default::default()
        },
        OptimizerConfig {
            step_shrink: 1.0,
            ..Default::default()
        },
        OptimizerConfig {
            mass_grid: 1,
            ..Default::default()
        },
    ] {
        assert!(bad.validate().is_err());
    }
    let text = serde_json::to_string(&OptimizerConfig::default()).unwrap();
    let back: OptimizerConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, OptimizerConfig::default());
    assert!(serde_json::from_str::<OptimizerConfig>(r#"{"bogus": 1}"#).is_err());
}

#[test]
fn random_starts_have_unit_area_and_repeat() {
    let a: StarShape<f64> = random_start(7, 8, 0.1).unwrap();
    let b: StarShape<f64> = random_start(7, 8, 0.1).unwrap();
    assert_eq!(a, b);
    assert!((a.area() - PI).abs() < 1e-12);
    assert_eq!(a.modes().len(), 8);
}

#[test]
fn svg_outputs_are_well_formed() {
    let s = shapes_svg(&[StarShape::<f64>::unit_disk()]);
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    let r = SweepResult {
        rows: Vec::new(),
        fission_threshold: None,
        fission_bracket: None,
    };
    assert!(sweep_svg(&r).contains("</svg>"));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn descent_keeps_area_and_never_rises(seed in 0u64..1000, eps in 0.0f64..0.5) {
            let cfg = OptimizerConfig {
                n_modes: 3,
                tol_step: 1e-4,
                descent_nodes: 64,
                ..OptimizerConfig::default()
            };
            let start: StarShape<f64> = random_start(seed, 3, 0.1).unwrap();
            let t = minimize_single(&K::power(-0.5), eps, &start, &cfg).unwrap();
            prop_assert!(t.iterations.iter().all(|r| (r.area - PI).abs() < 1e-10));
            prop_assert!(t.shapes.iter().all(|s| (s.area() - PI).abs() < 1e-10));
            prop_assert!(t.energies.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(t.final_descent_energy() <= t.start_energy());
        }
    }
}

#[test]
fn sweep_rows_split_no_worse_and_flatten_as_epsilon_shrinks() {
    let cfg = OptimizerConfig {
        n_modes: 3,
        mass_grid: 2,
        mass_refinements: 0,
        tol_step: 1e-5,
        descent_nodes: 128,
        ..OptimizerConfig::default()
    };
    let eps = [0.02, 0.1, 0.3, 0.6];
    let r = epsilon_sweep(&K::power(-0.5), &eps, &cfg).unwrap();
    for row in &r.rows {
        assert_eq!(row.status, RowStatus::Ok);
        assert!(row.best_split_energy <= row.best_single_energy + 1e-12);
    }
    // Single-component rows: asymmetry shrinks with ε up to descent noise.
    for w in r.rows.windows(2) {
        if w[1].n_components_chosen == 1 {
            assert!(w[0].asymmetry <= w[1].asymmetry + 1e-3, "{w:?}");
        }
    }
}

#[test]
fn runner_matches_the_batch_sweep_and_resumes() {
    let cfg = OptimizerConfig {
        n_modes: 2,
        mass_grid: 2,
        mass_refinements: 0,
        tol_step: 1e-4,
        descent_nodes: 64,
        ..OptimizerConfig::default()
    };
    let k = K::power(-0.5);
    let eps = [0.2, 0.6, 1.2];
    let batch = epsilon_sweep(&k, &eps, &cfg).unwrap();
    let mut first = SweepRunner::new(&k, &cfg).unwrap();
    first.step(eps[0]).unwrap();
    let warm = first.warm_start().clone();
    let mut resumed = SweepRunner::resume(&k, &cfg, first.rows().to_vec(), warm).unwrap();
    for &e in &eps[1..] {
        resumed.step(e).unwrap();
    }
    assert_eq!(resumed.finish(), batch);
    let mut runner = SweepRunner::new(&k, &cfg).unwrap();
    runner.step(0.5).unwrap();
    assert!(runner.step(0.5).is_err());
}
