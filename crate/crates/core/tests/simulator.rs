use irsvlc::{
    default_scene, required_snr, run_trials, ser_curve, zero_gain_fraction, RequiredSnr, Scenario, SceneParams,
    Scene, SnrGrid, SOFT_FEC_LIMIT,
};

#[test]
fn reruns_are_bit_identical() {
    let scene = default_scene(5).unwrap().with_blocker_density(1.0).unwrap();
    let a = run_trials(&scene, 300, 42).unwrap();
    let b = run_trials(&scene, 300, 42).unwrap();
    assert_eq!(a, b);
    let c = run_trials(&scene, 300, 43).unwrap();
    assert_ne!(a, c);
}

#[test]
fn pool_size_does_not_change_results() {
    let scene = default_scene(5).unwrap().with_blocker_density(1.0).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_trials(&scene, 200, 3).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn gains_are_ordered_per_trial_and_zero_fractions_nest() {
    let scene = default_scene(10).unwrap().with_blocker_density(1.0).unwrap();
    let gains = run_trials(&scene, 2000, 11).unwrap();
    for g in &gains {
        let (a, b, c) = (
            Scenario::LosOnly.effective_gain(g),
            Scenario::LosNlos.effective_gain(g),
            Scenario::LosNlosIrs.effective_gain(g),
        );
        assert!(a <= b && b <= c, "{g:?}");
    }
    let z: Vec<f64> = Scenario::ALL.iter().map(|&s| zero_gain_fraction(&gains, s)).collect();
    assert!(z[2] <= z[1] && z[1] <= z[0], "{z:?}");
    assert!(z[0] > 0.1);
}

#[test]
fn ser_curves_are_monotone_and_bounded() {
    let scene = default_scene(10).unwrap().with_blocker_density(1.0).unwrap();
    let gains = run_trials(&scene, 1000, 12).unwrap();
    for s in Scenario::ALL {
        let curve = ser_curve(&gains, s, &SnrGrid::default()).unwrap();
        assert_eq!(curve.points.len(), 81);
        for w in curve.points.windows(2) {
            assert!(w[1].ser <= w[0].ser);
        }
        assert!(curve.points.iter().all(|p| (0.0..=0.5).contains(&p.ser)));
    }
}

#[test]
fn los_only_saturates_under_blockage() {
    let scene = default_scene(1).unwrap().with_blocker_density(1.0).unwrap();
    let gains = run_trials(&scene, 3000, 13).unwrap();
    let curve = ser_curve(&gains, Scenario::LosOnly, &SnrGrid::default()).unwrap();
    assert_eq!(required_snr(&curve, SOFT_FEC_LIMIT).unwrap(), RequiredSnr::Unreachable);
    assert!(curve.points.last().unwrap().ser > SOFT_FEC_LIMIT);
    // the floor sits at half the zero-gain fraction
    let high = ser_curve(&gains, Scenario::LosOnly, &SnrGrid::new(60.0, 60.0, 1.0).unwrap()).unwrap();
    let floor = zero_gain_fraction(&gains, Scenario::LosOnly) / 2.0;
    assert!((high.points[0].ser - floor).abs() < 0.02, "{} vs {floor}", high.points[0].ser);
}

#[test]
fn enclosing_blockers_can_be_kept() {
    let mut params = SceneParams { n_per_side: 5, ..SceneParams::default() };
    params.blockers.density = 1.0;
    let dropped = run_trials(&Scene::build(&params).unwrap(), 1000, 14).unwrap();
    params.blockers.drop_enclosing = false;
    let kept = run_trials(&Scene::build(&params).unwrap(), 1000, 14).unwrap();
    let z_drop = zero_gain_fraction(&dropped, Scenario::LosNlosIrs);
    let z_keep = zero_gain_fraction(&kept, Scenario::LosNlosIrs);
    // a receiver inside a 0.75 x 0.2 m footprint happens with probability near 14 %
    assert!(z_keep > z_drop + 0.08, "{z_keep} vs {z_drop}");
}

#[test]
fn larger_arrays_need_less_snr() {
    let required = |n| {
        let gains = run_trials(&default_scene(n).unwrap(), 1000, 15).unwrap();
        let curve = ser_curve(&gains, Scenario::LosNlosIrs, &SnrGrid::default()).unwrap();
        required_snr(&curve, SOFT_FEC_LIMIT).unwrap().db().unwrap()
    };
    let (small, large) = (required(5), required(25));
    assert!(large < small, "{large} vs {small}");
}
