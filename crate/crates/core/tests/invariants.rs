use cavex_core::config::RunConfig;
use cavex_core::experiment::{run_outcome, simulate};
use cavex_core::observables::beta_collection;
use cavex_core::sweep::{linspace, run_sweep, Axis, Reduce, SweepSpec, AMPLITUDE_KEY, LASER_DETUNING_KEY};
use proptest::prelude::*;

fn config(t_p: f64, laser: f64, split: f64, amplitude: f64, phonons: bool) -> RunConfig {
    let mut c = RunConfig::default();
    c.pulse.t_p_ps = t_p;
    c.pulse.laser_detuning_ghz = laser;
    c.system.excitation_detuning_ghz = split;
    c.pulse.amplitude_pi = amplitude;
    c.phonon.enabled = phonons;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trajectories_stay_physical(
        t_p in 2.0f64..6.0,
        laser in -150.0f64..150.0,
        split in -100.0f64..100.0,
        amplitude in 0.0f64..40.0,
        phonons in any::<bool>(),
    ) {
        let s = simulate(&config(t_p, laser, split, amplitude, phonons)).unwrap();
        for rho in &s.trajectory.states {
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-8);
            prop_assert!(rho.trace().im.abs() < 1e-10);
            prop_assert!(rho.min_eigenvalue() > -1e-6);
        }
        for p in &s.trajectory.excited_pop {
            prop_assert!((-1e-6..=1.0 + 1e-6).contains(p));
        }
    }

    #[test]
    fn eta_is_beta_times_pi(
        laser in -150.0f64..150.0,
        split in -100.0f64..100.0,
        amplitude in 0.0f64..30.0,
    ) {
        let c = config(3.6, laser, split, amplitude, true);
        let m = run_outcome(&c).unwrap().merit;
        prop_assert!((m.eta_c - m.beta_c * m.pi_e).abs() <= 1e-12 * m.pi_e.abs().max(1.0));
        prop_assert!(m.pi_e >= -1e-9);
    }

    #[test]
    fn mirrored_runs_agree_without_phonons(
        laser in -150.0f64..150.0,
        split in -100.0f64..100.0,
        amplitude in 0.0f64..30.0,
    ) {
        let c = config(3.6, laser, split, amplitude, false);
        let a = run_outcome(&c).unwrap().merit.pi_e;
        let b = run_outcome(&c.mirrored()).unwrap().merit.pi_e;
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

proptest! {
    #[test]
    fn collection_efficiency_bounds(collection in -200.0f64..200.0, split in -200.0f64..200.0, kappa in 1.0f64..100.0) {
        let mut c = RunConfig::default();
        c.system.collection_detuning_ghz = collection;
        c.system.excitation_detuning_ghz = collection + split;
        c.system.kappa_ghz = kappa;
        c.system.gamma_bg_ghz = 0.0;
        let beta = beta_collection(&c.system_spec().unwrap());
        prop_assert!((0.0..=1.0).contains(&beta));
        // the collection mode is the one nearer the emitter
        if collection.abs() <= (collection + split).abs() {
            prop_assert!(beta >= 0.5 - 1e-12);
        }
    }

    #[test]
    fn param_paths_round_trip(x in -500.0f64..500.0) {
        for path in [LASER_DETUNING_KEY, "system.g_GHz", "system.excitation_detuning_GHz", "pulse.t_p_ps"] {
            let mut c = RunConfig::default();
            c.set_param(path, x).unwrap();
            prop_assert_eq!(c.get_param(path).unwrap(), x);
        }
    }
}

fn small_spec() -> SweepSpec {
    let mut base = RunConfig::default();
    base.phonon.enabled = false;
    SweepSpec {
        base,
        axis1: Axis::new(LASER_DETUNING_KEY, vec![60.0, 88.0, 120.0]),
        axis2: Some(Axis::new(AMPLITUDE_KEY, vec![4.0, 12.0])),
        reduce: Reduce::PiE,
        metric: Default::default(),
        amplitude_grid: Vec::new(),
    }
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let spec = small_spec();
    let one = run_sweep(&spec, 1).unwrap();
    let three = run_sweep(&spec, 3).unwrap();
    assert_eq!(one.values(), three.values());
    assert_eq!(one.metadata.spec_hash, three.metadata.spec_hash);
}

#[test]
fn finer_amplitude_grids_never_lower_the_maximum() {
    let mut spec = small_spec();
    spec.axis2 = None;
    spec.reduce = Reduce::MaxOverAmplitude;
    spec.amplitude_grid = linspace(2.0, 30.0, 8);
    let coarse = run_sweep(&spec, 1).unwrap();
    // every coarse point is also on the fine grid
    spec.amplitude_grid = linspace(2.0, 30.0, 15);
    let fine = run_sweep(&spec, 1).unwrap();
    for (c, f) in coarse.values().iter().zip(fine.values()) {
        assert!(f >= *c - 1e-12, "{f} < {c}");
    }
}

#[test]
fn recipes_parse_and_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let spec = SweepSpec::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            spec.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 9);
}
