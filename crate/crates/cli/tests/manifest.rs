use std::path::PathBuf;

use proptest::prelude::*;
use qwalk_cli::{Engine, FitWindows, RunManifest};
use qwalk_core::DisorderMode;

fn manifest() -> impl Strategy<Value = RunManifest> {
    let mode = prop_oneof![
        Just(DisorderMode::None),
        Just(DisorderMode::DynamicalSpatial),
        Just(DisorderMode::StaticSpatial),
        Just(DisorderMode::DynamicalUniform),
    ];
    let engine = prop_oneof![Just(Engine::Trajectory), Just(Engine::Exact)];
    let window = proptest::option::of(0usize..100);
    (
        mode,
        0.0..=std::f64::consts::PI,
        1usize..200,
        1u64..1_000_000,
        proptest::option::of(0..=i64::MAX as u64),
        engine,
        proptest::option::of(1usize..64),
        "[a-z0-9_/]{1,20}",
        (window.clone(), window.clone(), window.clone(), window),
    )
        .prop_map(|(mode, zeta, steps, realizations, seed, engine, threads, dir, (n_lo, n_hi, d_lo, d_hi))| {
            RunManifest {
                mode,
                zeta,
                steps,
                realizations,
                seed,
                engine,
                threads,
                out_dir: PathBuf::from(dir),
                fit: FitWindows { n_lo, n_hi, d_lo, d_hi },
                ..RunManifest::default()
            }
        })
}

proptest! {
    #[test]
    fn toml_round_trip(m in manifest()) {
        let text = m.to_toml().unwrap();
        prop_assert_eq!(RunManifest::from_toml(&text).unwrap(), m);
    }
}

#[test]
fn empty_file_gives_defaults() {
    let m = RunManifest::from_toml("").unwrap();
    assert_eq!(m, RunManifest::default());
    assert_eq!(m.steps, 20);
    assert_eq!(m.realizations, 500);
    assert_eq!(m.zeta, std::f64::consts::PI);
    assert_eq!(m.seed, None);
    assert_eq!(m.threads, None);
}

#[test]
fn oversized_seed_is_rejected() {
    let m = RunManifest {
        seed: Some(u64::MAX),
        ..RunManifest::default()
    };
    assert_eq!(m.validate().unwrap_err().exit_code(), 2);
}
