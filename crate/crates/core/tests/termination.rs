use iconix_core::backend::mock::{ReferenceMetric, ReferenceSimplifier};
use iconix_core::backend::{BackendError, Simplifier};
use iconix_core::simplification::{
    check_termination, run_simplification, single_component, Checkpoint, StopRule, Termination,
};
use iconix_core::{Channels, Raster};
use proptest::prelude::*;

const SIDE: u32 = 64;

/// White canvas with a dark square of `side` pixels at (8, 8), plus a
/// detached dot in the far corner when `dot` is set.
fn square(side: u32, dot: bool) -> Raster {
    let mut data = vec![255u8; (SIDE * SIDE) as usize];
    for y in 8..8 + side {
        for x in 8..8 + side {
            data[(y * SIDE + x) as usize] = 0;
        }
    }
    if dot {
        data[(60 * SIDE + 60) as usize] = 0;
    }
    Raster::gray(SIDE, SIDE, data).unwrap()
}

/// Frames are a pure function of the step, ignoring the input image.
struct Scripted<F: Fn(u32) -> Raster>(F);

impl<F: Fn(u32) -> Raster> Simplifier for Scripted<F> {
    fn simplify(&self, _: &Raster, start: u32, n: u32) -> Result<Vec<Raster>, BackendError> {
        Ok((start + 1..=start + n).map(&self.0).collect())
    }
}

fn rule() -> StopRule {
    StopRule {
        interval: 5,
        epsilon: 0.02,
        stable_required: 2,
        max_steps: 200,
        threshold: 128,
    }
}

#[test]
fn defaults_match_the_stop_rule() {
    assert_eq!(StopRule::default(), rule());
}

#[test]
fn frozen_at_twenty_single_from_fifteen_stops_at_thirty() {
    // The square shrinks one pixel per step until step 20; a stray dot
    // keeps two components until step 15.
    let script = Scripted(|t: u32| square(44 - t.min(20), t < 15));
    let seq = run_simplification(&square(44, true), &script, &ReferenceMetric, &rule()).unwrap();
    assert_eq!(seq.terminated_by, Termination::PlateauAndSingleComponent);
    assert_eq!(seq.last_step(), 30);
    let steps: Vec<u32> = seq.checkpoints.iter().map(|c| c.step).collect();
    assert_eq!(steps, [5, 10, 15, 20, 25, 30]);
    let d: Vec<f64> = seq.checkpoints.iter().map(|c| c.distance).collect();
    assert!(d[3] >= 0.02, "{d:?}");
    assert_eq!(&d[4..], &[0.0, 0.0]);
    assert_eq!(seq.len(), 31);
}

#[test]
fn oscillation_runs_to_the_cap() {
    let script = Scripted(|t: u32| square(if t % 2 == 0 { 40 } else { 20 }, false));
    let seq = run_simplification(&square(40, false), &script, &ReferenceMetric, &rule()).unwrap();
    assert_eq!(seq.terminated_by, Termination::MaxSteps);
    assert_eq!(seq.last_step(), 200);
    assert_eq!(seq.len(), 201);
    assert_eq!(seq.checkpoints.len(), 40);
}

#[test]
fn uniform_blob_stops_at_two_intervals() {
    let dark = Raster::filled(32, 32, Channels::Gray8, &[0]).unwrap();
    for simplifier in [&ReferenceSimplifier::default() as &dyn Simplifier, &Scripted(|_| dark.clone())] {
        let seq = run_simplification(&dark, simplifier, &ReferenceMetric, &rule()).unwrap();
        assert_eq!(seq.terminated_by, Termination::PlateauAndSingleComponent);
        assert_eq!(seq.last_step(), 10);
    }
}

#[test]
fn two_components_block_a_plateau() {
    let checkpoints = [
        Checkpoint { step: 5, distance: 0.0 },
        Checkpoint { step: 10, distance: 0.0 },
    ];
    let two = square(20, true);
    assert!(!single_component(&two, 128));
    assert!(!check_termination(&checkpoints, &two, 0.02, 2));
    assert!(check_termination(&checkpoints, &square(20, false), 0.02, 2));
    let script = Scripted(|_| square(20, true));
    let seq = run_simplification(&two, &script, &ReferenceMetric, &rule()).unwrap();
    assert_eq!(seq.terminated_by, Termination::MaxSteps);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn checkpoint_bookkeeping(
        sizes in prop::collection::vec(4u32..50, 1..12),
        interval in 1u32..8,
        max_steps in 8u32..60,
    ) {
        let script = Scripted(move |t: u32| square(sizes[t as usize % sizes.len()], t % 3 == 0));
        let rule = StopRule { interval, max_steps, ..rule() };
        let seq = run_simplification(&square(30, false), &script, &ReferenceMetric, &rule).unwrap();
        let last = seq.last_step();
        prop_assert!(last <= max_steps);
        prop_assert_eq!(seq.len() as u32, last + 1);
        prop_assert_eq!(seq.checkpoints.len() as u32, last / interval);
        for (i, c) in seq.checkpoints.iter().enumerate() {
            prop_assert_eq!(c.step, (i as u32 + 1) * interval);
            prop_assert!((0.0..=1.0).contains(&c.distance));
        }
        if seq.terminated_by == Termination::MaxSteps {
            prop_assert_eq!(last, max_steps);
        }
    }
}
