use iconix_core::backend::FeatureVector;
use iconix_core::selection::{export_scatter, select_by_steps, select_representatives, DEFAULT_K};
use iconix_core::simplification::{Frame, SimplificationSequence, Termination};
use iconix_core::{PipelineConfig, Raster};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 30 frames spread over 9 well separated blobs in 4-D, with the blob of
/// each frame shuffled so clusters are not contiguous in step order.
fn planted(seed: u64) -> (Vec<FeatureVector>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blob_of: Vec<usize> = (0..30).map(|i| i % 9).collect();
    blob_of.shuffle(&mut rng);
    let centers: Vec<[f64; 4]> = (0..9)
        .map(|b| [100.0 * (b % 3) as f64, 100.0 * (b / 3) as f64, 50.0 * b as f64, 0.0])
        .collect();
    let features = blob_of
        .iter()
        .map(|&b| {
            let v: Vec<f64> = centers[b].iter().map(|c| c + rng.random_range(-3.0..3.0)).collect();
            FeatureVector::new(v).unwrap()
        })
        .collect();
    (features, blob_of)
}

/// Per blob: the frame nearest the blob mean, smaller step on ties.
fn oracle(features: &[FeatureVector], blob_of: &[usize]) -> Vec<usize> {
    let mut picks = Vec::new();
    for b in 0..9 {
        let members: Vec<usize> = (0..features.len()).filter(|&i| blob_of[i] == b).collect();
        let dim = features[0].values().len();
        let mean: Vec<f64> = (0..dim)
            .map(|d| members.iter().map(|&i| features[i].values()[d]).sum::<f64>() / members.len() as f64)
            .collect();
        let dist = |i: usize| -> f64 {
            features[i].values().iter().zip(&mean).map(|(a, m)| (a - m) * (a - m)).sum()
        };
        let mut best = members[0];
        for &i in &members[1..] {
            if dist(i) < dist(best) {
                best = i;
            }
        }
        picks.push(best);
    }
    picks.sort();
    picks
}

fn sequence(n: usize) -> SimplificationSequence {
    let px = Raster::gray(1, 1, vec![0]).unwrap();
    SimplificationSequence {
        frames: (0..n)
            .map(|i| Frame {
                step: i as u32,
                image: px.clone(),
            })
            .collect(),
        checkpoints: Vec::new(),
        terminated_by: Termination::MaxSteps,
    }
}

#[test]
fn default_k_is_nine() {
    assert_eq!(DEFAULT_K, 9);
    assert_eq!(PipelineConfig::default().k, 9);
}

#[test]
fn representatives_are_blob_argmins() {
    for seed in 0..10 {
        let (features, blob_of) = planted(seed);
        let seq = sequence(30);
        let r = select_representatives(&seq, &features, DEFAULT_K, 42).unwrap();
        assert_eq!(r.k, 9);
        assert_eq!(r.representatives, oracle(&features, &blob_of), "seed {seed}");
        // The recovered partition is the planted one.
        for i in 0..30 {
            for j in 0..30 {
                assert_eq!(r.assignments[i] == r.assignments[j], blob_of[i] == blob_of[j]);
            }
        }
    }
}

#[test]
fn short_sequences_take_every_frame() {
    let features: Vec<FeatureVector> = (0..4).map(|i| FeatureVector::new(vec![i as f64]).unwrap()).collect();
    let r = select_by_steps(&[0, 5, 10, 15], &features, 9, 1).unwrap();
    assert_eq!(r.k, 4);
    assert_eq!(r.representatives, vec![0, 1, 2, 3]);
}

#[test]
fn scatter_carries_every_frame_and_centroid() {
    let (features, _) = planted(3);
    let steps: Vec<u32> = (0..30).collect();
    let r = select_by_steps(&steps, &features, 9, 42).unwrap();
    let scatter = export_scatter(&r, &features, &steps).unwrap();
    assert_eq!(scatter.points.len(), 30);
    assert_eq!(scatter.centroids.len(), 9);
    for (i, p) in scatter.points.iter().enumerate() {
        assert_eq!(p.cluster, r.assignments[i]);
        assert_eq!(p.step, steps[i]);
    }
    assert!(scatter.variance[0] >= scatter.variance[1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn one_representative_per_cluster(
        values in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..40),
        k in 1usize..12,
        seed in any::<u64>(),
    ) {
        let features: Vec<FeatureVector> = values.into_iter().map(|v| FeatureVector::new(v).unwrap()).collect();
        let steps: Vec<u32> = (0..features.len() as u32).map(|s| s * 2).collect();
        let r = select_by_steps(&steps, &features, k, seed).unwrap();
        prop_assert_eq!(r.k, k.min(features.len()));
        prop_assert_eq!(r.representatives.len(), r.k);
        let mut clusters: Vec<usize> = r.representatives.iter().map(|&i| r.assignments[i]).collect();
        clusters.sort();
        clusters.dedup();
        prop_assert_eq!(clusters.len(), r.k);
        prop_assert!(r.representatives.windows(2).all(|w| steps[w[0]] < steps[w[1]]));
    }
}
