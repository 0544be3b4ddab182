use std::collections::VecDeque;

use iconix_core::imaging::connected_components;
use iconix_core::{BinaryMask, Connectivity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// BFS flood fill seeded in row-major order, so labels come out in order
/// of each component's first pixel.
fn flood_fill(mask: &BinaryMask, eight: bool) -> (u32, Vec<u32>) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut labels = vec![0u32; (w * h) as usize];
    let mut next = 0;
    let offsets: &[(i64, i64)] = if eight {
        &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
    } else {
        &[(0, -1), (-1, 0), (1, 0), (0, 1)]
    };
    for start in 0..(w * h) {
        if !mask.get((start % w) as u32, (start / w) as u32) || labels[start as usize] != 0 {
            continue;
        }
        next += 1;
        labels[start as usize] = next;
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let (x, y) = (p % w, p / w);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let q = ny * w + nx;
                if mask.get(nx as u32, ny as u32) && labels[q as usize] == 0 {
                    labels[q as usize] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    (next, labels)
}

#[test]
fn hundred_random_masks_agree_with_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 0..100 {
        // Densities around the percolation range give the most tangled shapes.
        let density = rng.random_range(0.2..0.7);
        let mask = BinaryMask::from_fn(32, 32, |_, _| rng.random_bool(density));
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let got = connected_components(&mask, conn);
            let (count, labels) = flood_fill(&mask, eight);
            assert_eq!(got.count, count, "mask {n} {conn:?}");
            assert_eq!(got.labels, labels, "mask {n} {conn:?}");
        }
    }
}

#[test]
fn diagonal_touch_differs_by_connectivity() {
    let mask = BinaryMask::from_fn(2, 2, |x, y| x == y);
    assert_eq!(connected_components(&mask, Connectivity::Four).count, 2);
    assert_eq!(connected_components(&mask, Connectivity::Eight).count, 1);
    assert_eq!(connected_components(&BinaryMask::new(5, 5), Connectivity::Eight).count, 0);
}

#[test]
fn component_masks_partition_the_foreground() {
    let mask = BinaryMask::from_fn(10, 10, |x, y| (x / 3 + y / 3) % 2 == 0);
    let comps = connected_components(&mask, Connectivity::Four);
    let masks = comps.masks(10, 10);
    assert_eq!(masks.len(), comps.count as usize);
    assert_eq!(masks.iter().map(|m| m.area()).sum::<usize>(), mask.area());
}

proptest! {
    #[test]
    fn oracle_agreement_on_small_masks(w in 1u32..12, h in 1u32..12, bits in prop::collection::vec(any::<bool>(), 144)) {
        let mask = BinaryMask::from_fn(w, h, |x, y| bits[(y * 12 + x) as usize]);
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let got = connected_components(&mask, conn);
            let (count, labels) = flood_fill(&mask, eight);
            prop_assert_eq!(got.count, count);
            prop_assert_eq!(got.labels, labels);
        }
    }

    #[test]
    fn eight_never_exceeds_four(bits in prop::collection::vec(any::<bool>(), 64)) {
        let mask = BinaryMask::from_bools(8, 8, &bits).unwrap();
        prop_assert!(
            connected_components(&mask, Connectivity::Eight).count
                <= connected_components(&mask, Connectivity::Four).count
        );
    }
}
