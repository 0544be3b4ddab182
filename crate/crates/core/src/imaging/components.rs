use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::BinaryMask;

/// Which neighbours of a pixel count as connected to it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// N, S, E and W neighbours.
    Four,
    /// All eight neighbours.
    #[default]
    Eight,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabels {
    /// Number of foreground components.
    pub count: u32,
    /// Row-major labels; 0 is background, components are numbered from 1
    /// in order of their first pixel.
    pub labels: Vec<u32>,
}

impl ComponentLabels {
    /// One mask per component, in label order.
    pub fn masks(&self, width: u32, height: u32) -> Vec<BinaryMask> {
        let mut masks: Vec<BinaryMask> = (0..self.count)
            .map(|_| BinaryMask::new(width, height))
            .collect();
        for (i, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                masks[l as usize - 1].set_index(i, true);
            }
        }
        masks
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // Keep the smaller provisional label as root.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass union-find labelling.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabels {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut labels = vec![0u32; w * h];
    // parent[0] is a sentinel for the background.
    let mut parent: Vec<u32> = vec![0];

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.get_index(i) {
                continue;
            }
            let mut neighbours = [0u32; 4];
            let mut n = 0;
            let mut push = |l: u32| {
                if l != 0 {
                    neighbours[n] = l;
                    n += 1;
                }
            };
            if x > 0 {
                push(labels[i - 1]);
            }
            if y > 0 {
                push(labels[i - w]);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        push(labels[i - w - 1]);
                    }
                    if x + 1 < w {
                        push(labels[i - w + 1]);
                    }
                }
            }
            if n == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                labels[i] = l;
            } else {
                let first = neighbours[0];
                for &other in &neighbours[1..n] {
                    union(&mut parent, first, other);
                }
                labels[i] = find(&mut parent, first);
            }
        }
    }

    let mut compact = vec![0u32; parent.len()];
    let mut count = 0u32;
    for l in labels.iter_mut().filter(|l| **l != 0) {
        let root = find(&mut parent, *l) as usize;
        if compact[root] == 0 {
            count += 1;
            compact[root] = count;
        }
        *l = compact[root];
    }
    ComponentLabels { count, labels }
}
