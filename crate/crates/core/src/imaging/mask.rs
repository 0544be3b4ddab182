use alloc::vec;
use alloc::vec::Vec;

/// One bit per pixel, row-major, with a cached popcount.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    words: Vec<u64>,
    area: usize,
}

impl core::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("area", &self.area)
            .finish()
    }
}

impl BinaryMask {
    /// Empty mask of the given size.
    pub fn new(width: u32, height: u32) -> Self {
        let bits = width as usize * height as usize;
        Self {
            width,
            height,
            words: vec![0; bits.div_ceil(64)],
            area: 0,
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut mask = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }

    /// Builds a mask from row-major booleans; `None` if the length is wrong.
    pub fn from_bools(width: u32, height: u32, bits: &[bool]) -> Option<Self> {
        if bits.len() != width as usize * height as usize {
            return None;
        }
        let mut mask = Self::new(width, height);
        for (i, &b) in bits.iter().enumerate() {
            if b {
                mask.set_index(i, true);
            }
        }
        Some(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    /// Number of set pixels.
    pub fn area(&self) -> usize {
        self.area
    }

    /// Popcount recomputed from the bit storage.
    pub fn recount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.get_index(y as usize * self.width as usize + x as usize)
    }

    pub fn get_index(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        self.set_index(y as usize * self.width as usize + x as usize, on);
    }

    pub fn set_index(&mut self, i: usize, on: bool) {
        let word = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        let was = *word & bit != 0;
        if on && !was {
            *word |= bit;
            self.area += 1;
        } else if !on && was {
            *word &= !bit;
            self.area -= 1;
        }
    }

    /// Row-major indices of set pixels.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.get_index(i))
    }

    /// First set pixel in row-major scan order.
    pub fn first_set(&self) -> Option<(u32, u32)> {
        self.words.iter().enumerate().find_map(|(wi, &w)| {
            (w != 0).then(|| {
                let i = wi * 64 + w.trailing_zeros() as usize;
                ((i % self.width as usize) as u32, (i / self.width as usize) as u32)
            })
        })
    }

    /// Run lengths in row-major order, alternating unset/set, starting with
    /// an unset run (which may be zero).
    pub fn runs(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut length = 0u32;
        for i in 0..self.len() {
            let bit = self.get_index(i);
            if bit != current {
                runs.push(length);
                current = bit;
                length = 0;
            }
            length += 1;
        }
        runs.push(length);
        runs
    }

    /// Inverse of [`BinaryMask::runs`]; `None` when the runs do not cover
    /// exactly `width·height` pixels.
    pub fn from_runs(width: u32, height: u32, runs: &[u32]) -> Option<Self> {
        let mut mask = Self::new(width, height);
        let mut pos = 0usize;
        for (k, &run) in runs.iter().enumerate() {
            let end = pos.checked_add(run as usize)?;
            if end > mask.len() {
                return None;
            }
            if k % 2 == 1 {
                for i in pos..end {
                    mask.set_index(i, true);
                }
            }
            pos = end;
        }
        (pos == mask.len()).then_some(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn area_tracks_sets_and_clears() {
        let mut m = BinaryMask::new(10, 10);
        m.set(3, 4, true);
        m.set(3, 4, true);
        m.set(9, 9, true);
        assert_eq!(m.area(), 2);
        m.set(3, 4, false);
        assert_eq!(m.area(), 1);
        assert_eq!(m.recount(), 1);
        assert_eq!(m.first_set(), Some((9, 9)));
    }

    #[test]
    fn runs_start_with_background() {
        let m = BinaryMask::from_bools(3, 1, &[true, true, false]).unwrap();
        assert_eq!(m.runs(), vec![0, 2, 1]);
        let blank = BinaryMask::new(2, 2);
        assert_eq!(blank.runs(), vec![4]);
        assert!(BinaryMask::from_runs(2, 2, &[3]).is_none());
    }

    proptest! {
        #[test]
        fn runs_round_trip(w in 1u32..20, h in 1u32..20, seed in any::<u64>()) {
            let m = BinaryMask::from_fn(w, h, |x, y| {
                (seed.rotate_left(x * 7 + y * 13) ^ (x as u64 * 31 + y as u64)) & 3 == 0
            });
            let back = BinaryMask::from_runs(w, h, &m.runs()).unwrap();
            prop_assert_eq!(back.area(), m.recount());
            prop_assert_eq!(back, m);
        }
    }
}
