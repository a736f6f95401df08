//! Uniform hash grid for fixed-radius neighbour queries.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::math;

/// Buckets points by the integer cell of their first `K` coordinates.
/// Queries scan the `3^K` surrounding cells, so the cell size must be at
/// least the query radius.
#[derive(Clone, Debug)]
pub struct HashGrid<const K: usize> {
    cell: f64,
    map: HashMap<[i32; K], Vec<u32>>,
}

impl<const K: usize> HashGrid<K> {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite());
        HashGrid {
            cell,
            map: HashMap::new(),
        }
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn key(&self, p: &[f64]) -> [i32; K] {
        let mut k = [0i32; K];
        for (i, v) in k.iter_mut().enumerate() {
            if i < p.len() {
                *v = math::floor(p[i] / self.cell) as i32;
            }
        }
        k
    }

    pub fn insert(&mut self, p: &[f64], id: u32) {
        let k = self.key(p);
        self.map.entry(k).or_default().push(id);
    }

    /// Calls `f` for every id stored in the cells adjacent to `p`'s cell.
    pub fn for_each_candidate(&self, p: &[f64], mut f: impl FnMut(u32)) {
        let base = self.key(p);
        let mut off = [-1i32; K];
        loop {
            let mut k = base;
            for i in 0..K {
                k[i] += off[i];
            }
            if let Some(ids) = self.map.get(&k) {
                for &id in ids {
                    f(id);
                }
            }
            // odometer over {-1, 0, 1}^K
            let mut i = 0;
            loop {
                if i == K {
                    return;
                }
                if off[i] < 1 {
                    off[i] += 1;
                    break;
                }
                off[i] = -1;
                i += 1;
            }
        }
    }

    /// Whether some stored point (looked up through `get`) lies within `r` of `p`.
    pub fn any_within<'a>(
        &self,
        p: &[f64],
        r: f64,
        get: impl Fn(u32) -> &'a [f64],
    ) -> bool {
        let r2 = r * r;
        let mut hit = false;
        self.for_each_candidate(p, |id| {
            if !hit && math::dist2(p, get(id)) <= r2 {
                hit = true;
            }
        });
        hit
    }

    /// Ids within `r` of `p`, sorted.
    pub fn within<'a>(&self, p: &[f64], r: f64, get: impl Fn(u32) -> &'a [f64]) -> Vec<u32> {
        let r2 = r * r;
        let mut out = Vec::new();
        self.for_each_candidate(p, |id| {
            if math::dist2(p, get(id)) <= r2 {
                out.push(id);
            }
        });
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<[f64; 6]> = (0..400)
            .map(|_| core::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
            .collect();
        let r = 0.7;
        let mut g6 = HashGrid::<6>::new(r);
        let mut g3 = HashGrid::<3>::new(r);
        for (i, p) in pts.iter().enumerate() {
            g6.insert(p, i as u32);
            g3.insert(p, i as u32);
        }
        for p in pts.iter().take(50) {
            let brute: Vec<u32> = (0..pts.len() as u32)
                .filter(|&j| math::dist(p, &pts[j as usize]) <= r)
                .collect();
            assert_eq!(g6.within(p, r, |j| &pts[j as usize]), brute);
            assert_eq!(g3.within(p, r, |j| &pts[j as usize]), brute);
        }
    }

    #[test]
    fn negative_coordinates_bucket_correctly() {
        let g = HashGrid::<2>::new(1.0);
        assert_eq!(g.key(&[-0.5, 0.5]), [-1, 0]);
        let _ = vec![0u8];
    }
}
