//! Digitally shifted Sobol' points (Joe-Kuo D6 direction numbers).

use std::sync::OnceLock;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobol::params::JoeKuoD6;

use crate::error::{Error, Result};

const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

fn table() -> &'static JoeKuoD6 {
    static TABLE: OnceLock<JoeKuoD6> = OnceLock::new();
    TABLE.get_or_init(JoeKuoD6::extended)
}

/// Number of coordinates the direction-number table supports.
pub fn max_dim() -> usize {
    table().max_dims
}

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = 1u32 << (BITS - 1 - i);
        }
        return v;
    }
    let p = &table().dim_params[dim - 1];
    let s = p.m.len();
    for i in 0..s.min(BITS) {
        v[i] = p.m[i] << (BITS - 1 - i);
    }
    for i in s..BITS {
        let mut x = v[i - s] ^ (v[i - s] >> s);
        for k in 1..s {
            if (p.a >> (s - 1 - k)) & 1 == 1 {
                x ^= v[i - k];
            }
        }
        v[i] = x;
    }
    v
}

/// A Sobol' sequence in `dim` coordinates, optionally XOR-shifted per coordinate.
///
/// Point `i` (1-based; the origin is never produced) is the Gray-code point
/// `XOR_{bits j of i ^ (i >> 1)} v_j`, so any index range can be generated
/// independently and agrees with sequential generation.
#[derive(Clone, Debug)]
pub struct SobolSequence {
    dim: usize,
    dirs: Vec<[u32; BITS]>,
    shift: Vec<u32>,
}

impl SobolSequence {
    pub fn new(dim: usize) -> Result<Self> {
        let max = max_dim();
        if dim > max {
            return Err(Error::UnsupportedDimension {
                requested: dim,
                max,
            });
        }
        Ok(SobolSequence {
            dim,
            dirs: (0..dim).map(directions).collect(),
            shift: vec![0; dim],
        })
    }

    /// Applies a digital shift drawn from `seed`.
    pub fn with_shift(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in &mut self.shift {
            *s = rng.next_u32();
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn integer_point(&self, index: u64, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (d, o) in out.iter_mut().enumerate() {
            let mut x = 0u32;
            let mut g = gray;
            let mut j = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= self.dirs[d][j];
                }
                g >>= 1;
                j += 1;
            }
            *o = x;
        }
    }

    #[inline]
    fn to_unit(x: u32) -> f64 {
        // keep strictly inside (0, 1)
        if x == 0 {
            0.5 * SCALE
        } else {
            x as f64 * SCALE
        }
    }

    /// Writes points `start, start + 1, ..` (1-based indices) row-major into `out`,
    /// whose length must be a multiple of `dim`.
    pub fn fill(&self, start: u64, out: &mut [f64]) -> Result<()> {
        if start == 0 {
            return Err(Error::invalid("start", "point indices are 1-based"));
        }
        if self.dim == 0 {
            return Ok(());
        }
        let count = out.len() / self.dim;
        if count * self.dim != out.len() {
            return Err(Error::Shape(format!(
                "buffer of {} values is not a multiple of dimension {}",
                out.len(),
                self.dim
            )));
        }
        if start.checked_add(count as u64).is_none_or(|e| e > 1u64 << BITS) {
            return Err(Error::invalid("count", "exceeds the 2^32 point period"));
        }
        let mut cur = vec![0u32; self.dim];
        self.integer_point(start, &mut cur);
        for (r, row) in out.chunks_exact_mut(self.dim).enumerate() {
            if r > 0 {
                // gray(i) and gray(i-1) differ in the lowest set bit of i
                let i = start + r as u64;
                let j = i.trailing_zeros() as usize;
                for (d, c) in cur.iter_mut().enumerate() {
                    *c ^= self.dirs[d][j];
                }
            }
            for ((o, &c), &s) in row.iter_mut().zip(&cur).zip(&self.shift) {
                *o = Self::to_unit(c ^ s);
            }
        }
        Ok(())
    }
}

/// Row-major `n x dim` point matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub n: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl PointSet {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// The first `n` points after skipping `skip`, shifted when `scramble_seed` is set.
pub fn sobol_points(
    dim: usize,
    n: usize,
    scramble_seed: Option<u64>,
    skip: u64,
) -> Result<PointSet> {
    let mut seq = SobolSequence::new(dim)?;
    if let Some(seed) = scramble_seed {
        seq = seq.with_shift(seed);
    }
    let mut data = vec![0.0; n * dim];
    seq.fill(1 + skip, &mut data)?;
    Ok(PointSet { n, dim, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coordinate_without_shift() {
        let p = sobol_points(1, 3, None, 0).unwrap();
        assert_eq!(p.data, vec![0.5, 0.75, 0.25]);
    }

    #[test]
    fn second_coordinate_classic_values() {
        let p = sobol_points(2, 4, None, 0).unwrap();
        let second: Vec<f64> = (0..4).map(|i| p.row(i)[1]).collect();
        assert_eq!(second, vec![0.5, 0.25, 0.75, 0.375]);
    }

    #[test]
    fn empty_request() {
        let p = sobol_points(5, 0, Some(3), 0).unwrap();
        assert_eq!(p.n, 0);
        assert!(p.data.is_empty());
    }

    #[test]
    fn table_is_large_enough() {
        assert!(max_dim() >= 2048);
        assert!(matches!(
            SobolSequence::new(max_dim() + 1),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn projections_are_evenly_spread() {
        let n = 1024;
        let p = sobol_points(2, n, None, 0).unwrap();
        for d in 0..2 {
            let mut xs: Vec<f64> = (0..n).map(|i| p.row(i)[d]).collect();
            xs.push(0.0);
            xs.push(1.0);
            xs.sort_by(f64::total_cmp);
            let gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            assert!(gap < 2.0 / n as f64, "dim {d} gap {gap}");
        }
    }

    #[test]
    fn shifted_points_stay_in_open_cube() {
        let p = sobol_points(16, 4096, Some(11), 0).unwrap();
        assert!(p.data.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn ranges_match_sequential_generation() {
        let seq = SobolSequence::new(40).unwrap().with_shift(5);
        let mut all = vec![0.0; 300 * 40];
        seq.fill(1, &mut all).unwrap();
        let mut part = vec![0.0; 77 * 40];
        seq.fill(1 + 123, &mut part).unwrap();
        assert_eq!(&all[123 * 40..200 * 40], &part[..]);
    }

    #[test]
    fn stratification_of_power_of_two_blocks() {
        // every dyadic interval of length 1/64 holds exactly one of the first 64 points
        let p = sobol_points(8, 63, Some(99), 0).unwrap();
        for d in 0..8 {
            let mut seen = [0u32; 64];
            // the origin (index 0) maps to the shift itself
            let seq = SobolSequence::new(8).unwrap().with_shift(99);
            seen[(SobolSequence::to_unit(seq.shift[d]) * 64.0) as usize] += 1;
            for i in 0..63 {
                seen[(p.row(i)[d] * 64.0) as usize] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1), "dim {d}");
        }
    }
}
