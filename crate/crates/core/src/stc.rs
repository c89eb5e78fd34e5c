//! Binary syndrome-trellis codes.
//!
//! The parity-check matrix `H` (`m x n`) is built by placing copies of a small
//! `h x w` submatrix along the diagonal: message bit `b` owns a block of
//! consecutive columns, each of which holds one submatrix column starting at
//! row `b` and clipped at row `m`. Block `b` spans columns
//! `floor(b n / m) .. floor((b + 1) n / m)`, so blocks are `floor(n/m)` or
//! `ceil(n/m)` wide and the submatrix is `ceil(n/m)` wide.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::StcError;

pub const MIN_HEIGHT: u32 = 6;
pub const MAX_HEIGHT: u32 = 15;
pub const DEFAULT_HEIGHT: u32 = 12;
/// Flip cost treated as "never flip unless forced".
pub const WET_COST: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Submatrix {
    pub height: u32,
    pub width: usize,
    pub seed: u64,
    /// Column `c`, bit `r` is entry `(r, c)`.
    pub columns: Vec<u32>,
}

impl Submatrix {
    /// Pseudorandom `height x width` submatrix whose first and last rows are
    /// all ones.
    pub fn new(height: u32, width: usize, seed: u64) -> Result<Self, StcError> {
        if !(MIN_HEIGHT..=MAX_HEIGHT).contains(&height) {
            return Err(StcError::BadHeight(height));
        }
        let width = width.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edge = 1u32 | (1 << (height - 1));
        let columns = (0..width)
            .map(|_| (rng.gen::<u32>() & ((1 << height) - 1)) | edge)
            .collect();
        Ok(Submatrix {
            height,
            width,
            seed,
            columns,
        })
    }

    /// Entry at row `r`, column `c`.
    pub fn get(&self, r: u32, c: usize) -> bool {
        self.columns[c] >> r & 1 == 1
    }
}

/// Submatrix width for a code of rate `rate = m / n`: `ceil(1 / rate)`.
pub fn width_for_rate(rate: f64) -> Result<usize, StcError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(StcError::BadRate(rate));
    }
    Ok((1.0 / rate - 1e-12).ceil() as usize)
}

/// Submatrix sized for embedding `m` bits into `n` cover bits.
pub fn build_submatrix(height: u32, n: usize, m: usize, seed: u64) -> Result<Submatrix, StcError> {
    let width = if m == 0 { 1 } else { n.div_ceil(m) };
    Submatrix::new(height, width, seed)
}

/// The full banded parity-check matrix for given `n` and `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityCheck<'a> {
    pub sub: &'a Submatrix,
    pub n: usize,
    pub m: usize,
}

impl<'a> ParityCheck<'a> {
    pub fn new(sub: &'a Submatrix, n: usize, m: usize) -> Result<Self, StcError> {
        if m > n {
            return Err(StcError::Infeasible { message: m, cover: n });
        }
        if m > 0 && n.div_ceil(m) > sub.width {
            return Err(StcError::Shape(format!(
                "submatrix width {} is too narrow for {n} columns and {m} rows",
                sub.width
            )));
        }
        Ok(ParityCheck { sub, n, m })
    }

    /// Column range of block `b`.
    #[inline]
    pub fn block(&self, b: usize) -> std::ops::Range<usize> {
        (b * self.n / self.m)..((b + 1) * self.n / self.m)
    }

    /// Column `c` of block `b` as a bit mask over rows `b..b+h`, clipped at `m`.
    #[inline]
    fn pattern(&self, b: usize, offset: usize) -> u32 {
        let rows = (self.m - b).min(self.sub.height as usize) as u32;
        self.sub.columns[offset] & ((1u32 << rows) - 1)
    }

    /// Dense row-major copy, for tests and small examples.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        let mut h = vec![vec![0u8; self.n]; self.m];
        for b in 0..self.m {
            let block = self.block(b);
            for (k, c) in block.clone().enumerate() {
                let p = self.pattern(b, k);
                for r in 0..self.sub.height as usize {
                    if p >> r & 1 == 1 {
                        h[b + r][c] = 1;
                    }
                }
            }
        }
        h
    }

    /// `H * y` over GF(2).
    pub fn syndrome(&self, y: &[u8]) -> Result<Vec<u8>, StcError> {
        if y.len() != self.n {
            return Err(StcError::Shape(format!("{} stego bits, expected {}", y.len(), self.n)));
        }
        let mut out = vec![0u8; self.m];
        for b in 0..self.m {
            let mut acc = 0u32;
            for (k, c) in self.block(b).enumerate() {
                if y[c] & 1 == 1 {
                    acc ^= self.pattern(b, k);
                }
            }
            let mut r = 0;
            while acc != 0 {
                out[b + r] ^= (acc & 1) as u8;
                acc >>= 1;
                r += 1;
            }
        }
        Ok(out)
    }
}

/// Decode: the message carried by `stego` is its syndrome.
pub fn stc_decode(stego: &[u8], sub: &Submatrix, m: usize) -> Result<Vec<u8>, StcError> {
    ParityCheck::new(sub, stego.len(), m)?.syndrome(stego)
}

/// Result of one trellis search.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub stego: Vec<u8>,
    /// Sum of the flip costs of the changed bits.
    pub cost: f64,
}

/// Minimum-cost `stego` with `H * stego = message`, by Viterbi search over
/// the `2^h` syndrome states.
pub fn stc_encode(cover: &[u8], costs: &[f64], message: &[u8], sub: &Submatrix) -> Result<Encoded, StcError> {
    let n = cover.len();
    let m = message.len();
    if costs.len() != n {
        return Err(StcError::Shape(format!("{} costs for {n} cover bits", costs.len())));
    }
    if let Some(&bad) = costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(StcError::BadCost(bad));
    }
    let code = ParityCheck::new(sub, n, m)?;
    if m == 0 {
        return Ok(Encoded {
            stego: cover.to_vec(),
            cost: 0.0,
        });
    }
    let states = 1usize << sub.height;
    let words = states.div_ceil(64);
    let mut choice = vec![0u64; words * n];
    let mut cost = vec![f64::INFINITY; states];
    let mut next = vec![f64::INFINITY; states];
    cost[0] = 0.0;

    for b in 0..m {
        let block = code.block(b);
        for (k, c) in block.enumerate() {
            let p = code.pattern(b, k) as usize;
            let (c0, c1) = if cover[c] & 1 == 0 { (0.0, costs[c]) } else { (costs[c], 0.0) };
            let bits = &mut choice[c * words..(c + 1) * words];
            for s in 0..states {
                // bit set: the best path into `s` puts a 1 in this column
                let zero = cost[s] + c0;
                let one = cost[s ^ p] + c1;
                if one < zero {
                    next[s] = one;
                    bits[s >> 6] |= 1 << (s & 63);
                } else {
                    next[s] = zero;
                }
            }
            std::mem::swap(&mut cost, &mut next);
        }
        // row b is complete: keep states that match message bit b, then shift
        let want = (message[b] & 1) as usize;
        let mut any = false;
        for t in 0..states / 2 {
            next[t] = cost[(t << 1) | want];
            any |= next[t].is_finite();
        }
        for t in states / 2..states {
            next[t] = f64::INFINITY;
        }
        if !any {
            return Err(StcError::Infeasible { message: m, cover: n });
        }
        std::mem::swap(&mut cost, &mut next);
    }

    let total = cost[0];
    if !total.is_finite() {
        return Err(StcError::Infeasible { message: m, cover: n });
    }
    let mut stego = cover.to_vec();
    let mut state = 0usize;
    for b in (0..m).rev() {
        state = (state << 1) | (message[b] & 1) as usize;
        let block = code.block(b);
        for (k, c) in block.clone().enumerate().rev() {
            let y = (choice[c * words + (state >> 6)] >> (state & 63) & 1) as u8;
            stego[c] = y;
            if y == 1 {
                state ^= code.pattern(b, k) as usize;
            }
        }
    }
    debug_assert_eq!(state, 0);
    Ok(Encoded { stego, cost: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest};

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.gen_range(0..2)).collect()
    }

    #[test]
    fn rate_band() {
        assert_eq!(width_for_rate(0.5).unwrap(), 2);
        assert_eq!(width_for_rate(0.4).unwrap(), 3);
        assert!(width_for_rate(1.0).is_err());
        assert!(Submatrix::new(5, 2, 0).is_err());
        assert!(Submatrix::new(16, 2, 0).is_err());
    }

    #[test]
    fn deterministic_submatrix() {
        assert_eq!(Submatrix::new(12, 4, 77).unwrap(), Submatrix::new(12, 4, 77).unwrap());
        assert_ne!(Submatrix::new(12, 4, 77).unwrap(), Submatrix::new(12, 4, 78).unwrap());
    }

    proptest! {
        #[test]
        fn edge_rows_nonzero(seed in any::<u64>(), h in MIN_HEIGHT..=MAX_HEIGHT, w in 1usize..8) {
            let s = Submatrix::new(h, w, seed).unwrap();
            prop_assert!((0..w).any(|c| s.get(0, c)));
            prop_assert!((0..w).any(|c| s.get(h - 1, c)));
        }
    }

    #[test]
    fn syndrome_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, m) in [(10, 3), (37, 11), (64, 32), (20, 20)] {
            let sub = build_submatrix(7, n, m, rng.gen()).unwrap();
            let code = ParityCheck::new(&sub, n, m).unwrap();
            let h = code.dense();
            let y = random_bits(&mut rng, n);
            let expect: Vec<u8> = h
                .iter()
                .map(|row| row.iter().zip(&y).fold(0, |a, (x, b)| a ^ (x & b)))
                .collect();
            assert_eq!(code.syndrome(&y).unwrap(), expect);
        }
    }

    #[test]
    fn satisfied_message_is_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cover = random_bits(&mut rng, 200);
        let sub = build_submatrix(10, 200, 80, 5).unwrap();
        let msg = stc_decode(&cover, &sub, 80).unwrap();
        let out = stc_encode(&cover, &vec![1.0; 200], &msg, &sub).unwrap();
        assert_eq!(out.stego, cover);
        assert_eq!(out.cost, 0.0);
    }

    #[test]
    fn zero_stego_decodes_to_zero() {
        let sub = build_submatrix(8, 30, 10, 1).unwrap();
        assert_eq!(stc_decode(&[0; 30], &sub, 10).unwrap(), vec![0; 10]);
    }

    #[test]
    fn single_flip_toggles_its_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sub = build_submatrix(9, 40, 15, 4).unwrap();
        let code = ParityCheck::new(&sub, 40, 15).unwrap();
        let dense = code.dense();
        let y = random_bits(&mut rng, 40);
        let base = code.syndrome(&y).unwrap();
        for c in 0..40 {
            let mut z = y.clone();
            z[c] ^= 1;
            let s = code.syndrome(&z).unwrap();
            for r in 0..15 {
                assert_eq!(s[r] ^ base[r], dense[r][c]);
            }
        }
    }

    fn brute_force(cover: &[u8], costs: &[f64], msg: &[u8], code: &ParityCheck) -> f64 {
        let n = cover.len();
        let mut best = f64::INFINITY;
        for word in 0u32..(1 << n) {
            let y: Vec<u8> = (0..n).map(|i| (word >> i & 1) as u8).collect();
            if code.syndrome(&y).unwrap() == msg {
                let c: f64 = (0..n).filter(|&i| y[i] != cover[i]).map(|i| costs[i]).sum();
                best = best.min(c);
            }
        }
        best
    }

    #[test]
    fn optimal_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let n = rng.gen_range(2..=12);
            let m = rng.gen_range(1..=n.min(4));
            let sub = build_submatrix(6, n, m, rng.gen()).unwrap();
            let code = ParityCheck::new(&sub, n, m).unwrap();
            let cover = random_bits(&mut rng, n);
            let msg = random_bits(&mut rng, m);
            let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let out = stc_encode(&cover, &costs, &msg, &sub).unwrap();
            assert_eq!(code.syndrome(&out.stego).unwrap(), msg);
            let real: f64 = (0..n).filter(|&i| out.stego[i] != cover[i]).map(|i| costs[i]).sum();
            assert!((real - out.cost).abs() < 1e-9);
            assert!((out.cost - brute_force(&cover, &costs, &msg, &code)).abs() < 1e-9);
        }
    }

    #[test]
    fn lowering_a_cost_never_raises_the_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 60;
            let sub = build_submatrix(8, n, 20, rng.gen()).unwrap();
            let cover = random_bits(&mut rng, n);
            let msg = random_bits(&mut rng, 20);
            let mut costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let a = stc_encode(&cover, &costs, &msg, &sub).unwrap().cost;
            let i = rng.gen_range(0..n);
            costs[i] *= rng.gen_range(0.0..1.0);
            let b = stc_encode(&cover, &costs, &msg, &sub).unwrap().cost;
            assert!(b <= a + 1e-12);
        }
    }

    #[test]
    fn wet_bits_are_avoided() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 300;
        let cover = random_bits(&mut rng, n);
        let costs: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { WET_COST } else { 1.0 }).collect();
        let msg = random_bits(&mut rng, 100);
        let sub = build_submatrix(10, n, 100, 9).unwrap();
        let out = stc_encode(&cover, &costs, &msg, &sub).unwrap();
        assert!((0..n).step_by(3).all(|i| out.stego[i] == cover[i]));
        assert_eq!(stc_decode(&out.stego, &sub, 100).unwrap(), msg);
    }

    #[test]
    fn rejects_bad_input() {
        let sub = build_submatrix(6, 10, 5, 0).unwrap();
        assert!(matches!(stc_encode(&[0; 10], &[1.0; 9], &[0; 5], &sub), Err(StcError::Shape(_))));
        assert!(matches!(stc_encode(&[0; 10], &[-1.0; 10], &[0; 5], &sub), Err(StcError::BadCost(_))));
        assert!(matches!(stc_encode(&[0; 4], &[1.0; 4], &[0; 5], &sub), Err(StcError::Infeasible { .. })));
    }
}
