//! Bit modification probabilities for layer-by-layer embedding.
//!
//! For every vertex the change distribution over the padded change set is
//! narrowed one bit at a time: after layers `1..l` are fixed only the steps
//! whose `v + step` agrees with the fixed low bits survive. The conditional
//! probability of the next bit is the surviving mass with that bit, divided
//! by the total surviving mass (the running product of past conditionals).

use crate::gibbs::entropy;
use crate::quant::bit;

use super::changeset::ChangeSet;

/// Probability below which a bit is treated as impossible (wet).
pub const P_FLOOR: f64 = 1e-9;

/// Per-vertex state between layers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    /// Next layer to process (1 = least significant bit).
    pub layer: u32,
    /// Surviving padded-set indices as a bitmask.
    pub survivors: Vec<u64>,
    /// Running product of the chosen bits' conditionals, i.e. the mass of
    /// the surviving subset.
    pub mass: Vec<f64>,
    /// `p0` of every processed layer, kept for diagnostics.
    pub p0: Vec<Vec<f64>>,
}

impl LayerState {
    pub fn new(n: usize, cs: &ChangeSet) -> Self {
        let all = if cs.padded().len() == 64 {
            u64::MAX
        } else {
            (1u64 << cs.padded().len()) - 1
        };
        LayerState {
            layer: 1,
            survivors: vec![all; n],
            mass: vec![1.0; n],
            p0: Vec::new(),
        }
    }
}

/// Mass and count of the survivors of vertex `v` whose bit `level` is 0 and 1.
#[inline]
fn split(v: i64, level: u32, cs: &ChangeSet, probs: &[f64], survivors: u64) -> ([f64; 2], [usize; 2]) {
    let mut mass = [0.0; 2];
    let mut count = [0usize; 2];
    let mut s = survivors;
    while s != 0 {
        let d = s.trailing_zeros() as usize;
        s &= s - 1;
        let b = bit(v + cs.padded()[d], level) as usize;
        mass[b] += probs[d];
        if !cs.is_padding(d) {
            count[b] += 1;
        }
    }
    (mass, count)
}

/// `P(bit = 0 | lower bits fixed)` for one vertex. `probs` is the vertex's
/// distribution over the padded set (fillers 0). A survivor set with no mass
/// left falls back to counting the real steps.
#[inline]
pub fn conditional_zero(v: i64, level: u32, cs: &ChangeSet, probs: &[f64], survivors: u64) -> f64 {
    let (mass, count) = split(v, level, cs, probs, survivors);
    let total = mass[0] + mass[1];
    if total > 0.0 {
        mass[0] / total
    } else if count[0] + count[1] > 0 {
        count[0] as f64 / (count[0] + count[1]) as f64
    } else {
        0.5
    }
}

/// Conditionals `p0` of the state's current layer for every vertex.
/// `probs[i * 2^Q + d]` is vertex `i`'s padded distribution.
pub fn bmp_layer(integers: &[i64], cs: &ChangeSet, probs: &[f64], state: &LayerState) -> Vec<f64> {
    let w = cs.padded().len();
    integers
        .iter()
        .enumerate()
        .map(|(i, &v)| conditional_zero(v, state.layer, cs, &probs[i * w..(i + 1) * w], state.survivors[i]))
        .collect()
}

/// Record the stego bits chosen for the current layer and move on.
pub fn advance(state: &mut LayerState, integers: &[i64], cs: &ChangeSet, p0: Vec<f64>, stego_bits: &[u8]) {
    let level = state.layer;
    for (i, &v) in integers.iter().enumerate() {
        let b = stego_bits[i] & 1;
        let mut keep = 0u64;
        let mut s = state.survivors[i];
        while s != 0 {
            let d = s.trailing_zeros() as usize;
            s &= s - 1;
            if bit(v + cs.padded()[d], level) == b {
                keep |= 1 << d;
            }
        }
        let p = if b == 0 { p0[i] } else { 1.0 - p0[i] };
        state.survivors[i] = keep;
        state.mass[i] *= p;
    }
    state.p0.push(p0);
    state.layer += 1;
}

/// Reference bit and flip cost for one layer position: the more likely bit
/// and `ln(p_max / p_min)`, saturated for impossible bits.
#[inline]
pub fn flip_cost(p0: f64, cover_bit: u8) -> (u8, f64) {
    let p1 = 1.0 - p0;
    let reference = if p0 > p1 {
        0
    } else if p1 > p0 {
        1
    } else {
        cover_bit & 1
    };
    let (hi, lo) = if p0 >= p1 { (p0, p1) } else { (p1, p0) };
    let cost = if lo <= 0.0 {
        crate::stc::WET_COST
    } else {
        (hi / lo.max(P_FLOOR)).ln()
    };
    (reference, cost)
}

/// Expected conditional entropy of every layer for one vertex: the entropy
/// of the low `l` bits minus that of the low `l - 1` bits, under `probs`.
pub fn layer_conditional_entropies(v: i64, cs: &ChangeSet, probs: &[f64]) -> Vec<f64> {
    let q = cs.q();
    let mut out = Vec::with_capacity(q as usize);
    let mut previous = 0.0;
    for l in 1..=q {
        let modulus = 1i64 << l;
        let mut joint = vec![0.0; modulus as usize];
        for (d, &s) in cs.padded().iter().enumerate() {
            joint[(v + s).rem_euclid(modulus) as usize] += probs[d];
        }
        let h = entropy(&joint);
        out.push(h - previous);
        previous = h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_three() -> (ChangeSet, Vec<f64>) {
        let cs = ChangeSet::new(&[-1, 0, 1]).unwrap();
        (cs, vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0])
    }

    #[test]
    fn low_bits_01_example() {
        let (cs, probs) = uniform_three();
        // v = ...01: v-1 -> 00, v -> 01, v+1 -> 10, filler v+2 -> 11
        let v = 0b101;
        let mut state = LayerState::new(1, &cs);
        let p0 = bmp_layer(&[v], &cs, &probs, &state);
        assert!((p0[0] - 2.0 / 3.0).abs() < 1e-15);
        // choose bit 0 at layer 1: survivors are v-1 and v+1, each 1/2 at layer 2
        advance(&mut state, &[v], &cs, p0, &[0]);
        assert_eq!(state.survivors[0], 0b101);
        assert!((state.mass[0] - 2.0 / 3.0).abs() < 1e-15);
        let p0 = bmp_layer(&[v], &cs, &probs, &state);
        assert!((p0[0] - 0.5).abs() < 1e-15);
        // choosing bit 1 at layer 1 leaves only v itself (the filler has no mass)
        let mut other = LayerState::new(1, &cs);
        let p = bmp_layer(&[v], &cs, &probs, &other);
        advance(&mut other, &[v], &cs, p, &[1]);
        let p0 = bmp_layer(&[v], &cs, &probs, &other);
        assert_eq!(p0[0], 1.0);
    }

    #[test]
    fn point_mass_never_flips() {
        let cs = ChangeSet::new(&[-1, 0, 1, 2]).unwrap();
        let probs = [0.0, 1.0, 0.0, 0.0];
        for v in [4i64, 5, -3, 10] {
            let p0 = conditional_zero(v, 1, &cs, &probs, 0b1111);
            assert_eq!(p0, if bit(v, 1) == 0 { 1.0 } else { 0.0 });
            let h = layer_conditional_entropies(v, &cs, &probs);
            assert!(h.iter().all(|&x| x.abs() < 1e-15));
            let (reference, cost) = flip_cost(p0, bit(v, 1));
            assert_eq!(reference, bit(v, 1));
            assert_eq!(cost, crate::stc::WET_COST);
        }
    }

    #[test]
    fn flip_cost_examples() {
        assert_eq!(flip_cost(0.5, 1), (1, 0.0));
        let (r, c) = flip_cost(0.2, 0);
        assert_eq!(r, 1);
        assert!((c - 4f64.ln()).abs() < 1e-12);
        let (_, c) = flip_cost(1.0 - 1e-15, 0);
        assert!((c - (1.0 / P_FLOOR).ln()).abs() < 1e-6);
    }

    fn arbitrary_case() -> impl Strategy<Value = (Vec<i64>, Vec<f64>, i64)> {
        (1u32..=4).prop_flat_map(|q| {
            let size = 1usize << q;
            (
                Just((-(size as i64 / 2) + 1..=(size as i64 / 2)).collect::<Vec<_>>()),
                proptest::collection::vec(0.0f64..1.0, size),
                -1_000_000i64..1_000_000,
            )
        })
    }

    proptest! {
        #[test]
        fn chain_rule_and_partitions((steps, weights, v) in arbitrary_case(), drop in 0usize..3) {
            let steps: Vec<i64> = if steps.len() > 2 && drop > 0 {
                // leave a gap so padding is exercised; keep 0
                steps.into_iter().filter(|&s| s != steps_last(drop)).collect()
            } else {
                steps
            };
            let cs = ChangeSet::new(&steps).unwrap();
            let w = cs.padded().len();
            let mut probs: Vec<f64> = (0..w).map(|d| if cs.is_padding(d) { 0.0 } else { weights[d] + 1e-3 }).collect();
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);

            let h: f64 = layer_conditional_entropies(v, &cs, &probs).iter().sum();
            prop_assert!((h - entropy(&probs)).abs() < 1e-9);

            // walk a random path and check the disjoint-partition invariant
            let mut state = LayerState::new(1, &cs);
            for l in 1..=cs.q() {
                let p0 = bmp_layer(&[v], &cs, &probs, &state);
                prop_assert!(p0[0] >= 0.0 && p0[0] <= 1.0);
                let b = (v >> (l - 1) & 1) as u8 ^ ((weights[l as usize % weights.len()] > 0.5) as u8);
                let before = state.survivors[0];
                let mut zero = 0u64;
                for d in 0..w {
                    if before >> d & 1 == 1 && bit(v + cs.padded()[d], l) == 0 {
                        zero |= 1 << d;
                    }
                }
                advance(&mut state, &[v], &cs, p0, &[b]);
                let one = before & !zero;
                prop_assert_eq!(zero & one, 0);
                prop_assert_eq!(zero | one, before);
                prop_assert_eq!(state.survivors[0], if b == 0 { zero } else { one });
                let mass: f64 = (0..w).filter(|d| state.survivors[0] >> d & 1 == 1).map(|d| probs[d]).sum();
                if mass > 0.0 {
                    prop_assert!((mass - state.mass[0]).abs() < 1e-12);
                }
            }
            prop_assert_eq!(state.survivors[0].count_ones(), 1);
        }
    }

    fn steps_last(drop: usize) -> i64 {
        drop as i64
    }
}
