//! The embedding domain: decimal coordinates mapped to integers at a fixed
//! number of decimal places, viewed as two's-complement bitplanes.
//!
//! Coordinates are signed, so each channel is treated as an `h*`-bit
//! two's-complement word. Sender and receiver apply the same mask, which makes
//! bit `l` of `v + d` depend only on the low `l` bits of `v` and `d`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::QuantError;
use crate::mesh::Mesh;

/// Largest magnitude that survives the `f64` round trip exactly.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Z,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::X, Channel::Y, Channel::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> char {
        match self {
            Channel::X => 'x',
            Channel::Y => 'y',
            Channel::Z => 'z',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        match c {
            'x' => Some(Channel::X),
            'y' => Some(Channel::Y),
            'z' => Some(Channel::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Number of significant fractional digits in a decimal literal such as
/// `"0.172345"`, `"1.50"` or `"2.5e-3"`.
pub fn fractional_digits(text: &str) -> u32 {
    let t = text.trim().trim_start_matches(['+', '-']);
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(p) => (&t[..p], t[p + 1..].parse::<i64>().unwrap_or(0)),
        None => (t, 0),
    };
    let frac = match mantissa.find('.') {
        Some(p) => mantissa[p + 1..].trim_end_matches('0'),
        None => "",
    };
    let digits = frac.len() as i64 - exponent;
    if digits <= 0 {
        // a positive exponent may still leave zeros behind the integer part
        0
    } else {
        digits as u32
    }
}

fn float_digits(v: f64) -> u32 {
    for k in 0..=15u32 {
        let s = v * 10f64.powi(k as i32);
        if (s - s.round()).abs() <= 1e-9 * s.abs().max(1.0) {
            return k;
        }
    }
    15
}

/// The largest number of fractional decimal digits over all coordinates.
///
/// Reads the source text when the mesh came from a file; otherwise falls back
/// to the shortest decimal that reproduces each float.
pub fn detect_k_star(mesh: &Mesh) -> u32 {
    match mesh.coord_text() {
        Some(text) => text
            .iter()
            .flat_map(|v| v.iter())
            .map(|s| fractional_digits(s))
            .max()
            .unwrap_or(0),
        None => mesh
            .vertices()
            .iter()
            .flat_map(|v| v.iter())
            .map(|&c| float_digits(c))
            .max()
            .unwrap_or(0),
    }
}

/// `round(v * 10^k)` as an exact integer.
pub fn to_fixed(v: f64, k_star: u32) -> Result<i64, QuantError> {
    let s = (v * 10f64.powi(k_star as i32)).round();
    if !s.is_finite() || s.abs() >= EXACT_LIMIT {
        return Err(QuantError::Overflow { value: v, k_star });
    }
    Ok(s as i64)
}

#[inline]
pub fn from_fixed(value: i64, k_star: u32) -> f64 {
    value as f64 / 10f64.powi(k_star as i32)
}

/// Decimal rendering of `value / 10^k` with exactly `k` fractional digits.
pub fn format_fixed(value: i64, k: u32) -> String {
    let digits = value.unsigned_abs().to_string();
    let k = k as usize;
    let sign = if value < 0 { "-" } else { "" };
    if k == 0 {
        return format!("{sign}{digits}");
    }
    let padded = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (int, frac) = padded.split_at(padded.len() - k);
    format!("{sign}{int}.{frac}")
}

/// Smallest `h` such that every value lies in `[-2^(h-1), 2^(h-1) - 1]`.
pub fn signed_width<I: IntoIterator<Item = i64>>(values: I) -> u32 {
    values
        .into_iter()
        .map(|v| {
            // bits needed for the magnitude plus one sign bit
            let m = if v < 0 { !v } else { v } as u64;
            65 - m.leading_zeros()
        })
        .max()
        .unwrap_or(1)
        .max(1)
}

#[inline]
pub fn mask(value: i64, bit_width: u32) -> u64 {
    if bit_width >= 64 {
        value as u64
    } else {
        (value as u64) & ((1u64 << bit_width) - 1)
    }
}

/// Bit `level` (1 = least significant) of the two's-complement word.
#[inline]
pub fn bit(value: i64, level: u32) -> u8 {
    ((value as u64 >> (level - 1)) & 1) as u8
}

#[inline]
fn fits(value: i64, bit_width: u32) -> bool {
    bit_width >= 64 || {
        let half = 1i64 << (bit_width - 1);
        (-half..half).contains(&value)
    }
}

/// One coordinate channel mapped to integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedChannel {
    pub integers: Vec<i64>,
    pub k_star: u32,
    pub bit_width: u32,
    pub channel: Channel,
}

/// A single bitplane: bit `level` of every vertex, in vertex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitplane {
    pub level: u32,
    pub bits: Vec<u8>,
}

/// Map channel `channel` of `mesh` to integers at `k_star` decimals.
///
/// The bit width is the minimal two's-complement width of the cover values;
/// widen it with [`QuantizedChannel::with_bit_width`] before embedding.
pub fn integer_map(
    mesh: &Mesh,
    channel: Channel,
    k_star: u32,
) -> Result<QuantizedChannel, QuantError> {
    let j = channel.index();
    let integers = mesh
        .vertices()
        .iter()
        .map(|v| to_fixed(v[j], k_star))
        .collect::<Result<Vec<_>, _>>()?;
    let bit_width = signed_width(integers.iter().copied());
    Ok(QuantizedChannel {
        integers,
        k_star,
        bit_width,
        channel,
    })
}

/// Width that holds every cover value and every value reachable by adding a
/// step in `[min_step, max_step]`.
pub fn stego_bit_width(integers: &[i64], min_step: i64, max_step: i64) -> u32 {
    let lo = integers.iter().copied().min().unwrap_or(0);
    let hi = integers.iter().copied().max().unwrap_or(0);
    signed_width([lo, hi, lo.saturating_add(min_step), hi.saturating_add(max_step)])
}

impl QuantizedChannel {
    pub fn with_bit_width(mut self, bit_width: u32) -> Self {
        self.bit_width = bit_width;
        self
    }

    pub fn len(&self) -> usize {
        self.integers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.integers.is_empty()
    }

    /// `v mod 2^h*` for every vertex.
    pub fn masked_bits(&self) -> Vec<u64> {
        self.integers.iter().map(|&v| mask(v, self.bit_width)).collect()
    }

    pub fn bitplane(&self, level: u32) -> Result<Bitplane, QuantError> {
        if level == 0 || level > self.bit_width {
            return Err(QuantError::LevelOutOfRange {
                level,
                bit_width: self.bit_width,
            });
        }
        Ok(Bitplane {
            level,
            bits: self.integers.iter().map(|&v| bit(v, level)).collect(),
        })
    }

    /// Integers after adding `steps[i]` (in units of `10^-k*`) to vertex `i`.
    pub fn apply_steps(&self, steps: &[i64]) -> Result<Vec<i64>, QuantError> {
        if steps.len() != self.integers.len() {
            return Err(QuantError::LengthMismatch(steps.len(), self.integers.len()));
        }
        self.integers
            .iter()
            .zip(steps)
            .map(|(&v, &d)| {
                let s = v + d;
                if fits(s, self.bit_width) {
                    Ok(s)
                } else {
                    Err(QuantError::WidthExceeded {
                        value: s,
                        bit_width: self.bit_width,
                    })
                }
            })
            .collect()
    }

    /// Stego coordinates `(v + d) / 10^k*`.
    pub fn decimal_map(&self, steps: &[i64]) -> Result<Vec<f64>, QuantError> {
        Ok(self
            .apply_steps(steps)?
            .into_iter()
            .map(|s| from_fixed(s, self.k_star))
            .collect())
    }
}

/// Bitplane `level` of `q`.
pub fn get_bitplane(q: &QuantizedChannel, level: u32) -> Result<Bitplane, QuantError> {
    q.bitplane(level)
}

/// Rebuild masked words from low bitplanes (`planes[k]` holds level `k + 1`)
/// and the bits above them taken from `high_bits`.
pub fn assemble(planes: &[Bitplane], high_bits: &[u64]) -> Result<Vec<u64>, QuantError> {
    let low = planes.len() as u32;
    let keep = if low >= 64 { 0 } else { !((1u64 << low) - 1) };
    let mut out: Vec<u64> = high_bits.iter().map(|&h| h & keep).collect();
    for (k, plane) in planes.iter().enumerate() {
        if plane.level != k as u32 + 1 {
            return Err(QuantError::LevelOutOfRange {
                level: plane.level,
                bit_width: low,
            });
        }
        if plane.bits.len() != out.len() {
            return Err(QuantError::LengthMismatch(plane.bits.len(), out.len()));
        }
        for (word, &b) in out.iter_mut().zip(&plane.bits) {
            *word |= u64::from(b & 1) << k;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digit_counting() {
        assert_eq!(fractional_digits("0.172345"), 6);
        assert_eq!(fractional_digits("1.50"), 1);
        assert_eq!(fractional_digits("-7"), 0);
        assert_eq!(fractional_digits("2.5e-3"), 4);
        assert_eq!(fractional_digits("1.25E2"), 0);
        assert_eq!(fractional_digits("-0.000001"), 6);
    }

    #[test]
    fn k_star_examples() {
        let m = crate::mesh::parse_mesh(
            "OFF\n3 1 0\n0.172345 0.267324 0.563521\n1.5 2.25 0\n3 -7 0\n3 0 1 2\n",
            crate::mesh::MeshFormat::Off,
        )
        .unwrap();
        assert_eq!(detect_k_star(&m), 6);
        let m = crate::mesh::parse_mesh(
            "OFF\n3 1 0\n1.5 2.25 0\n1 0 0\n0 1 0\n3 0 1 2\n",
            crate::mesh::MeshFormat::Off,
        )
        .unwrap();
        assert_eq!(detect_k_star(&m), 2);
        let m = Mesh::new(vec![[3.0, -7.0, 0.0]; 3], vec![]).unwrap();
        assert_eq!(detect_k_star(&m), 0);
    }

    #[test]
    fn integer_examples() {
        assert_eq!(to_fixed(0.172345, 6).unwrap(), 172345);
        assert_eq!(to_fixed(-0.5, 6).unwrap(), -500000);
        assert!(matches!(to_fixed(1e12, 6), Err(QuantError::Overflow { .. })));
    }

    #[test]
    fn masking() {
        assert_eq!(mask(5, 4), 0b0101);
        assert_eq!(mask(-1, 4), 0b1111);
        assert_eq!(signed_width([5]), 4);
        assert_eq!(signed_width([-1]), 1);
        assert_eq!(signed_width([-8, 7]), 4);
        assert_eq!(signed_width([8]), 5);
    }

    #[test]
    fn bitplane_examples() {
        let q = QuantizedChannel {
            integers: vec![0b011, 0b101],
            k_star: 0,
            bit_width: 4,
            channel: Channel::X,
        };
        assert_eq!(q.bitplane(1).unwrap().bits, vec![1, 1]);
        assert_eq!(q.bitplane(2).unwrap().bits, vec![1, 0]);
        assert!(q.bitplane(0).is_err());
        assert!(matches!(
            q.bitplane(5),
            Err(QuantError::LevelOutOfRange { level: 5, bit_width: 4 })
        ));
    }

    #[test]
    fn decimal_examples() {
        let q = QuantizedChannel {
            integers: vec![172345, -3],
            k_star: 6,
            bit_width: 20,
            channel: Channel::Y,
        };
        let out = q.decimal_map(&[1, 0]).unwrap();
        assert_eq!(format_fixed(to_fixed(out[0], 6).unwrap(), 6), "0.172346");
        assert_eq!(q.decimal_map(&[0, 0]).unwrap(), vec![0.172345, -0.000003]);
        let narrow = q.clone().with_bit_width(19);
        assert!(narrow.decimal_map(&[-100000, 0]).is_ok());
        assert!(matches!(
            narrow.decimal_map(&[100000, 0]),
            Err(QuantError::WidthExceeded { .. })
        ));
    }

    #[test]
    fn fixed_formatting() {
        assert_eq!(format_fixed(-1, 6), "-0.000001");
        assert_eq!(format_fixed(0, 6), "0.000000");
        assert_eq!(format_fixed(1234567, 6), "1.234567");
        assert_eq!(format_fixed(-42, 0), "-42");
    }

    proptest! {
        #[test]
        fn masked_addition_commutes(v in -(1i64 << 40)..(1i64 << 40), d in -64i64..64, h in 42u32..60) {
            let direct = mask(v + d, h);
            let via_mask = (mask(v, h).wrapping_add(d as u64)) & ((1u64 << h) - 1);
            prop_assert_eq!(direct, via_mask);
            // bit l of the sum depends only on the low l bits of the summands
            for l in 1..=8u32 {
                let low = (mask(v, h) & ((1u64 << l) - 1)).wrapping_add(d as u64);
                prop_assert_eq!(bit(v + d, l) as u64, (low >> (l - 1)) & 1);
            }
        }

        #[test]
        fn assemble_inverts_split(values in proptest::collection::vec(-(1i64 << 30)..(1i64 << 30), 1..64)) {
            let q = QuantizedChannel {
                bit_width: signed_width(values.iter().copied()),
                integers: values,
                k_star: 0,
                channel: Channel::Z,
            };
            let planes: Vec<_> = (1..=q.bit_width).map(|l| q.bitplane(l).unwrap()).collect();
            let zeros = vec![0u64; q.len()];
            prop_assert_eq!(assemble(&planes, &zeros).unwrap(), q.masked_bits());
            // substituting only the low planes leaves the rest of the cover intact
            let low = (q.bit_width / 2).max(1) as usize;
            let flipped: Vec<Bitplane> = planes[..low]
                .iter()
                .map(|p| Bitplane { level: p.level, bits: p.bits.iter().map(|b| b ^ 1).collect() })
                .collect();
            let mixed = assemble(&flipped, &q.masked_bits()).unwrap();
            for (m, c) in mixed.iter().zip(q.masked_bits()) {
                prop_assert_eq!(m >> low, c >> low);
                prop_assert_eq!((m ^ c) & ((1 << low) - 1), (1 << low) - 1);
            }
        }
    }
}
