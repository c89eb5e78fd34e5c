use std::fmt;

use serde::Serialize;

use crate::error::ChangeSetError;

/// Largest padded set the per-vertex subset masks can hold.
pub const MAX_CHANGES: usize = 64;

/// Smallest `q` with `len <= 2^q`.
pub fn determine_q(len: usize) -> Result<u32, ChangeSetError> {
    if len < 2 {
        return Err(ChangeSetError::TooSmall(len));
    }
    if len > MAX_CHANGES {
        return Err(ChangeSetError::TooLarge(len));
    }
    Ok(usize::BITS - (len - 1).leading_zeros())
}

/// Admissible coordinate changes in units of `10^-k*`, padded with
/// zero-probability fillers to `2^Q` entries.
///
/// The first `len()` entries of [`padded`](Self::padded) are the real steps
/// in ascending order; fillers follow. All padded entries are distinct modulo
/// `2^Q`, so the low `Q` bits of `v + step` identify the step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeSet {
    q: u32,
    padded: Vec<i64>,
    real: usize,
}

impl ChangeSet {
    pub fn new(steps: &[i64]) -> Result<Self, ChangeSetError> {
        let q = determine_q(steps.len())?;
        let mut sorted = steps.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ChangeSetError::Duplicate(w[0]));
        }
        if !sorted.contains(&0) {
            return Err(ChangeSetError::MissingZero);
        }
        pad_changeset(&sorted, q)
    }

    /// Preset change set for a payload in bits per vertex: the smallest of
    /// 1.5, 3, 4.5 and 6 bpv that is at least `alpha` (6 beyond that).
    pub fn preset(alpha: f64) -> Self {
        let steps: Vec<i64> = if alpha <= 1.5 {
            vec![0, 1]
        } else if alpha <= 3.0 {
            (-1..=2).collect()
        } else if alpha <= 4.5 {
            (-3..=4).collect()
        } else {
            (-7..=8).collect()
        };
        ChangeSet::new(&steps).expect("presets are valid")
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Real steps, ascending.
    pub fn steps(&self) -> &[i64] {
        &self.padded[..self.real]
    }

    /// Real steps followed by fillers; length `2^Q`.
    pub fn padded(&self) -> &[i64] {
        &self.padded
    }

    pub fn len(&self) -> usize {
        self.real
    }

    pub fn is_empty(&self) -> bool {
        self.real == 0
    }

    pub fn is_padding(&self, index: usize) -> bool {
        index >= self.real
    }

    /// Index of step 0 in [`steps`](Self::steps).
    pub fn zero_index(&self) -> usize {
        self.steps().iter().position(|&s| s == 0).expect("0 is a member")
    }

    pub fn min_step(&self) -> i64 {
        *self.padded.iter().min().unwrap()
    }

    pub fn max_step(&self) -> i64 {
        *self.padded.iter().max().unwrap()
    }
}

impl fmt::Display for ChangeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.steps().iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Fill every residue modulo `2^q` that `steps` misses with the step of
/// smallest magnitude in that class, positive on ties.
pub fn pad_changeset(steps: &[i64], q: u32) -> Result<ChangeSet, ChangeSetError> {
    let modulus = 1i64 << q;
    let mut owner: Vec<Option<i64>> = vec![None; modulus as usize];
    for &s in steps {
        let r = s.rem_euclid(modulus) as usize;
        if let Some(other) = owner[r] {
            return Err(ChangeSetError::Congruent(other, s, q));
        }
        owner[r] = Some(s);
    }
    let mut padded = steps.to_vec();
    for (r, o) in owner.iter().enumerate() {
        if o.is_none() {
            let r = r as i64;
            let down = r - modulus;
            padded.push(if r <= -down { r } else { down });
        }
    }
    Ok(ChangeSet {
        q,
        padded,
        real: steps.len(),
    })
}
