//! The shared sender/receiver configuration and its text file format.
//!
//! One `key = value` pair per line; blank lines and lines starting with `#`
//! are ignored. Every key must appear exactly once:
//!
//! ```text
//! version = 1
//! k_star = 6
//! h_star = 24
//! changes = -1,0,1,2
//! q = 2
//! alpha = 3
//! alpha_split = 1,1,1
//! stc_h = 12
//! stc_seed = 42
//! msg_lens = 600,400;610,390;598,402
//! channel_order = xyz
//! ```
//!
//! `msg_lens` holds one row per channel (in `channel_order`) with one length
//! per layer, least significant layer first.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::ParamsError;
use crate::layered::ChangeSet;
use crate::quant::Channel;

pub const PARAMS_VERSION: u32 = 1;

const KEYS: [&str; 11] = [
    "version",
    "k_star",
    "h_star",
    "changes",
    "q",
    "alpha",
    "alpha_split",
    "stc_h",
    "stc_seed",
    "msg_lens",
    "channel_order",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StegoParams {
    pub version: u32,
    pub k_star: u32,
    pub h_star: u32,
    pub changes: ChangeSet,
    pub alpha: f64,
    pub alpha_split: [f64; 3],
    pub stc_h: u32,
    pub stc_seed: u64,
    /// `msg_lens[c][l]`: bits in layer `l + 1` of the `c`-th channel of
    /// `channel_order`.
    pub msg_lens: Vec<Vec<usize>>,
    pub channel_order: [Channel; 3],
}

impl StegoParams {
    pub fn q(&self) -> u32 {
        self.changes.q()
    }

    /// Total message bits.
    pub fn message_len(&self) -> usize {
        self.msg_lens.iter().flatten().sum()
    }

    /// Message lengths of one channel.
    pub fn channel_lens(&self, channel: Channel) -> &[usize] {
        let k = self.channel_order.iter().position(|&c| c == channel).unwrap();
        &self.msg_lens[k]
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for StegoParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version = {}", self.version)?;
        writeln!(f, "k_star = {}", self.k_star)?;
        writeln!(f, "h_star = {}", self.h_star)?;
        writeln!(f, "changes = {}", join(self.changes.steps()))?;
        writeln!(f, "q = {}", self.q())?;
        writeln!(f, "alpha = {}", self.alpha)?;
        writeln!(f, "alpha_split = {}", join(&self.alpha_split))?;
        writeln!(f, "stc_h = {}", self.stc_h)?;
        writeln!(f, "stc_seed = {}", self.stc_seed)?;
        let rows: Vec<String> = self.msg_lens.iter().map(|r| join(r)).collect();
        writeln!(f, "msg_lens = {}", rows.join(";"))?;
        let order: String = self.channel_order.iter().map(|c| c.label()).collect();
        writeln!(f, "channel_order = {order}")
    }
}

fn value_err(key: &'static str, msg: impl Into<String>) -> ParamsError {
    ParamsError::Value { key, msg: msg.into() }
}

fn scalar<T: FromStr>(key: &'static str, v: &str) -> Result<T, ParamsError>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| value_err(key, format!("{v:?}: {e}")))
}

fn list<T: FromStr>(key: &'static str, v: &str) -> Result<Vec<T>, ParamsError>
where
    T::Err: fmt::Display,
{
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| scalar(key, t.trim())).collect()
}

impl FromStr for StegoParams {
    type Err = ParamsError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut values: [Option<&str>; KEYS.len()] = [None; KEYS.len()];
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ParamsError::Syntax {
                line: n + 1,
                msg: "expected `key = value`".into(),
            })?;
            let k = k.trim();
            let slot = KEYS
                .iter()
                .position(|&key| key == k)
                .ok_or_else(|| ParamsError::UnknownKey(k.to_string()))?;
            if values[slot].is_some() {
                return Err(ParamsError::DuplicateKey(k.to_string()));
            }
            values[slot] = Some(v.trim());
        }
        let get = |k: &'static str| -> Result<&str, ParamsError> {
            let i = KEYS.iter().position(|&key| key == k).unwrap();
            values[i].ok_or(ParamsError::MissingKey(k))
        };

        let version: u32 = scalar("version", get("version")?)?;
        if version != PARAMS_VERSION {
            return Err(ParamsError::Version(version));
        }
        let k_star = scalar("k_star", get("k_star")?)?;
        let h_star: u32 = scalar("h_star", get("h_star")?)?;
        if !(1..=63).contains(&h_star) {
            return Err(value_err("h_star", "must lie in 1..=63"));
        }
        let steps: Vec<i64> = list("changes", get("changes")?)?;
        let changes = ChangeSet::new(&steps).map_err(|e| value_err("changes", e.to_string()))?;
        let q: u32 = scalar("q", get("q")?)?;
        if q != changes.q() {
            return Err(value_err("q", format!("{q} disagrees with the change set (Q = {})", changes.q())));
        }
        let alpha: f64 = scalar("alpha", get("alpha")?)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(value_err("alpha", "must be a finite non-negative number"));
        }
        let split: Vec<f64> = list("alpha_split", get("alpha_split")?)?;
        let alpha_split: [f64; 3] = split
            .try_into()
            .map_err(|_| value_err("alpha_split", "needs three weights"))?;
        if alpha_split.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || alpha_split.iter().sum::<f64>() <= 0.0 {
            return Err(value_err("alpha_split", "weights must be non-negative with a positive sum"));
        }
        let stc_h: u32 = scalar("stc_h", get("stc_h")?)?;
        if !(crate::stc::MIN_HEIGHT..=crate::stc::MAX_HEIGHT).contains(&stc_h) {
            return Err(value_err("stc_h", "must lie in 6..=15"));
        }
        let stc_seed = scalar("stc_seed", get("stc_seed")?)?;
        let rows: Vec<Vec<usize>> = get("msg_lens")?
            .split(';')
            .map(|r| list("msg_lens", r.trim()))
            .collect::<Result<_, _>>()?;
        if rows.len() != 3 || rows.iter().any(|r| r.len() != q as usize) {
            return Err(value_err("msg_lens", format!("needs 3 rows of {q} lengths")));
        }
        let order = get("channel_order")?;
        let chans: Vec<Channel> = order
            .chars()
            .map(|c| Channel::from_label(c).ok_or_else(|| value_err("channel_order", format!("bad channel {c:?}"))))
            .collect::<Result<_, _>>()?;
        let channel_order: [Channel; 3] = chans
            .try_into()
            .map_err(|_| value_err("channel_order", "needs three channels"))?;
        let mut seen = [false; 3];
        for c in channel_order {
            if std::mem::replace(&mut seen[c.index()], true) {
                return Err(value_err("channel_order", "repeats a channel"));
            }
        }
        Ok(StegoParams {
            version,
            k_star,
            h_star,
            changes,
            alpha,
            alpha_split,
            stc_h,
            stc_seed,
            msg_lens: rows,
            channel_order,
        })
    }
}
