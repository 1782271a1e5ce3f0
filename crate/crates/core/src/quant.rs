//! Quantization alphabets, the memoryless scalar quantizer and bit accounting.
//!
//! Alphabets parse from and print to compact strings:
//! `mt:DELTA:K` (finite mid-tread), `mti:DELTA` (infinite mid-tread) and
//! `lv:a,b,c` (explicit levels).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuantError {
    #[error("cannot quantize non-finite value {0}")]
    NonFinite(f64),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("explicit levels must be finite, nonempty and strictly ascending")]
    BadLevels,
    #[error("bad alphabet string `{0}` (expected mt:DELTA:K, mti:DELTA or lv:a,b,...)")]
    BadSpec(String),
}

/// Set of quantization levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Alphabet {
    /// `{ +-k delta : 0 <= k <= K }`
    MidTreadFinite { step: f64, k: u32 },
    /// `{ +-k delta : k in Z }`
    MidTreadInfinite { step: f64 },
    /// Strictly ascending explicit levels.
    Explicit(Vec<f64>),
}

impl Alphabet {
    pub fn mid_tread(step: f64, k: u32) -> Result<Self, QuantError> {
        check_step(step)?;
        Ok(Self::MidTreadFinite { step, k })
    }

    pub fn mid_tread_infinite(step: f64) -> Result<Self, QuantError> {
        check_step(step)?;
        Ok(Self::MidTreadInfinite { step })
    }

    pub fn explicit(levels: Vec<f64>) -> Result<Self, QuantError> {
        if levels.is_empty()
            || levels.iter().any(|x| !x.is_finite())
            || levels.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(QuantError::BadLevels);
        }
        Ok(Self::Explicit(levels))
    }

    /// Step size of the mid-tread kinds.
    pub fn step(&self) -> Option<f64> {
        match self {
            Self::MidTreadFinite { step, .. } | Self::MidTreadInfinite { step } => Some(*step),
            Self::Explicit(_) => None,
        }
    }

    /// Number of levels, `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        match self {
            Self::MidTreadFinite { k, .. } => Some(2 * *k as usize + 1),
            Self::MidTreadInfinite { .. } => None,
            Self::Explicit(l) => Some(l.len()),
        }
    }

    /// All levels in ascending order, `None` when infinite.
    pub fn levels(&self) -> Option<Vec<f64>> {
        match self {
            Self::MidTreadFinite { step, k } => {
                let k = *k as i64;
                Some((-k..=k).map(|i| i as f64 * step).collect())
            }
            Self::MidTreadInfinite { .. } => None,
            Self::Explicit(l) => Some(l.clone()),
        }
    }

    /// Largest level magnitude (`K delta`, or the extreme explicit level).
    pub fn q_max(&self) -> f64 {
        match self {
            Self::MidTreadFinite { step, k } => *k as f64 * step,
            Self::MidTreadInfinite { .. } => f64::INFINITY,
            Self::Explicit(l) => l[0].abs().max(l[l.len() - 1].abs()),
        }
    }

    /// Nearest level to `z`. Mid-tread ties round away from zero, explicit
    /// ties go to the larger level, and out-of-range input saturates.
    pub fn quantize(&self, z: f64) -> Result<f64, QuantError> {
        if !z.is_finite() {
            return Err(QuantError::NonFinite(z));
        }
        Ok(self.quantize_finite(z))
    }

    /// [`Alphabet::quantize`] for inputs already known to be finite.
    #[inline]
    pub(crate) fn quantize_finite(&self, z: f64) -> f64 {
        match self {
            Self::MidTreadFinite { step, k } => {
                let idx = (z / step).round().clamp(-(*k as f64), *k as f64);
                idx * step
            }
            Self::MidTreadInfinite { step } => (z / step).round() * step,
            Self::Explicit(levels) => {
                let above = levels.partition_point(|&x| x < z);
                if above == 0 {
                    levels[0]
                } else if above == levels.len() {
                    levels[above - 1]
                } else {
                    let (lo, hi) = (levels[above - 1], levels[above]);
                    if z - lo < hi - z {
                        lo
                    } else {
                        hi
                    }
                }
            }
        }
    }
}

fn check_step(step: f64) -> Result<(), QuantError> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(QuantError::BadStep(step))
    }
}

impl FromStr for Alphabet {
    type Err = QuantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QuantError::BadSpec(s.to_string());
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["mt", step, k] => Self::mid_tread(num(step)?, k.trim().parse().map_err(|_| bad())?),
            ["mti", step] => Self::mid_tread_infinite(num(step)?),
            ["lv", levels] => Self::explicit(levels.split(',').map(num).collect::<Result<_, _>>()?),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MidTreadFinite { step, k } => write!(f, "mt:{step}:{k}"),
            Self::MidTreadInfinite { step } => write!(f, "mti:{step}"),
            Self::Explicit(levels) => {
                f.write_str("lv:")?;
                for (i, l) in levels.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{l}")?;
                }
                Ok(())
            }
        }
    }
}

impl TryFrom<String> for Alphabet {
    type Error = QuantError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> Self {
        a.to_string()
    }
}

/// Memoryless scalar quantization of every entry.
pub fn msq(alphabet: &Alphabet, f: &[f64]) -> Result<Vec<f64>, QuantError> {
    f.iter().map(|&x| alphabet.quantize(x)).collect()
}

/// Distinct values in a quantized vector and the bits needed per entry to index them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitAccount {
    pub distinct_levels: usize,
    pub bits_per_entry: f64,
}

pub fn bit_accounting(q: &[f64]) -> BitAccount {
    let mut vals: Vec<f64> = q.iter().map(|&x| if x == 0.0 { 0.0 } else { x }).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let distinct_levels = vals.len();
    BitAccount {
        distinct_levels,
        bits_per_entry: if distinct_levels == 0 {
            0.0
        } else {
            (distinct_levels as f64).log2()
        },
    }
}
