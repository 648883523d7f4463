//! Defect vectors, test outcomes and decode results.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Defect vector `X`: `true` marks a defective variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn new(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Assignment {
            bits: vec![false; n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Assignment {
            bits: vec![true; n],
        }
    }

    pub fn from_defectives(n: usize, defectives: &[u32]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in defectives {
            let slot = bits.get_mut(i as usize).ok_or(Error::IndexOutOfRange {
                index: i as usize,
                len: n,
            })?;
            *slot = true;
        }
        Ok(Assignment { bits })
    }

    /// Low `n` bits of `mask`, bit `i` giving `x_i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Assignment {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    /// Parses a binary string (`"100"`, character `i` is `x_i`) or a hex string
    /// prefixed with `0x`, read most-significant bit first with variable 0 at
    /// the top bit of the first digit. Hex input is truncated to `n` bits; the
    /// padding bits must be zero.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let s = s.trim();
        let bits = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            let mut bits = Vec::with_capacity(hex.len() * 4);
            for (k, c) in hex.chars().enumerate() {
                let v = c.to_digit(16).ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("invalid hex digit '{c}' at position {k}"),
                })?;
                bits.extend((0..4).rev().map(|b| v >> b & 1 == 1));
            }
            if bits.len() < n || bits.len() >= n + 4 {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: bits.len(),
                });
            }
            if bits[n..].iter().any(|&b| b) {
                return Err(Error::Parse {
                    line: 1,
                    msg: "non-zero hex padding bits".into(),
                });
            }
            bits.truncate(n);
            bits
        } else {
            let bits = s
                .chars()
                .filter(|c| !c.is_whitespace() && *c != '_')
                .enumerate()
                .map(|(k, c)| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(Error::Parse {
                        line: 1,
                        msg: format!("invalid bit '{other}' at position {k}"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            if bits.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: bits.len(),
                });
            }
            bits
        };
        Ok(Assignment { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_defective(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn defectives(&self) -> Vec<u32> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

impl FromStr for Assignment {
    type Err = Error;

    /// Binary string only; the length defines `N`.
    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .trim()
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .count();
        Assignment::parse(s, n)
    }
}

/// First-stage outcomes `T_a`, one per test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestOutcomes {
    bits: Vec<bool>,
}

impl TestOutcomes {
    pub(crate) fn new(bits: Vec<bool>) -> Self {
        TestOutcomes { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_positive(&self, a: usize) -> bool {
        self.bits[a]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn n_positive(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Partition of the variables produced by the two-stage decoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub sure_zeros: Vec<u32>,
    pub sure_ones: Vec<u32>,
    pub undetermined_zeros: Vec<u32>,
    pub undetermined_ones: Vec<u32>,
    /// `M + |U0| + |U1|`.
    pub total_tests: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_binary_and_hex() {
        let x = Assignment::parse("100", 3).unwrap();
        assert_eq!(x.defectives(), vec![0]);
        let y = Assignment::parse("0x8", 3).unwrap();
        assert_eq!(x, y);
        let z = Assignment::parse("0xa5", 8).unwrap();
        assert_eq!(z.to_bit_string(), "10100101");
        assert!(Assignment::parse("0x9", 3).is_err());
        assert!(Assignment::parse("10", 3).is_err());
        assert!(Assignment::parse("102", 3).is_err());
        assert_eq!("0110".parse::<Assignment>().unwrap().weight(), 2);
    }

    #[test]
    fn masks_and_defectives() {
        let x = Assignment::from_mask(4, 0b1010);
        assert_eq!(x.defectives(), vec![1, 3]);
        assert_eq!(Assignment::from_defectives(4, &[1, 3]).unwrap(), x);
        assert!(Assignment::from_defectives(4, &[4]).is_err());
    }
}
