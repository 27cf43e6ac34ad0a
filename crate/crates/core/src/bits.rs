//! Elements of F_2^g, used both as mean indices and as theta characteristics.
//!
//! A `BitIndex` stores its g bits packed into an integer with i_1 as the most
//! significant bit, so the packed value of the bit string `"01"` is 1 and the
//! natural integer order matches the order a_00, a_01, a_10, a_11.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest genus supported anywhere in the crate (2^g means, 2g+1 branch points).
pub const MAX_GENUS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitIndex {
    genus: usize,
    bits: u32,
}

impl BitIndex {
    pub fn new(genus: usize, bits: u32) -> Result<Self> {
        check_genus(genus)?;
        if (bits as u64) >> genus != 0 {
            return Err(Error::Dimension(format!(
                "bit pattern {bits:#b} does not fit in genus {genus}"
            )));
        }
        Ok(Self { genus, bits })
    }

    pub fn zero(genus: usize) -> Result<Self> {
        Self::new(genus, 0)
    }

    /// Builds an index from explicit bits (i_1, ..., i_g).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let genus = bits.len();
        check_genus(genus)?;
        let mut packed = 0u32;
        for &b in bits {
            if b > 1 {
                return Err(Error::Input(format!("bit value {b} is not 0 or 1")));
            }
            packed = (packed << 1) | b as u32;
        }
        Ok(Self {
            genus,
            bits: packed,
        })
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Packed value, usable as a position in a length-2^g vector.
    pub fn packed(&self) -> usize {
        self.bits as usize
    }

    /// The bit i_k for 1-based k.
    pub fn bit(&self, k: usize) -> u8 {
        assert!((1..=self.genus).contains(&k), "bit position {k} out of range");
        ((self.bits >> (self.genus - k)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.genus).map(|k| self.bit(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Group law of F_2^g.
    pub fn xor(&self, other: &BitIndex) -> Result<BitIndex> {
        if self.genus != other.genus {
            return Err(Error::Dimension(format!(
                "cannot add indices of genus {} and {}",
                self.genus, other.genus
            )));
        }
        Ok(BitIndex {
            genus: self.genus,
            bits: self.bits ^ other.bits,
        })
    }

    /// Parity of n·I for an integer vector n.
    pub fn pairing_parity(&self, n: &[i64]) -> u8 {
        debug_assert_eq!(n.len(), self.genus);
        let mut acc = 0i64;
        for (k, &nk) in n.iter().enumerate() {
            if self.bit(k + 1) == 1 {
                acc += nk;
            }
        }
        acc.rem_euclid(2) as u8
    }

    /// All 2^g elements in packed order.
    pub fn all(genus: usize) -> Result<impl Iterator<Item = BitIndex>> {
        check_genus(genus)?;
        Ok((0..(1u32 << genus)).map(move |bits| BitIndex { genus, bits }))
    }
}

impl fmt::Display for BitIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 1..=self.genus {
            write!(f, "{}", self.bit(k))?;
        }
        Ok(())
    }
}

impl FromStr for BitIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Input(format!("invalid bit character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

pub(crate) fn check_genus(genus: usize) -> Result<()> {
    if genus == 0 || genus > MAX_GENUS {
        return Err(Error::Dimension(format!(
            "genus must lie in 1..={MAX_GENUS}, got {genus}"
        )));
    }
    Ok(())
}
