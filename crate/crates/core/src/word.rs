//! Fixed-length nit strings over a [`GroupSpec`].
//!
//! Nits are stored as dense element indices. Position 0 is the leftmost nit,
//! which is also the most significant digit of the integer codec.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{GroupElem, GroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    group: GroupSpec,
    nits: Vec<u32>,
}

impl Word {
    pub fn new(group: GroupSpec, nits: Vec<u32>) -> Result<Self> {
        if let Some((p, &v)) = nits
            .iter()
            .enumerate()
            .find(|(_, &v)| v as u64 >= group.order())
        {
            return Err(Error::InvalidElement(format!(
                "nit {} has index {v}, group order is {}",
                p + 1,
                group.order()
            )));
        }
        Ok(Word { group, nits })
    }

    pub(crate) fn from_raw(group: GroupSpec, nits: Vec<u32>) -> Self {
        debug_assert!(nits.iter().all(|&v| (v as u64) < group.order()));
        Word { group, nits }
    }

    pub fn zero(group: GroupSpec, len: usize) -> Self {
        Word {
            group,
            nits: vec![0; len],
        }
    }

    pub fn from_elems(group: GroupSpec, elems: &[GroupElem]) -> Result<Self> {
        let nits = elems
            .iter()
            .map(|e| group.index_of(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word { group, nits })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn nits(&self) -> &[u32] {
        &self.nits
    }

    pub fn len(&self) -> usize {
        self.nits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nits.is_empty()
    }

    pub fn elem(&self, pos: usize) -> GroupElem {
        GroupElem::new(self.group.residues_of(self.nits[pos]))
    }

    fn check_compatible(&self, other: &Word) -> Result<()> {
        if self.group != other.group {
            return Err(Error::Dimension(format!(
                "words over different groups ({} vs {})",
                self.group, other.group
            )));
        }
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "word lengths differ ({} vs {})",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Nit-wise group sum.
    pub fn add(&self, other: &Word) -> Result<Word> {
        self.check_compatible(other)?;
        let g = &self.group;
        Ok(Word::from_raw(
            g.clone(),
            self.nits
                .iter()
                .zip(&other.nits)
                .map(|(&a, &b)| g.add_index(a, b))
                .collect(),
        ))
    }

    /// Nit-wise group difference.
    pub fn sub(&self, other: &Word) -> Result<Word> {
        self.check_compatible(other)?;
        let g = &self.group;
        Ok(Word::from_raw(
            g.clone(),
            self.nits
                .iter()
                .zip(&other.nits)
                .map(|(&a, &b)| g.sub_index(a, b))
                .collect(),
        ))
    }

    pub fn neg(&self) -> Word {
        let g = &self.group;
        Word::from_raw(g.clone(), self.nits.iter().map(|&a| g.neg_index(a)).collect())
    }

    /// Splits an even-length word into its left and right halves.
    pub fn split_halves(&self) -> Result<(Word, Word)> {
        if self.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "cannot split a word of odd length {}",
                self.len()
            )));
        }
        let t = self.len() / 2;
        Ok((self.slice(0, t), self.slice(t, 2 * t)))
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word::from_raw(self.group.clone(), self.nits[start..end].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        if self.group != other.group {
            return Err(Error::Dimension(format!(
                "cannot concatenate words over {} and {}",
                self.group, other.group
            )));
        }
        let mut nits = Vec::with_capacity(self.len() + other.len());
        nits.extend_from_slice(&self.nits);
        nits.extend_from_slice(&other.nits);
        Ok(Word::from_raw(self.group.clone(), nits))
    }

    /// Parses the text form: contiguous digits for a single factor of modulus
    /// at most 10, otherwise comma-separated nits. A nit of a multi-factor
    /// group is written as its residues joined by `.`, e.g. `1.2,0.1`.
    pub fn parse(text: &str, group: &GroupSpec, len: usize) -> Result<Word> {
        let text = text.trim();
        let nits = if uses_digit_form(group) {
            let n = group.moduli()[0];
            let chars: Vec<char> = text.chars().collect();
            let mut nits = Vec::with_capacity(chars.len());
            for (p, c) in chars.iter().enumerate() {
                let d = c.to_digit(10).ok_or_else(|| Error::Parse {
                    position: p + 1,
                    message: format!("'{c}' is not a digit"),
                })?;
                if d >= n {
                    return Err(Error::Parse {
                        position: p + 1,
                        message: format!("digit {d} is outside Z_{n}"),
                    });
                }
                nits.push(d);
            }
            nits
        } else {
            if text.is_empty() {
                Vec::new()
            } else {
                text.split(',')
                    .enumerate()
                    .map(|(p, tok)| parse_nit(tok.trim(), group, p + 1))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        if nits.len() != len {
            return Err(Error::Parse {
                position: nits.len().min(len) + 1,
                message: format!("expected {len} nits, found {}", nits.len()),
            });
        }
        Ok(Word::from_raw(group.clone(), nits))
    }

    /// Big-endian base-|G| value of the word.
    pub fn to_biguint(&self) -> BigUint {
        let base = BigUint::from(self.group.order());
        self.nits
            .iter()
            .fold(BigUint::zero(), |acc, &d| acc * &base + BigUint::from(d))
    }

    /// Inverse of [`Word::to_biguint`].
    pub fn from_biguint(value: &BigUint, group: &GroupSpec, len: usize) -> Result<Word> {
        let base = BigUint::from(group.order());
        let mut v = value.clone();
        let mut nits = vec![0u32; len];
        for slot in nits.iter_mut().rev() {
            *slot = (&v % &base).to_u32().unwrap_or(0);
            v /= &base;
        }
        if !v.is_zero() {
            return Err(Error::Range(format!(
                "{value} does not fit in {len} nits over {group}"
            )));
        }
        Ok(Word::from_raw(group.clone(), nits))
    }

    /// u64 form of [`Word::to_biguint`]; `None` when the value does not fit.
    pub fn to_u64(&self) -> Option<u64> {
        let base = self.group.order();
        self.nits.iter().try_fold(0u64, |acc, &d| {
            acc.checked_mul(base)?.checked_add(d as u64)
        })
    }

    pub fn from_u64(value: u64, group: &GroupSpec, len: usize) -> Result<Word> {
        let base = group.order();
        let mut v = value;
        let mut nits = vec![0u32; len];
        for slot in nits.iter_mut().rev() {
            *slot = (v % base) as u32;
            v /= base;
        }
        if v != 0 {
            return Err(Error::Range(format!(
                "{value} does not fit in {len} nits over {group}"
            )));
        }
        Ok(Word::from_raw(group.clone(), nits))
    }
}

fn uses_digit_form(group: &GroupSpec) -> bool {
    group.is_single_factor() && group.moduli()[0] <= 10
}

fn parse_nit(tok: &str, group: &GroupSpec, position: usize) -> Result<u32> {
    let err = |message: String| Error::Parse { position, message };
    let residues = tok
        .split('.')
        .map(|r| {
            r.parse::<u32>()
                .map_err(|_| err(format!("'{tok}' is not a nit")))
        })
        .collect::<Result<Vec<_>>>()?;
    group
        .index_of(&GroupElem::new(residues))
        .map_err(|e| err(e.to_string()))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if uses_digit_form(&self.group) {
            for &d in &self.nits {
                write!(f, "{d}")?;
            }
            return Ok(());
        }
        let parts: Vec<String> = self
            .nits
            .iter()
            .map(|&d| {
                self.group
                    .residues_of(d)
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(".")
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}
