//! Table-driven evaluation of a cipher under one fixed key.
//!
//! Since `T_k = P^-1 . X_k . P` where `X_k` is the Feistel part (rounds plus
//! optional final swap), every orbit length, cycle count and sign of `T_k`
//! equals that of `X_k`. [`CompiledCipher`] therefore works on "inner"
//! states: the two halves after the initial permutation, each packed into a
//! `u64` with one lane per (nit, factor) pair. Group addition on a packed half
//! is a handful of word-wide operations, and each round function becomes a
//! table indexed by the dense integer value of the right half.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::permnet::{CipherSpec, WireMap, MAX_TABLE_DOMAIN};
use crate::word::Word;

/// Largest lane chunk looked up at once when computing a dense index.
const CHUNK_BITS: u32 = 12;

/// Packing layout for half-blocks of `t` nits over one group.
#[derive(Debug)]
pub struct HalfCodec {
    group: GroupSpec,
    t: usize,
    lane_bits: u32,
    lanes: usize,
    half_order: u64,
    nvec: u64,
    cvec: u64,
    high: u64,
    chunks: Vec<(u32, u64, Vec<u32>)>,
    unpack: Vec<u64>,
}

impl HalfCodec {
    pub fn new(group: &GroupSpec, t: usize) -> Result<Self> {
        let half_order = group
            .order()
            .checked_pow(t as u32)
            .filter(|&h| h <= MAX_TABLE_DOMAIN)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "|{group}|^{t} exceeds the table limit of {MAX_TABLE_DOMAIN}"
                ))
            })?;
        let max_mod = *group.moduli().iter().max().expect("non-empty group");
        // Smallest w with 2^(w-1) >= max modulus, so a lane sum never carries out.
        let lane_bits = (33 - (max_mod - 1).leading_zeros()).max(2);
        let m = group.moduli().len();
        let lanes = t * m;
        if lane_bits > 16 || lanes as u32 * lane_bits > 64 {
            return Err(Error::Capacity(format!(
                "{lanes} lanes of {lane_bits} bits do not fit in 64 bits"
            )));
        }

        // lane l = pos * m + f, stored from the low end
        let mut nvec = 0u64;
        let mut cvec = 0u64;
        let mut high = 0u64;
        let mut weights = Vec::with_capacity(lanes);
        for pos in 0..t {
            let pos_weight = group.order().pow((t - 1 - pos) as u32);
            for (f, &n) in group.moduli().iter().enumerate() {
                let shift = (pos * m + f) as u32 * lane_bits;
                nvec |= (n as u64) << shift;
                cvec |= ((1u64 << (lane_bits - 1)) - n as u64) << shift;
                high |= (1u64 << (lane_bits - 1)) << shift;
                let inner: u64 = group.moduli()[f + 1..].iter().map(|&x| x as u64).product();
                weights.push(pos_weight * inner);
            }
        }

        let per_chunk = (CHUNK_BITS / lane_bits).max(1) as usize;
        let mut chunks = Vec::new();
        let mut first = 0;
        while first < lanes {
            let count = per_chunk.min(lanes - first);
            let bits = count as u32 * lane_bits;
            let lane_mask = (1u64 << lane_bits) - 1;
            let table = (0..1u64 << bits)
                .map(|v| {
                    (0..count)
                        .map(|i| ((v >> (i as u32 * lane_bits)) & lane_mask) * weights[first + i])
                        .sum::<u64>() as u32
                })
                .collect();
            chunks.push((first as u32 * lane_bits, (1u64 << bits) - 1, table));
            first += count;
        }

        let mut codec = HalfCodec {
            group: group.clone(),
            t,
            lane_bits,
            lanes,
            half_order,
            nvec,
            cvec,
            high,
            chunks,
            unpack: Vec::new(),
        };
        codec.unpack = (0..half_order)
            .map(|d| {
                let w = Word::from_u64(d, group, t).expect("dense index in range");
                codec.pack(&w)
            })
            .collect();
        Ok(codec)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of distinct half-blocks, `|G|^t`.
    pub fn half_order(&self) -> u64 {
        self.half_order
    }

    pub fn pack(&self, half: &Word) -> u64 {
        let m = self.group.moduli().len();
        let mut out = 0u64;
        for (pos, &nit) in half.nits().iter().enumerate() {
            for (f, r) in self.group.residues_of(nit).into_iter().enumerate() {
                out |= (r as u64) << ((pos * m + f) as u32 * self.lane_bits);
            }
        }
        out
    }

    pub fn unpack(&self, packed: u64) -> Word {
        let d = self.dense(packed);
        Word::from_u64(d as u64, &self.group, self.t).expect("dense index in range")
    }

    /// Big-endian base-|G| value of a packed half.
    #[inline]
    pub fn dense(&self, packed: u64) -> u32 {
        let mut d = 0u32;
        for (shift, mask, table) in &self.chunks {
            d += table[((packed >> shift) & mask) as usize];
        }
        d
    }

    #[inline]
    pub fn from_dense(&self, d: u32) -> u64 {
        self.unpack[d as usize]
    }

    #[inline]
    fn reduce(&self, s: u64) -> u64 {
        let hb = (s + self.cvec) & self.high;
        let full = (hb >> (self.lane_bits - 1)) * ((1u64 << self.lane_bits) - 1);
        s - (full & self.nvec)
    }

    /// Nit-wise group sum of two packed halves.
    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.reduce(a + b)
    }

    /// Nit-wise group difference `a - b` of two packed halves.
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.reduce(a + (self.nvec - b))
    }

    /// Number of packed residues per half.
    pub fn lanes(&self) -> usize {
        self.lanes
    }
}

/// A state after the initial permutation: packed left and right halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InnerState {
    pub left: u64,
    pub right: u64,
}

/// One encryption permutation `T_k`, compiled to lookup tables.
#[derive(Debug, Clone)]
pub struct CompiledCipher {
    codec: Arc<HalfCodec>,
    rounds: Vec<Vec<u64>>,
    final_swap: bool,
    initial: WireMap,
    last: WireMap,
}

impl CompiledCipher {
    pub fn new(spec: &CipherSpec, key: &Word) -> Result<Self> {
        let codec = Arc::new(HalfCodec::new(spec.group(), spec.t())?);
        Self::with_codec(spec, key, codec)
    }

    /// Reuses an existing codec, which must match the spec's group and `t`.
    pub fn with_codec(spec: &CipherSpec, key: &Word, codec: Arc<HalfCodec>) -> Result<Self> {
        if codec.group() != spec.group() || codec.t() != spec.t() {
            return Err(Error::Dimension(format!(
                "codec is for {}^{}, spec is over {}^{}",
                codec.group(),
                codec.t(),
                spec.group(),
                spec.t()
            )));
        }
        let subkeys = spec.subkeys(key)?;
        let mut rounds = Vec::with_capacity(spec.rounds());
        for (r, sk) in subkeys.iter().enumerate() {
            let mut table = Vec::with_capacity(codec.half_order() as usize);
            for d in 0..codec.half_order() {
                let y = Word::from_u64(d, spec.group(), spec.t())?;
                table.push(codec.pack(&spec.round_fn().eval(r, &y, sk)?));
            }
            rounds.push(table);
        }
        Ok(CompiledCipher {
            codec,
            rounds,
            final_swap: spec.final_swap(),
            initial: spec.initial_perm().clone(),
            last: spec.final_perm().clone(),
        })
    }

    pub fn codec(&self) -> &Arc<HalfCodec> {
        &self.codec
    }

    /// Number of inner states, `|G|^(2t)`.
    pub fn domain_size(&self) -> u64 {
        self.codec.half_order() * self.codec.half_order()
    }

    /// Applies the Feistel part `X_k`.
    #[inline]
    pub fn forward(&self, s: InnerState) -> InnerState {
        let c = &*self.codec;
        let (mut l, mut r) = (s.left, s.right);
        for f in &self.rounds {
            let nr = c.add(l, f[c.dense(r) as usize]);
            l = r;
            r = nr;
        }
        if self.final_swap {
            std::mem::swap(&mut l, &mut r);
        }
        InnerState { left: l, right: r }
    }

    /// Applies `X_k^-1`.
    #[inline]
    pub fn backward(&self, s: InnerState) -> InnerState {
        let c = &*self.codec;
        let (mut l, mut r) = (s.left, s.right);
        if self.final_swap {
            std::mem::swap(&mut l, &mut r);
        }
        for f in self.rounds.iter().rev() {
            let nl = c.sub(r, f[c.dense(l) as usize]);
            r = l;
            l = nl;
        }
        InnerState { left: l, right: r }
    }

    /// Applies the initial permutation and packs the halves.
    pub fn to_inner(&self, m: &Word) -> Result<InnerState> {
        let (l, r) = self.initial.apply(m)?.split_halves()?;
        Ok(InnerState {
            left: self.codec.pack(&l),
            right: self.codec.pack(&r),
        })
    }

    /// Inverse of [`CompiledCipher::to_inner`].
    pub fn from_inner(&self, s: InnerState) -> Word {
        let w = self
            .codec
            .unpack(s.left)
            .concat(&self.codec.unpack(s.right))
            .expect("same group");
        self.last.apply(&w).expect("block length matches")
    }

    /// Full encryption through the tables; agrees with [`CipherSpec::encrypt`].
    pub fn encrypt(&self, m: &Word) -> Result<Word> {
        Ok(self.from_inner(self.forward(self.to_inner(m)?)))
    }

    pub fn decrypt(&self, c: &Word) -> Result<Word> {
        Ok(self.from_inner(self.backward(self.to_inner(c)?)))
    }

    /// Dense index of an inner state in `0..domain_size()`.
    #[inline]
    pub fn state_index(&self, s: InnerState) -> u64 {
        self.codec.dense(s.left) as u64 * self.codec.half_order() + self.codec.dense(s.right) as u64
    }

    #[inline]
    pub fn state_at(&self, index: u64) -> InnerState {
        let h = self.codec.half_order();
        InnerState {
            left: self.codec.from_dense((index / h) as u32),
            right: self.codec.from_dense((index % h) as u32),
        }
    }
}
