//! Explicit permutations of small message spaces and brute-force checks on
//! sets of them: closure, purity, identity membership and generated order.
//! Also hosts the bitmap-based parity computation used for spaces far too
//! large to materialise.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::CompiledCipher;
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::permnet::{sigma, CipherSpec, RoundTable};
use crate::word::Word;

/// Largest message space [`materialize`] will build.
pub const MAX_MATERIALIZE: u64 = 1 << 24;

/// Largest message space [`streaming_sign`] will walk.
pub const MAX_STREAMING: u64 = 1 << 32;

/// Cap on permutations built by [`enumerate_feistel_set`].
pub const MAX_ENUMERATION: u64 = 10_000_000;

/// Largest set accepted by [`purity_check`].
pub const MAX_PURITY_SET: usize = 300;

/// Default cap for [`generated_order`].
pub const DEFAULT_ORDER_CAP: usize = 1_000_000;

/// A permutation of `0..N` given by its image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExplicitPerm {
    image: Vec<u32>,
}

impl ExplicitPerm {
    pub fn new(image: Vec<u32>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for (s, &d) in image.iter().enumerate() {
            let d = d as usize;
            if d >= n {
                return Err(Error::Permutation(format!(
                    "image of {s} is {d}, outside 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[d], true) {
                return Err(Error::Permutation(format!("{d} is hit twice")));
            }
        }
        Ok(ExplicitPerm { image })
    }

    pub fn identity(n: usize) -> Self {
        ExplicitPerm {
            image: (0..n as u32).collect(),
        }
    }

    /// Builds the transposition of `a` and `b` on `0..n`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(n);
        p.image.swap(a, b);
        p
    }

    /// Builds a cyclic shift along `cycle` (`cycle[i] -> cycle[i+1]`).
    pub fn cycle(n: usize, cycle: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for (i, &a) in cycle.iter().enumerate() {
            p.image[a] = cycle[(i + 1) % cycle.len()] as u32;
        }
        p
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    pub fn apply(&self, s: usize) -> usize {
        self.image[s] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(s, &d)| s == d as usize)
    }

    /// `self . other`: apply `other` first.
    pub fn compose(&self, other: &ExplicitPerm) -> Result<ExplicitPerm> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "cannot compose permutations of {} and {} points",
                self.len(),
                other.len()
            )));
        }
        Ok(ExplicitPerm {
            image: other.image.iter().map(|&s| self.image[s as usize]).collect(),
        })
    }

    pub fn inverse(&self) -> ExplicitPerm {
        let mut inv = vec![0u32; self.len()];
        for (s, &d) in self.image.iter().enumerate() {
            inv[d as usize] = s as u32;
        }
        ExplicitPerm { image: inv }
    }

    /// Lengths of all cycles, fixed points included, in order of first point.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.image[x] as usize;
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// Length of the cycle through `s`.
    pub fn cycle_length_of(&self, s: usize) -> usize {
        let mut len = 1;
        let mut x = self.apply(s);
        while x != s {
            x = self.apply(x);
            len += 1;
        }
        len
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(&self) -> i8 {
        sign_from_cycles(self.len() as u64, self.cycle_lengths().len() as u64)
    }

    /// Cycle type as "length^count" factors in increasing length, e.g. `1^2 3^1`.
    pub fn cycle_type(&self) -> String {
        let mut counts = BTreeMap::<usize, usize>::new();
        for l in self.cycle_lengths() {
            *counts.entry(l).or_default() += 1;
        }
        counts
            .iter()
            .map(|(l, c)| format!("{l}^{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn sign_from_cycles(points: u64, cycles: u64) -> i8 {
    if (points - cycles) % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn perm_compose(p: &ExplicitPerm, q: &ExplicitPerm) -> Result<ExplicitPerm> {
    p.compose(q)
}

pub fn perm_inverse(p: &ExplicitPerm) -> ExplicitPerm {
    p.inverse()
}

pub fn perm_sign(p: &ExplicitPerm) -> i8 {
    p.sign()
}

fn materialize_with(
    spec: &CipherSpec,
    f: impl Fn(&Word) -> Result<Word> + Sync,
) -> Result<ExplicitPerm> {
    let n = spec
        .message_space()
        .filter(|&n| n <= MAX_MATERIALIZE)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "message space {}^{} exceeds {MAX_MATERIALIZE}",
                spec.group().order(),
                spec.block_len()
            ))
        })?;
    let image = (0..n)
        .into_par_iter()
        .map(|s| {
            let m = Word::from_u64(s, spec.group(), spec.block_len())?;
            Ok(f(&m)?.to_u64().expect("block fits") as u32)
        })
        .collect::<Result<Vec<u32>>>()?;
    ExplicitPerm::new(image)
}

/// `image[s]` is the integer encoding of `T_k(decode(s))`, computed with
/// word-level encryption.
pub fn materialize(spec: &CipherSpec, k: &Word) -> Result<ExplicitPerm> {
    spec.check_key(k)?;
    materialize_with(spec, |m| spec.encrypt(k, m))
}

/// The decryption permutation `T_k^-1`, materialised like [`materialize`].
pub fn materialize_decrypt(spec: &CipherSpec, k: &Word) -> Result<ExplicitPerm> {
    spec.check_key(k)?;
    materialize_with(spec, |c| spec.decrypt(k, c))
}

/// Cycle count and sign of one encryption permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignReport {
    pub key: String,
    pub domain: u64,
    pub cycles: u64,
    pub sign: i8,
}

/// Parity of `T_k` by walking every cycle once, marking states in a bitmap.
///
/// Works on the compiled inner map, which is conjugate to `T_k` and so has
/// the same cycle structure.
pub fn streaming_sign(spec: &CipherSpec, k: &Word) -> Result<SignReport> {
    let cipher = CompiledCipher::new(spec, k)?;
    let n = cipher.domain_size();
    if n > MAX_STREAMING {
        return Err(Error::Capacity(format!(
            "{n} states exceed the streaming limit of {MAX_STREAMING}"
        )));
    }
    let mut visited = vec![0u64; n.div_ceil(64) as usize];
    let mut cycles = 0u64;
    for start in 0..n {
        if visited[(start >> 6) as usize] >> (start & 63) & 1 == 1 {
            continue;
        }
        cycles += 1;
        let mut idx = start;
        let mut s = cipher.state_at(start);
        loop {
            visited[(idx >> 6) as usize] |= 1 << (idx & 63);
            s = cipher.forward(s);
            idx = cipher.state_index(s);
            if idx == start {
                break;
            }
        }
    }
    Ok(SignReport {
        key: k.to_string(),
        domain: n,
        cycles,
        sign: sign_from_cycles(n, cycles),
    })
}

/// All bijective round tables on `G^t`. The ⊙-identity (constant zero) is
/// never injective once `|G|^t > 1`, so none of these is excluded by it.
pub fn injective_tables(group: &GroupSpec, t: usize) -> Result<Vec<RoundTable>> {
    let h = group.order().pow(t as u32);
    if h > 8 {
        return Err(Error::Capacity(format!(
            "{h}! bijections of G^t is too many to list"
        )));
    }
    let mut out = Vec::new();
    let mut perm: Vec<u32> = (0..h as u32).collect();
    heap_permutations(&mut perm, h as usize, &mut |p| out.push(p.to_vec()));
    out.sort();
    out.into_iter()
        .map(|img| RoundTable::new(group.clone(), t, img))
        .filter(|r| !matches!(r, Ok(t) if t.is_odot_identity()))
        .collect()
}

fn heap_permutations(a: &mut [u32], k: usize, emit: &mut impl FnMut(&[u32])) {
    if k <= 1 {
        emit(a);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(a, k - 1, emit);
        if k % 2 == 0 {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap_permutations(a, k - 1, emit);
}

/// The single Feistel round `sigma_f` as a permutation of `G^t x G^t`, with
/// state `(x, y)` encoded as `x * |G|^t + y`.
pub fn feistel_round(f: &RoundTable) -> Result<ExplicitPerm> {
    let g = f.group();
    let t = f.t();
    let h = g.order().pow(t as u32);
    let mut image = Vec::with_capacity((h * h) as usize);
    for s in 0..h * h {
        let x = Word::from_u64(s / h, g, t)?;
        let y = Word::from_u64(s % h, g, t)?;
        let (u, v) = sigma(f, &x, &y)?;
        image.push((u.to_u64().expect("fits") * h + v.to_u64().expect("fits")) as u32);
    }
    ExplicitPerm::new(image)
}

/// The half swap `theta(x, y) = (y, x)` on `G^t x G^t`.
pub fn swap_perm(group: &GroupSpec, t: usize) -> ExplicitPerm {
    let h = group.order().pow(t as u32) as u32;
    ExplicitPerm {
        image: (0..h * h).map(|s| (s % h) * h + s / h).collect(),
    }
}

/// All distinct `sigma_{f_n} . ... . sigma_{f_1}` with every `f_i` drawn from
/// `tables`, optionally followed by the half swap. Sets are deduplicated
/// after every round; the result is sorted.
pub fn enumerate_feistel_set(
    group: &GroupSpec,
    t: usize,
    tables: &[RoundTable],
    n: usize,
    include_swap: bool,
) -> Result<Vec<ExplicitPerm>> {
    for (i, f) in tables.iter().enumerate() {
        if f.group() != group || f.t() != t {
            return Err(Error::Dimension(format!(
                "table {i} is over {}^{}, expected {group}^{t}",
                f.group(),
                f.t()
            )));
        }
    }
    let rounds = tables
        .iter()
        .map(feistel_round)
        .collect::<Result<Vec<_>>>()?;
    let h = group.order().pow(t as u32) as usize;
    let mut level: Vec<ExplicitPerm> = vec![ExplicitPerm::identity(h * h)];
    let mut built = 0u64;
    for _ in 0..n {
        built += (level.len() * rounds.len()) as u64;
        if built > MAX_ENUMERATION {
            return Err(Error::Capacity(format!(
                "more than {MAX_ENUMERATION} permutations to build"
            )));
        }
        let next: HashSet<ExplicitPerm> = level
            .par_iter()
            .flat_map_iter(|p| rounds.iter().map(move |r| r.compose(p).expect("same size")))
            .collect();
        level = next.into_iter().collect();
    }
    if include_swap {
        let theta = swap_perm(group, t);
        level = level
            .iter()
            .map(|p| theta.compose(p))
            .collect::<Result<Vec<_>>>()?;
    }
    level.sort();
    Ok(level)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub closed: bool,
    /// First `(i, j)` with `S_i . S_j` outside the set.
    pub witness: Option<(usize, usize)>,
}

/// Whether every pairwise composition stays in the set.
pub fn closure_check(set: &[ExplicitPerm]) -> ClosureCheck {
    let members: HashSet<&ExplicitPerm> = set.iter().collect();
    let n = set.len();
    let witness = (0..n * n).into_par_iter().find_first(|&ij| {
        let (i, j) = (ij / n, ij % n);
        match set[i].compose(&set[j]) {
            Ok(p) => !members.contains(&p),
            Err(_) => true,
        }
    });
    ClosureCheck {
        closed: witness.is_none(),
        witness: witness.map(|ij| (ij / n, ij % n)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityCheck {
    pub pure: bool,
    /// First `(i, j, k)` with `S_i . S_j^-1 . S_k` outside the set.
    pub witness: Option<(usize, usize, usize)>,
    /// Whether `S_0^-1 . S` is closed; equals `pure` for a non-empty set.
    pub translate_closed: bool,
}

/// Checks `S_i . S_j^-1 . S_k in S` for all triples.
pub fn purity_check(set: &[ExplicitPerm]) -> Result<PurityCheck> {
    let n = set.len();
    if n > MAX_PURITY_SET {
        return Err(Error::Capacity(format!(
            "purity check limited to {MAX_PURITY_SET} permutations, got {n}"
        )));
    }
    if n == 0 {
        return Ok(PurityCheck {
            pure: true,
            witness: None,
            translate_closed: true,
        });
    }
    let members: HashSet<&ExplicitPerm> = set.iter().collect();
    let inverses: Vec<ExplicitPerm> = set.iter().map(ExplicitPerm::inverse).collect();
    let witness = (0..n * n).into_par_iter().find_map_first(|ij| {
        let (i, j) = (ij / n, ij % n);
        let left = set[i].compose(&inverses[j]).ok()?;
        (0..n).find_map(|k| match left.compose(&set[k]) {
            Ok(p) if members.contains(&p) => None,
            _ => Some((i, j, k)),
        })
    });
    let translated: Vec<ExplicitPerm> = set
        .iter()
        .map(|p| inverses[0].compose(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(PurityCheck {
        pure: witness.is_none(),
        witness,
        translate_closed: closure_check(&translated).closed,
    })
}

pub fn contains_identity(set: &[ExplicitPerm]) -> bool {
    set.iter().any(ExplicitPerm::is_identity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratedOrder {
    Exact(usize),
    ExceedsCap(usize),
}

/// Order of the group generated by `set`, by breadth-first closure.
pub fn generated_order(set: &[ExplicitPerm], cap: usize) -> GeneratedOrder {
    let Some(first) = set.first() else {
        return GeneratedOrder::Exact(1);
    };
    let mut seen: HashSet<ExplicitPerm> = HashSet::new();
    seen.insert(ExplicitPerm::identity(first.len()));
    let mut frontier: Vec<ExplicitPerm> = vec![ExplicitPerm::identity(first.len())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for p in &frontier {
            for g in set {
                let q = match g.compose(p) {
                    Ok(q) => q,
                    Err(_) => continue,
                };
                if !seen.contains(&q) {
                    if seen.len() >= cap {
                        return GeneratedOrder::ExceedsCap(cap);
                    }
                    seen.insert(q.clone());
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    GeneratedOrder::Exact(seen.len())
}

/// Summary of a permutation set, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub size: usize,
    pub domain: usize,
    pub contains_identity: bool,
    pub closure: ClosureCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<PurityCheck>,
    pub even: usize,
    pub odd: usize,
    pub cycle_types: BTreeMap<String, usize>,
    pub generated_order: GeneratedOrder,
}

pub fn census(set: &[ExplicitPerm], order_cap: usize) -> Census {
    let mut cycle_types = BTreeMap::new();
    let mut even = 0;
    for p in set {
        *cycle_types.entry(p.cycle_type()).or_default() += 1;
        if p.sign() == 1 {
            even += 1;
        }
    }
    Census {
        size: set.len(),
        domain: set.first().map_or(0, ExplicitPerm::len),
        contains_identity: contains_identity(set),
        closure: closure_check(set),
        purity: purity_check(set).ok(),
        even,
        odd: set.len() - even,
        cycle_types,
        generated_order: generated_order(set, order_cap),
    }
}

/// Orbit length of every start state, keyed by state; handy for cross-checks.
pub fn cycle_length_map(p: &ExplicitPerm) -> HashMap<usize, usize> {
    let mut out = HashMap::new();
    let mut seen = vec![false; p.len()];
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut members = vec![s];
        seen[s] = true;
        let mut x = p.apply(s);
        while x != s {
            seen[x] = true;
            members.push(x);
            x = p.apply(x);
        }
        let len = members.len();
        out.extend(members.into_iter().map(|m| (m, len)));
    }
    out
}
