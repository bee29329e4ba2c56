//! Wire maps, Feistel rounds and the generic n-round DES-like cipher.
//!
//! All wire maps use gather semantics: output nit `p` is input nit
//! `table[p]`. Round `1` of a network is applied first.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::sbox::SBoxRoundSpec;
use crate::word::Word;

/// A nit-level selection/reordering map (permutation, expansion or compression).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WireMap {
    in_len: usize,
    // 0-based source positions
    table: Vec<usize>,
}

impl WireMap {
    /// Builds a map from a 1-based source table, as tables are usually printed.
    pub fn from_one_based(in_len: usize, table: &[usize]) -> Result<Self> {
        let mut zero_based = Vec::with_capacity(table.len());
        for (p, &src) in table.iter().enumerate() {
            if src == 0 || src > in_len {
                return Err(Error::Range(format!(
                    "wire map entry {} is {src}, must lie in 1..={in_len}",
                    p + 1
                )));
            }
            zero_based.push(src - 1);
        }
        Ok(WireMap {
            in_len,
            table: zero_based,
        })
    }

    pub fn identity(len: usize) -> Self {
        WireMap {
            in_len: len,
            table: (0..len).collect(),
        }
    }

    pub fn in_len(&self) -> usize {
        self.in_len
    }

    pub fn out_len(&self) -> usize {
        self.table.len()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.table.iter().map(|&s| s + 1).collect()
    }

    pub fn is_permutation(&self) -> bool {
        if self.in_len != self.table.len() {
            return false;
        }
        let mut seen = vec![false; self.in_len];
        for &s in &self.table {
            if std::mem::replace(&mut seen[s], true) {
                return false;
            }
        }
        true
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.len() != self.in_len {
            return Err(Error::Dimension(format!(
                "wire map expects {} nits, got {}",
                self.in_len,
                w.len()
            )));
        }
        let nits = w.nits();
        Ok(Word::from_raw(
            w.group().clone(),
            self.table.iter().map(|&s| nits[s]).collect(),
        ))
    }

    /// Inverse of a bijective map.
    pub fn invert(&self) -> Result<WireMap> {
        if !self.is_permutation() {
            return Err(Error::NotInvertible(format!(
                "map from {} to {} nits is not a bijection",
                self.in_len,
                self.table.len()
            )));
        }
        let mut inv = vec![0; self.in_len];
        for (p, &s) in self.table.iter().enumerate() {
            inv[s] = p;
        }
        Ok(WireMap {
            in_len: self.in_len,
            table: inv,
        })
    }
}

/// Anything usable as the `f` of a Feistel round: a map `G^t -> G^t`.
pub trait HalfMap {
    fn apply_half(&self, y: &Word) -> Result<Word>;
}

/// An explicit round function `G^t -> G^t`, stored as the integer codes of its
/// outputs indexed by the integer code of the input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoundTable {
    group: GroupSpec,
    t: usize,
    image: Vec<u32>,
}

pub(crate) const MAX_TABLE_DOMAIN: u64 = 1 << 24;

pub(crate) fn half_domain(group: &GroupSpec, t: usize) -> Result<u64> {
    let mut n: u64 = 1;
    for _ in 0..t {
        n = n
            .checked_mul(group.order())
            .filter(|&v| v <= MAX_TABLE_DOMAIN)
            .ok_or_else(|| {
                Error::Capacity(format!("|G|^t for {group}, t={t} exceeds {MAX_TABLE_DOMAIN}"))
            })?;
    }
    Ok(n)
}

impl RoundTable {
    pub fn new(group: GroupSpec, t: usize, image: Vec<u32>) -> Result<Self> {
        let n = half_domain(&group, t)?;
        if image.len() as u64 != n {
            return Err(Error::Dimension(format!(
                "round table over {group}^{t} needs {n} entries, got {}",
                image.len()
            )));
        }
        if let Some(bad) = image.iter().find(|&&v| v as u64 >= n) {
            return Err(Error::Range(format!("round table entry {bad} >= {n}")));
        }
        Ok(RoundTable { group, t, image })
    }

    pub fn from_fn(group: GroupSpec, t: usize, f: impl Fn(&Word) -> Word) -> Result<Self> {
        let n = half_domain(&group, t)?;
        let image = (0..n)
            .map(|v| {
                let y = Word::from_u64(v, &group, t).expect("in range");
                f(&y).to_u64().expect("table output fits")
            })
            .map(|v| v as u32)
            .collect();
        RoundTable::new(group, t, image)
    }

    /// The identity of `(F_t(G), ⊙)`: every input maps to the zero word.
    pub fn zero(group: GroupSpec, t: usize) -> Result<Self> {
        let n = half_domain(&group, t)?;
        RoundTable::new(group, t, vec![0; n as usize])
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    fn check_same_shape(&self, other: &RoundTable) -> Result<()> {
        if self.group != other.group || self.t != other.t {
            return Err(Error::Dimension(format!(
                "round tables over {}^{} and {}^{}",
                self.group, self.t, other.group, other.t
            )));
        }
        Ok(())
    }

    fn word_at(&self, code: u32) -> Word {
        Word::from_u64(code as u64, &self.group, self.t).expect("table code in range")
    }

    /// Pointwise group sum `(f ⊙ g)(y) = f(y) ⊕ g(y)`.
    pub fn odot(&self, other: &RoundTable) -> Result<RoundTable> {
        self.check_same_shape(other)?;
        let image = self
            .image
            .iter()
            .zip(&other.image)
            .map(|(&a, &b)| {
                let s = self.word_at(a).add(&self.word_at(b)).expect("same shape");
                s.to_u64().expect("fits") as u32
            })
            .collect();
        RoundTable::new(self.group.clone(), self.t, image)
    }

    /// Pointwise negation, the ⊙-inverse.
    pub fn negate(&self) -> RoundTable {
        let image = self
            .image
            .iter()
            .map(|&a| self.word_at(a).neg().to_u64().expect("fits") as u32)
            .collect();
        RoundTable {
            group: self.group.clone(),
            t: self.t,
            image,
        }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.image.len());
        self.image.iter().all(|v| seen.insert(*v))
    }

    pub fn is_odot_identity(&self) -> bool {
        self.image.iter().all(|&v| v == 0)
    }

    pub fn eval_code(&self, y: u32) -> u32 {
        self.image[y as usize]
    }
}

impl HalfMap for RoundTable {
    fn apply_half(&self, y: &Word) -> Result<Word> {
        if y.group() != &self.group || y.len() != self.t {
            return Err(Error::Dimension(format!(
                "round table over {}^{} applied to a {}-nit word over {}",
                self.group,
                self.t,
                y.len(),
                y.group()
            )));
        }
        let code = y.to_u64().expect("half fits") as usize;
        Ok(self.word_at(self.image[code]))
    }
}

/// How a cipher derives its round functions from round subkeys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundFunction {
    /// `f(R, K)`: S-box lookups on `K ⊕ E(R)`, the same boxes every round.
    SBox(SBoxRoundSpec),
    /// One explicit table per round; `f_r(R, K) = T_r(R ⊕ K)` with `t`-nit subkeys.
    Tables(Vec<RoundTable>),
}

impl RoundFunction {
    pub fn subkey_len(&self, t: usize) -> usize {
        match self {
            RoundFunction::SBox(s) => s.subkey_len(),
            RoundFunction::Tables(_) => t,
        }
    }

    pub fn eval(&self, round: usize, right: &Word, subkey: &Word) -> Result<Word> {
        match self {
            RoundFunction::SBox(s) => s.eval(right, subkey),
            RoundFunction::Tables(ts) => {
                let table = ts.get(round).ok_or_else(|| {
                    Error::Dimension(format!("no round table for round {}", round + 1))
                })?;
                table.apply_half(&right.add(subkey)?)
            }
        }
    }
}

/// A round function bound to its round index and subkey.
pub struct KeyedRound<'a> {
    pub function: &'a RoundFunction,
    pub round: usize,
    pub subkey: &'a Word,
}

impl HalfMap for KeyedRound<'_> {
    fn apply_half(&self, y: &Word) -> Result<Word> {
        self.function.eval(self.round, y, self.subkey)
    }
}

/// One Feistel round: `(x, y) -> (y, x ⊕ f(y))`.
pub fn sigma<F: HalfMap + ?Sized>(f: &F, x: &Word, y: &Word) -> Result<(Word, Word)> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "halves of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    let fy = f.apply_half(y)?;
    Ok((y.clone(), x.add(&fy)?))
}

/// Inverse of [`sigma`]: `(u, v) -> (v ⊖ f(u), u)`.
pub fn sigma_inv<F: HalfMap + ?Sized>(f: &F, u: &Word, v: &Word) -> Result<(Word, Word)> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "halves of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let fu = f.apply_half(u)?;
    Ok((v.sub(&fu)?, u.clone()))
}

/// An n-round Feistel network; `rounds[0]` is applied first.
pub fn psi(rounds: &[&dyn HalfMap], state: (Word, Word)) -> Result<(Word, Word)> {
    rounds
        .iter()
        .try_fold(state, |(x, y), f| sigma(*f, &x, &y))
}

/// Everything needed to construct a [`CipherSpec`].
#[derive(Debug, Clone)]
pub struct CipherParams {
    pub group: GroupSpec,
    pub t: usize,
    pub rounds: usize,
    pub initial_perm: WireMap,
    pub key_length: usize,
    pub key_schedule: Vec<WireMap>,
    pub round_fn: RoundFunction,
    pub final_swap: bool,
}

/// A validated n-round DES-like cipher over a finite abelian group:
/// `T = P⁻¹ ∘ θ ∘ σ_{f_n} ∘ ... ∘ σ_{f_1} ∘ P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherSpec {
    group: GroupSpec,
    t: usize,
    rounds: usize,
    initial_perm: WireMap,
    final_perm: WireMap,
    key_length: usize,
    key_schedule: Vec<WireMap>,
    round_fn: RoundFunction,
    final_swap: bool,
}

impl CipherSpec {
    pub fn new(p: CipherParams) -> Result<Self> {
        if p.t == 0 {
            return Err(Error::spec("/t", "half width must be positive"));
        }
        if p.initial_perm.in_len() != 2 * p.t || p.initial_perm.out_len() != 2 * p.t {
            return Err(Error::spec(
                "/initial_perm",
                format!("must map {} nits to {} nits", 2 * p.t, 2 * p.t),
            ));
        }
        let final_perm = p
            .initial_perm
            .invert()
            .map_err(|_| Error::spec("/initial_perm", "initial permutation is not a bijection"))?;
        if p.key_schedule.len() != p.rounds {
            return Err(Error::spec(
                "/key_schedule",
                format!(
                    "{} schedule entries for {} rounds",
                    p.key_schedule.len(),
                    p.rounds
                ),
            ));
        }
        match &p.round_fn {
            RoundFunction::SBox(s) => s.validate(&p.group, p.t)?,
            RoundFunction::Tables(ts) => {
                if ts.len() != p.rounds {
                    return Err(Error::spec(
                        "/round_fn/tables",
                        format!("{} tables for {} rounds", ts.len(), p.rounds),
                    ));
                }
                for (r, tab) in ts.iter().enumerate() {
                    if tab.group() != &p.group || tab.t() != p.t {
                        return Err(Error::spec(
                            format!("/round_fn/tables/{r}"),
                            format!("table is over {}^{}, cipher is over {}^{}", tab.group(), tab.t(), p.group, p.t),
                        ));
                    }
                }
            }
        }
        let sub_len = p.round_fn.subkey_len(p.t);
        for (r, m) in p.key_schedule.iter().enumerate() {
            if m.in_len() != p.key_length || m.out_len() != sub_len {
                return Err(Error::spec(
                    format!("/key_schedule/{r}"),
                    format!(
                        "maps {} nits to {}; expected {} to {}",
                        m.in_len(),
                        m.out_len(),
                        p.key_length,
                        sub_len
                    ),
                ));
            }
        }
        Ok(CipherSpec {
            group: p.group,
            t: p.t,
            rounds: p.rounds,
            initial_perm: p.initial_perm,
            final_perm,
            key_length: p.key_length,
            key_schedule: p.key_schedule,
            round_fn: p.round_fn,
            final_swap: p.final_swap,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn block_len(&self) -> usize {
        2 * self.t
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn initial_perm(&self) -> &WireMap {
        &self.initial_perm
    }

    pub fn final_perm(&self) -> &WireMap {
        &self.final_perm
    }

    pub fn key_length(&self) -> usize {
        self.key_length
    }

    pub fn key_schedule(&self) -> &[WireMap] {
        &self.key_schedule
    }

    pub fn round_fn(&self) -> &RoundFunction {
        &self.round_fn
    }

    pub fn final_swap(&self) -> bool {
        self.final_swap
    }

    pub fn subkey_len(&self) -> usize {
        self.round_fn.subkey_len(self.t)
    }

    /// Number of messages, `|G|^(2t)`, when it fits in a u64.
    pub fn message_space(&self) -> Option<u64> {
        (self.group.order() as u128)
            .checked_pow(self.block_len() as u32)
            .and_then(|v| u64::try_from(v).ok())
    }

    /// Number of keys, `|G|^key_length`.
    pub fn key_space(&self) -> num_bigint::BigUint {
        num_bigint::BigUint::from(self.group.order()).pow(self.key_length as u32)
    }

    pub fn check_key(&self, key: &Word) -> Result<()> {
        if key.group() != &self.group || key.len() != self.key_length {
            return Err(Error::Dimension(format!(
                "key must be {} nits over {}, got {} nits over {}",
                self.key_length,
                self.group,
                key.len(),
                key.group()
            )));
        }
        Ok(())
    }

    pub fn check_block(&self, m: &Word) -> Result<()> {
        if m.group() != &self.group || m.len() != self.block_len() {
            return Err(Error::Dimension(format!(
                "block must be {} nits over {}, got {} nits over {}",
                self.block_len(),
                self.group,
                m.len(),
                m.group()
            )));
        }
        Ok(())
    }

    pub fn subkeys(&self, key: &Word) -> Result<Vec<Word>> {
        self.check_key(key)?;
        self.key_schedule.iter().map(|m| m.apply(key)).collect()
    }

    /// Runs the Feistel rounds (no permutations, no swap) on a state.
    pub fn rounds_forward(&self, subkeys: &[Word], state: (Word, Word)) -> Result<(Word, Word)> {
        let keyed: Vec<KeyedRound<'_>> = subkeys
            .iter()
            .enumerate()
            .map(|(round, subkey)| KeyedRound {
                function: &self.round_fn,
                round,
                subkey,
            })
            .collect();
        let refs: Vec<&dyn HalfMap> = keyed.iter().map(|k| k as &dyn HalfMap).collect();
        psi(&refs, state)
    }

    pub fn encrypt(&self, key: &Word, m: &Word) -> Result<Word> {
        self.check_block(m)?;
        let subkeys = self.subkeys(key)?;
        let state = self.initial_perm.apply(m)?.split_halves()?;
        let (x, y) = self.rounds_forward(&subkeys, state)?;
        let out = if self.final_swap { y.concat(&x)? } else { x.concat(&y)? };
        self.final_perm.apply(&out)
    }

    pub fn decrypt(&self, key: &Word, c: &Word) -> Result<Word> {
        self.check_block(c)?;
        let subkeys = self.subkeys(key)?;
        let (a, b) = self.initial_perm.apply(c)?.split_halves()?;
        let (mut u, mut v) = if self.final_swap { (b, a) } else { (a, b) };
        for (round, subkey) in subkeys.iter().enumerate().rev() {
            let f = KeyedRound {
                function: &self.round_fn,
                round,
                subkey,
            };
            (u, v) = sigma_inv(&f, &u, &v)?;
        }
        self.final_perm.apply(&u.concat(&v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32) -> GroupSpec {
        GroupSpec::cyclic(n).unwrap()
    }

    fn w3(s: &str) -> Word {
        Word::parse(s, &z(3), s.len()).unwrap()
    }

    const P: [usize; 18] = [11, 12, 2, 13, 9, 1, 5, 8, 16, 17, 4, 18, 15, 7, 10, 3, 6, 14];
    const P_INV: [usize; 18] = [6, 3, 16, 11, 7, 17, 14, 8, 5, 15, 1, 2, 4, 18, 13, 9, 10, 12];

    #[test]
    fn gather_semantics() {
        let p = WireMap::from_one_based(18, &P).unwrap();
        assert_eq!(
            p.apply(&w3("012012012012012012")).unwrap(),
            w3("121020110102200221")
        );
        let e = WireMap::from_one_based(9, &[9, 1, 2, 3, 4, 5, 6, 3, 4, 5, 6, 7, 8, 9, 1]).unwrap();
        assert_eq!(e.apply(&w3("102200221")).unwrap(), w3("110220022002211"));
        assert!(p.apply(&w3("012")).is_err());
    }

    #[test]
    fn invert_examples() {
        let p = WireMap::from_one_based(18, &P).unwrap();
        assert_eq!(p.invert().unwrap().one_based(), P_INV.to_vec());
        assert_eq!(WireMap::identity(5).invert().unwrap(), WireMap::identity(5));
        let e = WireMap::from_one_based(9, &[9, 1, 2, 3, 4, 5, 6, 3, 4, 5, 6, 7, 8, 9, 1]).unwrap();
        assert!(matches!(e.invert(), Err(Error::NotInvertible(_))));
        assert!(WireMap::from_one_based(3, &[1, 4, 2]).is_err());
        assert!(WireMap::from_one_based(3, &[0, 1, 2]).is_err());
    }

    #[test]
    fn zero_round_function_is_a_swap() {
        let g = z(3);
        let f = RoundTable::zero(g.clone(), 2).unwrap();
        let (x, y) = (w3("01"), w3("21"));
        assert_eq!(sigma(&f, &x, &y).unwrap(), (y.clone(), x.clone()));
        assert_eq!(sigma_inv(&f, &x, &y).unwrap(), (y, x));
    }

    #[test]
    fn psi_with_no_rounds_is_identity() {
        let s = (w3("012"), w3("210"));
        assert_eq!(psi(&[], s.clone()).unwrap(), s);
    }

    #[test]
    fn psi_is_a_bijection_on_z2_t1() {
        // every pair of round tables over Z2, t=1: 4 tables each
        let g = z(2);
        let tables: Vec<RoundTable> = (0..4u32)
            .map(|code| RoundTable::new(g.clone(), 1, vec![code >> 1, code & 1]).unwrap())
            .collect();
        for f1 in &tables {
            for f2 in &tables {
                let mut images = HashSet::new();
                for s in 0..4u64 {
                    let m = Word::from_u64(s, &g, 2).unwrap();
                    let (x, y) = m.split_halves().unwrap();
                    let (a, b) = psi(&[f1, f2], (x, y)).unwrap();
                    images.insert(a.concat(&b).unwrap().to_u64().unwrap());
                }
                assert_eq!(images.len(), 4);
            }
        }
    }

    #[test]
    fn odot_examples() {
        let g = z(3);
        let f = RoundTable::new(g.clone(), 1, vec![0, 1, 2]).unwrap();
        let c = RoundTable::new(g.clone(), 1, vec![1, 1, 1]).unwrap();
        assert_eq!(f.odot(&c).unwrap().image(), &[1, 2, 0]);
        let zero = RoundTable::zero(g.clone(), 1).unwrap();
        assert_eq!(f.odot(&zero).unwrap(), f);
        assert!(f.odot(&f.negate()).unwrap().is_odot_identity());
        let other = RoundTable::zero(g, 2).unwrap();
        assert!(f.odot(&other).is_err());
    }

    fn table_cipher(g: &GroupSpec, t: usize, rounds: usize, seed: u64) -> CipherSpec {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = half_domain(g, t).unwrap() as u32;
        let tables = (0..rounds)
            .map(|_| RoundTable::new(g.clone(), t, (0..n).map(|_| rng.gen_range(0..n)).collect()).unwrap())
            .collect();
        let mut perm: Vec<usize> = (1..=2 * t).collect();
        perm.rotate_left(1);
        CipherSpec::new(CipherParams {
            group: g.clone(),
            t,
            rounds,
            initial_perm: WireMap::from_one_based(2 * t, &perm).unwrap(),
            key_length: t + 1,
            key_schedule: (0..rounds)
                .map(|r| {
                    let src: Vec<usize> = (0..t).map(|p| (p + r) % (t + 1) + 1).collect();
                    WireMap::from_one_based(t + 1, &src).unwrap()
                })
                .collect(),
            round_fn: RoundFunction::Tables(tables),
            final_swap: true,
        })
        .unwrap()
    }

    #[test]
    fn table_cipher_round_trip_and_injective() {
        for n in [2u32, 3, 5] {
            let g = z(n);
            let spec = table_cipher(&g, 2, 3, n as u64);
            let domain = spec.message_space().unwrap();
            for kv in 0..(n as u64).pow(3) {
                let key = Word::from_u64(kv, &g, 3).unwrap();
                let mut seen = HashSet::new();
                for mv in 0..domain {
                    let m = Word::from_u64(mv, &g, 4).unwrap();
                    let c = spec.encrypt(&key, &m).unwrap();
                    assert_eq!(spec.decrypt(&key, &c).unwrap(), m);
                    seen.insert(c);
                }
                assert_eq!(seen.len() as u64, domain);
            }
        }
    }

    #[test]
    fn all_zero_tables_compose_to_swaps() {
        // each zero round is θ, so n rounds give θ^n; adding the final swap gives θ^(n+1)
        let g = z(2);
        for rounds in 0..5 {
            let spec = CipherSpec::new(CipherParams {
                group: g.clone(),
                t: 2,
                rounds,
                initial_perm: WireMap::identity(4),
                key_length: 2,
                key_schedule: vec![WireMap::identity(2); rounds],
                round_fn: RoundFunction::Tables(vec![RoundTable::zero(g.clone(), 2).unwrap(); rounds]),
                final_swap: true,
            })
            .unwrap();
            let key = Word::zero(g.clone(), 2);
            for mv in 0..16 {
                let m = Word::from_u64(mv, &g, 4).unwrap();
                let (x, y) = m.split_halves().unwrap();
                let expected = if (rounds + 1) % 2 == 0 { m.clone() } else { y.concat(&x).unwrap() };
                assert_eq!(spec.encrypt(&key, &m).unwrap(), expected);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let g = z(2);
        let base = CipherParams {
            group: g.clone(),
            t: 1,
            rounds: 1,
            initial_perm: WireMap::identity(2),
            key_length: 1,
            key_schedule: vec![WireMap::identity(1)],
            round_fn: RoundFunction::Tables(vec![RoundTable::zero(g.clone(), 1).unwrap()]),
            final_swap: false,
        };
        assert!(CipherSpec::new(base.clone()).is_ok());

        let mut bad = base.clone();
        bad.initial_perm = WireMap::from_one_based(2, &[1, 1]).unwrap();
        assert!(matches!(CipherSpec::new(bad), Err(Error::Spec { path, .. }) if path == "/initial_perm"));

        let mut bad = base.clone();
        bad.key_schedule = vec![];
        assert!(matches!(CipherSpec::new(bad), Err(Error::Spec { path, .. }) if path == "/key_schedule"));

        let mut bad = base;
        bad.key_length = 2;
        assert!(matches!(CipherSpec::new(bad), Err(Error::Spec { path, .. }) if path == "/key_schedule/0"));
    }
}
