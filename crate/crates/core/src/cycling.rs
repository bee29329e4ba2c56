//! Cycling experiments: orbit lengths, lcm-based closure and purity
//! refutation, pseudorandom walks and subgroup-order lower bounds.
//!
//! An orbit here is always the cycle through a start message under one
//! permutation, found by iterating until the start comes back. When every key
//! involved can be compiled ([`CompiledCipher`]) the iteration runs on packed
//! inner states; otherwise it falls back to word-level encryption.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{CompiledCipher, HalfCodec, InnerState};
use crate::error::{Error, Result};
use crate::permnet::CipherSpec;
use crate::word::Word;

/// Default cap on permutation applications per probe.
pub const DEFAULT_MAX_STEPS: u64 = 1 << 32;

/// Steps between checkpoint writes.
pub const CHECKPOINT_EVERY: u64 = 10_000_000;

/// Serde helpers writing big integers as decimal strings.
pub(crate) mod bigdec {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| s.parse().map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.collect_str(x),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| s.parse().map_err(D::Error::custom))
                .transpose()
        }
    }
}

/// One factor of a [`GenWord`]: generator `key` or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Letter {
    pub key: usize,
    pub inverse: bool,
}

/// A product of generator permutations, stored in application order.
///
/// The text form lists generator indices in the order they are applied,
/// with `~` marking an inverse: `"0,~1"` is `T_1^-1 . T_0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenWord(pub Vec<Letter>);

impl GenWord {
    pub fn single(key: usize) -> Self {
        GenWord(vec![Letter {
            key,
            inverse: false,
        }])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    fn max_key(&self) -> Option<usize> {
        self.0.iter().map(|l| l.key).max()
    }
}

impl FromStr for GenWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(GenWord::default());
        }
        s.split(',')
            .enumerate()
            .map(|(p, tok)| {
                let tok = tok.trim();
                let (inverse, digits) = match tok.strip_prefix('~') {
                    Some(rest) => (true, rest),
                    None => (false, tok),
                };
                let key = digits.parse().map_err(|_| Error::Parse {
                    position: p + 1,
                    message: format!("'{tok}' is not a generator index"),
                })?;
                Ok(Letter { key, inverse })
            })
            .collect::<Result<Vec<_>>>()
            .map(GenWord)
    }
}

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| format!("{}{}", if l.inverse { "~" } else { "" }, l.key))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Serialize for GenWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GenWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Which evaluation path a probe uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    /// Compiled tables when possible, word-level otherwise.
    #[default]
    Auto,
    /// Always word-level encryption.
    Reference,
}

#[derive(Debug, Clone)]
pub struct OrbitOptions {
    pub max_steps: u64,
    /// Sidecar file for progress; multi-probe runs append `.{index}`.
    pub checkpoint: Option<PathBuf>,
    /// Continue from an existing checkpoint instead of starting over.
    pub resume: bool,
    pub engine: EngineChoice,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            max_steps: DEFAULT_MAX_STEPS,
            checkpoint: None,
            resume: false,
            engine: EngineChoice::Auto,
        }
    }
}

impl OrbitOptions {
    pub fn with_max_steps(max_steps: u64) -> Self {
        OrbitOptions {
            max_steps,
            ..Default::default()
        }
    }

    fn for_probe(&self, index: usize) -> OrbitOptions {
        let mut o = self.clone();
        o.checkpoint = self.checkpoint.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(format!(".{index}"));
            PathBuf::from(s)
        });
        o
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitResult {
    #[serde(with = "bigdec")]
    pub start: BigUint,
    #[serde(with = "bigdec::vec")]
    pub keys: Vec<BigUint>,
    pub word: GenWord,
    /// Orbit length, absent when the probe was truncated.
    pub length: Option<u64>,
    pub steps_taken: u64,
    pub truncated: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Refuted,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Refuted => "refuted",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of a closure or purity test over several probes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub probes: Vec<OrbitResult>,
    #[serde(with = "bigdec")]
    pub lcm: BigUint,
    #[serde(with = "bigdec")]
    pub threshold: BigUint,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl ExperimentReport {
    /// Builds the report; the verdict is `Refuted` only when every probe
    /// completed and the lcm of the lengths exceeds the threshold.
    pub fn from_probes(probes: Vec<OrbitResult>, threshold: BigUint) -> Self {
        let lcm = lcm_of(probes.iter().filter_map(|p| p.length));
        let complete = !probes.is_empty() && probes.iter().all(|p| !p.truncated);
        let verdict = if complete && lcm > threshold {
            Verdict::Refuted
        } else {
            Verdict::Inconclusive
        };
        ExperimentReport {
            probes,
            lcm,
            threshold,
            verdict,
            seed: None,
        }
    }
}

/// Lower bound on the order of a group generated by encryption permutations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupReport {
    #[serde(with = "bigdec::vec")]
    pub generators: Vec<BigUint>,
    pub probes: Vec<OrbitResult>,
    #[serde(with = "bigdec")]
    pub bound: BigUint,
    #[serde(with = "bigdec::opt", skip_serializing_if = "Option::is_none", default)]
    pub compare_to: Option<BigUint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exceeds: Option<bool>,
}

impl SubgroupReport {
    pub fn compared_with(mut self, value: BigUint) -> Self {
        self.exceeds = Some(self.bound > value);
        self.compare_to = Some(value);
        self
    }
}

/// Result of [`random_walk_closure`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkReport {
    pub seed: u64,
    #[serde(with = "bigdec")]
    pub start: BigUint,
    pub tail: Option<u64>,
    pub cycle: Option<u64>,
    pub evaluations: u64,
    pub truncated: bool,
    /// `(tail + cycle)^2`, a birthday-style size estimate of the walked set.
    #[serde(with = "bigdec::opt")]
    pub estimate: Option<BigUint>,
    #[serde(with = "bigdec")]
    pub key_space: BigUint,
    pub estimate_exceeds_key_space: Option<bool>,
    #[serde(skip)]
    pub wall_time: Duration,
}

pub fn lcm_of(lengths: impl IntoIterator<Item = u64>) -> BigUint {
    lengths
        .into_iter()
        .fold(BigUint::one(), |acc, l| acc.lcm(&BigUint::from(l)))
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Closure report from already known orbit lengths.
pub fn report_from_lengths(lengths: &[u64], threshold: BigUint) -> ExperimentReport {
    let probes = lengths
        .iter()
        .map(|&l| OrbitResult {
            start: BigUint::zero(),
            keys: Vec::new(),
            word: GenWord::default(),
            length: Some(l),
            steps_taken: l,
            truncated: false,
            wall_time: Duration::ZERO,
        })
        .collect();
    ExperimentReport::from_probes(probes, threshold)
}

trait Stepper: Sync {
    type State: Clone + PartialEq;
    fn enter(&self, m: &Word) -> Result<Self::State>;
    fn leave(&self, s: &Self::State) -> Word;
    fn step(&self, s: &Self::State) -> Self::State;
}

struct FastProduct {
    factors: Vec<(Arc<CompiledCipher>, bool)>,
    base: Arc<CompiledCipher>,
}

impl Stepper for FastProduct {
    type State = InnerState;

    fn enter(&self, m: &Word) -> Result<InnerState> {
        self.base.to_inner(m)
    }

    fn leave(&self, s: &InnerState) -> Word {
        self.base.from_inner(*s)
    }

    #[inline]
    fn step(&self, s: &InnerState) -> InnerState {
        let mut s = *s;
        for (c, inverse) in &self.factors {
            s = if *inverse { c.backward(s) } else { c.forward(s) };
        }
        s
    }
}

struct RefProduct<'a> {
    spec: &'a CipherSpec,
    factors: Vec<(&'a Word, bool)>,
}

impl Stepper for RefProduct<'_> {
    type State = Word;

    fn enter(&self, m: &Word) -> Result<Word> {
        self.spec.check_block(m)?;
        Ok(m.clone())
    }

    fn leave(&self, s: &Word) -> Word {
        s.clone()
    }

    fn step(&self, s: &Word) -> Word {
        self.factors.iter().fold(s.clone(), |x, (k, inverse)| {
            let r = if *inverse {
                self.spec.decrypt(k, &x)
            } else {
                self.spec.encrypt(k, &x)
            };
            r.expect("dimensions checked on entry")
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    #[serde(with = "bigdec")]
    start: BigUint,
    #[serde(with = "bigdec::vec")]
    keys: Vec<BigUint>,
    word: GenWord,
    #[serde(with = "bigdec")]
    current: BigUint,
    steps: u64,
    finished: Option<u64>,
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let text = serde_json::to_string_pretty(cp).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_checkpoint(path: &Path) -> Result<Option<Checkpoint>> {
    match fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn iterate<S: Stepper>(
    stepper: &S,
    spec: &CipherSpec,
    keys: &[Word],
    word: &GenWord,
    m: &Word,
    opts: &OrbitOptions,
) -> Result<OrbitResult> {
    let clock = Instant::now();
    let start = stepper.enter(m)?;
    let key_ints: Vec<BigUint> = keys.iter().map(Word::to_biguint).collect();
    let mut current = start.clone();
    let mut steps = 0u64;
    let mut finished = None;

    if let (Some(path), true) = (&opts.checkpoint, opts.resume) {
        if let Some(cp) = read_checkpoint(path)? {
            if cp.start != m.to_biguint() || cp.keys != key_ints || &cp.word != word {
                return Err(Error::Io(format!(
                    "{} belongs to a different probe",
                    path.display()
                )));
            }
            let w = Word::from_biguint(&cp.current, spec.group(), spec.block_len())?;
            current = stepper.enter(&w)?;
            steps = cp.steps;
            finished = cp.finished;
        }
    }

    let save = |steps: u64, current: &S::State, finished: Option<u64>| -> Result<()> {
        match &opts.checkpoint {
            Some(path) => write_checkpoint(
                path,
                &Checkpoint {
                    start: m.to_biguint(),
                    keys: key_ints.clone(),
                    word: word.clone(),
                    current: stepper.leave(current).to_biguint(),
                    steps,
                    finished,
                },
            ),
            None => Ok(()),
        }
    };

    if finished.is_none() {
        'outer: loop {
            let stop = ((steps / CHECKPOINT_EVERY + 1) * CHECKPOINT_EVERY).min(opts.max_steps);
            while steps < stop {
                current = stepper.step(&current);
                steps += 1;
                if current == start {
                    finished = Some(steps);
                    break 'outer;
                }
            }
            if steps >= opts.max_steps {
                break;
            }
            save(steps, &current, None)?;
        }
        if opts.checkpoint.is_some() {
            save(steps, &current, finished)?;
        }
    }

    Ok(OrbitResult {
        start: m.to_biguint(),
        keys: key_ints,
        word: word.clone(),
        length: finished,
        steps_taken: steps,
        truncated: finished.is_none(),
        wall_time: clock.elapsed(),
    })
}

/// Orbit of `m` under the product of generator permutations named by `word`.
pub fn probe_orbit(
    spec: &CipherSpec,
    keys: &[Word],
    word: &GenWord,
    m: &Word,
    opts: &OrbitOptions,
) -> Result<OrbitResult> {
    let compiled = match opts.engine {
        EngineChoice::Auto => compile_keys(spec, keys).ok(),
        EngineChoice::Reference => None,
    };
    probe_with(spec, keys, compiled.as_deref(), word, m, opts)
}

fn compile_keys(spec: &CipherSpec, keys: &[Word]) -> Result<Vec<Arc<CompiledCipher>>> {
    let codec = Arc::new(HalfCodec::new(spec.group(), spec.t())?);
    keys.par_iter()
        .map(|k| CompiledCipher::with_codec(spec, k, codec.clone()).map(Arc::new))
        .collect()
}

fn probe_with(
    spec: &CipherSpec,
    keys: &[Word],
    compiled: Option<&[Arc<CompiledCipher>]>,
    word: &GenWord,
    m: &Word,
    opts: &OrbitOptions,
) -> Result<OrbitResult> {
    if opts.max_steps == 0 {
        return Err(Error::Range("max_steps must be at least 1".into()));
    }
    if let Some(k) = word.max_key().filter(|&k| k >= keys.len()) {
        return Err(Error::Range(format!(
            "word uses generator {k} but only {} keys were given",
            keys.len()
        )));
    }
    for k in keys {
        spec.check_key(k)?;
    }
    spec.check_block(m)?;
    match compiled {
        Some(ciphers) if !ciphers.is_empty() => {
            let stepper = FastProduct {
                factors: word
                    .letters()
                    .iter()
                    .map(|l| (ciphers[l.key].clone(), l.inverse))
                    .collect(),
                base: ciphers[0].clone(),
            };
            iterate(&stepper, spec, keys, word, m, opts)
        }
        _ => {
            let stepper = RefProduct {
                spec,
                factors: word
                    .letters()
                    .iter()
                    .map(|l| (&keys[l.key], l.inverse))
                    .collect(),
            };
            iterate(&stepper, spec, keys, word, m, opts)
        }
    }
}

/// Length of the cycle of `T_k` through `m`.
pub fn orbit_length(spec: &CipherSpec, k: &Word, m: &Word, max_steps: u64) -> Result<OrbitResult> {
    orbit_length_with(spec, k, m, &OrbitOptions::with_max_steps(max_steps))
}

pub fn orbit_length_with(
    spec: &CipherSpec,
    k: &Word,
    m: &Word,
    opts: &OrbitOptions,
) -> Result<OrbitResult> {
    probe_orbit(spec, std::slice::from_ref(k), &GenWord::single(0), m, opts)
}

/// Orbit of `m` under `T_{k_ref}^-1 . T_k`.
pub fn purity_probe(
    spec: &CipherSpec,
    k_ref: &Word,
    k: &Word,
    m: &Word,
    opts: &OrbitOptions,
) -> Result<OrbitResult> {
    probe_orbit(
        spec,
        &[k_ref.clone(), k.clone()],
        &purity_word(),
        m,
        opts,
    )
}

fn purity_word() -> GenWord {
    GenWord(vec![
        Letter {
            key: 1,
            inverse: false,
        },
        Letter {
            key: 0,
            inverse: true,
        },
    ])
}

/// Runs one orbit per `(key, message)` probe and compares the lcm of the
/// lengths with the key-space size.
pub fn closure_refute(
    spec: &CipherSpec,
    probes: &[(Word, Word)],
    opts: &OrbitOptions,
) -> Result<ExperimentReport> {
    if probes.is_empty() {
        return Err(Error::Range("closure test needs at least one probe".into()));
    }
    let results = probes
        .par_iter()
        .enumerate()
        .map(|(i, (k, m))| orbit_length_with(spec, k, m, &opts.for_probe(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_probes(results, spec.key_space()))
}

/// Purity test: probes are `(k_ref, k, m)`; a pure cipher keeps the lcm of
/// the `T_{k_ref}^-1 . T_k` orbit lengths at most the key-space size.
pub fn purity_refute(
    spec: &CipherSpec,
    probes: &[(Word, Word, Word)],
    opts: &OrbitOptions,
) -> Result<ExperimentReport> {
    if probes.is_empty() {
        return Err(Error::Range("purity test needs at least one probe".into()));
    }
    let results = probes
        .par_iter()
        .enumerate()
        .map(|(i, (kr, k, m))| purity_probe(spec, kr, k, m, &opts.for_probe(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_probes(results, spec.key_space()))
}

/// Lcm of orbit lengths under products of the generator permutations. Every
/// such length divides the order of the generated group.
pub fn subgroup_lower_bound(
    spec: &CipherSpec,
    generator_keys: &[Word],
    probes: &[(GenWord, Word)],
    opts: &OrbitOptions,
) -> Result<SubgroupReport> {
    let compiled = match opts.engine {
        EngineChoice::Auto => compile_keys(spec, generator_keys).ok(),
        EngineChoice::Reference => None,
    };
    let results = probes
        .par_iter()
        .enumerate()
        .map(|(i, (w, m))| {
            probe_with(
                spec,
                generator_keys,
                compiled.as_deref(),
                w,
                m,
                &opts.for_probe(i),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubgroupReport {
        generators: generator_keys.iter().map(Word::to_biguint).collect(),
        bound: lcm_of(results.iter().filter_map(|p| p.length)),
        probes: results,
        compare_to: None,
        exceeds: None,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The walk's key choice: a seeded 64-bit mix of the message's integer
/// encoding, reduced modulo the key-space size.
pub fn walk_key(spec: &CipherSpec, seed: u64, x: &Word) -> Word {
    let digest = x
        .to_biguint()
        .iter_u64_digits()
        .fold(splitmix64(seed), |h, d| splitmix64(h ^ d));
    let ks = spec.key_space();
    let value = match ks.to_u64() {
        Some(n) => BigUint::from(digest % n),
        None => {
            let words = ks.bits() / 64 + 2;
            let mut acc = BigUint::zero();
            let mut h = digest;
            for _ in 0..words {
                acc = (acc << 64u32) + BigUint::from(h);
                h = splitmix64(h);
            }
            acc % ks
        }
    };
    Word::from_biguint(&value, spec.group(), spec.key_length()).expect("reduced below |K|")
}

/// Pseudorandom walk `x_{i+1} = T_{h(x_i)}(x_i)` from a seeded random start,
/// with Brent's cycle detection.
pub fn random_walk_closure(spec: &CipherSpec, seed: u64, max_steps: u64) -> Result<WalkReport> {
    if max_steps == 0 {
        return Err(Error::Range("max_steps must be at least 1".into()));
    }
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = spec.group();
    let x0 = Word::new(
        g.clone(),
        (0..spec.block_len())
            .map(|_| rng.gen_range(0..g.order() as u32))
            .collect(),
    )?;
    let f = |x: &Word| -> Result<Word> { spec.encrypt(&walk_key(spec, seed, x), x) };

    let found = brent(&x0, f, max_steps)?;
    let key_space = spec.key_space();
    let (tail, cycle, evaluations) = match found {
        BrentOutcome::Found {
            tail,
            cycle,
            evaluations,
        } => (Some(tail), Some(cycle), evaluations),
        BrentOutcome::Truncated { evaluations } => (None, None, evaluations),
    };
    let estimate = tail
        .zip(cycle)
        .map(|(a, b)| BigUint::from(a + b).pow(2));
    Ok(WalkReport {
        seed,
        start: x0.to_biguint(),
        tail,
        cycle,
        evaluations,
        truncated: tail.is_none(),
        estimate_exceeds_key_space: estimate.as_ref().map(|e| *e > key_space),
        estimate,
        key_space,
        wall_time: clock.elapsed(),
    })
}

pub(crate) enum BrentOutcome {
    Found {
        tail: u64,
        cycle: u64,
        evaluations: u64,
    },
    Truncated {
        evaluations: u64,
    },
}

/// Brent's cycle detection on the sequence `x0, f(x0), f(f(x0)), ...`.
pub(crate) fn brent<T: Clone + PartialEq>(
    x0: &T,
    f: impl Fn(&T) -> Result<T>,
    max_evals: u64,
) -> Result<BrentOutcome> {
    let mut evals = 1u64;
    let mut power = 1u64;
    let mut cycle = 1u64;
    let mut tortoise = x0.clone();
    let mut hare = f(x0)?;
    while tortoise != hare {
        if evals >= max_evals {
            return Ok(BrentOutcome::Truncated { evaluations: evals });
        }
        if power == cycle {
            tortoise = hare.clone();
            power *= 2;
            cycle = 0;
        }
        hare = f(&hare)?;
        cycle += 1;
        evals += 1;
    }

    let mut tortoise = x0.clone();
    let mut hare = x0.clone();
    for _ in 0..cycle {
        hare = f(&hare)?;
    }
    evals += cycle;
    let mut tail = 0u64;
    while tortoise != hare {
        tortoise = f(&tortoise)?;
        hare = f(&hare)?;
        tail += 1;
        evals += 2;
    }
    Ok(BrentOutcome::Found {
        tail,
        cycle,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edes::{edes_spec, BLOCK_LEN, KEY_LEN};
    use crate::group::GroupSpec;
    use crate::permnet::{CipherParams, RoundFunction, RoundTable, WireMap};

    fn z(n: u32) -> GroupSpec {
        GroupSpec::cyclic(n).unwrap()
    }

    /// Zero rounds, identity permutation, no swap: every T_k is the identity.
    fn identity_spec() -> CipherSpec {
        CipherSpec::new(CipherParams {
            group: z(3),
            t: 2,
            rounds: 0,
            initial_perm: WireMap::identity(4),
            key_length: 2,
            key_schedule: vec![],
            round_fn: RoundFunction::Tables(vec![]),
            final_swap: false,
        })
        .unwrap()
    }

    /// Zero rounds and a final swap: T_k(x, y) = (y, x).
    fn swap_spec() -> CipherSpec {
        CipherSpec::new(CipherParams {
            group: z(3),
            t: 2,
            rounds: 0,
            initial_perm: WireMap::identity(4),
            key_length: 2,
            key_schedule: vec![],
            round_fn: RoundFunction::Tables(vec![]),
            final_swap: true,
        })
        .unwrap()
    }

    fn toy_spec() -> CipherSpec {
        let g = z(3);
        let t1 = RoundTable::new(g.clone(), 2, vec![4, 0, 7, 2, 2, 8, 1, 5, 3]).unwrap();
        let t2 = RoundTable::new(g.clone(), 2, vec![0, 6, 6, 1, 3, 5, 8, 2, 4]).unwrap();
        CipherSpec::new(CipherParams {
            group: g,
            t: 2,
            rounds: 2,
            initial_perm: WireMap::from_one_based(4, &[3, 1, 4, 2]).unwrap(),
            key_length: 3,
            key_schedule: vec![
                WireMap::from_one_based(3, &[1, 2]).unwrap(),
                WireMap::from_one_based(3, &[3, 1]).unwrap(),
            ],
            round_fn: RoundFunction::Tables(vec![t1, t2]),
            final_swap: true,
        })
        .unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, &z(3), s.len()).unwrap()
    }

    #[test]
    fn trivial_orbits() {
        let id = identity_spec();
        for m in ["0000", "1201"] {
            let r = orbit_length(&id, &w("12"), &w(m), 10).unwrap();
            assert_eq!(r.length, Some(1));
        }
        let sw = swap_spec();
        assert_eq!(orbit_length(&sw, &w("00"), &w("1201"), 10).unwrap().length, Some(2));
        assert_eq!(orbit_length(&sw, &w("00"), &w("1212"), 10).unwrap().length, Some(1));
    }

    #[test]
    fn truncation_is_reported() {
        let sw = swap_spec();
        let r = orbit_length(&sw, &w("00"), &w("1201"), 1).unwrap();
        assert!(r.truncated);
        assert_eq!(r.length, None);
        assert_eq!(r.steps_taken, 1);
        assert!(orbit_length(&sw, &w("00"), &w("1201"), 0).is_err());
    }

    #[test]
    fn fast_and_reference_paths_agree() {
        let spec = toy_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let k = Word::from_u64(rng.gen_range(0..27), &z(3), 3).unwrap();
            let m = Word::from_u64(rng.gen_range(0..81), &z(3), 4).unwrap();
            let fast = orbit_length(&spec, &k, &m, 1000).unwrap();
            let slow = orbit_length_with(
                &spec,
                &k,
                &m,
                &OrbitOptions {
                    engine: EngineChoice::Reference,
                    ..OrbitOptions::with_max_steps(1000)
                },
            )
            .unwrap();
            assert_eq!(fast.length, slow.length);
            // replay: the orbit really returns after `length` steps
            let n = fast.length.unwrap();
            let mut x = m.clone();
            for i in 1..=n {
                x = spec.encrypt(&k, &x).unwrap();
                assert_eq!(x == m, i == n);
            }
        }
    }

    #[test]
    fn purity_probe_with_equal_keys_is_identity() {
        let spec = edes_spec();
        let k = Word::from_u64(22933471, spec.group(), KEY_LEN).unwrap();
        let m = Word::from_u64(67681038, spec.group(), BLOCK_LEN).unwrap();
        let r = purity_probe(&spec, &k, &k, &m, &OrbitOptions::with_max_steps(10)).unwrap();
        assert_eq!(r.length, Some(1));
    }

    #[test]
    fn purity_word_matches_decrypt_after_encrypt() {
        let spec = toy_spec();
        let (kr, k, m) = (w("120"), w("021"), w("2110"));
        let r = purity_probe(&spec, &kr, &k, &m, &OrbitOptions::with_max_steps(1000)).unwrap();
        let mut x = m.clone();
        let mut n = 0;
        loop {
            x = spec.decrypt(&kr, &spec.encrypt(&k, &x).unwrap()).unwrap();
            n += 1;
            if x == m {
                break;
            }
        }
        assert_eq!(r.length, Some(n));
    }

    #[test]
    fn injected_closure_reference_lengths() {
        let r = report_from_lengths(&[31, 37], BigUint::from(2u32).pow(8));
        assert_eq!(r.lcm, BigUint::from(1147u32));
        assert_eq!(r.verdict, Verdict::Refuted);
        let r = report_from_lengths(&[2526, 1739], BigUint::from(3u32).pow(8));
        assert_eq!(r.lcm, BigUint::from(4392714u32));
        assert_eq!(r.verdict, Verdict::Refuted);
        let r = report_from_lengths(&[1], BigUint::from(256u32));
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn truncated_probe_keeps_verdict_inconclusive() {
        let sw = swap_spec();
        let r = closure_refute(
            &sw,
            &[(w("00"), w("1201")), (w("00"), w("1202"))],
            &OrbitOptions::with_max_steps(1),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.probes.iter().all(|p| p.truncated));
    }

    #[test]
    fn lcm_never_decreases_when_adding_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut lengths = Vec::new();
        let mut last = BigUint::one();
        for _ in 0..40 {
            lengths.push(rng.gen_range(1..10_000u64));
            let l = lcm_of(lengths.iter().copied());
            assert!(l >= last && (&l % &last).is_zero());
            last = l;
        }
    }

    #[test]
    fn gen_word_text_form() {
        let gw: GenWord = "0, ~1,2".parse().unwrap();
        assert_eq!(gw.letters().len(), 3);
        assert!(gw.letters()[1].inverse);
        assert_eq!(gw.to_string(), "0,~1,2");
        assert!("0,x".parse::<GenWord>().is_err());
        assert_eq!("".parse::<GenWord>().unwrap(), GenWord::default());
    }

    #[test]
    fn subgroup_bound_on_identity_generator() {
        let id = identity_spec();
        let r = subgroup_lower_bound(
            &id,
            &[w("11")],
            &[(GenWord::single(0), w("0121"))],
            &OrbitOptions::with_max_steps(10),
        )
        .unwrap();
        assert_eq!(r.bound, BigUint::one());
    }

    #[test]
    fn subgroup_reference_lcm_against_49_factorial() {
        let reference = [
            134282729u64,
            216589023,
            201375970,
            62909599,
            201375970,
            134282729,
            18939453,
            68600442,
            134282729,
        ];
        // independent lcm by prime factorisation
        let mut exps = std::collections::BTreeMap::<u64, u32>::new();
        for &v in &reference {
            let mut v = v;
            let mut p = 2;
            while p * p <= v {
                let mut e = 0;
                while v % p == 0 {
                    v /= p;
                    e += 1;
                }
                if e > 0 {
                    let slot = exps.entry(p).or_default();
                    *slot = (*slot).max(e);
                }
                p += 1;
            }
            if v > 1 {
                exps.entry(v).or_insert(1);
            }
        }
        let by_primes = exps
            .iter()
            .fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e));
        let l = lcm_of(reference);
        assert_eq!(l, by_primes);
        assert_eq!(
            l.to_string(),
            "3799312039462736762894710432934157021187368510"
        );
        assert!(l < factorial(49));
    }

    #[test]
    fn brent_matches_naive_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..300u64);
            let map: Vec<u64> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let x0 = rng.gen_range(0..n);
            let BrentOutcome::Found { tail, cycle, .. } =
                brent(&x0, |&x| Ok(map[x as usize]), 10_000).unwrap()
            else {
                panic!("truncated")
            };
            let mut seen = std::collections::HashMap::new();
            let mut x = x0;
            let mut i = 0u64;
            while !seen.contains_key(&x) {
                seen.insert(x, i);
                x = map[x as usize];
                i += 1;
            }
            assert_eq!(tail, seen[&x]);
            assert_eq!(cycle, i - seen[&x]);
        }
    }

    #[test]
    fn walk_is_deterministic_and_replays() {
        let spec = toy_spec();
        let a = random_walk_closure(&spec, 17, 100_000).unwrap();
        let b = random_walk_closure(&spec, 17, 100_000).unwrap();
        assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
        let (tail, cycle) = (a.tail.unwrap(), a.cycle.unwrap());
        let step = |x: &Word| spec.encrypt(&walk_key(&spec, 17, x), x).unwrap();
        let mut x = Word::from_biguint(&a.start, spec.group(), 4).unwrap();
        for _ in 0..tail {
            x = step(&x);
        }
        let at_tail = x.clone();
        for _ in 0..cycle {
            x = step(&x);
        }
        assert_eq!(x, at_tail);
    }

    #[test]
    fn walk_on_identity_cipher() {
        let r = random_walk_closure(&identity_spec(), 4, 100).unwrap();
        assert_eq!((r.tail, r.cycle), (Some(0), Some(1)));
    }

    #[test]
    fn checkpoint_and_resume() {
        let spec = toy_spec();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("orbit.json");
        let (k, m) = (w("102"), w("0120"));
        let full = orbit_length(&spec, &k, &m, 1000).unwrap();
        let opts = OrbitOptions {
            checkpoint: Some(path.clone()),
            resume: true,
            ..OrbitOptions::with_max_steps(1000)
        };
        let first = orbit_length_with(&spec, &k, &m, &opts).unwrap();
        assert_eq!(first.length, full.length);
        // a finished checkpoint answers without iterating again
        let again = orbit_length_with(&spec, &k, &m, &opts).unwrap();
        assert_eq!(again.length, full.length);

        // a mid-orbit checkpoint resumes from its step count
        let n = full.length.unwrap();
        if n > 2 {
            let mut x = m.clone();
            for _ in 0..2 {
                x = spec.encrypt(&k, &x).unwrap();
            }
            let cp = Checkpoint {
                start: m.to_biguint(),
                keys: vec![k.to_biguint()],
                word: GenWord::single(0),
                current: x.to_biguint(),
                steps: 2,
                finished: None,
            };
            write_checkpoint(&path, &cp).unwrap();
            let resumed = orbit_length_with(&spec, &k, &m, &opts).unwrap();
            assert_eq!(resumed.length, Some(n));
        }
        let other = orbit_length_with(&spec, &w("000"), &m, &opts);
        assert!(other.is_err());
    }

    #[test]
    fn report_json_uses_decimal_strings() {
        let r = report_from_lengths(&[31, 37], BigUint::from(256u32));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["lcm"], "1147");
        assert_eq!(v["threshold"], "256");
        assert_eq!(v["verdict"], "refuted");
        let back: ExperimentReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
