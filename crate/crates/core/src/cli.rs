//! Command-line front end. The `gdes` binary only forwards to [`run`].

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::cycling::{
    self, factorial, report_from_lengths, ExperimentReport, GenWord, OrbitOptions, OrbitResult,
    SubgroupReport, Verdict, DEFAULT_MAX_STEPS,
};
use crate::edes::{
    edes_spec, edes_trace, EXAMPLE_CIPHERTEXT, EXAMPLE_KEY, EXAMPLE_MESSAGE, EXAMPLE_SBOX_STEPS,
    EXAMPLE_TRACE,
};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::permnet::{CipherSpec, RoundFunction, RoundTable};
use crate::sbox::{expand_cipher, GroupEmbedding, SBox};
use crate::smallgroup::{self, census, enumerate_feistel_set, injective_tables, DEFAULT_ORDER_CAP};
use crate::specdoc::{load_spec, preset, small_des, spec_to_json};
use crate::word::Word;

/// Reference purity probe: message, encryption key,
/// decryption key, orbit length of the message under `T_d^-1 . T_e`.
pub const PURITY_REFERENCE: (u64, u64, u64, u64) = (67681038, 22933471, 1402043471, 12802413);

/// Reference orbit pairs and lcms of the closure experiment, per modulus.
pub const CLOSURE_REFERENCE: [(u32, u64, u64, u64); 5] = [
    (2, 31, 37, 1147),
    (3, 2526, 1739, 4392714),
    (5, 8350, 46728, 195089400),
    (7, 1377440, 3014559, 4152374148960),
    (11, 106572673, 19064231, 2031726056359463),
];

/// Reference orbit lengths of the small-subgroup experiment.
pub const SUBGROUP_REFERENCE_ORBITS: [u64; 9] = [
    134282729, 216589023, 201375970, 62909599, 201375970, 134282729, 18939453, 68600442,
    134282729,
];

#[derive(Parser, Debug)]
#[command(name = "gdes", version, about = "DES-like ciphers over finite abelian groups")]
struct Cli {
    /// Report format; encrypt/decrypt print a bare word unless a format is given.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for multi-probe experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    /// Cipher spec document (JSON).
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in spec name.
    #[arg(long)]
    preset: Option<String>,
}

impl SpecArgs {
    fn load(&self) -> Result<CipherSpec> {
        match (&self.spec, &self.preset) {
            (Some(p), _) => load_spec(p),
            (None, Some(name)) => preset(name),
            (None, None) => Err(usage("give --spec FILE or --preset NAME")),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct KeyArgs {
    /// Key as nit text.
    #[arg(long, conflicts_with = "key_int")]
    key: Option<String>,
    /// Key as an integer.
    #[arg(long)]
    key_int: Option<BigUint>,
}

#[derive(Args, Debug, Clone)]
struct MsgArgs {
    /// Message as nit text.
    #[arg(long, conflicts_with = "msg_int")]
    msg: Option<String>,
    /// Message as an integer.
    #[arg(long)]
    msg_int: Option<BigUint>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Progress sidecar file (multi-probe runs append `.N`).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from the checkpoint file if present.
    #[arg(long, requires = "checkpoint")]
    resume: bool,
}

impl RunArgs {
    fn options(&self) -> OrbitOptions {
        OrbitOptions {
            max_steps: self.max_steps,
            checkpoint: self.checkpoint.clone(),
            resume: self.resume,
            ..Default::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encrypt one block.
    Encrypt(CryptArgs),
    /// Decrypt one block.
    Decrypt(CryptArgs),
    /// Full intermediate-value transcript of one E-DES encryption.
    Trace {
        #[command(flatten)]
        key: KeyArgs,
        #[command(flatten)]
        input: InArgs,
    },
    /// Orbit length of a message under one encryption permutation.
    Orbit {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        key: KeyArgs,
        #[command(flatten)]
        msg: MsgArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Closure test with random probes.
    Closure {
        #[command(flatten)]
        spec: SpecArgs,
        /// Use the two-round 8-nit cipher over Z_n with random S-boxes.
        #[arg(long, conflicts_with_all = ["spec", "preset"])]
        small_des: Option<u32>,
        /// Seed for the random S-boxes of --small-des.
        #[arg(long, default_value_t = 0)]
        sbox_seed: u64,
        #[arg(long, default_value_t = 2)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compare against |G|^e instead of the key-space size.
        #[arg(long)]
        threshold_exp: Option<u32>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Purity probe(s): orbit under T_k followed by T_ref^-1.
    Purity {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        ref_key: Option<String>,
        #[arg(long)]
        ref_key_int: Option<BigUint>,
        #[command(flatten)]
        key: KeyArgs,
        #[command(flatten)]
        msg: MsgArgs,
        /// Number of random probes when no explicit keys are given.
        #[arg(long, default_value_t = 2)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Pseudorandom walk with key chosen from the previous ciphertext.
    Walk {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
        max_steps: u64,
    },
    /// Lower bound on the order of the group generated by some encryptions.
    Subgroup {
        #[command(flatten)]
        spec: SpecArgs,
        /// Generator keys as integers, comma separated.
        #[arg(long, value_delimiter = ',')]
        gen_keys: Vec<BigUint>,
        /// Number of random generators when --gen-keys is absent.
        #[arg(long, default_value_t = 9)]
        generators: usize,
        /// Explicit probe `WORD:MSG_INT`, e.g. `0,~1:67681038`; repeatable.
        #[arg(long = "probe")]
        probe: Vec<String>,
        /// Number of random single-generator probes when no --probe is given.
        #[arg(long, default_value_t = 9)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compare the bound with n!.
        #[arg(long)]
        factorial: Option<u32>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Parity of one encryption permutation over the whole message space.
    Sign {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        key: KeyArgs,
    },
    /// Brute-force closure/purity/identity census of small Feistel sets.
    Brute {
        /// Largest number of rounds to enumerate.
        #[arg(long, default_value_t = 3)]
        n_rounds: usize,
        /// JSON file: {"group":{"moduli":[..]},"t":1,"tables":[[..],..]};
        /// tables default to every bijection of G^t.
        #[arg(long)]
        tiny_spec: Option<PathBuf>,
        /// Cyclic group modulus when no --tiny-spec is given.
        #[arg(long, default_value_t = 2)]
        modulus: u32,
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
    /// Generate a random S-box.
    SboxGen {
        #[arg(long, value_delimiter = ',', default_value = "3")]
        moduli: Vec<u32>,
        #[arg(long, default_value_t = 2)]
        i: usize,
        #[arg(long, default_value_t = 3)]
        j: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Make every row a permutation of the outputs.
        #[arg(long)]
        row_surjective: bool,
    },
    /// Affinity and row-surjectivity audit of a spec's S-boxes.
    SboxAudit {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Expand a Z_n cipher to Z_m along x -> (m/n) x and print the new spec.
    SboxExpand {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        target_modulus: u32,
    },
    /// Check the worked example and reference lcm arithmetic.
    VerifyPaper,
    /// Print a spec document.
    Spec {
        #[command(flatten)]
        spec: SpecArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct InArgs {
    /// Input block as nit text.
    #[arg(long = "in", conflicts_with = "int")]
    text: Option<String>,
    /// Input block as an integer.
    #[arg(long)]
    int: Option<BigUint>,
}

#[derive(Args, Debug, Clone)]
struct CryptArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    key: KeyArgs,
    #[command(flatten)]
    input: InArgs,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Parse {
        position: 0,
        message: msg.into(),
    }
}

fn word_from(
    text: &Option<String>,
    int: &Option<BigUint>,
    spec: &CipherSpec,
    len: usize,
    what: &str,
) -> Result<Word> {
    match (text, int) {
        (Some(s), _) => Word::parse(s, spec.group(), len),
        (None, Some(v)) => Word::from_biguint(v, spec.group(), len),
        (None, None) => Err(usage(format!("missing {what}"))),
    }
}

fn random_word(rng: &mut ChaCha8Rng, g: &GroupSpec, len: usize) -> Word {
    Word::new(
        g.clone(),
        (0..len).map(|_| rng.gen_range(0..g.order() as u32)).collect(),
    )
    .expect("indices below the group order")
}

/// Outcome of a command: text to print and whether verification passed.
struct Outcome {
    text: String,
    ok: bool,
}

fn json_text<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data")
}

fn probe_rows(probes: &[OrbitResult]) -> Vec<String> {
    probes
        .iter()
        .map(|p| {
            let keys: Vec<String> = p.keys.iter().map(|k| k.to_string()).collect();
            format!(
                "{},{},\"{}\",{},{}",
                p.start,
                keys.join(" "),
                p.word,
                p.length.map_or(String::new(), |l| l.to_string()),
                p.truncated
            )
        })
        .collect()
}

fn experiment_csv(r: &ExperimentReport) -> String {
    let mut out = String::from("m,k,word,orb,truncated,lcm,threshold,verdict\n");
    for row in probe_rows(&r.probes) {
        out += &format!("{row},{},{},{}\n", r.lcm, r.threshold, r.verdict);
    }
    out
}

fn subgroup_csv(r: &SubgroupReport) -> String {
    let mut out = String::from("m,k,word,orb,truncated,bound,compare_to,exceeds\n");
    let cmp = r.compare_to.as_ref().map_or(String::new(), |c| c.to_string());
    let ex = r.exceeds.map_or(String::new(), |e| e.to_string());
    for row in probe_rows(&r.probes) {
        out += &format!("{row},{},{cmp},{ex}\n", r.bound);
    }
    out
}

/// Parses arguments, runs the command and writes the report to `out`.
/// Returns the process exit status: 0 success, 1 verification failure,
/// 2 usage or input error.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| execute(&cli)),
        Err(e) => Err(usage(format!("cannot start worker pool: {e}"))),
    };
    match result {
        Ok(o) => {
            let _ = writeln!(out, "{}", o.text.trim_end());
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let csv = cli.format == Some(Format::Csv);
    let done = |text: String| Ok(Outcome { text, ok: true });
    let no_csv = |name: &str| -> Result<Outcome> {
        Err(usage(format!("--format csv is not available for {name}")))
    };
    match &cli.command {
        Command::Encrypt(a) | Command::Decrypt(a) => {
            let spec = a.spec.load()?;
            let k = word_from(&a.key.key, &a.key.key_int, &spec, spec.key_length(), "--key")?;
            let x = word_from(&a.input.text, &a.input.int, &spec, spec.block_len(), "--in")?;
            let y = if matches!(cli.command, Command::Encrypt(_)) {
                spec.encrypt(&k, &x)?
            } else {
                spec.decrypt(&k, &x)?
            };
            match cli.format {
                None => done(y.to_string()),
                Some(Format::Json) => done(json_text(&json!({
                    "output": y.to_string(),
                    "int": y.to_biguint().to_string(),
                }))),
                Some(Format::Csv) => done(format!("output,int\n{},{}", y, y.to_biguint())),
            }
        }
        Command::Trace { key, input } => {
            if csv {
                return no_csv("trace");
            }
            let spec = edes_spec();
            let k = match (&key.key, &key.key_int) {
                (None, None) => Word::parse(EXAMPLE_KEY, spec.group(), spec.key_length())?,
                _ => word_from(&key.key, &key.key_int, &spec, spec.key_length(), "--key")?,
            };
            let m = match (&input.text, &input.int) {
                (None, None) => Word::parse(EXAMPLE_MESSAGE, spec.group(), spec.block_len())?,
                _ => word_from(&input.text, &input.int, &spec, spec.block_len(), "--in")?,
            };
            done(json_text(&edes_trace(&k, &m)?))
        }
        Command::Orbit {
            spec,
            key,
            msg,
            run,
        } => {
            let spec = spec.load()?;
            let k = word_from(&key.key, &key.key_int, &spec, spec.key_length(), "--key")?;
            let m = word_from(&msg.msg, &msg.msg_int, &spec, spec.block_len(), "--msg")?;
            let r = cycling::orbit_length_with(&spec, &k, &m, &run.options())?;
            if csv {
                return done(format!(
                    "m,k,word,orb,truncated\n{}",
                    probe_rows(std::slice::from_ref(&r))[0]
                ));
            }
            done(json_text(&r))
        }
        Command::Closure {
            spec,
            small_des: modulus,
            sbox_seed,
            probes,
            seed,
            threshold_exp,
            run,
        } => {
            let spec = match modulus {
                Some(n) => small_des(*n, *sbox_seed)?,
                None => spec.load()?,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pairs: Vec<(Word, Word)> = (0..*probes)
                .map(|_| {
                    let k = random_word(&mut rng, spec.group(), spec.key_length());
                    let m = random_word(&mut rng, spec.group(), spec.block_len());
                    (k, m)
                })
                .collect();
            let mut r = cycling::closure_refute(&spec, &pairs, &run.options())?;
            r.seed = Some(*seed);
            let key_space = spec.key_space();
            if let Some(e) = threshold_exp {
                let lengths: Vec<u64> = r.probes.iter().filter_map(|p| p.length).collect();
                let mut alt = report_from_lengths(&lengths, BigUint::from(spec.group().order()).pow(*e));
                alt.probes = r.probes.clone();
                if r.probes.iter().any(|p| p.truncated) {
                    alt.verdict = Verdict::Inconclusive;
                }
                alt.seed = r.seed;
                r = alt;
            }
            if csv {
                return done(experiment_csv(&r));
            }
            let mut v = serde_json::to_value(&r).expect("plain data");
            v["group"] = json!(spec.group().to_string());
            v["key_space"] = json!(key_space.to_string());
            v["lcm_exceeds_key_space"] = json!(r.lcm > key_space);
            if modulus.is_some() {
                v["sbox_seed"] = json!(sbox_seed);
            }
            done(json_text(&v))
        }
        Command::Purity {
            spec,
            ref_key,
            ref_key_int,
            key,
            msg,
            probes,
            seed,
            run,
        } => {
            let is_edes = spec.preset.as_deref() == Some("edes");
            let spec = spec.load()?;
            let explicit = ref_key.is_some() || ref_key_int.is_some();
            let triples = if explicit {
                let kr = word_from(ref_key, ref_key_int, &spec, spec.key_length(), "--ref-key")?;
                let k = word_from(&key.key, &key.key_int, &spec, spec.key_length(), "--key")?;
                let m = word_from(&msg.msg, &msg.msg_int, &spec, spec.block_len(), "--msg")?;
                vec![(kr, k, m)]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*probes)
                    .map(|_| {
                        let kr = random_word(&mut rng, spec.group(), spec.key_length());
                        let k = random_word(&mut rng, spec.group(), spec.key_length());
                        let m = random_word(&mut rng, spec.group(), spec.block_len());
                        (kr, k, m)
                    })
                    .collect()
            };
            let (tm, te, td, torb) = PURITY_REFERENCE;
            let reference = (is_edes && explicit)
                .then(|| &triples[0])
                .filter(|(kr, k, m)| {
                    (kr.to_u64(), k.to_u64(), m.to_u64()) == (Some(td), Some(te), Some(tm))
                })
                .map(|_| torb);
            let mut r = cycling::purity_refute(&spec, &triples, &run.options())?;
            if !explicit {
                r.seed = Some(*seed);
            }
            if csv {
                return done(experiment_csv(&r));
            }
            let mut v = serde_json::to_value(&r).expect("plain data");
            if let Some(orb) = reference {
                v["reference_orbit"] = json!(orb);
                v["matches_reference"] = json!(r.probes[0].length == Some(orb));
            }
            done(json_text(&v))
        }
        Command::Walk {
            spec,
            seed,
            max_steps,
        } => {
            let spec = spec.load()?;
            let r = cycling::random_walk_closure(&spec, *seed, *max_steps)?;
            if csv {
                let opt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
                return done(format!(
                    "seed,start,tail,cycle,evaluations,estimate,key_space\n{},{},{},{},{},{},{}",
                    r.seed,
                    r.start,
                    opt(r.tail),
                    opt(r.cycle),
                    r.evaluations,
                    r.estimate.as_ref().map_or(String::new(), |e| e.to_string()),
                    r.key_space
                ));
            }
            done(json_text(&r))
        }
        Command::Subgroup {
            spec,
            gen_keys,
            generators,
            probe,
            probes,
            seed,
            factorial: fact,
            run,
        } => {
            let spec = spec.load()?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let keys: Vec<Word> = if gen_keys.is_empty() {
                (0..*generators)
                    .map(|_| random_word(&mut rng, spec.group(), spec.key_length()))
                    .collect()
            } else {
                gen_keys
                    .iter()
                    .map(|v| Word::from_biguint(v, spec.group(), spec.key_length()))
                    .collect::<Result<_>>()?
            };
            if keys.is_empty() {
                return Err(usage("at least one generator is needed"));
            }
            let plan: Vec<(GenWord, Word)> = if probe.is_empty() {
                // Cycle through the generators so each gets its own probe first.
                (0..*probes)
                    .map(|i| {
                        let g = i % keys.len();
                        (GenWord::single(g), random_word(&mut rng, spec.group(), spec.block_len()))
                    })
                    .collect()
            } else {
                probe
                    .iter()
                    .map(|p| {
                        let (w, m) = p
                            .rsplit_once(':')
                            .ok_or_else(|| usage(format!("probe '{p}' is not WORD:MSG_INT")))?;
                        let m: BigUint = m
                            .parse()
                            .map_err(|_| usage(format!("'{m}' is not an integer")))?;
                        Ok((w.parse()?, Word::from_biguint(&m, spec.group(), spec.block_len())?))
                    })
                    .collect::<Result<_>>()?
            };
            let mut r = cycling::subgroup_lower_bound(&spec, &keys, &plan, &run.options())?;
            if let Some(n) = fact {
                r = r.compared_with(factorial(*n));
            }
            if csv {
                return done(subgroup_csv(&r));
            }
            let mut v = serde_json::to_value(&r).expect("plain data");
            v["seed"] = json!(seed);
            done(json_text(&v))
        }
        Command::Sign { spec, key } => {
            let spec = spec.load()?;
            let k = word_from(&key.key, &key.key_int, &spec, spec.key_length(), "--key")?;
            let r = smallgroup::streaming_sign(&spec, &k)?;
            if csv {
                return done(format!(
                    "key,domain,cycles,sign\n{},{},{},{}",
                    r.key, r.domain, r.cycles, r.sign
                ));
            }
            done(json_text(&r))
        }
        Command::Brute {
            n_rounds,
            tiny_spec,
            modulus,
            t,
        } => {
            if csv {
                return no_csv("brute");
            }
            let (group, t, tables) = match tiny_spec {
                Some(path) => load_tiny(path)?,
                None => {
                    let g = GroupSpec::cyclic(*modulus)?;
                    let tables = injective_tables(&g, *t)?;
                    (g, *t, tables)
                }
            };
            let mut levels = Vec::new();
            for n in 1..=*n_rounds {
                let psi = enumerate_feistel_set(&group, t, &tables, n, false)?;
                let with_swap = enumerate_feistel_set(&group, t, &tables, n, true)?;
                levels.push(json!({
                    "rounds": n,
                    "feistel": census(&psi, DEFAULT_ORDER_CAP),
                    "with_swap": census(&with_swap, DEFAULT_ORDER_CAP),
                }));
            }
            done(json_text(&json!({
                "group": group.to_string(),
                "t": t,
                "tables": tables.len(),
                "levels": levels,
            })))
        }
        Command::SboxGen {
            moduli,
            i,
            j,
            seed,
            row_surjective,
        } => {
            if csv {
                return no_csv("sbox-gen");
            }
            let g = GroupSpec::new(moduli.clone())?;
            let b = SBox::generate(g.clone(), *i, *j, *seed, *row_surjective)?;
            done(json_text(&json!({
                "group": g,
                "i": i,
                "j": j,
                "seed": seed,
                "table": b.table(),
                "affine": b.audit().affine,
            })))
        }
        Command::SboxAudit { spec } => {
            if csv {
                return no_csv("sbox-audit");
            }
            let spec = spec.load()?;
            let RoundFunction::SBox(rf) = spec.round_fn() else {
                return Err(usage("spec has no S-boxes"));
            };
            let audits: Vec<_> = rf.boxes().iter().map(SBox::audit).collect();
            done(json_text(&audits))
        }
        Command::SboxExpand {
            spec,
            target_modulus,
        } => {
            if csv {
                return no_csv("sbox-expand");
            }
            let spec = spec.load()?;
            if !spec.group().is_single_factor() {
                return Err(usage("sbox-expand handles cyclic groups only"));
            }
            let n = spec.group().moduli()[0];
            if *target_modulus % n != 0 {
                return Err(usage(format!("Z{n} does not embed in Z{target_modulus}")));
            }
            let emb = GroupEmbedding::scaled_cyclic(n, target_modulus / n)?;
            done(spec_to_json(&expand_cipher(&spec, &emb)?))
        }
        Command::VerifyPaper => {
            let checks = verify_paper();
            let ok = checks.iter().all(|c| c.pass);
            if csv {
                let mut text = String::from("check,pass,detail\n");
                for c in &checks {
                    text += &format!("{},{},{}\n", c.name, c.pass, c.detail.replace(',', ";"));
                }
                return Ok(Outcome { text, ok });
            }
            let text = if cli.format == Some(Format::Json) {
                json_text(&checks)
            } else {
                checks
                    .iter()
                    .map(|c| {
                        format!(
                            "{} {}: {}",
                            if c.pass { "PASS" } else { "FAIL" },
                            c.name,
                            c.detail
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Outcome { text, ok })
        }
        Command::Spec { spec } => {
            if csv {
                return no_csv("spec");
            }
            done(spec_to_json(&spec.load()?))
        }
    }
}

fn load_tiny(path: &PathBuf) -> Result<(GroupSpec, usize, Vec<RoundTable>)> {
    #[derive(serde::Deserialize)]
    struct Tiny {
        group: GroupSpec,
        t: usize,
        #[serde(default)]
        tables: Option<Vec<Vec<u32>>>,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let tiny: Tiny = serde_json::from_str(&text).map_err(|e| Error::spec("", e.to_string()))?;
    let tables = match tiny.tables {
        Some(ts) => ts
            .into_iter()
            .enumerate()
            .map(|(i, img)| {
                RoundTable::new(tiny.group.clone(), tiny.t, img)
                    .map_err(|e| Error::spec(format!("/tables/{i}"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?,
        None => injective_tables(&tiny.group, tiny.t)?,
    };
    Ok((tiny.group, tiny.t, tables))
}

/// One line of the `verify-paper` report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Golden checks against the worked example and reference lcm arithmetic.
pub fn verify_paper() -> Vec<Check> {
    let mut out = Vec::new();
    let mut check = |name: &str, pass: bool, detail: String| {
        out.push(Check {
            name: name.to_string(),
            pass,
            detail,
        })
    };

    let spec = edes_spec();
    let g = spec.group().clone();
    let k = Word::parse(EXAMPLE_KEY, &g, spec.key_length()).expect("example key");
    let m = Word::parse(EXAMPLE_MESSAGE, &g, spec.block_len()).expect("example message");
    match edes_trace(&k, &m) {
        Ok(tr) => {
            for (field, expected) in EXAMPLE_TRACE {
                let got = tr.field(field).unwrap_or_default();
                check(
                    &format!("trace {field}"),
                    got == *expected,
                    format!("got {got}, expected {expected}"),
                );
            }
            for (round, (steps, reference)) in [&tr.round1_sboxes, &tr.round2_sboxes]
                .into_iter()
                .zip(EXAMPLE_SBOX_STEPS)
                .enumerate()
            {
                for (b, (s, (row, col, entry, output))) in steps.iter().zip(reference).enumerate() {
                    let got = (s.row, s.col, s.entry, s.output.as_str());
                    check(
                        &format!("round {} S-box {}", round + 1, b + 1),
                        got == (row, col, entry, output),
                        format!(
                            "{} -> row {}, column {}, entry {} -> {}",
                            s.input, s.row, s.col, s.entry, s.output
                        ),
                    );
                }
            }
        }
        Err(e) => check("trace", false, e.to_string()),
    }

    let c = spec.encrypt(&k, &m).map(|c| c.to_string());
    check(
        "ciphertext",
        c.as_deref() == Ok(EXAMPLE_CIPHERTEXT),
        format!("{c:?}"),
    );
    let back = Word::parse(EXAMPLE_CIPHERTEXT, &g, spec.block_len())
        .and_then(|c| spec.decrypt(&k, &c))
        .map(|w| w.to_string());
    check(
        "decryption",
        back.as_deref() == Ok(EXAMPLE_MESSAGE),
        format!("{back:?}"),
    );

    let s2 = &crate::edes::sboxes()[1];
    let step = Word::parse("22010", &g, 5).and_then(|x| s2.lookup_step(&x));
    check(
        "S-box 2 lookup of 22010",
        matches!(&step, Ok(s) if (s.row, s.col, s.entry, s.output.as_str()) == (6, 19, 11, "102")),
        format!("{step:?}"),
    );

    for (n, a, b, lcm) in CLOSURE_REFERENCE {
        let r = report_from_lengths(&[a, b], BigUint::from(n).pow(8));
        check(
            &format!("closure lcm over Z{n}"),
            r.lcm == BigUint::from(lcm) && r.verdict == Verdict::Refuted,
            format!("lcm({a}, {b}) = {} vs {n}^8 = {}", r.lcm, r.threshold),
        );
    }
    out
}

/// Lcm of the reference small-subgroup orbit lengths and its comparison
/// with `49!`.
pub fn subgroup_reference_comparison() -> (BigUint, BigUint) {
    (cycling::lcm_of(SUBGROUP_REFERENCE_ORBITS), factorial(49))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("gdes").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn encrypt_worked_example() {
        let (code, out, _) = run_capture(&[
            "encrypt",
            "--preset",
            "edes",
            "--key",
            EXAMPLE_KEY,
            "--in",
            EXAMPLE_MESSAGE,
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), EXAMPLE_CIPHERTEXT);
        let (code, out, _) = run_capture(&[
            "decrypt",
            "--preset",
            "edes",
            "--key",
            EXAMPLE_KEY,
            "--in",
            EXAMPLE_CIPHERTEXT,
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), EXAMPLE_MESSAGE);
    }

    #[test]
    fn verify_paper_passes() {
        let (code, out, _) = run_capture(&["verify-paper"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.lines().all(|l| l.starts_with("PASS")));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["encrypt", "--preset", "edes"]).0, 2);
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        let (code, _, err) = run_capture(&[
            "encrypt", "--preset", "edes", "--key", "013", "--in", EXAMPLE_MESSAGE,
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("position 3"));
    }

    #[test]
    fn truncated_orbit_is_inconclusive_not_an_error() {
        let (code, out, _) = run_capture(&[
            "closure",
            "--preset",
            "edes",
            "--probes",
            "2",
            "--max-steps",
            "5",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "inconclusive");
        assert_eq!(v["seed"], 0);
    }

    #[test]
    fn subgroup_reference_lcm_falls_short_of_49_factorial() {
        let (lcm, f49) = subgroup_reference_comparison();
        assert!(lcm < f49);
    }
}
