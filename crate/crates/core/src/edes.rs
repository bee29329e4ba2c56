//! E-DES: the two-round cipher over `Z_3` with 18-nit blocks and 20-nit keys.
//!
//! The constants below are data for the generic pipeline in
//! [`crate::permnet`]; nothing here special-cases the arithmetic.

use serde::Serialize;

use crate::error::Result;
use crate::group::GroupSpec;
use crate::permnet::{CipherParams, CipherSpec, RoundFunction, WireMap};
use crate::sbox::{SBox, SBoxRoundSpec, SBoxStep};
use crate::word::Word;

pub const BLOCK_LEN: usize = 18;
pub const KEY_LEN: usize = 20;

/// Initial permutation, 1-based gather table.
pub const P: [usize; 18] = [11, 12, 2, 13, 9, 1, 5, 8, 16, 17, 4, 18, 15, 7, 10, 3, 6, 14];
/// Final permutation as printed; equal to the inverse of [`P`].
pub const P_INV: [usize; 18] = [6, 3, 16, 11, 7, 17, 14, 8, 5, 15, 1, 2, 4, 18, 13, 9, 10, 12];
/// Expansion of the 9-nit right half to 15 nits.
pub const E: [usize; 15] = [9, 1, 2, 3, 4, 5, 6, 3, 4, 5, 6, 7, 8, 9, 1];
pub const CP1: [usize; 15] = [16, 17, 12, 15, 20, 10, 11, 3, 7, 19, 13, 9, 8, 1, 18];
pub const CP2: [usize; 15] = [6, 7, 2, 20, 4, 3, 9, 8, 18, 10, 15, 14, 11, 12, 5];

// Verbatim, including the rows that repeat values.
pub const SBOX_1: [[u32; 27]; 9] = [
    [24, 25, 6, 16, 3, 7, 1, 18, 26, 5, 10, 9, 19, 23, 13, 12, 15, 8, 20, 17, 2, 11, 0, 21, 14, 4, 22],
    [17, 18, 26, 9, 23, 0, 21, 11, 19, 25, 3, 2, 12, 16, 6, 5, 8, 1, 13, 10, 22, 4, 20, 14, 7, 24, 15],
    [16, 17, 25, 8, 22, 26, 20, 10, 18, 24, 2, 1, 11, 15, 5, 4, 7, 0, 12, 9, 21, 3, 19, 13, 6, 23, 14],
    [10, 11, 19, 2, 16, 20, 14, 4, 12, 18, 23, 22, 5, 9, 26, 25, 1, 21, 6, 3, 15, 24, 13, 7, 0, 17, 8],
    [21, 22, 3, 23, 0, 4, 25, 15, 23, 2, 7, 6, 16, 20, 10, 9, 12, 5, 17, 14, 26, 8, 24, 18, 11, 1, 19],
    [26, 0, 8, 18, 5, 9, 3, 20, 1, 7, 12, 11, 21, 25, 15, 14, 17, 10, 22, 19, 4, 13, 2, 23, 16, 6, 24],
    [3, 4, 12, 22, 9, 13, 7, 24, 5, 11, 16, 15, 25, 2, 19, 18, 21, 14, 26, 23, 8, 17, 6, 0, 20, 10, 1],
    [5, 6, 14, 24, 11, 15, 9, 26, 7, 13, 18, 17, 0, 4, 21, 20, 23, 16, 1, 25, 10, 19, 8, 2, 22, 12, 3],
    [11, 12, 20, 3, 17, 21, 15, 5, 13, 19, 24, 23, 6, 10, 0, 26, 2, 22, 7, 4, 16, 25, 14, 8, 1, 18, 9],
];
pub const SBOX_2: [[u32; 27]; 9] = [
    [1, 2, 10, 20, 7, 11, 5, 22, 3, 9, 14, 13, 23, 0, 17, 16, 19, 12, 24, 21, 6, 15, 4, 25, 18, 8, 26],
    [25, 26, 7, 17, 22, 8, 2, 19, 0, 6, 11, 10, 20, 24, 14, 13, 16, 9, 21, 18, 3, 12, 1, 22, 15, 5, 23],
    [14, 15, 23, 6, 20, 24, 18, 8, 16, 22, 0, 26, 9, 13, 3, 2, 5, 25, 10, 7, 19, 1, 17, 11, 4, 21, 12],
    [9, 10, 18, 1, 15, 19, 13, 3, 11, 17, 22, 21, 4, 8, 25, 24, 0, 20, 5, 2, 14, 23, 12, 6, 26, 16, 7],
    [23, 24, 5, 15, 2, 6, 0, 17, 25, 4, 9, 8, 18, 22, 12, 11, 14, 7, 19, 16, 1, 10, 26, 20, 13, 3, 21],
    [2, 3, 11, 21, 8, 12, 6, 23, 4, 10, 15, 14, 24, 1, 18, 17, 20, 13, 25, 22, 7, 16, 5, 26, 19, 9, 0],
    [18, 19, 0, 10, 24, 1, 22, 12, 20, 26, 4, 3, 13, 17, 7, 6, 9, 2, 14, 11, 23, 5, 21, 15, 8, 25, 16],
    [15, 16, 24, 7, 21, 25, 19, 9, 17, 23, 1, 0, 10, 14, 4, 3, 6, 9, 13, 8, 20, 2, 18, 12, 5, 22, 13],
    [2, 23, 4, 14, 1, 5, 26, 16, 24, 3, 8, 7, 17, 21, 11, 10, 13, 16, 18, 15, 0, 9, 25, 19, 12, 2, 20],
];
pub const SBOX_3: [[u32; 27]; 9] = [
    [4, 5, 13, 23, 10, 14, 8, 25, 6, 12, 17, 16, 26, 3, 20, 19, 22, 15, 0, 24, 9, 18, 7, 1, 21, 11, 2],
    [6, 7, 15, 25, 12, 16, 10, 0, 8, 14, 19, 18, 1, 5, 22, 21, 24, 17, 2, 26, 11, 20, 9, 3, 23, 13, 4],
    [7, 8, 16, 26, 13, 17, 11, 1, 9, 15, 20, 19, 2, 6, 23, 22, 25, 18, 3, 0, 12, 21, 10, 4, 24, 14, 5],
    [8, 9, 17, 0, 14, 18, 12, 2, 10, 16, 21, 20, 3, 7, 24, 23, 26, 19, 4, 1, 13, 22, 11, 5, 25, 15, 6],
    [13, 14, 22, 5, 19, 23, 17, 7, 15, 21, 26, 25, 8, 12, 2, 1, 4, 24, 9, 6, 18, 0, 16, 10, 3, 20, 11],
    [12, 13, 21, 4, 18, 22, 16, 6, 14, 20, 25, 24, 7, 11, 1, 0, 3, 23, 8, 5, 17, 26, 15, 9, 2, 19, 10],
    [19, 20, 1, 11, 25, 2, 23, 13, 21, 0, 5, 4, 14, 18, 10, 7, 10, 3, 15, 12, 24, 6, 22, 16, 9, 26, 17],
    [0, 1, 9, 19, 6, 10, 4, 21, 2, 8, 13, 12, 22, 26, 16, 15, 18, 11, 23, 20, 5, 14, 3, 24, 17, 7, 25],
    [20, 21, 2, 12, 26, 3, 24, 14, 22, 1, 6, 5, 15, 19, 9, 8, 11, 4, 16, 13, 25, 7, 23, 17, 10, 0, 18],
];

/// Key, plaintext and ciphertext of the worked example.
pub const EXAMPLE_KEY: &str = "11012012122012012110";
pub const EXAMPLE_MESSAGE: &str = "012012012012012012";
pub const EXAMPLE_CIPHERTEXT: &str = "210212002210210000";

/// Expected intermediate values of the worked example, by trace field.
pub const EXAMPLE_TRACE: &[(&str, &str)] = &[
    ("m1", "121020110102200221"),
    ("m2", "102200221"),
    ("m3", "110220022002211"),
    ("k1", "120002201111211"),
    ("m4", "200222220110122"),
    ("m5", "202012211"),
    ("m6", "121020110"),
    ("m7", "020002021"),
    ("e1", "102200221020002021"),
    ("e2", "020002021"),
    ("e3", "102000200020210"),
    ("k2", "011010121202202"),
    ("e4", "110010021222112"),
    ("e5", "002022212"),
    ("e6", "102200221"),
    ("e7", "101222100"),
    ("e8", "101222100020002021"),
    ("c", "210212002210210000"),
];

/// Expected S-box lookups of the worked example as (row, column, entry,
/// output) for boxes 1 to 3, round 1 then round 2.
pub const EXAMPLE_SBOX_STEPS: [[(usize, usize, u32, &str); 3]; 2] = [
    [(8, 2, 20, "202"), (7, 24, 5, "012"), (5, 5, 22, "211")],
    [(4, 9, 2, "002"), (2, 7, 8, "022"), (8, 22, 23, "212")],
];

pub fn sboxes() -> [SBox; 3] {
    let z3 = GroupSpec::cyclic(3).expect("Z3");
    let build = |rows: &[[u32; 27]; 9]| {
        SBox::new(z3.clone(), 2, 3, rows.concat()).expect("9x27 table with entries < 27")
    };
    [build(&SBOX_1), build(&SBOX_2), build(&SBOX_3)]
}

pub fn edes_spec() -> CipherSpec {
    let z3 = GroupSpec::cyclic(3).expect("Z3");
    let wire = |n: usize, t: &[usize]| WireMap::from_one_based(n, t).expect("valid wiring");
    let round_fn = SBoxRoundSpec::new(sboxes().to_vec(), wire(9, &E)).expect("E-DES round spec");
    CipherSpec::new(CipherParams {
        group: z3,
        t: 9,
        rounds: 2,
        initial_perm: wire(BLOCK_LEN, &P),
        key_length: KEY_LEN,
        key_schedule: vec![wire(KEY_LEN, &CP1), wire(KEY_LEN, &CP2)],
        round_fn: RoundFunction::SBox(round_fn),
        final_swap: true,
    })
    .expect("E-DES spec is valid")
}

pub fn edes_encrypt(key: &Word, m: &Word) -> Result<Word> {
    edes_spec().encrypt(key, m)
}

pub fn edes_decrypt(key: &Word, c: &Word) -> Result<Word> {
    edes_spec().decrypt(key, c)
}

/// Every intermediate value of one E-DES encryption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdesTrace {
    pub m: String,
    pub k: String,
    pub m1: String,
    pub m2: String,
    pub m3: String,
    pub k1: String,
    pub m4: String,
    pub round1_sboxes: Vec<SBoxStep>,
    pub m5: String,
    pub m6: String,
    pub m7: String,
    pub e1: String,
    pub e2: String,
    pub e3: String,
    pub k2: String,
    pub e4: String,
    pub round2_sboxes: Vec<SBoxStep>,
    pub e5: String,
    pub e6: String,
    pub e7: String,
    pub e8: String,
    pub c: String,
}

impl EdesTrace {
    /// Looks up a word-valued field by name.
    pub fn field(&self, name: &str) -> Option<&str> {
        let v = match name {
            "m" => &self.m,
            "k" => &self.k,
            "m1" => &self.m1,
            "m2" => &self.m2,
            "m3" => &self.m3,
            "k1" => &self.k1,
            "m4" => &self.m4,
            "m5" => &self.m5,
            "m6" => &self.m6,
            "m7" => &self.m7,
            "e1" => &self.e1,
            "e2" => &self.e2,
            "e3" => &self.e3,
            "k2" => &self.k2,
            "e4" => &self.e4,
            "e5" => &self.e5,
            "e6" => &self.e6,
            "e7" => &self.e7,
            "e8" => &self.e8,
            "c" => &self.c,
            _ => return None,
        };
        Some(v)
    }
}

pub fn edes_trace(k: &Word, m: &Word) -> Result<EdesTrace> {
    let spec = edes_spec();
    spec.check_block(m)?;
    spec.check_key(k)?;
    let RoundFunction::SBox(rf) = spec.round_fn() else {
        unreachable!("E-DES uses S-boxes")
    };
    let schedule = spec.key_schedule();

    let m1 = spec.initial_perm().apply(m)?;
    let (m6, m2) = m1.split_halves()?;
    let m3 = rf.expansion().apply(&m2)?;
    let k1 = schedule[0].apply(k)?;
    let m4 = m3.add(&k1)?;
    let (round1_sboxes, m5) = rf.eval_steps(&m2, &k1)?;
    let m7 = m6.add(&m5)?;
    let e1 = m2.concat(&m7)?;

    let (e6, e2) = e1.split_halves()?;
    let e3 = rf.expansion().apply(&e2)?;
    let k2 = schedule[1].apply(k)?;
    let e4 = e3.add(&k2)?;
    let (round2_sboxes, e5) = rf.eval_steps(&e2, &k2)?;
    let e7 = e6.add(&e5)?;
    let e8 = e7.concat(&e2)?;
    let c = spec.final_perm().apply(&e8)?;

    let s = |w: &Word| w.to_string();
    Ok(EdesTrace {
        m: s(m),
        k: s(k),
        m1: s(&m1),
        m2: s(&m2),
        m3: s(&m3),
        k1: s(&k1),
        m4: s(&m4),
        round1_sboxes,
        m5: s(&m5),
        m6: s(&m6),
        m7: s(&m7),
        e1: s(&e1),
        e2: s(&e2),
        e3: s(&e3),
        k2: s(&k2),
        e4: s(&e4),
        round2_sboxes,
        e5: s(&e5),
        e6: s(&e6),
        e7: s(&e7),
        e8: s(&e8),
        c: s(&c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, &GroupSpec::cyclic(3).unwrap(), s.len()).unwrap()
    }

    #[test]
    fn spec_shape() {
        let spec = edes_spec();
        assert_eq!(spec.t(), 9);
        assert_eq!(spec.subkey_len(), 15);
        assert_eq!(spec.message_space(), Some(387_420_489));
        assert_eq!(spec.final_perm().one_based(), P_INV.to_vec());
    }

    #[test]
    fn sbox_examples() {
        let [s1, s2, s3] = sboxes();
        let step = s2.lookup_step(&w("22010")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (6, 19, 11, "102"));
        let step = s1.lookup_step(&w("20022")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (8, 2, 20, "202"));
        let step = s2.lookup_step(&w("22201")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (7, 24, 5, "012"));
        // written as "19" in the example text, but the table cell and the output agree on 22
        let step = s3.lookup_step(&w("10122")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (5, 5, 22, "211"));
        let step = s1.lookup_step(&w("11001")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (4, 9, 2, "002"));
        let step = s2.lookup_step(&w("00212")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (2, 7, 8, "022"));
        let step = s3.lookup_step(&w("22112")).unwrap();
        assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (8, 22, 23, "212"));
    }

    #[test]
    fn round_function_examples() {
        let spec = edes_spec();
        let RoundFunction::SBox(rf) = spec.round_fn() else { panic!() };
        assert_eq!(rf.eval(&w("102200221"), &w("120002201111211")).unwrap(), w("202012211"));
        assert_eq!(rf.eval(&w("020002021"), &w("011010121202202")).unwrap(), w("002022212"));
    }

    #[test]
    fn encrypt_decrypt_worked_example() {
        let k = w("11012012122012012110");
        let m = w("012012012012012012");
        let c = edes_encrypt(&k, &m).unwrap();
        assert_eq!(c, w("210212002210210000"));
        assert_eq!(edes_decrypt(&k, &c).unwrap(), m);
    }

    #[test]
    fn golden_trace() {
        let tr = edes_trace(&w(EXAMPLE_KEY), &w(EXAMPLE_MESSAGE)).unwrap();
        for (name, expected) in EXAMPLE_TRACE {
            assert_eq!(tr.field(name), Some(*expected), "field {name}");
        }
        for (steps, expected) in [&tr.round1_sboxes, &tr.round2_sboxes]
            .into_iter()
            .zip(EXAMPLE_SBOX_STEPS)
        {
            for (step, (row, col, entry, out)) in steps.iter().zip(expected) {
                assert_eq!((step.row, step.col, step.entry, step.output.as_str()), (row, col, entry, out));
            }
        }
    }

    /// Checks the algebraic relations between trace fields.
    fn assert_consistent(tr: &EdesTrace) {
        let f = |n: &str| w(tr.field(n).unwrap());
        assert_eq!(f("m4"), f("m3").add(&f("k1")).unwrap());
        assert_eq!(f("m7"), f("m6").add(&f("m5")).unwrap());
        assert_eq!(f("e1"), f("m2").concat(&f("m7")).unwrap());
        assert_eq!(f("e4"), f("e3").add(&f("k2")).unwrap());
        assert_eq!(f("e7"), f("e6").add(&f("e5")).unwrap());
        assert_eq!(f("e8"), f("e7").concat(&f("e2")).unwrap());
        for (steps, input, output) in [
            (&tr.round1_sboxes, f("m4"), f("m5")),
            (&tr.round2_sboxes, f("e4"), f("e5")),
        ] {
            for (b, step) in steps.iter().enumerate() {
                assert_eq!(step.input, input.slice(5 * b, 5 * b + 5).to_string());
                assert_eq!(step.output, output.slice(3 * b, 3 * b + 3).to_string());
            }
        }
        assert_eq!(f("c"), edes_encrypt(&f("k"), &f("m")).unwrap());
    }

    #[test]
    fn zero_trace_is_consistent() {
        let tr = edes_trace(&w(&"0".repeat(20)), &w(&"0".repeat(18))).unwrap();
        assert_consistent(&tr);
        assert_consistent(&edes_trace(&w(EXAMPLE_KEY), &w(EXAMPLE_MESSAGE)).unwrap());
    }

    #[test]
    fn decrypt_inverts_sigma_on_round_one() {
        let spec = edes_spec();
        let RoundFunction::SBox(rf) = spec.round_fn() else { panic!() };
        let k1 = w("120002201111211");
        let f = crate::permnet::KeyedRound { function: spec.round_fn(), round: 0, subkey: &k1 };
        let (x, y) = crate::permnet::sigma_inv(&f, &w("102200221"), &w("020002021")).unwrap();
        assert_eq!((x, y), (w("121020110"), w("102200221")));
        assert_eq!(rf.n_boxes(), 3);
    }

    #[test]
    fn random_round_trips() {
        use rand::{Rng, SeedableRng};
        let spec = edes_spec();
        let z3 = spec.group().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut word = |n: usize| Word::new(z3.clone(), (0..n).map(|_| rng.gen_range(0..3)).collect()).unwrap();
        for _ in 0..2000 {
            let (k, m) = (word(KEY_LEN), word(BLOCK_LEN));
            let c = edes_encrypt(&k, &m).unwrap();
            assert_eq!(c, spec.encrypt(&k, &m).unwrap());
            assert_eq!(edes_decrypt(&k, &c).unwrap(), m);
        }
    }
}
