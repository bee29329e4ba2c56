//! Sign of an encryption permutation, computed by streaming cycle
//! decomposition and checked against the explicit permutation. With 4-nit
//! halves the half swap is even, so these small ciphers give even
//! permutations; E-DES (9-nit halves over Z_3) gives odd ones.
//!
//! cargo run --release --example parity

use gdes::smallgroup::{materialize, streaming_sign};
use gdes::specdoc::small_des;
use gdes::Word;
use num_bigint::BigUint;

fn main() -> gdes::Result<()> {
    for n in [2, 3, 5] {
        let spec = small_des(n, 0)?;
        for k in [0u64, 1, 12345] {
            let k = BigUint::from(k) % spec.key_space();
            let k = Word::from_biguint(&k, spec.group(), spec.key_length())?;
            let s = streaming_sign(&spec, &k)?;
            let p = materialize(&spec, &k)?;
            assert_eq!(s.sign, p.sign());
            println!("Z{n} key {}: {} cycles on {} states, sign {:+}", s.key, s.cycles, s.domain, s.sign);
        }
    }
    Ok(())
}
