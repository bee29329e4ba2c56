//! Encrypts the E-DES worked example and prints every intermediate value.
//!
//! cargo run --example edes_trace [KEY] [MESSAGE]

use gdes::edes::{edes_spec, edes_trace, EXAMPLE_KEY, EXAMPLE_MESSAGE};
use gdes::Word;

fn main() -> gdes::Result<()> {
    let mut args = std::env::args().skip(1);
    let key = args.next().unwrap_or_else(|| EXAMPLE_KEY.to_string());
    let msg = args.next().unwrap_or_else(|| EXAMPLE_MESSAGE.to_string());

    let spec = edes_spec();
    let k = Word::parse(&key, spec.group(), spec.key_length())?;
    let m = Word::parse(&msg, spec.group(), spec.block_len())?;
    let tr = edes_trace(&k, &m)?;

    for name in [
        "m1", "m2", "m3", "k1", "m4", "m5", "m6", "m7", "e1", "e2", "e3", "k2", "e4", "e5", "e6",
        "e7", "e8", "c",
    ] {
        println!("{name:>3} = {}", tr.field(name).unwrap_or("?"));
    }
    for (round, steps) in [&tr.round1_sboxes, &tr.round2_sboxes].into_iter().enumerate() {
        for (b, s) in steps.iter().enumerate() {
            println!(
                "round {} S{}: {} -> row {}, col {}, entry {} -> {}",
                round + 1,
                b + 1,
                s.input,
                s.row,
                s.col,
                s.entry,
                s.output
            );
        }
    }
    Ok(())
}
