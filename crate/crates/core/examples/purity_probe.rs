//! Purity probes: orbit lengths under T_ref^-1 . T_k. An lcm above the
//! key-space size means the cipher is not a coset of a group of that size.
//!
//! cargo run --release --example purity_probe

use gdes::cycling::{purity_probe, purity_refute, OrbitOptions};
use gdes::specdoc::small_des;
use gdes::Word;

fn main() -> gdes::Result<()> {
    let spec = small_des(5, 0)?;
    let g = spec.group().clone();
    let w = |v: u64, len| Word::from_u64(v, &g, len);
    let triples = vec![
        (w(1, 10)?, w(9_000_000, 10)?, w(17, 8)?),
        (w(2_345_678, 10)?, w(777, 10)?, w(390_000, 8)?),
    ];
    let report = purity_refute(&spec, &triples, &OrbitOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    // One E-DES probe with a step cap; a capped probe is reported, not guessed.
    let edes = gdes::edes::edes_spec();
    let g = edes.group().clone();
    let r = purity_probe(
        &edes,
        &Word::from_u64(1_402_043_471, &g, 20)?,
        &Word::from_u64(22_933_471, &g, 20)?,
        &Word::from_u64(67_681_038, &g, 18)?,
        &OrbitOptions::with_max_steps(5_000_000),
    )?;
    println!(
        "E-DES probe: length {:?} after {} steps (truncated: {})",
        r.length, r.steps_taken, r.truncated
    );
    Ok(())
}
