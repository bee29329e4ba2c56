//! Refutes closure of the small 8-nit cipher over Z_n: the lcm of two orbit
//! lengths under random keys exceeds n^10, the size of the key space.
//!
//! cargo run --release --example closure_probe [n]

use gdes::cycling::{closure_refute, OrbitOptions};
use gdes::specdoc::small_des;
use gdes::Word;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gdes::Result<()> {
    let n: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let spec = small_des(n, 0)?;
    let g = spec.group().clone();
    let order = g.order() as u32;

    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut word = |len| Word::new(g.clone(), (0..len).map(|_| rng.gen_range(0..order)).collect());
        let probes = vec![
            (word(spec.key_length())?, word(spec.block_len())?),
            (word(spec.key_length())?, word(spec.block_len())?),
        ];
        let report = closure_refute(&spec, &probes, &OrbitOptions::default())?;
        for p in &report.probes {
            println!("seed {seed}: k = {:>6}  m = {:>6}  orb = {:?}", p.keys[0], p.start, p.length);
        }
        println!("  lcm = {}  vs |K| = {}  -> {}", report.lcm, report.threshold, report.verdict);
        if report.verdict == gdes::cycling::Verdict::Refuted {
            break;
        }
    }
    Ok(())
}
