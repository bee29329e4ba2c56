//! Walks x -> E_{k(x)}(x) where the key is derived from the current block,
//! and estimates the size of the generated group from the cycle found.
//!
//! cargo run --release --example random_walk [seed]

use gdes::cycling::random_walk_closure;
use gdes::specdoc::small_des;

fn main() -> gdes::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    for n in [2, 3, 5] {
        let spec = small_des(n, 0)?;
        let r = random_walk_closure(&spec, seed, 1 << 28)?;
        println!(
            "Z{n}: tail {:?} cycle {:?} estimate {:?} vs |K| = {} (exceeds: {:?})",
            r.tail, r.cycle, r.estimate, r.key_space, r.estimate_exceeds_key_space
        );
    }
    Ok(())
}
