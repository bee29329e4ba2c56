//! Round trips over a few cipher specs: E-DES, a spec loaded from JSON, and
//! the two-round 8-nit cipher over Z_n with random S-boxes.

use gdes::specdoc::{parse_spec, small_des, spec_to_json};
use gdes::{CipherSpec, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn round_trips(name: &str, spec: &CipherSpec, n: usize, rng: &mut ChaCha8Rng) -> gdes::Result<()> {
    let g = spec.group();
    let order = g.order() as u32;
    for _ in 0..n {
        let k = Word::new(g.clone(), (0..spec.key_length()).map(|_| rng.gen_range(0..order)).collect())?;
        let m = Word::new(g.clone(), (0..spec.block_len()).map(|_| rng.gen_range(0..order)).collect())?;
        let c = spec.encrypt(&k, &m)?;
        assert_eq!(spec.decrypt(&k, &c)?, m);
    }
    let k = Word::zero(g.clone(), spec.key_length());
    let m = Word::zero(g.clone(), spec.block_len());
    println!("{name:<12} {n} round trips ok, E_0(0) = {}", spec.encrypt(&k, &m)?);
    Ok(())
}

fn main() -> gdes::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let edes = gdes::edes::edes_spec();
    round_trips("E-DES", &edes, 1000, &mut rng)?;

    // Specs survive a trip through their JSON form.
    let reloaded = parse_spec(&spec_to_json(&edes))?;
    round_trips("E-DES json", &reloaded, 100, &mut rng)?;

    for n in [2, 3, 5, 7, 11] {
        let spec = small_des(n, 0)?;
        round_trips(&format!("small Z{n}"), &spec, 1000, &mut rng)?;
    }
    Ok(())
}
