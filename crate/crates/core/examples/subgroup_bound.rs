//! Lower bound on the order of the group generated by a few encryption
//! permutations, from orbit lengths under words in the generators.
//!
//! cargo run --release --example subgroup_bound

use gdes::cycling::{factorial, subgroup_lower_bound, GenWord, OrbitOptions};
use gdes::specdoc::small_des;
use gdes::Word;

fn main() -> gdes::Result<()> {
    let spec = small_des(3, 0)?;
    let g = spec.group().clone();
    let keys = [1u64, 20_000, 41_000]
        .iter()
        .map(|&k| Word::from_u64(k, &g, spec.key_length()))
        .collect::<gdes::Result<Vec<_>>>()?;
    let plan = vec![
        (GenWord::single(0), Word::from_u64(0, &g, 8)?),
        (GenWord::single(1), Word::from_u64(100, &g, 8)?),
        (GenWord::single(2), Word::from_u64(4000, &g, 8)?),
        ("0,~1".parse()?, Word::from_u64(7, &g, 8)?),
        ("0,1,~2".parse()?, Word::from_u64(6000, &g, 8)?),
    ];
    let report = subgroup_lower_bound(&spec, &keys, &plan, &OrbitOptions::default())?
        .compared_with(factorial(20));
    for p in &report.probes {
        println!("{:<8} m = {:>5}  orb = {:?}", p.word.to_string(), p.start, p.length);
    }
    println!("order >= {}  (20! = {})", report.bound, factorial(20));
    Ok(())
}
