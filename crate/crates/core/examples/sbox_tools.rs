//! Generates and audits S-boxes, then expands the E-DES S-boxes from Z_3
//! to Z_9 and checks that the expanded cipher agrees on embedded inputs.

use gdes::group::GroupSpec;
use gdes::sbox::{expand_cipher, GroupEmbedding, SBox};
use gdes::Word;

fn main() -> gdes::Result<()> {
    let z3 = GroupSpec::cyclic(3)?;
    let b = SBox::generate(z3.clone(), 2, 3, 7, true)?;
    let audit = b.audit();
    println!(
        "random 2x3 box over Z3: affine {}, all rows surjective {}",
        audit.affine,
        audit.all_rows_surjective()
    );
    for (i, s) in gdes::edes::sboxes().iter().enumerate() {
        let a = s.audit();
        let bad: Vec<usize> = a.rows.iter().filter(|r| !r.surjective).map(|r| r.row).collect();
        println!("E-DES S{}: affine {}, non-surjective rows {:?}", i + 1, a.affine, bad);
    }

    let spec = gdes::edes::edes_spec();
    let emb = GroupEmbedding::scaled_cyclic(3, 3)?;
    let big = expand_cipher(&spec, &emb)?;
    let k = Word::parse(gdes::edes::EXAMPLE_KEY, &z3, 20)?;
    let m = Word::parse(gdes::edes::EXAMPLE_MESSAGE, &z3, 18)?;
    let c = spec.encrypt(&k, &m)?;
    let c9 = big.encrypt(&emb.embed_word(&k)?, &emb.embed_word(&m)?)?;
    println!("over Z3: {c}");
    println!("over Z9: {c9}");
    assert_eq!(emb.pull_back(&c9), Some(c));
    Ok(())
}
