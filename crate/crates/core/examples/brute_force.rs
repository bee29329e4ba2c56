//! Exhaustive census of compositions of Feistel rounds over a tiny group:
//! closure, purity, whether the identity appears, and the generated order.
//!
//! cargo run --release --example brute_force

use gdes::smallgroup::{census, enumerate_feistel_set, injective_tables, DEFAULT_ORDER_CAP};
use gdes::group::GroupSpec;

fn main() -> gdes::Result<()> {
    for (modulus, max_n) in [(2, 6), (3, 3)] {
        let g = GroupSpec::cyclic(modulus)?;
        let tables = injective_tables(&g, 1)?;
        for n in 1..=max_n {
            for swap in [false, true] {
                let set = enumerate_feistel_set(&g, 1, &tables, n, swap)?;
                let c = census(&set, DEFAULT_ORDER_CAP);
                println!(
                    "Z{modulus} n={n} swap={swap:<5} |set|={:<4} closed={:<5} pure={:<5} identity={:<5} even/odd={}/{} order={:?}",
                    c.size, c.closure.closed, c.purity.as_ref().map_or("n/a".to_string(), |p| p.pure.to_string()), c.contains_identity, c.even, c.odd, c.generated_order
                );
            }
        }
    }
    Ok(())
}
