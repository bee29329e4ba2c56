//! DES-like Feistel ciphers over finite abelian groups.
//!
//! The XOR of a classical Feistel network is replaced by the operation of a
//! group `Z_{n1} x ... x Z_{nm}`. On top of the cipher pipeline the crate
//! provides:
//!
//! - [`edes`]: the two-round E-DES instance over `Z_3`, with full traces;
//! - [`cycling`]: orbit lengths, lcm-based closure and purity refutation,
//!   pseudorandom walks and subgroup-order lower bounds;
//! - [`smallgroup`]: explicit permutations for brute-force checks on tiny
//!   domains, plus a streaming parity computation for large ones;
//! - [`sbox`]: S-box lookup, generation, auditing and subgroup expansion.
//!
//! ```
//! use gdes::edes::{edes_encrypt, KEY_LEN, BLOCK_LEN};
//! use gdes::{GroupSpec, Word};
//!
//! let z3 = GroupSpec::cyclic(3).unwrap();
//! let k = Word::parse("11012012122012012110", &z3, KEY_LEN).unwrap();
//! let m = Word::parse("012012012012012012", &z3, BLOCK_LEN).unwrap();
//! assert_eq!(edes_encrypt(&k, &m).unwrap().to_string(), "210212002210210000");
//! ```

pub mod cli;
pub mod cycling;
pub mod edes;
pub mod engine;
pub mod error;
pub mod group;
pub mod permnet;
pub mod sbox;
pub mod smallgroup;
pub mod specdoc;
pub mod word;

pub use error::{Error, Result};
pub use group::{GroupElem, GroupSpec};
pub use permnet::{CipherParams, CipherSpec, RoundFunction, RoundTable, WireMap};
pub use sbox::{GroupEmbedding, SBox, SBoxRoundSpec};
pub use word::Word;
