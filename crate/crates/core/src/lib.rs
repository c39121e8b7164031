//! Finite-truncation computation with groups acting on rooted trees.
//!
//! * [`permgroup`]: finite permutation groups, blocks, normalizers,
//!   equivalence and isomorphism searches.
//! * [`portrait`]: truncated tree automorphisms and the wreath towers
//!   `W_n` and `A_n` built from a transitive group `D`.
//! * [`burger_mozes`]: balls in the regular tree with the canonical legal
//!   colouring, their colour-admissible automorphism groups, the Tits
//!   independence check, and local-action recovery.
//! * [`treepair`]: Higman–Thompson elements as reduced tree-pair diagrams.
//! * [`germ`]: finitely supported germs of automorphisms of `W(D)^k`, the
//!   `F·A` factorization and the sign character.

pub mod address;
pub mod burger_mozes;
pub mod catalog;
pub mod error;
pub mod germ;
pub mod perm;
pub mod permgroup;
pub mod portrait;
pub mod sample;
pub mod treepair;

pub use address::Address;
pub use error::{Error, Result};
pub use perm::Perm;
pub use permgroup::PermGroup;
