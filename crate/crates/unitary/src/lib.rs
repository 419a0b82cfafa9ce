//! Exact computation in split unitary groups over finite fields.
//!
//! The crate solves the word problem in U(d, q²) for the split Hermitian
//! form: any unitary matrix is rewritten as a product of sparse elementary
//! generators and a normal-form diagonal, by a cubic-time row/column
//! elimination. On top of that sit a small ElGamal-style cryptosystem whose
//! public data are automorphism images of a generating set (`mor`), and the
//! matching key-recovery procedure that extracts the hidden conjugator from
//! those images (`attack`).
//!
//! Modules, bottom up:
//!
//! * [`gf`]: the tower F_p ⊆ F_q ⊆ F_{q²} with the involution x ↦ x^q.
//! * [`linalg`]: dense exact matrices, split Hermitian forms, membership
//!   tests for U / SU / GU.
//! * [`gens`]: elementary generators as symbolic letters, words, and
//!   sparse row/column application.
//! * [`elim`]: the elimination algorithms, full generator words, and the
//!   reduction of special-unitary elements to the identity.
//! * [`mor`]: keygen/encrypt/decrypt for the conjugation-automorphism
//!   cryptosystem on SU(2l, q²).
//! * [`attack`]: conjugator recovery up to scalar from oracle access to an
//!   automorphism on generators.
//! * [`serial`]: JSON wire formats for all of the above.

pub mod attack;
pub mod elim;
mod error;
pub mod gens;
pub mod gf;
pub mod linalg;
pub mod mor;
pub mod serial;

pub use error::Error;
pub use gf::{FieldElem, FieldSpec};
pub use linalg::{HermitianForm, Mat};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
