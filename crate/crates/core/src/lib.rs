//! Device-independent self-testing of the three-qubit family cosθ|W⟩ + sinθ|GHZ⟩.
//!
//! The crate is split the same way the computation is:
//!
//! * [`qcore`]: exact state-vector simulation of the ideal realizations.
//! * [`analytic`]: closed-form criteria (singlet, XOR game, tilted CHSH, Result 1 checker).
//! * [`swapiso`]: the swap isometry, ρ_swap and the fidelity as a moment functional.
//! * [`npa`]: monomial algebra, moment and localizing matrices, problem assembly.
//! * [`sdp`]: standard form, SDPA files and solver backends.
//! * [`cli`]: the command implementations behind the `selftest` binary.
//!
//! Bit order is |abc⟩ with Alice as the most significant qubit; after the isometry the
//! ancillas follow as |abc⟩⊗|a′b′c′⟩.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod npa;
pub mod qcore;
pub mod sdp;
pub mod swapiso;

pub use error::{Error, Result};

// Link the system OpenBLAS used by the SDP backend.
extern crate openblas_src;
