//! Exact higher-order derivatives through nilpotent-tag jets, plus a
//! central finite-difference oracle for cross-checking.

mod derive;
mod jet;
pub mod linalg;

pub use derive::{default_fd_step, derive_mixed, fd_derive, MAX_FIBER_ORDER};
pub use jet::{base_tags, constants, dot, Jet, MAX_TAGS};
