//! Finite-model workbench for intuitionistic modal logic.
//!
//! Three semantics live side by side: Kripke frames (posets with a bimodule),
//! the algebra of upper sets, and proof-relevant semantics in presheaves over
//! a finite category with an endoprofunctor. The crate computes all three
//! and checks, by exhaustive enumeration on small inputs, that they agree.

pub mod category;
pub mod error;
pub mod formula;
pub mod io;
pub mod kripke;
pub mod lattice;
pub mod modal;
pub mod order;
pub mod presheaf;
pub mod profunctor;
mod search;
pub mod verify;

pub use error::{Error, Result};
