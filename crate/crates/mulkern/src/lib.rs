//! Multiplication kernels from differential operators, with exact
//! structure constants, residue-based associativity checks and closed-form
//! cross-checks.

pub mod assoc;
pub mod birat;
pub mod closed;
pub mod combinat;
pub mod error;
pub mod exact;
pub mod kernel;
pub mod ode;
pub mod sc;
pub mod verlinde;

pub use error::{Error, Result};
