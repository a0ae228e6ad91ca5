//! Numerical core for multi-bubble blow-up in the mass-critical generalized
//! Korteweg-de Vries equation `u_t + (u_xx + u^5)_x = 0`.
//!
//! The crate is `no_std` and only needs an allocator. File formats, command
//! line handling and reporting live in the `gkdv` companion crate.
//!
//! Modules, in dependency order:
//!
//! * [`profiles`]: ground state `Q`, the linearized operator `L`, the profiles
//!   `P` and `R`, and the identity checks that tie them together.
//! * [`ansatz`]: bubble configurations, interaction angles, derived
//!   parameters and the sampled multi-bubble field.
//! * [`modulation`]: the reduced modulation system, exit norm and shooting.
//! * [`pde`]: periodic pseudo-spectral evolution and field diagnostics.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod fm;

pub mod ansatz;
pub mod error;
pub mod fft;
pub mod grid;
pub mod linalg;
pub mod modulation;
pub mod pde;
pub mod profiles;

pub use error::{Error, Result};
