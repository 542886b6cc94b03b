//! Numerical laboratory for the mean-field Bose gas on a momentum-cutoff
//! torus: Hartree minimizers, the Bogoliubov layer, the next expansion
//! orders of the ground state and its energy, fluctuation statistics,
//! binding energies, and quench dynamics — each certified against a
//! built-in exact-diagonalization oracle on the identical truncated model.

pub mod binding;
pub mod bogoliubov;
pub mod dynamics;
pub mod edgeworth;
pub mod error;
pub mod fock;
pub mod hartree;
pub mod ladder;
pub mod model;
pub mod oracle;
pub mod perturbation;
pub mod report;
pub mod sparse;
pub mod util;
pub mod validate;

pub use error::{Error, Result};
