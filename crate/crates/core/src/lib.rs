//! Discrete Hardy inequalities on the lattices `Z_+^d` and `Z^d`.

pub mod constants;
pub mod error;
pub mod functionals;
pub mod lattice;
pub mod optimizer;
pub mod paths;
pub mod sum;
pub mod testfns;
pub mod verify;

pub use constants::{theorem_constant, ConstantReport, HardyParams, Regime};
pub use error::{HardyError, Result};
pub use functionals::{EnergyVariant, LatticeFunction};
pub use lattice::{Domain, LatticeKind, LatticePoint};
