//! Classical simulation of a matrix-product-state ground-state search built
//! from quantum subroutines: a small state-vector simulator, a
//! hardware-efficient variational layer, qMPS chains with variational SVD
//! canonicalization, the alternating sweep driver, and independent classical
//! references for every quantum result.

pub mod canonical;
pub mod error;
pub mod hamiltonian;
pub mod oracle;
pub mod qmps;
pub mod sim;
pub mod sweep;
pub mod variational;

pub use error::{Error, Result};
pub use hamiltonian::{MpoForm, PauliSum, build_xxz, to_mpo};
pub use qmps::{QmpsChain, QmpsSite};
pub use sim::{C64, Gate, Pauli, PauliString, StateVector};
pub use sweep::{SweepOptions, SweepReport, run_vqmps};
pub use variational::{AnsatzCircuit, OptimizerConfig};
