//! Squashed-entanglement family estimators on small qubit registers.
//!
//! * [`qstate`]: dense states, partial traces and transposes, spectral tools.
//! * [`measures`]: entropies, (conditional) mutual information, negativity,
//!   the tripartite witness, fidelity and GHZ/W constructors.
//! * [`recovery`]: Petz recovery maps and recoverability diagnostics.
//! * [`squashed`]: certified upper bounds on the hysteretic squashed
//!   entanglement and its relatives, exact on pure states.
//! * [`ising`]: quenched transverse-field Ising ring with local dephasing,
//!   integrated directly or unravelled into jump trajectories.
//! * [`exec`]: sequential / rayon execution switch.

pub mod error;
pub mod exec;
pub mod ising;
pub mod measures;
pub mod qstate;
pub mod random;
pub mod recovery;
pub mod squashed;

pub use error::{Error, Result};
pub use exec::Execution;
