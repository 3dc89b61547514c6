//! Closed-form and reduced approximants of the driven Lindblad evolution:
//! Dyson expansions, perturbative transition formulas, the splitting matrix
//! that governs the dissipative lifting of the kernel, reduced population
//! dynamics, the Lindbladian spectral frame at small coupling, and the
//! associated Markov generator.

mod dyson;
mod reduced;
mod spectral_g;
mod splitting;
mod transitions;

pub use dyson::*;
pub use reduced::*;
pub use spectral_g::*;
pub use splitting::*;
pub use transitions::*;
