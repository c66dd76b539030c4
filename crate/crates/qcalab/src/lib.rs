//! Numerical laboratory for the index theory of one-dimensional quantum
//! cellular automata (QCAs) and approximately locality-preserving unitaries
//! (ALPUs) on finite spin chains.
//!
//! The crate works at desk scale: every operator is a dense complex matrix on
//! its support region, automorphisms are unitary conjugations α(x) = U†xU
//! (Heisenberg picture), and all chains are finite with open or periodic
//! boundary.  On top of that substrate it provides
//!
//! - finite-dimensional *-algebra machinery (generated closures, Wedderburn
//!   decomposition, matrix units, near-inclusion metrics) in [`algebra`],
//! - constructive stability results (making near-homomorphisms inner,
//!   rotating near inclusions into exact ones, conjugation distances) in
//!   [`stability`],
//! - QCA structure theory: support algebras, the dimension-based GNVW index,
//!   composition laws, circuit decomposition and blending in [`qca`],
//! - the entropic index from Choi-state mutual information in [`choi`],
//! - Hamiltonian evolutions, Lieb-Robinson tail machinery, QCA approximation
//!   of ALPUs, Hamiltonian synthesis, and the Jordan-Wigner translation demo
//!   in [`alpu`] and [`jw`].
//!
//! Logarithms are natural throughout; index values live on the lattice
//! ℤ[{log pᵢ}] over the primes dividing the local dimensions.

pub mod algebra;
pub mod alpu;
pub mod auto;
pub mod chain;
pub mod choi;
pub mod error;
pub mod index;
pub mod jw;
pub mod linalg;
pub mod op;
pub mod qca;
pub mod stability;

pub use auto::{Automorphism, Locality, TailProfile};
pub use chain::{Boundary, ChainSpec, Region};
pub use error::{QcaError, Result};
pub use index::IndexValue;
pub use op::ChainOperator;

/// Tolerance for accepting a matrix as unitary, ‖U†U − I‖.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Eigenvalues of density matrices inside (−EIG_CLAMP, EIG_CLAMP) are
/// treated as exact zeros (0·log 0 = 0).
pub const EIG_CLAMP: f64 = 1e-12;
/// Relative singular-value threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-9;
/// Default cap on the total Hilbert-space dimension for full-chain dense
/// operators (2^12).
pub const DEFAULT_MAX_DIM: usize = 1 << 12;
/// Default cap on the number of amplitudes of a Choi state vector (2^20).
pub const DEFAULT_CHOI_AMP_CAP: usize = 1 << 20;
