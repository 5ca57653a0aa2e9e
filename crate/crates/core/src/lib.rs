//! Connectivity systems, tangles, and trees that display them.
//!
//! The crate works at exhaustively-verifiable scale: ground sets are capped at
//! 20 elements so that the full table of order values (one integer per subset)
//! fits in memory and every claimed property can be checked against a brute
//! force pass over all subsets. On top of that base it provides:
//!
//! - construction of connectivity systems from graphs, matroids, and raw
//!   tables ([`ingest`]);
//! - tangle enumeration, truncation, robustness, and distinguishing
//!   separations ([`tangle`]);
//! - full closures, sequentiality, equivalence classes of separations, and
//!   flowers ([`separations`]);
//! - quotient systems that collapse parts of a partition to single elements,
//!   with induced tangles and separations ([`quotient`]);
//! - trees of tangles, per-tangle trees of separations, and the grafted tree
//!   that displays both at once, together with an independent verifier
//!   ([`trees`]).

pub mod fixtures;
pub mod ground;
pub mod ingest;
pub mod quotient;
pub mod separations;
pub mod system;
pub mod tangle;
pub mod trees;

pub use ground::{GroundSet, GroundSetError, Subset, MAX_ELEMENTS};
pub use system::{crosses, AxiomCheck, ConnectivitySystem, Separation, SystemError};
pub use tangle::{
    distinguishing_separations, enumerate_tangles, is_robust, is_tangle, is_truncation,
    maximal_tangles, truncate, Tangle, TangleError, TangleVerdict,
};
