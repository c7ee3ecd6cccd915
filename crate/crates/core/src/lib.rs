//! Bipartite quantum-correlation measures on small multi-party states.
//!
//! The crate computes entanglement of formation and of assistance, one-way
//! classical correlation, unlocalizable entanglement, quantum discord and
//! unlocalizable discord, and checks the strong polygamy chains
//!
//! ```text
//! E_a(A|B1..Bn) <= 1/(2^(n-1)-1) * sum_X E_a(A X) <= sum_i E_a(A Bi)
//! ```
//!
//! together with the trade-off identities these chains are built from.
//!
//! Roof quantities (minimum or maximum of an ensemble average over all
//! pure-state decompositions) have no closed form in general, so they are
//! estimated by a deterministic multi-restart search over isometries. Every
//! estimate carries a [`Bound`] that says in which direction it may be off.
//!
//! All entropies are in bits.

pub mod ensemble;
pub mod error;
pub mod generate;
pub mod info;
pub mod layout;
pub mod linalg;
pub mod measures;
pub mod optimizer;
pub mod polygamy;
pub mod state;

pub use ensemble::{Isometry, MeasurementOutcomeSet, PureEnsemble, Rank1Measurement};
pub use error::{QpolyError, Result};
pub use layout::SystemLayout;
pub use measures::{Bound, CorrelationKind, CorrelationValue, Route};
pub use optimizer::{OptimizationResult, OptimizerConfig, Sense};
pub use polygamy::{PolygamyReport, SubsetFamily, Verdict};
pub use state::{DensityOperator, StateVector};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
