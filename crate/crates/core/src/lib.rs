//! Finite-dimensional laboratory for products of normed spaces defined by a
//! bilinear map, their generalized duals, and spaces of multiplication
//! operators.
//!
//! The central object is the `π_c` norm of a bilinear map `c: E × F → G`,
//!
//! ```text
//! π_c(h) = inf { Σ ‖x_i‖ ‖y_i‖ : Σ c(x_i, y_i) = h },
//! ```
//!
//! computed as a certified [`NormBracket`] (a feasible decomposition for the
//! upper end, a normalized dual functional for the lower end). On top of it,
//! [`dualgate`] compares the norm of `φ_T` on the product space with the norm
//! of the multiplication operator `S_T: E → L(F, X)` along two deliberately
//! separate code paths, and the example families ([`bfs`], [`hadamard`],
//! [`freelip`], [`vecmeas`]) instantiate that comparison.
//!
//! Data-parallel loops (restarts, extreme-pair enumeration, sampled
//! instances) run on rayon when the `parallel` feature is enabled and fall back
//! to sequential iterators otherwise. Results are identical either way.

pub mod bfs;
pub mod bilinear;
pub mod dualgate;
pub mod error;
pub mod freelip;
pub mod hadamard;
pub mod optlab;
pub mod par;
pub mod picalc;
pub mod report;
pub mod spaces;
pub mod vecmeas;

pub use bilinear::{BilinearKind, BilinearMap};
pub use error::{Error, Result};
pub use picalc::{Decomposition, NormBracket, Provenance};
pub use report::{DualityRecord, DualityReport, Witness};
pub use spaces::{Exponent, FiniteMeasure, NormedSpace, SpaceSpec};
