//! Shared optimization toolkit: dense simplex and transportation solvers with
//! dual certificates, alternating bi-supremum ascent, ratio ascent on smooth
//! balls, brute-force grids, and the seeded random streams everything else
//! draws from.

pub mod ascent;
pub mod grid;
pub mod lp;
pub mod rng;
pub mod transport;

pub use ascent::{alternating_bisup, ratio_ascent, AscentState, BisupResult, UnitBall};
pub use grid::{grid_oracle, Goal, GridResult};
pub use lp::{solve_lp, Constraint, LpError, LpProblem, LpSolution, Relation, Sense, VarBound};
pub use transport::{solve_transportation, TransportSolution};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
