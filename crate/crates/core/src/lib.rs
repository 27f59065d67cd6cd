//! Revealed-preference analysis and its dual reading as an indivisible-goods
//! (housing) market.
//!
//! The central object is the square matrix `R` with zero diagonal. In demand
//! analysis `R[i][j] = p_i·x_j − p_i·x_i` is the cost of bundle `j` at the
//! prices of observation `i`, relative to what was spent. In the housing
//! market `R[i][j] = c[i][j] − c[i][i]` is individual `i`'s extra cost of
//! holding house `j` instead of its own. The same graph, LP and assignment
//! machinery answers both sets of questions:
//!
//! * [`consistency`]: cyclical consistency, witness cycles, coherent subsets,
//!   increasing-cycle partitions.
//! * [`rationalize`]: Afriat certificates `(v, λ)`, the piecewise-linear
//!   Afriat utility, the Afriat efficiency index.
//! * [`indices`]: the max-min/min-max indices `A*`, `A`, `B`, `G`.
//! * [`housing`]: Pareto audits, no-trade prices, top trading cycles.
//! * [`assignment`] and [`lp`]: the numerical back ends.

pub mod assignment;
pub mod cli;
pub mod consistency;
pub mod error;
pub mod housing;
pub mod indices;
pub mod lp;
pub mod model;
pub mod rationalize;

pub use error::{Error, Result};
pub use model::{Allocation, CostMatrix, DemandDataset, RMatrix, Sign, SignTolerance};
