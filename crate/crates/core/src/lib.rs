//! Static checking of resource-usage assertions.
//!
//! Specification bounds and analyzer-inferred bounds are both cost functions
//! over input sizes. Comparing them partitions the size domain into regions
//! where the assertion is proved (`checked`), disproved (`false`) or left
//! open (`check`).

pub mod assertlang;
pub mod compare;
pub mod expr;
pub mod fincalc;
pub mod interval;
pub mod job;
pub mod multivar;
pub mod par;
pub mod rational;
pub mod roots;
pub mod verdict;

pub use expr::CostExpr;
pub use interval::{NatInterval, NatIntervalSet};
pub use rational::Rational;
