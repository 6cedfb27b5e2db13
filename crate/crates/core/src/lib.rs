//! Exact cross-`t`-intersection calculus over small ground sets.

pub mod arith;
pub mod bounds;
pub mod checks;
pub mod compress;
pub mod error;
pub mod labeled;
pub mod multiset;
pub mod search;
pub mod setcore;
pub mod verify;
pub mod weights;

pub use arith::Ratio;
pub use error::{Error, Result};
pub use setcore::{Family, IntersectionParams, SetBits};
pub use weights::{WeightFn, WeightSpec};
