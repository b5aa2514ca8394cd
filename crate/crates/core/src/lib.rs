//! Direction sets, tangent cones, horn neighbourhoods and volume asymptotics
//! of set-germs at the origin of `R^n`.

pub mod error;
pub mod config;
pub mod directions;
pub mod expr;
pub mod fixtures;
pub mod gauge;
pub mod geom;
pub mod germ;
pub mod lipschitz;
pub mod poly;
pub mod seatangle;
pub mod ssp;
pub mod verdict;
pub mod volume;

pub use error::{GermError, Result};
pub use gauge::{gauge_compare, Gauge, GaugeOrder};
pub use germ::{Budget, DistanceBound, GermSet, Schedule};
pub use lipschitz::LipschitzMap;
pub use verdict::Verdict;
