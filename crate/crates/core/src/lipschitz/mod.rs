//! Bi-Lipschitz maps, constant estimation and Lipschitz extensions.

mod cone_ext;
mod estimate;
mod extension;
mod map;
pub mod simplicial;

pub use cone_ext::{cone_extension, ConeBounds};
pub use estimate::{constants_estimate, ConstantsEstimate, ScaleRow};
pub use extension::{banach_extension, BanachExtension, ExtensionMode};
pub use map::{ConstantSource, LipschitzMap, PointFn};
