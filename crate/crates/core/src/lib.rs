//! Finite groups, their unitary representations, and averaging schemes that
//! approximately project onto the invariant subspace.

pub mod averaging;
pub mod error;
pub mod fourier;
pub mod group;
pub mod irreps;
pub mod linalg;
pub mod representation;
pub mod separation;

pub use averaging::AveragingScheme;
pub use error::{Error, Result};
pub use group::{Family, Group};
pub use irreps::{irreps_of, IrrepTable};
pub use representation::Representation;
