//! Grid-based smooth functions, concrete distribution representations,
//! seminorms, linear operators and the diffeomorphism catalog.

pub mod coeff;
pub mod diffeo;
pub mod dist;
pub mod grid;
pub mod io;
pub mod linop;
pub mod mask;
pub mod probes;
pub mod quadrature;
pub mod seminorm;

pub use coeff::SmoothCoeff;
pub use diffeo::{Diffeo, Diffeo1D};
pub use dist::{pair, Atom, DistributionRep, Envelope};
pub use grid::{BoxRegion, Grid, GridFunction, Spectrum, Window};
pub use linop::LinOpSpec;
pub use mask::{Mask1D, MaskProduct, SmoothMask};
pub use seminorm::{seminorm, SeminormSpec, SeminormValue};
