//! Mollifier regularization nets: construction of theta_eps and the cutoff
//! exhaustion, the operator algebra they generate, frequency-side bounds,
//! net transformations, and verification of the test-object axioms.

pub mod fourier;
pub mod mollifier;
pub mod net;
pub mod op;
pub mod verify;

pub use fourier::{verify_fourier_bounds, ChiTransform, FourierReport};
pub use mollifier::{exhaustion_cutoff, MollifierOp, MollifierParams, Regime};
pub use net::{
    build_mollifier_net, dyadic_eps, standard_window, transform_net, zero_net, NetKind, RegNet,
    TransformSpec,
};
pub use op::{OpNode, RegOperator};
pub use verify::{verify_test_object, TestObjectReport, VerifyConfig};
