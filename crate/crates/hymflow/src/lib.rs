//! hymflow: a desk-scale lattice laboratory for Hermitian-Yang-Mills
//! structures on Higgs bundles over a flat torus.
//!
//! The crate discretizes a rank-r Hermitian Higgs bundle on an N x N
//! periodic lattice, computes the mean curvature of the Hitchin-Simpson
//! structure, runs the Donaldson heat flow on the bundle metric, and
//! cross-checks the flow outcomes against an exact-arithmetic slope
//! (semi)stability oracle. A reductive-group layer (Cartan involution,
//! trace pairing, adjoint representation, Ad-perp projection) transfers
//! the verdicts to the principal-bundle picture through the endomorphism
//! bundle.
//!
//! All numerical modules are generic over the working scalar via
//! [`numerics::Real`] (f32 or f64); slope arithmetic is exact rational.
//! Concrete f64 aliases are exported at the crate root.

pub mod bundle;
pub mod error;
pub mod flow;
pub mod gauge;
pub mod lie;
pub mod numerics;
pub mod scenario;
pub mod stability;
pub mod surface;

pub use error::{Error, Result};

/// Concrete f64 aliases for the main domain types.
pub type Surface64 = surface::LatticeSurface<f64>;
pub type MatrixField64 = surface::MatrixField<f64>;
pub type Background64 = bundle::BackgroundBundle<f64>;
pub type Higgs64 = bundle::HiggsField<f64>;
pub type Metric64 = bundle::MetricField<f64>;
pub type Curvature64 = gauge::CurvatureField<f64>;
pub type FlowConfig64 = flow::FlowConfig<f64>;
pub type FlowTrace64 = flow::FlowTrace<f64>;
pub type GroupData64 = lie::ReductiveGroupData<f64>;
