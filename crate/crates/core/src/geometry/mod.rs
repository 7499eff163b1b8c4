//! Finite-difference Riemannian geometry of chart-parametrized submanifolds
//! of flat `R^N`.

mod chart;
pub mod charts;
mod connection;
mod curvature;
mod shape;

pub use chart::{Chart, Domain, EmbeddingFn, Frame, SampleRegion};
pub use connection::{
    ambient_derivative, coordinate_field, induced_metric, levi_civita, lie_bracket, projected_field,
    tangent_projector, VectorField,
};
pub use curvature::{christoffel, riemann_tensor, Christoffel, CurvatureSample, MetricField, SIGN_CONVENTION};
pub use shape::{
    classify_umbilical, mean_curvature, second_fundamental_form, shape_at, ShapeData, UmbilicReport,
    MIN_UMBILIC_POINTS,
};
pub(crate) use shape::sff_in_frame;
