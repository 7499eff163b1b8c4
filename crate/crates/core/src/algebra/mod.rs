//! Quaternionic structures on `R^{4m}`: construction, axiom checks, basis
//! rotation, quaternionic 4-planes and the connection-form fit.

mod forms;
mod so3;
mod triple;

pub use forms::{
    qk_connection_forms, ChristoffelDerivative, CovariantDerivative, FlatDerivative, OmegaSample,
    QKFormFit, TripleField,
};
pub use so3::{axis_rotation, is_special_orthogonal, random_rotation, so3_generator};
pub use triple::{
    check_structure_axioms, half_quaternionic, make_structure_triple, quaternionic_plane,
    so3_rotate, Convention, StructureTriple,
};
