//! Reduction of non-radial coefficient fields to pairs of radial operators.

pub mod bracket;
pub mod envelope;
pub mod field;
pub mod sphere;

pub use bracket::{bracket_operators, bracket_radii_nonradial, BracketOperators, NonradialBracket, RadialRun};
pub use envelope::{radial_envelopes, EnvelopeProfile};
pub use field::{FieldSpec, MatrixField, VectorField};
pub use sphere::sphere_points;
