//! Closed-form objects: explicit solutions, comparison-function families,
//! the existence certificate and the auxiliary critical-drift problem.

pub mod auxiliary;
pub mod certificate;
pub mod explicit;
pub mod families;

pub use auxiliary::{
    g_prime_bracket, solve_g_auxiliary, v_c_integral, v_c_limit, AuxiliarySolution, DerivativeBracket,
};
pub use certificate::{existence_certificate, ExistenceCertificate};
pub use explicit::{explicit_profile, explicit_profile_for, ExplicitProfile};
pub use families::{
    critical_test_function, inward_test_function, outward_test_function, OutwardFamilyParams, Role, TestFunctionProfile,
};
