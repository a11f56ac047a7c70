//! Classical side: opers, Miura maps, KdV potentials, coordinate changes and
//! spectral determinants of the associated Schrödinger operators.

pub mod coords;
pub mod ds;
pub mod kdv;
pub mod laurent;
pub mod ode;
pub mod spectral;

pub use coords::{
    constants, general_constants, schwarzian, schwarzian_at, transform_projective, CoordinateMap,
    GeneralConstants, Jet, PowerMap, SlConstants,
};
pub use ds::{c_of_nu, canonical_form, miura, CanonicalForm, MatrixDiffOp, ScalarOp};
pub use kdv::{
    accessory_m1_closed_form, monodromy_matrix, solve_accessory, AccessoryOptions,
    AccessorySolution, KdvOper, LocalExpansion, MonodromyReport,
};
pub use laurent::Laurent;
pub use spectral::{
    bae_ratio_check, q_of_e, ratio_check_at, QFunction, QOptions, QValue, QZero, RatioReport, XOper,
};
