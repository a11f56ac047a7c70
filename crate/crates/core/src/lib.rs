//! Exact and numerical tools around the QQ̃-system of quantum affine Borel
//! algebras.
//!
//! * [`liedata`]: Cartan tables and twisted folding data.
//! * [`lweight`]: ℓ-weight monomials and formal characters.
//! * [`qqverify`]: truncated q-characters and exact identity checks.
//! * [`bethe`]: Bethe equations, functional residuals, Newton solver.
//! * [`operkit`]: opers, Miura transforms, spectral determinants, monodromy.

pub mod bethe;
pub mod error;
pub mod liedata;
pub mod lweight;
pub mod operkit;
pub mod qqverify;

pub use bethe::{BetheSolution, BetheSystem, Gl1Params, NewtonOptions, SolveStatus, C64};
pub use error::{Error, Result};
pub use liedata::{
    dual_alpha, fold_twisted, load_algebra, parse_algebra, supported_algebras, AlgebraData,
    AlgebraTable, TwistedFoldData, Q64,
};
pub use lweight::{GrothElement, LWeightTerm, PsiMonomial, ShiftIndex, WeightVector};
pub use operkit::{KdvOper, Laurent, MatrixDiffOp, QFunction, QOptions, XOper};
pub use qqverify::{
    verify_all, verify_qq_system, verify_recursion, Identity, VerificationReport,
    VerificationStatus,
};
