//! Vector fields, the asset models and the Ito-Stratonovich drift correction.

pub mod field;
pub mod model;

pub use field::{
    AutodiffField, ClosureField, ConstantField, FieldKind, FieldRef, LinearField, VectorField,
    MAX_STATE_DIM,
};
pub use model::{
    ito_drift, make_bsm_model, make_heston_model, payoff_eval, HestonParams, ItoDrift, ModelKind,
    ModelSpec, Payoff,
};
