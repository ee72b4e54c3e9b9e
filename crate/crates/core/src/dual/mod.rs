//! Learning a martingale whose Rogers dual bound prices an American option.

pub mod canonical;
pub mod coupled;
pub mod loss;
pub mod net;
pub mod train;

pub use canonical::canonical_center;
pub use coupled::{Coupled, CoupledPaths};
pub use loss::{
    bridge_cdf, bridge_sigmas, bridge_sup, bridge_sup_partials, center, center_backward, column_means,
    estimate_sigma, rogers_loss, BridgeInputs, BridgeParams, RogersLoss,
};
pub use net::{MartingaleNet, NetKind};
pub use train::{train, Evaluation, IterationRecord, Objective, TrainConfig, TrainOutcome, PILOT_PATHS};
