pub mod autodiff;
pub mod dual;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod ode;
pub mod oracles;
pub mod qmc;
pub mod schemes;
pub mod sde;

pub use error::{Error, Result};
