pub mod dfl;
pub mod error;
pub mod hed;
pub mod modular;
pub mod pipeline;
pub mod sec;

pub use error::{Error, Result};
pub use hed::{HedRef, Manager, VarId, VarRange};
