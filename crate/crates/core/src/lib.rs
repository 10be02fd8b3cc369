pub mod age;
pub mod channel;
pub mod error;
pub mod mc;
pub mod optim;
pub mod pgf;
pub mod queueing;
pub mod rng;
pub mod sim;
pub mod vlsf;

pub use age::AgePolicy;
pub use channel::{ChannelSpec, ServiceModel};
pub use error::{Error, ErrorClass, Result};
pub use mc::McEstimate;
pub use pgf::{RationalPgf, TailCurve, TailMethod};
pub use queueing::QueueConfig;
