//! Temperature estimation on thermal light with photon subtraction and
//! post-selection: state statistics, measurement distributions, Fisher
//! information, information-cost rates and a Monte Carlo oracle.

pub mod error;
pub mod fisher;
pub mod measurements;
pub mod oracle;
pub mod protocol;
pub mod quadrature;
pub mod states;
pub mod sweep;

pub use error::{Error, Result};
pub use fisher::{fisher_information, DerivativeSpec, FisherMethod, FisherResult};
pub use measurements::Measurement;
pub use protocol::{BranchMeasurement, CostModel, TotalInformation};
pub use states::{ProtocolParams, StateKind, StateModel, ThermalParams};
