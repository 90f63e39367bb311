//! Power-distortion tradeoffs for estimating a scalar Gaussian parameter
//! over a coherent multiple-access channel, with linear spatial
//! collaboration between sensors.
//!
//! Key capabilities:
//!
//! * validated model containers and the basic figures of merit
//!   ([`model`]);
//! * collaboration topologies and the sparse-to-dense embedding that makes
//!   the constrained problem tractable ([`topology`]);
//! * exact solvers for both directions of the tradeoff: best information
//!   under a power budget and least power for an information target
//!   ([`solver`]);
//! * closed forms and bounds for special topologies ([`closed_forms`]);
//! * reproducible instance generation ([`instances`]);
//! * independent verification oracles ([`oracle`]).

pub mod closed_forms;
pub mod error;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod topology;

pub use closed_forms::{
    info_cycle, info_distributed, info_fully_connected, power_cycle, rate_distortion_bound,
    relative_power_savings, separation_bound, snr_asymptotics, AsymptoticPoint, CycleSetup,
    RateDistortionBound, SeparationBound, SnrRegime,
};
pub use error::{Error, Result};
pub use instances::{realize, Instance, InstanceSpec};
pub use model::{
    centralized_distortion, centralized_info, collaboration_cost, distortion_from_info,
    fisher_info, transmit_power, ChannelModel, CollaborationMatrix, CostMatrix,
    ObservationModel,
};
pub use solver::{
    kkt_residual, solve_info_for_power, solve_power_for_info, solve_power_for_info_with,
    TradeoffPoint, Tolerances,
};
pub use topology::{embed, flatten, lift, EmbeddedProblem, Topology};
