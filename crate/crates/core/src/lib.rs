//! Joint packet scheduling and resource-block allocation for downlink
//! traffic with deadlines and priorities.

pub mod model;
pub mod solver;
pub mod channel;
pub mod traffic;
pub mod policies;
pub mod metrics;
pub mod sim;
pub mod cli;
