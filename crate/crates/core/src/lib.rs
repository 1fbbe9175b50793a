//! Simulator and actor-critic controller for collaborative DNN inference
//! between battery-powered UAVs and a shared, queue-constrained edge server.
//!
//! Each slot the controller picks, per UAV, a model version and a cut point;
//! the head runs on the UAV, the tail on the server. The slot reward weighs
//! accuracy, end-to-end latency and device energy.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons also reject NaN

pub mod agent;
pub mod baselines;
pub mod config;
pub mod device;
pub mod env;
pub mod error;
pub mod network;
pub mod profiles;
pub mod reward;
pub mod seed;
pub mod server;
pub mod sweep;

pub use error::{Error, Result};
