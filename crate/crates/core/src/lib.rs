//! Price of Anarchy analysis for non-atomic routing games whose strategies
//! have free-flow costs within a bounded factor of each other.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the command line tool uses.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod game;
pub mod generators;
pub mod io;
pub mod latency;
pub mod network;
pub mod scalar;
pub mod shortest_path;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::{Extended, Scalar};

pub type Latency = latency::LatencyFunction<f64>;
pub type Game = game::CongestionGame<f64>;
pub type Profile = game::FlowProfile<f64>;
pub type Network = network::NetworkCongestionGame<f64>;
