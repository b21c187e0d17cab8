//! Simulator of wind-disturbed HAPS base stations serving moving maritime
//! hotspots, and a PPO agent that learns to position them.

pub mod channel;
pub mod env;
pub mod error;
pub mod geom;
pub mod harness;
pub mod mobility;
pub mod ppo;
pub mod rng;
pub mod wind;

pub use error::{Result, SimError};
