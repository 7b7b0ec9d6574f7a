//! Dense virtual-taxel tactile simulation for dexterous in-hand
//! manipulation: a 12-DoF five-finger hand with 600 fingertip taxels,
//! non-ideal actuator models, real/sim force calibration, task rewards,
//! and seeded vectorized episode harnesses for grasping and in-hand
//! rotation.

pub mod actuator;
pub mod calibration;
pub mod env;
pub mod error;
pub mod geometry;
pub mod hand;
pub mod math;
pub mod randomization;
pub mod rewards;
pub mod tactile;

pub use error::{Result, SimError};
