//! Non-ideal joint actuator: PD torque, backlash deadband, velocity-
//! dependent torque saturation, efficiency scaling, and per-episode
//! parameter randomization.
//!
//! The torque-speed envelope tau0 * (1 - |qdot| / qdot_max) is floored at
//! zero: past no-load speed a motor cannot produce accelerating torque,
//! and an unfloored envelope would make the clip bounds cross.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorParams {
    /// Proportional gain, N*m/rad.
    pub kp: f64,
    /// Derivative gain, N*m*s/rad.
    pub kd: f64,
    /// Backlash deadband half-width, rad.
    pub backlash_eps: f64,
    /// Stall torque, N*m.
    pub stall_torque: f64,
    /// No-load speed, rad/s.
    pub no_load_speed: f64,
    /// Efficiency factor in (0, 1].
    pub efficiency: f64,
}

impl ActuatorParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.kp > 0.0
            && self.kd >= 0.0
            && self.backlash_eps >= 0.0
            && self.stall_torque > 0.0
            && self.no_load_speed > 0.0
            && self.efficiency > 0.0
            && self.efficiency <= 1.0;
        if !ok {
            return Err(SimError::config(
                "actuator",
                format!("invalid parameters {self:?}"),
            ));
        }
        Ok(())
    }
}

impl Default for ActuatorParams {
    fn default() -> Self {
        ActuatorParams {
            kp: 3.0,
            kd: 0.1,
            backlash_eps: 0.005,
            stall_torque: 0.8,
            no_load_speed: 10.0,
            efficiency: 1.0,
        }
    }
}

/// Uniform sampling interval per parameter, resampled every episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActuatorRanges {
    pub kp: [f64; 2],
    pub kd: [f64; 2],
    pub backlash_eps: [f64; 2],
    pub stall_torque: [f64; 2],
    pub no_load_speed: [f64; 2],
    pub efficiency: [f64; 2],
}

impl Default for ActuatorRanges {
    fn default() -> Self {
        // intervals are artifact defaults, documented in config
        ActuatorRanges {
            kp: [2.0, 4.0],
            kd: [0.05, 0.15],
            backlash_eps: [0.0, 0.01],
            stall_torque: [0.6, 1.0],
            no_load_speed: [8.0, 12.0],
            efficiency: [0.7, 1.0],
        }
    }
}

impl ActuatorRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [
            ("kp", self.kp),
            ("kd", self.kd),
            ("backlash_eps", self.backlash_eps),
            ("stall_torque", self.stall_torque),
            ("no_load_speed", self.no_load_speed),
            ("efficiency", self.efficiency),
        ] {
            if lo > hi {
                return Err(SimError::config(
                    format!("actuator.{name}"),
                    format!("interval [{lo}, {hi}] is not well-ordered"),
                ));
            }
        }
        // endpoints must themselves be valid parameter values
        let lo = ActuatorParams {
            kp: self.kp[0],
            kd: self.kd[0],
            backlash_eps: self.backlash_eps[0],
            stall_torque: self.stall_torque[0],
            no_load_speed: self.no_load_speed[0],
            efficiency: self.efficiency[0],
        };
        lo.validate()?;
        let hi = ActuatorParams {
            kp: self.kp[1],
            kd: self.kd[1],
            backlash_eps: self.backlash_eps[1],
            stall_torque: self.stall_torque[1],
            no_load_speed: self.no_load_speed[1],
            efficiency: self.efficiency[1],
        };
        hi.validate()
    }
}

/// PD control torque.
pub fn pd_torque(params: &ActuatorParams, q_ref: f64, q_m: f64, qd_ref: f64, qd_m: f64) -> f64 {
    params.kp * (q_ref - q_m) + params.kd * (qd_ref - qd_m)
}

/// Backlash deadband: no torque while the position error is within eps.
pub fn apply_backlash(params: &ActuatorParams, tau_c: f64, q_ref: f64, q_m: f64) -> f64 {
    if (q_ref - q_m).abs() < params.backlash_eps {
        0.0
    } else {
        tau_c
    }
}

/// Torque-speed envelope clip plus efficiency scaling.
pub fn saturate(params: &ActuatorParams, tau_b: f64, qd: f64) -> f64 {
    let envelope = params.stall_torque * (1.0 - qd.abs() / params.no_load_speed).max(0.0);
    params.efficiency * tau_b.clamp(-envelope, envelope)
}

/// Full actuator pipeline: PD, backlash, saturation.
pub fn step_actuator(
    params: &ActuatorParams,
    q_ref: f64,
    q_m: f64,
    qd_ref: f64,
    qd_m: f64,
) -> f64 {
    let tau_c = pd_torque(params, q_ref, q_m, qd_ref, qd_m);
    let tau_b = apply_backlash(params, tau_c, q_ref, q_m);
    saturate(params, tau_b, qd_m)
}

fn sample_interval(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Draws one parameter set uniformly from the configured ranges.
/// Draw order is fixed so identical stream state gives identical samples.
pub fn sample_params(ranges: &ActuatorRanges, rng: &mut impl Rng) -> Result<ActuatorParams> {
    ranges.validate()?;
    Ok(ActuatorParams {
        kp: sample_interval(rng, ranges.kp),
        kd: sample_interval(rng, ranges.kd),
        backlash_eps: sample_interval(rng, ranges.backlash_eps),
        stall_torque: sample_interval(rng, ranges.stall_torque),
        no_load_speed: sample_interval(rng, ranges.no_load_speed),
        efficiency: sample_interval(rng, ranges.efficiency),
    })
}
