//! Policies: anything that maps an observation to a 12-vector of joint
//! position targets. Ships a few scripted baselines plus a line-protocol
//! adapter for external controllers.

use std::io::{BufRead, Write};

use crate::error::{Result, SimError};
use crate::hand::{HandModel, DOF};

use super::Observation;

pub trait Policy {
    fn act(&mut self, observation: &Observation, step: usize) -> Result<Vec<f64>>;
}

/// Holds every joint at zero. Useful for plant-only diagnostics.
pub struct ZeroPolicy;

impl Policy for ZeroPolicy {
    fn act(&mut self, _observation: &Observation, _step: usize) -> Result<Vec<f64>> {
        Ok(vec![0.0; DOF])
    }
}

/// Ramps the flexion joints toward a closed fist over `ramp_steps`, leaving
/// abduction joints at zero. The canonical grasp baseline.
pub struct ScriptedClosePolicy {
    flexion: Vec<usize>,
    targets: Vec<f64>,
    pub ramp_steps: usize,
}

impl ScriptedClosePolicy {
    pub fn new(model: &HandModel, ramp_steps: usize) -> ScriptedClosePolicy {
        let mut flexion = Vec::new();
        let mut targets = vec![0.0; DOF];
        for finger in &model.fingers {
            for (ji, joint) in finger.joints.iter().enumerate() {
                // flexion axes lie in the palm plane; abduction axes point
                // out of it
                if joint.axis.z.abs() < 0.5 {
                    let g = finger.joint_offset + ji;
                    flexion.push(g);
                    targets[g] = 0.8 * joint.upper;
                }
            }
        }
        ScriptedClosePolicy {
            flexion,
            targets,
            ramp_steps: ramp_steps.max(1),
        }
    }
}

impl Policy for ScriptedClosePolicy {
    fn act(&mut self, _observation: &Observation, step: usize) -> Result<Vec<f64>> {
        let alpha = ((step + 1) as f64 / self.ramp_steps as f64).min(1.0);
        let mut action = vec![0.0; DOF];
        for &g in &self.flexion {
            action[g] = alpha * self.targets[g];
        }
        Ok(action)
    }
}

/// Closes the fingers, then superimposes a slow sinusoidal twiddle on the
/// flexion joints with per-finger phase offsets. A rotation-task baseline
/// that keeps contact while perturbing the object.
pub struct ScriptedRotatePolicy {
    close: ScriptedClosePolicy,
    pub amplitude: f64,
    pub period_steps: usize,
}

impl ScriptedRotatePolicy {
    pub fn new(model: &HandModel) -> ScriptedRotatePolicy {
        ScriptedRotatePolicy {
            close: ScriptedClosePolicy::new(model, 30),
            amplitude: 0.15,
            period_steps: 60,
        }
    }
}

impl Policy for ScriptedRotatePolicy {
    fn act(&mut self, observation: &Observation, step: usize) -> Result<Vec<f64>> {
        let mut action = self.close.act(observation, step)?;
        if step >= self.close.ramp_steps {
            let phase =
                std::f64::consts::TAU * (step - self.close.ramp_steps) as f64
                    / self.period_steps as f64;
            for (i, &g) in self.close.flexion.iter().enumerate() {
                action[g] += self.amplitude * (phase + i as f64 * 0.7).sin();
            }
        }
        Ok(action)
    }
}

/// Line protocol over arbitrary reader/writer pairs: writes the
/// observation as one newline-delimited JSON array, reads back one JSON
/// array of 12 targets. Wire stdio of a child process here to drive the
/// simulation externally.
pub struct LineProtocolPolicy<R: BufRead, W: Write> {
    reader: R,
    writer: W,
    /// Send the critic vector instead of the actor vector.
    pub send_critic: bool,
}

impl<R: BufRead, W: Write> LineProtocolPolicy<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        LineProtocolPolicy {
            reader,
            writer,
            send_critic: false,
        }
    }
}

impl<R: BufRead, W: Write> Policy for LineProtocolPolicy<R, W> {
    fn act(&mut self, observation: &Observation, step: usize) -> Result<Vec<f64>> {
        let wrap = |e: Box<dyn std::error::Error + Send + Sync>| SimError::Policy {
            step,
            source: e,
        };
        let values = if self.send_critic {
            &observation.critic
        } else {
            &observation.actor
        };
        let line = serde_json::to_string(values).map_err(|e| wrap(e.into()))?;
        writeln!(self.writer, "{line}").map_err(|e| wrap(e.into()))?;
        self.writer.flush().map_err(|e| wrap(e.into()))?;
        let mut reply = String::new();
        let n = self.reader.read_line(&mut reply).map_err(|e| wrap(e.into()))?;
        if n == 0 {
            return Err(wrap("external policy closed its output".into()));
        }
        let action: Vec<f64> =
            serde_json::from_str(reply.trim()).map_err(|e| wrap(e.into()))?;
        if action.len() != DOF {
            return Err(wrap(
                format!("expected {DOF} action values, got {}", action.len()).into(),
            ));
        }
        Ok(action)
    }
}
