//! Episode traces: a JSON header with full provenance plus per-step and
//! per-taxel CSV tables.
//!
//! Serialization is byte-deterministic: floats use Rust's shortest
//! round-trip formatting and field order is fixed, so two runs with the
//! same seed produce identical bytes. Determinism checks diff the files
//! directly.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hand::NUM_FINGERS;
use crate::randomization::EpisodeDraw;

use super::policy::Policy;
use super::{Env, ObsLayout, RewardTerms, Task};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema_version: u32,
    pub task: Task,
    pub master_seed: u64,
    pub stream_index: u64,
    pub steps_budget: usize,
    pub reward_terms: Vec<String>,
    pub draw: EpisodeDraw,
    pub layout: ObsLayout,
}

#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub action: Vec<f64>,
    pub reward: f64,
    pub terms: Vec<f64>,
    pub object_position: [f64; 3],
    /// Unit quaternion [w, x, y, z].
    pub object_orientation: [f64; 4],
    pub success_event: bool,
    pub terminated: bool,
    pub forces: [f64; NUM_FINGERS],
    pub centers: [[f64; 3]; NUM_FINGERS],
    pub active_counts: [usize; NUM_FINGERS],
}

#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub header: TraceHeader,
    pub steps: Vec<StepRecord>,
}

impl EpisodeTrace {
    pub fn successes(&self) -> usize {
        self.steps.iter().filter(|s| s.success_event).count()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn header_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.header)?)
    }

    /// Per-step table. One row per executed step.
    pub fn steps_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("step,reward");
        for name in &self.header.reward_terms {
            let _ = write!(out, ",{name}");
        }
        out.push_str(
            ",obj_x,obj_y,obj_z,quat_w,quat_x,quat_y,quat_z,success_event,terminated",
        );
        let action_dim = self.steps.first().map_or(0, |s| s.action.len());
        for i in 0..action_dim {
            let _ = write!(out, ",action_{i}");
        }
        out.push('\n');
        for s in &self.steps {
            let _ = write!(out, "{},{:?}", s.step, s.reward);
            for t in &s.terms {
                let _ = write!(out, ",{t:?}");
            }
            let _ = write!(
                out,
                ",{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}",
                s.object_position[0],
                s.object_position[1],
                s.object_position[2],
                s.object_orientation[0],
                s.object_orientation[1],
                s.object_orientation[2],
                s.object_orientation[3],
                s.success_event as u8,
                s.terminated as u8,
            );
            for a in &s.action {
                let _ = write!(out, ",{a:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Per-fingertip tactile table. One row per step per finger.
    pub fn tactile_csv(&self) -> String {
        let mut out = String::from("step,finger,total_force,center_x,center_y,center_z,active_count\n");
        for s in &self.steps {
            for f in 0..NUM_FINGERS {
                let c = s.centers[f];
                let _ = writeln!(
                    out,
                    "{},{},{:?},{:?},{:?},{:?},{}",
                    s.step, f, s.forces[f], c[0], c[1], c[2], s.active_counts[f]
                );
            }
        }
        out
    }

    /// Writes `trace_<index>.json`, `trace_<index>_steps.csv`, and
    /// `trace_<index>_tactile.csv` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let index = self.header.stream_index;
        std::fs::write(dir.join(format!("trace_{index}.json")), self.header_json()?)?;
        std::fs::write(dir.join(format!("trace_{index}_steps.csv")), self.steps_csv())?;
        std::fs::write(
            dir.join(format!("trace_{index}_tactile.csv")),
            self.tactile_csv(),
        )?;
        Ok(())
    }
}

/// Resets the environment and runs it for its full step budget (or until
/// termination), recording every step. Policy failures abort with context;
/// termination is a normal exit.
pub fn run_episode(env: &mut Env, policy: &mut dyn Policy) -> Result<EpisodeTrace> {
    let mut observation = env.reset()?;
    let state = env.state().expect("reset populates state");
    let header = TraceHeader {
        schema_version: TRACE_SCHEMA_VERSION,
        task: env.config.task,
        master_seed: env.stream.master_seed,
        stream_index: env.stream.index,
        steps_budget: env.config.steps,
        reward_terms: RewardTerms::names(env.config.task)
            .into_iter()
            .map(str::to_string)
            .collect(),
        draw: state.draw.clone(),
        layout: env.layout.clone(),
    };
    let mut steps = Vec::with_capacity(env.config.steps);
    for step in 0..env.config.steps {
        let action = policy.act(&observation, step)?;
        let result = env.step(&action)?;
        let state = env.state().expect("state persists across steps");
        let mut forces = [0.0; NUM_FINGERS];
        let mut centers = [[0.0; 3]; NUM_FINGERS];
        let mut active_counts = [0usize; NUM_FINGERS];
        for (i, f) in state.tactile.iter().enumerate() {
            forces[i] = f.total_force;
            centers[i] = [f.contact_center.x, f.contact_center.y, f.contact_center.z];
            active_counts[i] = f.active_count;
        }
        let q = state.body.orientation;
        steps.push(StepRecord {
            step,
            action,
            reward: result.reward,
            terms: result.terms.values(),
            object_position: [
                state.body.position.x,
                state.body.position.y,
                state.body.position.z,
            ],
            object_orientation: [q.w, q.i, q.j, q.k],
            success_event: result.success_event,
            terminated: result.terminated,
            forces,
            centers,
            active_counts,
        });
        if result.terminated {
            break;
        }
        observation = result.observation;
    }
    Ok(EpisodeTrace { header, steps })
}

#[cfg(test)]
mod tests {
    use super::super::policy::{ScriptedClosePolicy, ZeroPolicy};
    use super::super::{EnvConfig, Task};
    use super::*;
    use crate::randomization::EnvStream;

    fn short_config(task: Task) -> EnvConfig {
        EnvConfig {
            task,
            steps: 25,
            ..Default::default()
        }
    }

    fn run(task: Task, seed: u64) -> EpisodeTrace {
        let mut env = Env::new(short_config(task), EnvStream::new(seed, 0)).unwrap();
        let mut policy = ScriptedClosePolicy::new(&env.model, 10);
        run_episode(&mut env, &mut policy).unwrap()
    }

    #[test]
    fn trace_files_are_byte_identical_across_runs() {
        let a = run(Task::Grasp, 42);
        let b = run(Task::Grasp, 42);
        assert_eq!(a.header_json().unwrap(), b.header_json().unwrap());
        assert_eq!(a.steps_csv(), b.steps_csv());
        assert_eq!(a.tactile_csv(), b.tactile_csv());
    }

    #[test]
    fn different_seeds_differ() {
        let a = run(Task::Grasp, 1);
        let b = run(Task::Grasp, 2);
        assert_ne!(a.steps_csv(), b.steps_csv());
    }

    #[test]
    fn csv_shape_matches_steps() {
        let t = run(Task::Rotate, 5);
        let steps_lines = t.steps_csv().lines().count();
        assert_eq!(steps_lines, t.steps.len() + 1);
        let tactile_lines = t.tactile_csv().lines().count();
        assert_eq!(tactile_lines, t.steps.len() * NUM_FINGERS + 1);
        // column count is constant
        let csv = t.steps_csv();
        let mut widths = csv.lines().map(|l| l.split(',').count());
        let first = widths.next().unwrap();
        assert!(widths.all(|w| w == first));
    }

    #[test]
    fn header_round_trips_through_json() {
        let t = run(Task::Grasp, 9);
        let text = t.header_json().unwrap();
        let parsed: TraceHeader = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.schema_version, TRACE_SCHEMA_VERSION);
        assert_eq!(parsed.layout, t.header.layout);
        assert_eq!(parsed.stream_index, 0);
    }

    #[test]
    fn zero_policy_trace_runs_to_termination_or_budget() {
        let mut env = Env::new(short_config(Task::Grasp), EnvStream::new(3, 0)).unwrap();
        let mut policy = ZeroPolicy;
        let t = run_episode(&mut env, &mut policy).unwrap();
        assert!(!t.steps.is_empty());
        assert!(t.steps.len() <= 25);
        if let Some(last) = t.steps.last() {
            if t.steps.len() < 25 {
                assert!(last.terminated);
            }
        }
    }

    #[test]
    fn write_to_dir_creates_three_files() {
        let t = run(Task::Grasp, 11);
        let dir = std::env::temp_dir().join(format!("taxelsim_trace_test_{}", std::process::id()));
        t.write_to_dir(&dir).unwrap();
        for name in ["trace_0.json", "trace_0_steps.csv", "trace_0_tactile.csv"] {
            assert!(dir.join(name).exists(), "{name} missing");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
