//! Vectorized episode execution for the two tasks: inverted-catch
//! force-adaptive grasping and shifting-goal in-hand rotation.
//!
//! One `Env` instance owns one environment: a hand, one object, a seeded
//! randomization stream, and the episode state. Instances are fully
//! independent, so a batch runner can fan them across threads. Stepping
//! within an instance is strictly sequential.

pub mod physics;
pub mod policy;
pub mod trace;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationMap;
use crate::error::{Result, SimError};
use crate::geometry::{ConvexMesh, ObjectShape};
use crate::hand::{
    forward_kinematics, HandModel, JointState, TaxelFrameBatch, DOF, NUM_FINGERS,
};
use crate::math::{encode6d, rot_distance, Mat3, Transform, Vec3};
use crate::randomization::{draw_episode, EnvStream, EpisodeDraw, RandomizationSpec};
use crate::rewards::{
    grasp_reward, rotation_step_reward, GraspRewardConfig, GraspRewardTerms,
    RotationRewardConfig, RotationRewardTerms,
};
use crate::tactile::{sense_hand, ContactMaterial, FingertipTactile};
use physics::{is_finite_body, substep_object, ObjectBody, PhysicsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Grasp,
    Rotate,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Grasp => write!(f, "grasp"),
            Task::Rotate => write!(f, "rotate"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectConfig {
    #[serde(default)]
    pub shape: Option<ObjectShape>,
    /// Convex mesh loaded from an OFF file; exclusive with `shape`.
    #[serde(default)]
    pub off_path: Option<PathBuf>,
}

impl ObjectConfig {
    pub fn resolve(&self) -> Result<ObjectShape> {
        match (&self.shape, &self.off_path) {
            (Some(s), None) => {
                s.validate()?;
                Ok(s.clone())
            }
            (None, Some(p)) => {
                let text = std::fs::read_to_string(p)?;
                Ok(ObjectShape::ConvexMesh(ConvexMesh::from_off(&text)?))
            }
            _ => Err(SimError::config(
                "object",
                "exactly one of `shape` or `off_path` must be set",
            )),
        }
    }
}

/// Episode configuration, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    pub task: Task,
    /// Hand model config path; the built-in model when absent.
    pub hand_model_path: Option<PathBuf>,
    pub object: ObjectConfig,
    pub material: ContactMaterial,
    pub randomization: RandomizationSpec,
    pub grasp_reward: GraspRewardConfig,
    pub rotation_reward: RotationRewardConfig,
    /// Calibration map path; a uniform map when absent.
    pub calibration_path: Option<PathBuf>,
    /// Step budget per episode.
    pub steps: usize,
    /// Control period, seconds.
    pub dt: f64,
    /// Physics substeps per control step.
    pub substeps: usize,
    /// Per-joint effective inertia for the joint plant.
    pub joint_inertia: f64,
    /// Per-joint viscous damping for the joint plant.
    pub joint_damping: f64,
    /// Rotation-task goal axis (world frame, normalized at load).
    pub rotation_axis: [f64; 3],
    /// Failure plane: episode terminates when the object falls below it.
    pub floor_z: f64,
    /// Object spawn height for the rotation task.
    pub hold_height: f64,
    /// Optional Gaussian noise on the observed object Z (grasp task).
    pub z_noise_std: f64,
    pub gravity: f64,
    pub tangent_damping: f64,
    /// Disable contact forces entirely (diagnostics).
    pub contacts_enabled: bool,
    /// Stable-hold success: object speed below this ...
    pub hold_speed_threshold: f64,
    /// ... with at least this many fingers in contact ...
    pub hold_min_contacts: usize,
    /// ... for this many consecutive steps.
    pub hold_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            task: Task::Grasp,
            hand_model_path: None,
            object: ObjectConfig {
                shape: Some(ObjectShape::Sphere { radius: 0.03 }),
                off_path: None,
            },
            material: ContactMaterial::default(),
            randomization: RandomizationSpec::default(),
            grasp_reward: GraspRewardConfig::default(),
            rotation_reward: RotationRewardConfig::default(),
            calibration_path: None,
            steps: 200,
            dt: 1.0 / 60.0,
            substeps: 4,
            joint_inertia: 1e-4,
            joint_damping: 0.01,
            rotation_axis: [0.0, 0.0, 1.0],
            floor_z: -0.05,
            hold_height: 0.05,
            z_noise_std: 0.0,
            gravity: 9.81,
            tangent_damping: 100.0,
            contacts_enabled: true,
            hold_speed_threshold: 0.05,
            hold_min_contacts: 2,
            hold_steps: 30,
        }
    }
}

impl EnvConfig {
    pub fn load(path: &std::path::Path) -> Result<EnvConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: EnvConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(SimError::config("steps", "must be at least 1"));
        }
        if self.dt <= 0.0 || self.substeps == 0 {
            return Err(SimError::config("dt/substeps", "must be positive"));
        }
        if self.joint_inertia <= 0.0 {
            return Err(SimError::config("joint_inertia", "must be positive"));
        }
        let axis = Vec3::from(self.rotation_axis);
        if axis.norm() < 1e-9 {
            return Err(SimError::config("rotation_axis", "must be nonzero"));
        }
        self.object.resolve()?;
        self.material.validate()?;
        self.randomization.validate()?;
        self.grasp_reward.validate()?;
        self.rotation_reward.validate()?;
        Ok(())
    }

    pub fn load_hand_model(&self) -> Result<HandModel> {
        match &self.hand_model_path {
            Some(p) => HandModel::load(p),
            None => Ok(HandModel::default_model()),
        }
    }

    pub fn load_calibration(&self) -> Result<CalibrationMap> {
        match &self.calibration_path {
            Some(p) => CalibrationMap::load(p),
            None => Ok(CalibrationMap::uniform(
                self.randomization.actuator.stall_torque[1],
            )),
        }
    }
}

/// One slice of the flat observation vector.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ObsSlice {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ObsLayout {
    pub actor: Vec<ObsSlice>,
    pub critic: Vec<ObsSlice>,
}

fn layout_from(rows: &[(&str, usize)]) -> Vec<ObsSlice> {
    let mut out = Vec::with_capacity(rows.len());
    let mut offset = 0;
    for (name, len) in rows {
        out.push(ObsSlice {
            name: name.to_string(),
            offset,
            len: *len,
        });
        offset += len;
    }
    out
}

impl ObsLayout {
    pub fn for_task(task: Task) -> ObsLayout {
        match task {
            Task::Grasp => {
                let rows = [
                    ("hand_joint_angles", 12),
                    ("hand_joint_torques", 12),
                    ("object_position", 3),
                    ("object_linear_velocity", 3),
                    ("contact_force", 5),
                    ("contact_center", 15),
                    ("fingertip_positions", 15),
                    ("force_command", 1),
                ];
                let actor = layout_from(&rows);
                ObsLayout {
                    critic: actor.clone(),
                    actor,
                }
            }
            Task::Rotate => {
                let actor_rows = [
                    ("hand_joint_angles", 12),
                    ("relative_target_orientation", 6),
                    ("last_actions", 12),
                    ("contact_center", 15),
                    ("contact_force", 5),
                    ("fingertip_positions", 15),
                ];
                let critic_rows = [
                    ("hand_joint_angles", 12),
                    ("relative_target_orientation", 6),
                    ("last_actions", 12),
                    ("contact_center", 15),
                    ("contact_force", 5),
                    ("fingertip_positions", 15),
                    ("object_orientation", 6),
                    ("fingertip_velocities", 30),
                    ("fingertip_rotations", 30),
                    ("hand_joint_velocities", 12),
                    ("object_linear_velocity", 3),
                    ("object_angular_velocity", 3),
                ];
                ObsLayout {
                    actor: layout_from(&actor_rows),
                    critic: layout_from(&critic_rows),
                }
            }
        }
    }

    pub fn actor_dim(&self) -> usize {
        self.actor.iter().map(|s| s.len).sum()
    }

    pub fn critic_dim(&self) -> usize {
        self.critic.iter().map(|s| s.len).sum()
    }

    /// Extracts one named slice from a packed vector.
    pub fn unpack<'a>(&self, critic: bool, data: &'a [f64], name: &str) -> Option<&'a [f64]> {
        let slices = if critic { &self.critic } else { &self.actor };
        slices
            .iter()
            .find(|s| s.name == name)
            .map(|s| &data[s.offset..s.offset + s.len])
    }
}

#[derive(Debug, Clone)]
pub struct Observation {
    pub actor: Vec<f64>,
    pub critic: Vec<f64>,
}

/// Per-step reward breakdown for either task.
#[derive(Debug, Clone, Copy)]
pub enum RewardTerms {
    Grasp(GraspRewardTerms),
    Rotation(RotationRewardTerms),
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        match self {
            RewardTerms::Grasp(t) => t.total(),
            RewardTerms::Rotation(t) => t.total(),
        }
    }

    pub fn names(task: Task) -> Vec<&'static str> {
        match task {
            Task::Grasp => vec![
                "r_torque", "r_force", "r_diff", "r_outter", "r_action", "r_vel", "r_terminal",
            ],
            Task::Rotate => vec!["r_close", "r_action", "r_bonus"],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            RewardTerms::Grasp(t) => vec![
                t.torque, t.force, t.diff, t.outer, t.action, t.velocity, t.terminal,
            ],
            RewardTerms::Rotation(t) => vec![t.close_to_goal, t.action, t.bonus],
        }
    }
}

pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terms: RewardTerms,
    pub terminated: bool,
    pub success_event: bool,
}

/// Full mutable state of one environment instance.
pub struct EnvState {
    pub joints: JointState,
    pub body: ObjectBody,
    pub tactile: Vec<FingertipTactile>,
    pub applied_torques: Vec<f64>,
    pub last_action: Vec<f64>,
    pub f_cmd: f64,
    /// Object orientation at reset; rotation goals compose onto it.
    pub goal_base: Mat3,
    pub success_count: usize,
    pub start_position: Vec3,
    pub step_index: usize,
    pub terminated: bool,
    pub hold_counter: usize,
    pub prev_fingertip_poses: Vec<Transform>,
    pub frames: TaxelFrameBatch,
    pub draw: EpisodeDraw,
}

pub struct Env {
    pub config: EnvConfig,
    pub model: HandModel,
    pub calibration: CalibrationMap,
    pub stream: EnvStream,
    pub layout: ObsLayout,
    state: Option<EnvState>,
    rotation_axis: Vec3,
    base_shape: ObjectShape,
}

impl Env {
    pub fn new(config: EnvConfig, stream: EnvStream) -> Result<Env> {
        config.validate()?;
        let model = config.load_hand_model()?;
        let calibration = config.load_calibration()?;
        let base_shape = config.object.resolve()?;
        let layout = ObsLayout::for_task(config.task);
        let rotation_axis = Vec3::from(config.rotation_axis).normalize();
        Ok(Env {
            config,
            model,
            calibration,
            stream,
            layout,
            state: None,
            rotation_axis,
            base_shape,
        })
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    pub fn state_mut(&mut self) -> Option<&mut EnvState> {
        self.state.as_mut()
    }

    /// The current rotation goal. Goals cycle through the four quarter
    /// turns about the task axis, so four successes land back on the
    /// initial goal exactly.
    pub fn current_goal(&self) -> Option<Mat3> {
        let state = self.state.as_ref()?;
        Some(goal_for_count(
            &self.rotation_axis,
            &state.goal_base,
            state.success_count,
        ))
    }

    pub fn reset(&mut self) -> Result<Observation> {
        let draw = draw_episode(&self.config.randomization, &mut self.stream)?;
        let shape = self.base_shape.scaled(draw.object_scale);
        let mut body = ObjectBody::new(
            shape,
            draw.object_mass,
            draw.friction,
            draw.restitution,
            draw.damping,
        )?;
        match self.config.task {
            Task::Grasp => {
                body.position = Vec3::new(0.0, 0.0, draw.drop_height);
                body.orientation = nalgebra::UnitQuaternion::from_quaternion(
                    nalgebra::Quaternion::new(
                        draw.initial_orientation[0],
                        draw.initial_orientation[1],
                        draw.initial_orientation[2],
                        draw.initial_orientation[3],
                    ),
                );
            }
            Task::Rotate => {
                // canonical in-hand pose
                body.position = Vec3::new(0.0, 0.0, self.config.hold_height);
                body.orientation = nalgebra::UnitQuaternion::identity();
            }
        }
        let mut joints = JointState::zeros(DOF);
        joints.positions.copy_from_slice(&self.model.rest_pose);
        self.model.clamp_to_limits(&mut joints.positions);
        let frames = forward_kinematics(&self.model, &joints)?;
        let tactile = sense_hand(&frames, &body.shape, &body.pose(), &self.config.material)?;
        let goal_base = body.orientation.to_rotation_matrix().into_inner();
        let start_position = body.position;
        let prev_fingertip_poses = frames.fingertip_poses.clone();
        let state = EnvState {
            joints,
            body,
            tactile,
            applied_torques: vec![0.0; DOF],
            last_action: self.model.rest_pose.clone(),
            f_cmd: draw.f_cmd,
            goal_base,
            success_count: 0,
            start_position,
            step_index: 0,
            terminated: false,
            hold_counter: 0,
            prev_fingertip_poses,
            frames,
            draw,
        };
        self.state = Some(state);
        self.observe()
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        let task = self.config.task;
        let state = self
            .state
            .as_mut()
            .ok_or_else(|| SimError::config("env", "step before reset"))?;
        if state.terminated {
            return Err(SimError::EpisodeTerminated(state.step_index));
        }
        if action.len() != DOF {
            return Err(SimError::ModelMismatch {
                expected: DOF,
                got: action.len(),
            });
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(SimError::DegenerateInput("non-finite action".into()));
        }

        // target positions clamp to joint limits
        let mut target = action.to_vec();
        self.model.clamp_to_limits(&mut target);

        // (1) actuator torques, held for the control step
        for (j, &q_ref) in target.iter().enumerate() {
            state.applied_torques[j] = crate::actuator::step_actuator(
                &state.draw.actuators[j],
                q_ref,
                state.joints.positions[j],
                0.0,
                state.joints.velocities[j],
            );
        }

        // (2) joint plant: damped second-order model, semi-implicit Euler
        let h = self.config.dt / self.config.substeps as f64;
        for _ in 0..self.config.substeps {
            for j in 0..DOF {
                let qdd = (state.applied_torques[j]
                    - self.config.joint_damping * state.joints.velocities[j])
                    / self.config.joint_inertia;
                state.joints.velocities[j] += qdd * h;
                state.joints.positions[j] += state.joints.velocities[j] * h;
            }
            clamp_with_velocity_zeroing(&self.model, &mut state.joints);
        }

        // (3) taxel FK + tactile sensing
        state.prev_fingertip_poses = state.frames.fingertip_poses.clone();
        state.frames = forward_kinematics(&self.model, &state.joints)?;
        state.tactile = sense_hand(
            &state.frames,
            &state.body.shape,
            &state.body.pose(),
            &self.config.material,
        )?;

        // (4) object dynamics against the (quasi-static) taxel positions
        let taxels: Vec<Vec3> = state
            .frames
            .world_positions
            .iter()
            .flatten()
            .copied()
            .collect();
        let physics = PhysicsParams {
            gravity: self.config.gravity,
            tangent_damping: self.config.tangent_damping,
            contacts_enabled: self.config.contacts_enabled,
        };
        for _ in 0..self.config.substeps {
            substep_object(&mut state.body, &taxels, &self.config.material, &physics, h)?;
        }

        if !is_finite_body(&state.body)
            || state.joints.positions.iter().any(|q| !q.is_finite())
            || state.joints.velocities.iter().any(|q| !q.is_finite())
        {
            state.terminated = true;
            return Err(SimError::PoisonedState {
                step: state.step_index,
                detail: "non-finite state after integration".into(),
            });
        }

        // (5) rewards, (6) termination, (7) goal shifting
        let fell = state.body.position.z < self.config.floor_z;
        let mut success_event = false;
        let terms = match task {
            Task::Grasp => {
                let contact = finger_contacts(&state.tactile);
                let forces = finger_forces(&state.tactile);
                let roots = self.model.root_joint_indices();
                let mut torques = [0.0; NUM_FINGERS];
                for (i, &j) in roots.iter().enumerate() {
                    torques[i] = state.applied_torques[j].abs();
                }
                let inner = self.model.inner_joint_indices();
                let outer = self.model.outer_joint_indices();
                let q_inner = [
                    state.joints.positions[inner[0]],
                    state.joints.positions[inner[1]],
                    state.joints.positions[inner[2]],
                    state.joints.positions[inner[3]],
                ];
                let q_outer = [
                    state.joints.positions[outer[0]],
                    state.joints.positions[outer[1]],
                    state.joints.positions[outer[2]],
                    state.joints.positions[outer[3]],
                ];
                let terms = grasp_reward(
                    &torques,
                    &forces,
                    &contact,
                    state.f_cmd,
                    &q_inner,
                    &q_outer,
                    action,
                    &state.last_action,
                    &state.joints.velocities,
                    fell,
                    &self.config.grasp_reward,
                );
                // stable-hold success tracking
                let n_contacts = contact.iter().filter(|c| **c).count();
                let slow = state.body.linear_velocity.norm() < self.config.hold_speed_threshold;
                if slow && n_contacts >= self.config.hold_min_contacts && !fell {
                    state.hold_counter += 1;
                    if state.hold_counter == self.config.hold_steps {
                        success_event = true;
                        state.success_count += 1;
                    }
                } else {
                    state.hold_counter = 0;
                }
                RewardTerms::Grasp(terms)
            }
            Task::Rotate => {
                let goal = goal_for_count(
                    &self.rotation_axis,
                    &state.goal_base,
                    state.success_count,
                );
                let rot = state.body.orientation.to_rotation_matrix().into_inner();
                let d_rot = rot_distance(&rot, &goal);
                let d_pos = (state.body.position - state.start_position).norm();
                let terms = rotation_step_reward(
                    d_rot,
                    d_pos,
                    action,
                    &state.last_action,
                    &self.config.rotation_reward,
                );
                if d_rot < self.config.rotation_reward.rot_threshold
                    && d_pos < self.config.rotation_reward.pos_threshold
                {
                    // shifting goal: the next quarter turn about the same axis
                    success_event = true;
                    state.success_count += 1;
                }
                RewardTerms::Rotation(terms)
            }
        };

        state.last_action = action.to_vec();
        state.step_index += 1;
        state.terminated = fell;
        let terminated = state.terminated;
        let reward = terms.total();
        let observation = self.observe()?;
        Ok(StepResult {
            observation,
            reward,
            terms,
            terminated,
            success_event,
        })
    }

    /// Packs the current state into actor and critic vectors per the
    /// task's layout.
    pub fn observe(&mut self) -> Result<Observation> {
        let task = self.config.task;
        let dt = self.config.dt;
        let z_noise = if self.config.z_noise_std > 0.0 && task == Task::Grasp {
            use rand::Rng;
            use rand_distr::StandardNormal;
            self.stream.rng().sample::<f64, _>(StandardNormal) * self.config.z_noise_std
        } else {
            0.0
        };
        let state = self
            .state
            .as_ref()
            .ok_or_else(|| SimError::config("env", "observe before reset"))?;
        let calibration = &self.calibration;

        let mut actor = Vec::with_capacity(self.layout.actor_dim());
        let mut critic = Vec::with_capacity(self.layout.critic_dim());

        match task {
            Task::Grasp => {
                actor.extend_from_slice(&state.joints.positions);
                for j in 0..DOF {
                    actor.push(
                        calibration.normalize_torque(state.applied_torques[j].abs(), j as u32)?,
                    );
                }
                actor.push(state.body.position.x);
                actor.push(state.body.position.y);
                actor.push(state.body.position.z + z_noise);
                actor.extend_from_slice(state.body.linear_velocity.as_slice());
                for f in &state.tactile {
                    actor.push(f.total_force);
                }
                for f in &state.tactile {
                    actor.extend_from_slice(f.contact_center.as_slice());
                }
                for pose in &state.frames.fingertip_poses {
                    actor.extend_from_slice(pose.translation.as_slice());
                }
                actor.push(state.f_cmd);
                critic.extend_from_slice(&actor);
            }
            Task::Rotate => {
                actor.extend_from_slice(&state.joints.positions);
                let rot = state.body.orientation.to_rotation_matrix().into_inner();
                let goal = goal_for_count(
                    &self.rotation_axis,
                    &state.goal_base,
                    state.success_count,
                );
                let relative = goal * rot.transpose();
                actor.extend_from_slice(&encode6d(&relative)?.as_array());
                actor.extend_from_slice(&state.last_action);
                for f in &state.tactile {
                    actor.extend_from_slice(f.contact_center.as_slice());
                }
                for f in &state.tactile {
                    actor.push(f.total_force);
                }
                for pose in &state.frames.fingertip_poses {
                    actor.extend_from_slice(pose.translation.as_slice());
                }
                critic.extend_from_slice(&actor);
                critic.extend_from_slice(&encode6d(&rot)?.as_array());
                // fingertip twists by finite differences over one control step
                for (pose, prev) in state
                    .frames
                    .fingertip_poses
                    .iter()
                    .zip(&state.prev_fingertip_poses)
                {
                    let lin = (pose.translation - prev.translation) / dt;
                    let delta = pose.rotation * prev.rotation.transpose();
                    let ang = nalgebra::UnitQuaternion::from_matrix(&delta).scaled_axis() / dt;
                    critic.extend_from_slice(lin.as_slice());
                    critic.extend_from_slice(ang.as_slice());
                }
                for pose in &state.frames.fingertip_poses {
                    critic.extend_from_slice(&encode6d(&pose.rotation)?.as_array());
                }
                critic.extend_from_slice(&state.joints.velocities);
                critic.extend_from_slice(state.body.linear_velocity.as_slice());
                critic.extend_from_slice(state.body.angular_velocity.as_slice());
            }
        }
        debug_assert_eq!(actor.len(), self.layout.actor_dim());
        debug_assert_eq!(critic.len(), self.layout.critic_dim());
        Ok(Observation { actor, critic })
    }
}

fn clamp_with_velocity_zeroing(model: &HandModel, joints: &mut JointState) {
    for finger in &model.fingers {
        for (ji, joint) in finger.joints.iter().enumerate() {
            let g = finger.joint_offset + ji;
            if joints.positions[g] < joint.lower {
                joints.positions[g] = joint.lower;
                joints.velocities[g] = joints.velocities[g].max(0.0);
            } else if joints.positions[g] > joint.upper {
                joints.positions[g] = joint.upper;
                joints.velocities[g] = joints.velocities[g].min(0.0);
            }
        }
    }
}

pub fn finger_contacts(tactile: &[FingertipTactile]) -> [bool; NUM_FINGERS] {
    let mut out = [false; NUM_FINGERS];
    for (i, f) in tactile.iter().enumerate() {
        out[i] = f.active_count > 0;
    }
    out
}

pub fn finger_forces(tactile: &[FingertipTactile]) -> [f64; NUM_FINGERS] {
    let mut out = [0.0; NUM_FINGERS];
    for (i, f) in tactile.iter().enumerate() {
        out[i] = f.total_force;
    }
    out
}

/// Goal after `count` successes: the `(count+1 mod 4)`-th quarter turn
/// about the axis, composed onto the reset orientation. Using the count
/// modulo four makes the 360-degree closure exact.
pub fn goal_for_count(axis: &Vec3, base: &Mat3, count: usize) -> Mat3 {
    let quarter_turns = (count + 1) % 4;
    let angle = quarter_turns as f64 * std::f64::consts::FRAC_PI_2;
    Transform::from_axis_angle(*axis, angle).rotation * base
}
