//! 12-DoF hand model: joint limits, per-finger serial-chain forward
//! kinematics, and the dense taxel layout on each fingertip.
//!
//! The model is data-driven: a JSON config defines joints, limits, rest
//! poses, and taxel layouts, so alternative morphologies load without code
//! changes. `HandModel::default_model()` ships a canonical hand (thumb and
//! index 3 DoF, the remaining fingers 2 DoF each) with a 12x10 taxel grid
//! on a 10 mm hemispherical fingertip patch.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::math::{Mat3, Transform, Vec3};

pub const NUM_FINGERS: usize = 5;
pub const DOF: usize = 12;
pub const TAXELS_PER_FINGERTIP: usize = 120;
pub const TOTAL_TAXELS: usize = NUM_FINGERS * TAXELS_PER_FINGERTIP;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointConfig {
    /// Unit rotation axis in the joint's parent frame.
    pub axis: [f64; 3],
    /// Fixed transform from the previous frame to this joint's frame.
    pub origin: TransformConfig,
    /// [lower, upper] position limits in radians.
    pub limits: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformConfig {
    #[serde(default)]
    pub translation: [f64; 3],
    /// Row-major 3x3 rotation; identity when omitted.
    #[serde(default)]
    pub rotation: Option<[[f64; 3]; 3]>,
}

impl TransformConfig {
    fn to_transform(&self) -> Transform {
        let rotation = match &self.rotation {
            Some(rows) => Mat3::from_rows(&[
                nalgebra::RowVector3::from(rows[0]),
                nalgebra::RowVector3::from(rows[1]),
                nalgebra::RowVector3::from(rows[2]),
            ]),
            None => Mat3::identity(),
        };
        Transform::new(rotation, Vec3::from(self.translation))
    }
}

/// Taxel layout: explicit per-taxel data or a parametric hemisphere grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxelLayoutConfig {
    Explicit {
        positions: Vec<[f64; 3]>,
        normals: Vec<[f64; 3]>,
    },
    /// `rows x cols` grid on a spherical cap of the given radius, cap axis
    /// along `pad_axis` in the fingertip frame, normals radial.
    GridHemisphere {
        radius: f64,
        rows: usize,
        cols: usize,
        pad_axis: [f64; 3],
        /// Cap half-angle in radians.
        #[serde(default = "default_cap_angle")]
        cap_angle: f64,
    },
}

fn default_cap_angle() -> f64 {
    75.0_f64.to_radians()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FingerConfig {
    pub name: String,
    pub base: TransformConfig,
    pub joints: Vec<JointConfig>,
    pub fingertip: TransformConfig,
    pub taxels: TaxelLayoutConfig,
    /// Local joint index used as this finger's "inner" (first flexion)
    /// joint in reward terms. Defaults to 0.
    #[serde(default)]
    pub inner_joint: usize,
    /// Local joint index used as the "outer" joint. Defaults to the last.
    #[serde(default)]
    pub outer_joint: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HandModelConfig {
    pub fingers: Vec<FingerConfig>,
    /// Rest pose for all actuated joints; zeros when omitted.
    #[serde(default)]
    pub rest_pose: Option<Vec<f64>>,
}

/// Immutable, validated hand model.
#[derive(Debug, Clone)]
pub struct HandModel {
    pub fingers: Vec<FingerChain>,
    pub rest_pose: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FingerChain {
    pub name: String,
    pub base: Transform,
    pub joints: Vec<Joint>,
    pub fingertip: Transform,
    /// Offsets of this finger's joints into the global 12-vector.
    pub joint_offset: usize,
    pub taxel_positions: Vec<Vec3>,
    pub taxel_normals: Vec<Vec3>,
    pub inner_joint: usize,
    pub outer_joint: usize,
}

#[derive(Debug, Clone)]
pub struct Joint {
    pub axis: Vec3,
    pub origin: Transform,
    pub lower: f64,
    pub upper: f64,
}

/// Joint positions and velocities for the whole hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl JointState {
    pub fn zeros(dof: usize) -> Self {
        JointState {
            positions: vec![0.0; dof],
            velocities: vec![0.0; dof],
        }
    }
}

/// World-frame taxel positions and normals plus fingertip poses.
#[derive(Debug, Clone)]
pub struct TaxelFrameBatch {
    /// Per finger, per taxel.
    pub world_positions: Vec<Vec<Vec3>>,
    pub world_normals: Vec<Vec<Vec3>>,
    pub fingertip_poses: Vec<Transform>,
}

impl HandModel {
    pub fn from_config(config: &HandModelConfig) -> Result<HandModel> {
        if config.fingers.len() != NUM_FINGERS {
            return Err(SimError::config(
                "fingers",
                format!("expected {NUM_FINGERS} fingers, got {}", config.fingers.len()),
            ));
        }
        let mut fingers = Vec::with_capacity(NUM_FINGERS);
        let mut joint_offset = 0usize;
        for (fi, fc) in config.fingers.iter().enumerate() {
            let path = |rest: &str| format!("fingers[{fi}].{rest}");
            let mut joints = Vec::with_capacity(fc.joints.len());
            for (ji, jc) in fc.joints.iter().enumerate() {
                let axis = Vec3::from(jc.axis);
                if (axis.norm() - 1.0).abs() > 1e-9 {
                    return Err(SimError::config(
                        path(&format!("joints[{ji}].axis")),
                        format!("axis {:?} is not unit length", jc.axis),
                    ));
                }
                if jc.limits[0] >= jc.limits[1] {
                    return Err(SimError::config(
                        path(&format!("joints[{ji}].limits")),
                        format!("lower {} must be below upper {}", jc.limits[0], jc.limits[1]),
                    ));
                }
                joints.push(Joint {
                    axis,
                    origin: jc.origin.to_transform(),
                    lower: jc.limits[0],
                    upper: jc.limits[1],
                });
            }
            let (taxel_positions, taxel_normals) = build_taxels(&fc.taxels, &path("taxels"))?;
            if fc.inner_joint >= fc.joints.len() {
                return Err(SimError::config(
                    path("inner_joint"),
                    format!("index {} out of range", fc.inner_joint),
                ));
            }
            let outer_joint = fc.outer_joint.unwrap_or(fc.joints.len() - 1);
            if outer_joint >= fc.joints.len() {
                return Err(SimError::config(
                    path("outer_joint"),
                    format!("index {outer_joint} out of range"),
                ));
            }
            fingers.push(FingerChain {
                name: fc.name.clone(),
                base: fc.base.to_transform(),
                joints,
                fingertip: fc.fingertip.to_transform(),
                joint_offset,
                taxel_positions,
                taxel_normals,
                inner_joint: fc.inner_joint,
                outer_joint,
            });
            joint_offset += fc.joints.len();
        }
        if joint_offset != DOF {
            return Err(SimError::config(
                "fingers",
                format!("total actuated DoF is {joint_offset}, expected {DOF}"),
            ));
        }
        let rest_pose = match &config.rest_pose {
            Some(p) => {
                if p.len() != DOF {
                    return Err(SimError::config(
                        "rest_pose",
                        format!("length {} != {DOF}", p.len()),
                    ));
                }
                p.clone()
            }
            None => vec![0.0; DOF],
        };
        let model = HandModel { fingers, rest_pose };
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<HandModel> {
        let config: HandModelConfig = serde_json::from_str(text)?;
        HandModel::from_config(&config)
    }

    pub fn load(path: &std::path::Path) -> Result<HandModel> {
        let text = std::fs::read_to_string(path)?;
        HandModel::from_json(&text)
    }

    pub fn dof(&self) -> usize {
        self.fingers.iter().map(|f| f.joints.len()).sum()
    }

    /// Global joint indices of the non-thumb fingers' inner joints,
    /// in finger order.
    pub fn inner_joint_indices(&self) -> Vec<usize> {
        self.fingers
            .iter()
            .skip(1)
            .map(|f| f.joint_offset + f.inner_joint)
            .collect()
    }

    pub fn outer_joint_indices(&self) -> Vec<usize> {
        self.fingers
            .iter()
            .skip(1)
            .map(|f| f.joint_offset + f.outer_joint)
            .collect()
    }

    /// Global index of each finger's root (inner) joint, thumb included.
    pub fn root_joint_indices(&self) -> Vec<usize> {
        self.fingers
            .iter()
            .map(|f| f.joint_offset + f.inner_joint)
            .collect()
    }

    pub fn clamp_to_limits(&self, positions: &mut [f64]) {
        for finger in &self.fingers {
            for (ji, joint) in finger.joints.iter().enumerate() {
                let g = finger.joint_offset + ji;
                positions[g] = positions[g].clamp(joint.lower, joint.upper);
            }
        }
    }

    /// Canonical 12-DoF palm-up hand.
    ///
    /// Thumb (3 DoF) opposes four fingers (index 3 DoF, middle/ring/little
    /// 2 DoF). Fingers rest pointing up from the palm plane and flex toward
    /// the palm center above the origin.
    pub fn default_model() -> HandModel {
        HandModel::from_config(&default_model_config()).expect("default hand model is valid")
    }
}

fn build_taxels(
    layout: &TaxelLayoutConfig,
    path: &str,
) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    match layout {
        TaxelLayoutConfig::Explicit { positions, normals } => {
            if positions.len() != TAXELS_PER_FINGERTIP {
                return Err(SimError::config(
                    format!("{path}.positions"),
                    format!("expected {TAXELS_PER_FINGERTIP} taxels, got {}", positions.len()),
                ));
            }
            if normals.len() != positions.len() {
                return Err(SimError::config(
                    format!("{path}.normals"),
                    format!("{} normals for {} positions", normals.len(), positions.len()),
                ));
            }
            let mut out_n = Vec::with_capacity(normals.len());
            for (i, n) in normals.iter().enumerate() {
                let v = Vec3::from(*n);
                if (v.norm() - 1.0).abs() > 1e-9 {
                    return Err(SimError::config(
                        format!("{path}.normals[{i}]"),
                        "normal is not unit length".to_string(),
                    ));
                }
                out_n.push(v);
            }
            Ok((positions.iter().map(|p| Vec3::from(*p)).collect(), out_n))
        }
        TaxelLayoutConfig::GridHemisphere {
            radius,
            rows,
            cols,
            pad_axis,
            cap_angle,
        } => {
            if rows * cols != TAXELS_PER_FINGERTIP {
                return Err(SimError::config(
                    path.to_string(),
                    format!("rows*cols = {} != {TAXELS_PER_FINGERTIP}", rows * cols),
                ));
            }
            if *radius <= 0.0 {
                return Err(SimError::config(
                    format!("{path}.radius"),
                    "radius must be positive".to_string(),
                ));
            }
            let axis = Vec3::from(*pad_axis);
            if axis.norm() < 1e-9 {
                return Err(SimError::config(
                    format!("{path}.pad_axis"),
                    "pad axis must be nonzero".to_string(),
                ));
            }
            Ok(hemisphere_grid(*radius, *rows, *cols, &axis.normalize(), *cap_angle))
        }
    }
}

/// Spherical-cap grid: `rows` rings of `cols` taxels around `axis`,
/// positions on the cap surface, normals radial.
pub fn hemisphere_grid(
    radius: f64,
    rows: usize,
    cols: usize,
    axis: &Vec3,
    cap_angle: f64,
) -> (Vec<Vec3>, Vec<Vec3>) {
    // orthonormal frame around the cap axis
    let w = *axis;
    let helper = if w.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = w.cross(&helper).normalize();
    let v = w.cross(&u);
    let mut positions = Vec::with_capacity(rows * cols);
    let mut normals = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let theta = cap_angle * (i as f64 + 0.5) / rows as f64;
        for j in 0..cols {
            let phi = std::f64::consts::TAU * j as f64 / cols as f64;
            let dir = w * theta.cos() + (u * phi.cos() + v * phi.sin()) * theta.sin();
            positions.push(dir * radius);
            normals.push(dir);
        }
    }
    (positions, normals)
}

/// Fingertip poses and world-frame taxels for one joint configuration.
pub fn forward_kinematics(model: &HandModel, state: &JointState) -> Result<TaxelFrameBatch> {
    let dof = model.dof();
    if state.positions.len() != dof || state.velocities.len() != dof {
        return Err(SimError::ModelMismatch {
            expected: dof,
            got: state.positions.len(),
        });
    }
    let mut world_positions = Vec::with_capacity(model.fingers.len());
    let mut world_normals = Vec::with_capacity(model.fingers.len());
    let mut fingertip_poses = Vec::with_capacity(model.fingers.len());
    for finger in &model.fingers {
        let pose = fingertip_pose(finger, &state.positions);
        world_positions.push(
            finger
                .taxel_positions
                .iter()
                .map(|p| pose.apply_point(p))
                .collect(),
        );
        world_normals.push(
            finger
                .taxel_normals
                .iter()
                .map(|n| pose.apply_vector(n))
                .collect(),
        );
        fingertip_poses.push(pose);
    }
    Ok(TaxelFrameBatch {
        world_positions,
        world_normals,
        fingertip_poses,
    })
}

pub fn fingertip_pose(finger: &FingerChain, positions: &[f64]) -> Transform {
    let mut pose = finger.base;
    for (ji, joint) in finger.joints.iter().enumerate() {
        let q = positions[finger.joint_offset + ji];
        let rot = Transform::from_axis_angle(joint.axis, q);
        pose = pose.compose(&joint.origin).compose(&rot);
    }
    pose.compose(&finger.fingertip)
}

/// Elementwise `forward_kinematics` over many joint states. Results match
/// sequential scalar calls exactly.
pub fn batch_forward_kinematics(
    model: &HandModel,
    states: &[JointState],
) -> Result<Vec<TaxelFrameBatch>> {
    use rayon::prelude::*;
    states
        .par_iter()
        .map(|s| forward_kinematics(model, s))
        .collect()
}

pub fn default_model_config() -> HandModelConfig {
    let flex_axis = [0.0, -1.0, 0.0]; // curls +z toward -x for fingers at +x
    let thumb_flex_axis = [0.0, 1.0, 0.0];
    let finger = |name: &str, y: f64, three_dof: bool| {
        let mut joints = vec![];
        if three_dof {
            joints.push(JointConfig {
                axis: [0.0, 0.0, 1.0],
                origin: TransformConfig {
                    translation: [0.0, 0.0, 0.0],
                    rotation: None,
                },
                limits: [-0.3, 0.3],
            });
        }
        joints.push(JointConfig {
            axis: flex_axis,
            origin: TransformConfig {
                translation: [0.0, 0.0, 0.0],
                rotation: None,
            },
            limits: [-0.1, 1.9],
        });
        joints.push(JointConfig {
            axis: flex_axis,
            origin: TransformConfig {
                translation: [0.0, 0.0, 0.03],
                rotation: None,
            },
            limits: [-0.1, 1.9],
        });
        let n = joints.len();
        FingerConfig {
            name: name.to_string(),
            base: TransformConfig {
                translation: [0.045, y, 0.0],
                rotation: None,
            },
            joints,
            fingertip: TransformConfig {
                translation: [0.0, 0.0, 0.025],
                rotation: None,
            },
            taxels: TaxelLayoutConfig::GridHemisphere {
                radius: 0.01,
                rows: 12,
                cols: 10,
                pad_axis: [-1.0, 0.0, 0.0],
                cap_angle: default_cap_angle(),
            },
            inner_joint: if three_dof { 1 } else { 0 },
            outer_joint: Some(n - 1),
        }
    };
    let thumb = FingerConfig {
        name: "thumb".to_string(),
        base: TransformConfig {
            translation: [-0.045, 0.01, 0.0],
            rotation: None,
        },
        joints: vec![
            JointConfig {
                axis: [0.0, 0.0, 1.0],
                origin: TransformConfig {
                    translation: [0.0, 0.0, 0.0],
                    rotation: None,
                },
                limits: [-0.5, 0.5],
            },
            JointConfig {
                axis: thumb_flex_axis,
                origin: TransformConfig {
                    translation: [0.0, 0.0, 0.0],
                    rotation: None,
                },
                limits: [-0.1, 1.9],
            },
            JointConfig {
                axis: thumb_flex_axis,
                origin: TransformConfig {
                    translation: [0.0, 0.0, 0.03],
                    rotation: None,
                },
                limits: [-0.1, 1.9],
            },
        ],
        fingertip: TransformConfig {
            translation: [0.0, 0.0, 0.025],
            rotation: None,
        },
        taxels: TaxelLayoutConfig::GridHemisphere {
            radius: 0.01,
            rows: 12,
            cols: 10,
            pad_axis: [1.0, 0.0, 0.0],
            cap_angle: default_cap_angle(),
        },
        inner_joint: 1,
        outer_joint: Some(2),
    };
    HandModelConfig {
        fingers: vec![
            thumb,
            finger("index", 0.045, true),
            finger("middle", 0.015, false),
            finger("ring", -0.015, false),
            finger("little", -0.045, false),
        ],
        rest_pose: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_model_shape() {
        let m = HandModel::default_model();
        assert_eq!(m.fingers.len(), NUM_FINGERS);
        assert_eq!(m.dof(), DOF);
        for f in &m.fingers {
            assert_eq!(f.taxel_positions.len(), TAXELS_PER_FINGERTIP);
            for n in &f.taxel_normals {
                assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_state_matches_rest_layout() {
        let m = HandModel::default_model();
        let frames = forward_kinematics(&m, &JointState::zeros(DOF)).unwrap();
        for (finger, pose) in m.fingers.iter().zip(&frames.fingertip_poses) {
            let mut rest = finger.base;
            for j in &finger.joints {
                rest = rest.compose(&j.origin);
            }
            rest = rest.compose(&finger.fingertip);
            assert_abs_diff_eq!(pose.translation, rest.translation, epsilon = 1e-12);
            assert_abs_diff_eq!(pose.rotation, rest.rotation, epsilon = 1e-12);
        }
        let total: usize = frames.world_positions.iter().map(|p| p.len()).sum();
        assert_eq!(total, TOTAL_TAXELS);
    }

    #[test]
    fn planar_one_link_chain() {
        // single finger of link length L rotating about z: tip at (L cos, L sin, 0)
        let finger = FingerChain {
            name: "test".into(),
            base: Transform::identity(),
            joints: vec![Joint {
                axis: Vec3::z(),
                origin: Transform::identity(),
                lower: -3.2,
                upper: 3.2,
            }],
            fingertip: Transform::from_translation(Vec3::new(0.07, 0.0, 0.0)),
            joint_offset: 0,
            taxel_positions: vec![],
            taxel_normals: vec![],
            inner_joint: 0,
            outer_joint: 0,
        };
        let theta = 0.6;
        let pose = fingertip_pose(&finger, &[theta]);
        assert_abs_diff_eq!(
            pose.translation,
            Vec3::new(0.07 * theta.cos(), 0.07 * theta.sin(), 0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn chain_independence() {
        let m = HandModel::default_model();
        let zero = forward_kinematics(&m, &JointState::zeros(DOF)).unwrap();
        let mut state = JointState::zeros(DOF);
        // move only the thumb (joints 0..3)
        state.positions[0] = 0.2;
        state.positions[1] = 0.5;
        state.positions[2] = 0.3;
        let moved = forward_kinematics(&m, &state).unwrap();
        for fi in 1..NUM_FINGERS {
            assert_eq!(zero.world_positions[fi], moved.world_positions[fi]);
        }
        assert_ne!(zero.world_positions[0], moved.world_positions[0]);
    }

    #[test]
    fn rigid_body_distance_preservation() {
        let m = HandModel::default_model();
        let mut state = JointState::zeros(DOF);
        for (i, q) in state.positions.iter_mut().enumerate() {
            *q = 0.1 * (i as f64 + 1.0);
        }
        let rest = forward_kinematics(&m, &JointState::zeros(DOF)).unwrap();
        let bent = forward_kinematics(&m, &state).unwrap();
        for fi in 0..NUM_FINGERS {
            let a = &rest.world_positions[fi];
            let b = &bent.world_positions[fi];
            for i in (0..a.len()).step_by(17) {
                for j in (i + 1..a.len()).step_by(23) {
                    let da = (a[i] - a[j]).norm();
                    let db = (b[i] - b[j]).norm();
                    assert!((da - db).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn batch_matches_scalar() {
        let m = HandModel::default_model();
        let states: Vec<JointState> = (0..8)
            .map(|k| {
                let mut s = JointState::zeros(DOF);
                for (i, q) in s.positions.iter_mut().enumerate() {
                    *q = 0.05 * (k as f64) + 0.01 * i as f64;
                }
                s
            })
            .collect();
        let batch = batch_forward_kinematics(&m, &states).unwrap();
        assert_eq!(batch.len(), states.len());
        for (s, b) in states.iter().zip(&batch) {
            let scalar = forward_kinematics(&m, s).unwrap();
            for fi in 0..NUM_FINGERS {
                assert_eq!(scalar.world_positions[fi], b.world_positions[fi]);
                assert_eq!(scalar.world_normals[fi], b.world_normals[fi]);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = HandModel::default_model();
        let bad = JointState::zeros(7);
        assert!(matches!(
            forward_kinematics(&m, &bad),
            Err(SimError::ModelMismatch { .. })
        ));
    }

    #[test]
    fn config_errors_name_offending_path() {
        let mut cfg = default_model_config();
        cfg.fingers[2].joints[0].axis = [0.0, 0.0, 2.0];
        let err = HandModel::from_config(&cfg).unwrap_err().to_string();
        assert!(err.contains("fingers[2].joints[0].axis"), "{err}");

        let mut cfg = default_model_config();
        cfg.fingers[1].joints[1].limits = [1.0, -1.0];
        let err = HandModel::from_config(&cfg).unwrap_err().to_string();
        assert!(err.contains("fingers[1].joints[1].limits"), "{err}");
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = default_model_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let m = HandModel::from_json(&text).unwrap();
        assert_eq!(m.dof(), DOF);
    }
}
