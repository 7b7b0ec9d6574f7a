//! Reward and penalty terms for force-adaptive grasping and in-hand
//! rotation, plus composite assembly with configurable weights.
//!
//! Weight sign convention: every term is added into the composite, so
//! penalty weights are negative. Mask boundaries are inclusive
//! (0.01 <= x <= upper); bonus thresholds are strict (<).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraspRewardConfig {
    pub w_torque: f64,
    pub w_force: f64,
    pub w_diff: f64,
    pub w_outter: f64,
    pub w_action: f64,
    pub w_vel: f64,
    pub w_terminal: f64,
    /// Gaussian width for the torque/force tracking terms.
    pub sigma: f64,
    /// Torque ceiling: tau_target = tau_max * F_cmd.
    pub tau_max: f64,
    /// Force ceiling: F_target = F_cmd * f_max.
    pub f_max: f64,
    pub torque_range: [f64; 2],
    pub force_range: [f64; 2],
    /// Center position vector of the outer joints, rad.
    pub outer_center: [f64; 4],
}

impl Default for GraspRewardConfig {
    fn default() -> Self {
        GraspRewardConfig {
            w_torque: 1.0,
            w_force: 1.0,
            w_diff: -0.5,
            w_outter: -0.1,
            w_action: -0.01,
            w_vel: -0.003,
            w_terminal: -50.0,
            sigma: 0.10,
            tau_max: 1.0,
            f_max: 100.0,
            torque_range: [0.01, 1.1],
            force_range: [0.01, 200.0],
            outer_center: [0.3, 0.3, 0.3, 0.3],
        }
    }
}

impl GraspRewardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma <= 0.0 {
            return Err(SimError::config("reward.sigma", "must be positive"));
        }
        for (name, [lo, hi]) in [
            ("torque_range", self.torque_range),
            ("force_range", self.force_range),
        ] {
            if lo >= hi {
                return Err(SimError::config(
                    format!("reward.{name}"),
                    format!("range [{lo}, {hi}] is not well-ordered"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationRewardConfig {
    pub close_weight: f64,
    pub action_weight: f64,
    pub goal_bonus: f64,
    pub rot_threshold: f64,
    pub pos_threshold: f64,
    pub sigmoid_gain: f64,
    pub sigmoid_center: f64,
    pub eps_rot: f64,
}

impl Default for RotationRewardConfig {
    fn default() -> Self {
        RotationRewardConfig {
            close_weight: 1.0,
            action_weight: -0.0002,
            goal_bonus: 250.0,
            rot_threshold: 0.3,
            pos_threshold: 0.05,
            sigmoid_gain: 400.0,
            sigmoid_center: 0.05,
            eps_rot: 0.1,
        }
    }
}

impl RotationRewardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rot_threshold <= 0.0 || self.pos_threshold <= 0.0 {
            return Err(SimError::config("reward", "thresholds must be positive"));
        }
        if self.eps_rot <= 0.0 {
            return Err(SimError::config("reward.eps_rot", "must be positive"));
        }
        Ok(())
    }
}

fn in_range(x: f64, [lo, hi]: [f64; 2]) -> bool {
    lo <= x && x <= hi
}

fn gaussian(x: f64, target: f64, sigma: f64) -> f64 {
    (-(x - target).powi(2) / (2.0 * sigma * sigma)).exp()
}

/// Per-finger torque tracking reward. Finger 0 is the thumb (binary on its
/// valid range); fingers 1..5 track tau_target = tau_max * F_cmd with a
/// Gaussian. Every term is gated by its contact indicator.
pub fn torque_reward(
    torques: &[f64; 5],
    contact: &[bool; 5],
    f_cmd: f64,
    cfg: &GraspRewardConfig,
) -> f64 {
    let tau_target = cfg.tau_max * f_cmd;
    let mut sum = 0.0;
    for i in 0..5 {
        if !contact[i] {
            continue;
        }
        let valid = in_range(torques[i], cfg.torque_range);
        sum += if i == 0 {
            if valid {
                1.0
            } else {
                0.0
            }
        } else if valid {
            gaussian(torques[i], tau_target, cfg.sigma)
        } else {
            0.0
        };
    }
    cfg.w_torque * sum
}

/// Mirror of `torque_reward` over fingertip contact forces, with
/// F_target = F_cmd * f_max and the force validity range.
pub fn force_reward(
    forces: &[f64; 5],
    contact: &[bool; 5],
    f_cmd: f64,
    cfg: &GraspRewardConfig,
) -> f64 {
    let f_target = cfg.f_max * f_cmd;
    let mut sum = 0.0;
    for i in 0..5 {
        if !contact[i] {
            continue;
        }
        let valid = in_range(forces[i], cfg.force_range);
        sum += if i == 0 {
            if valid {
                1.0
            } else {
                0.0
            }
        } else if valid {
            gaussian(forces[i], f_target, cfg.sigma)
        } else {
            0.0
        };
    }
    cfg.w_force * sum
}

/// Four-finger consistency term: population variance of the inner-joint
/// positions, scaled by w_diff.
pub fn consistency_penalty(q_inner: &[f64; 4], cfg: &GraspRewardConfig) -> f64 {
    let mean = q_inner.iter().sum::<f64>() / 4.0;
    let var = q_inner.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / 4.0;
    cfg.w_diff * var
}

/// Outer-joint drift term: L2 distance from the configured center.
pub fn outer_penalty(q_outer: &[f64; 4], cfg: &GraspRewardConfig) -> f64 {
    let dist = q_outer
        .iter()
        .zip(&cfg.outer_center)
        .map(|(q, c)| (q - c).powi(2))
        .sum::<f64>()
        .sqrt();
    cfg.w_outter * dist
}

/// Action rate term: weight * ||a_t - a_{t-1}||^2.
pub fn action_rate_penalty(a_t: &[f64], a_prev: &[f64], weight: f64) -> f64 {
    let sq: f64 = a_t
        .iter()
        .zip(a_prev)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    weight * sq
}

/// Joint velocity term: weight * ||qdot||^2.
pub fn velocity_penalty(qdot: &[f64], w_vel: f64) -> f64 {
    w_vel * qdot.iter().map(|v| v * v).sum::<f64>()
}

/// Close-to-goal shaping: 1/(|d_rot| + eps) gated by a sharp sigmoid on
/// position drift.
pub fn rotation_reward(d_rot: f64, d_goal: f64, cfg: &RotationRewardConfig) -> f64 {
    let gate = 1.0 / (1.0 + (cfg.sigmoid_gain * (d_goal - cfg.sigmoid_center)).exp());
    cfg.close_weight * (1.0 / (d_rot.abs() + cfg.eps_rot)) * gate
}

/// One-shot bonus on reaching the goal, strict thresholds.
pub fn goal_bonus(d_rot: f64, d_pos: f64, cfg: &RotationRewardConfig) -> f64 {
    if d_rot < cfg.rot_threshold && d_pos < cfg.pos_threshold {
        cfg.goal_bonus
    } else {
        0.0
    }
}

/// Per-step grasp reward term breakdown. The composite is the plain sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GraspRewardTerms {
    pub torque: f64,
    pub force: f64,
    pub diff: f64,
    pub outer: f64,
    pub action: f64,
    pub velocity: f64,
    pub terminal: f64,
}

impl GraspRewardTerms {
    pub fn total(&self) -> f64 {
        self.torque + self.force + self.diff + self.outer + self.action + self.velocity
            + self.terminal
    }
}

#[allow(clippy::too_many_arguments)]
pub fn grasp_reward(
    torques: &[f64; 5],
    forces: &[f64; 5],
    contact: &[bool; 5],
    f_cmd: f64,
    q_inner: &[f64; 4],
    q_outer: &[f64; 4],
    a_t: &[f64],
    a_prev: &[f64],
    qdot: &[f64],
    terminated: bool,
    cfg: &GraspRewardConfig,
) -> GraspRewardTerms {
    GraspRewardTerms {
        torque: torque_reward(torques, contact, f_cmd, cfg),
        force: force_reward(forces, contact, f_cmd, cfg),
        diff: consistency_penalty(q_inner, cfg),
        outer: outer_penalty(q_outer, cfg),
        action: action_rate_penalty(a_t, a_prev, cfg.w_action),
        velocity: velocity_penalty(qdot, cfg.w_vel),
        terminal: if terminated { cfg.w_terminal } else { 0.0 },
    }
}

/// Per-step rotation reward term breakdown.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RotationRewardTerms {
    pub close_to_goal: f64,
    pub action: f64,
    pub bonus: f64,
}

impl RotationRewardTerms {
    pub fn total(&self) -> f64 {
        self.close_to_goal + self.action + self.bonus
    }
}

pub fn rotation_step_reward(
    d_rot: f64,
    d_pos: f64,
    a_t: &[f64],
    a_prev: &[f64],
    cfg: &RotationRewardConfig,
) -> RotationRewardTerms {
    RotationRewardTerms {
        close_to_goal: rotation_reward(d_rot, d_pos, cfg),
        action: action_rate_penalty(a_t, a_prev, cfg.action_weight),
        bonus: goal_bonus(d_rot, d_pos, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> GraspRewardConfig {
        GraspRewardConfig::default()
    }

    #[test]
    fn torque_reward_all_maxima() {
        let c = cfg();
        let f_cmd = 0.5;
        let target = c.tau_max * f_cmd;
        let torques = [0.5, target, target, target, target];
        let r = torque_reward(&torques, &[true; 5], f_cmd, &c);
        assert_abs_diff_eq!(r, c.w_torque * 5.0, epsilon = 1e-12);
    }

    #[test]
    fn torque_reward_one_sigma() {
        let c = cfg();
        let f_cmd = 0.5;
        let target = c.tau_max * f_cmd;
        let mut torques = [0.5, target, target, target, target];
        torques[1] = target + c.sigma;
        let r = torque_reward(&torques, &[true; 5], f_cmd, &c);
        assert_abs_diff_eq!(
            r,
            c.w_torque * (4.0 + (-0.5f64).exp()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn torque_reward_range_mask() {
        let c = cfg();
        // 1.2 is outside [0.01, 1.1]: contributes zero
        let torques = [0.5, 1.2, 0.5, 0.5, 0.5];
        let with = torque_reward(&torques, &[true; 5], 0.5, &c);
        let without = torque_reward(&[0.5, 0.0, 0.5, 0.5, 0.5], &[true, false, true, true, true], 0.5, &c);
        assert_abs_diff_eq!(with, without, epsilon = 1e-12);
        // boundary is inclusive
        let at_upper = torque_reward(&[1.1, 0.5, 0.5, 0.5, 0.5], &[true, false, false, false, false], 0.5, &c);
        assert_eq!(at_upper, c.w_torque);
    }

    #[test]
    fn force_reward_cases() {
        let c = cfg();
        let f_cmd = 0.5;
        let target = c.f_max * f_cmd;
        let forces = [10.0, target, target, target, target];
        assert_abs_diff_eq!(
            force_reward(&forces, &[true; 5], f_cmd, &c),
            c.w_force * 5.0,
            epsilon = 1e-12
        );
        // no contact gates everything off
        assert_eq!(force_reward(&forces, &[false; 5], f_cmd, &c), 0.0);
        // 250 exceeds the mask upper bound 200
        let over = [10.0, 250.0, target, target, target];
        assert_abs_diff_eq!(
            force_reward(&over, &[true; 5], f_cmd, &c),
            c.w_force * 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn consistency_penalty_cases() {
        let c = cfg();
        assert_eq!(consistency_penalty(&[0.1; 4], &c), 0.0);
        // mean 0.1, population variance 0.12/4 = 0.03
        assert_abs_diff_eq!(
            consistency_penalty(&[0.0, 0.0, 0.0, 0.4], &c),
            c.w_diff * 0.03,
            epsilon = 1e-12
        );
        // shift invariance
        assert_abs_diff_eq!(
            consistency_penalty(&[1.0, 1.0, 1.0, 1.4], &c),
            c.w_diff * 0.03,
            epsilon = 1e-12
        );
    }

    #[test]
    fn outer_penalty_cases() {
        let c = cfg();
        assert_eq!(outer_penalty(&c.outer_center.clone(), &c), 0.0);
        let mut q = c.outer_center;
        q[0] += 0.3;
        assert_abs_diff_eq!(outer_penalty(&q, &c), c.w_outter * 0.3, epsilon = 1e-12);
        let mut q2 = c.outer_center;
        q2[0] += 0.6;
        assert_abs_diff_eq!(outer_penalty(&q2, &c), 2.0 * c.w_outter * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn action_rate_cases() {
        let a = vec![0.1; 12];
        assert_eq!(action_rate_penalty(&a, &a, -0.01), 0.0);
        let b = vec![0.0; 12];
        // 12 * 0.01 = 0.12
        assert_abs_diff_eq!(action_rate_penalty(&a, &b, 1.0), 0.12, epsilon = 1e-12);
        assert_abs_diff_eq!(
            action_rate_penalty(&a, &b, -0.0002),
            -2.4e-5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn velocity_penalty_cases() {
        assert_eq!(velocity_penalty(&[0.0; 12], -0.003), 0.0);
        let mut v = vec![0.0; 12];
        v[3] = 1.0;
        assert_abs_diff_eq!(velocity_penalty(&v, -0.003), -0.003, epsilon = 1e-15);
        let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert_abs_diff_eq!(
            velocity_penalty(&doubled, -0.003),
            4.0 * velocity_penalty(&v, -0.003),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rotation_reward_cases() {
        let c = RotationRewardConfig::default();
        // sigmoid midpoint at d_goal = 0.05
        assert_abs_diff_eq!(
            rotation_reward(0.2, 0.05, &c),
            (1.0 / 0.3) * 0.5,
            epsilon = 1e-12
        );
        // far from start the gate collapses
        assert!(rotation_reward(0.2, 0.1, &c) < 1e-8);
        // at the start the gate saturates near 1
        assert_abs_diff_eq!(rotation_reward(0.1, 0.0, &c), 5.0, epsilon = 1e-6);
    }

    #[test]
    fn rotation_reward_monotone() {
        let c = RotationRewardConfig::default();
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let d_rot = 0.01 + 0.02 * i as f64;
            let r = rotation_reward(d_rot, 0.03, &c);
            assert!(r < last);
            last = r;
        }
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let d_goal = 0.001 * i as f64;
            let r = rotation_reward(0.2, d_goal, &c);
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn goal_bonus_cases() {
        let c = RotationRewardConfig::default();
        assert_eq!(goal_bonus(0.2, 0.01, &c), 250.0);
        // strict thresholds
        assert_eq!(goal_bonus(0.3, 0.01, &c), 0.0);
        assert_eq!(goal_bonus(0.1, 0.06, &c), 0.0);
        assert_eq!(goal_bonus(0.1, 0.05, &c), 0.0);
    }

    #[test]
    fn gaussian_term_bounds() {
        let c = cfg();
        for i in 0..200 {
            let tau = -0.5 + 0.01 * i as f64;
            let r = torque_reward(
                &[0.5, tau, 0.0, 0.0, 0.0],
                &[false, true, false, false, false],
                0.5,
                &c,
            ) / c.w_torque;
            assert!((0.0..=1.0).contains(&r));
        }
        // symmetric about the target
        let t = c.tau_max * 0.5;
        let up = torque_reward(&[0.0, t + 0.07, 0.0, 0.0, 0.0], &[false, true, false, false, false], 0.5, &c);
        let down = torque_reward(&[0.0, t - 0.07, 0.0, 0.0, 0.0], &[false, true, false, false, false], 0.5, &c);
        assert_abs_diff_eq!(up, down, epsilon = 1e-12);
    }

    #[test]
    fn composite_is_sum_of_terms() {
        let c = cfg();
        let terms = grasp_reward(
            &[0.5, 0.45, 0.55, 0.5, 0.6],
            &[60.0, 40.0, 55.0, 48.0, 52.0],
            &[true, true, false, true, true],
            0.5,
            &[0.2, 0.25, 0.2, 0.3],
            &[0.3, 0.35, 0.3, 0.25],
            &[0.1; 12],
            &[0.05; 12],
            &[0.2; 12],
            false,
            &c,
        );
        let manual = terms.torque
            + terms.force
            + terms.diff
            + terms.outer
            + terms.action
            + terms.velocity
            + terms.terminal;
        assert_eq!(terms.total(), manual);
    }
}
