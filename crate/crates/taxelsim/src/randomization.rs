//! Seeded domain randomization with reproducible per-environment streams.
//!
//! Streams come from ChaCha8 keyed by the master seed, with the
//! environment index as the cipher's stream number. Independence across
//! environments is structural: distinct stream numbers select disjoint
//! keystreams, so one environment's consumption pattern can never shift
//! another's draws.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::actuator::{sample_params, ActuatorParams, ActuatorRanges};
use crate::error::{Result, SimError};
use crate::hand::DOF;
use crate::math::{quat_to_matrix, Mat3};

/// One reproducible per-environment RNG stream.
#[derive(Debug, Clone)]
pub struct EnvStream {
    pub master_seed: u64,
    pub index: u64,
    rng: ChaCha8Rng,
}

impl EnvStream {
    pub fn new(master_seed: u64, index: u64) -> EnvStream {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        EnvStream {
            master_seed,
            index,
            rng,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl RngCore for EnvStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Independent streams for `n_envs` environments.
pub fn make_streams(master_seed: u64, n_envs: usize) -> Vec<EnvStream> {
    (0..n_envs as u64)
        .map(|i| EnvStream::new(master_seed, i))
        .collect()
}

/// Sampling intervals for everything redrawn at episode start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomizationSpec {
    /// Object mass interval, kg.
    pub object_mass: [f64; 2],
    /// Dimensionless multiplier on all object dimensions.
    pub object_scale: [f64; 2],
    pub friction: [f64; 2],
    pub restitution: [f64; 2],
    /// Velocity damping coefficient interval.
    pub damping: [f64; 2],
    /// Spawn height above the palm for the grasp task, m.
    pub drop_height: [f64; 2],
    /// Draw the initial object orientation uniformly on SO(3).
    pub random_orientation: bool,
    pub actuator: ActuatorRanges,
    /// Force command interval, within [0, 1].
    pub f_cmd: [f64; 2],
}

impl Default for RandomizationSpec {
    fn default() -> Self {
        RandomizationSpec {
            object_mass: [0.05, 0.3],
            object_scale: [0.9, 1.1],
            friction: [0.5, 1.2],
            restitution: [0.0, 0.3],
            damping: [0.01, 0.1],
            drop_height: [0.08, 0.15],
            random_orientation: true,
            actuator: ActuatorRanges::default(),
            f_cmd: [0.0, 1.0],
        }
    }
}

impl RandomizationSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [
            ("object_mass", self.object_mass),
            ("object_scale", self.object_scale),
            ("friction", self.friction),
            ("restitution", self.restitution),
            ("damping", self.damping),
            ("drop_height", self.drop_height),
            ("f_cmd", self.f_cmd),
        ] {
            if lo > hi {
                return Err(SimError::config(
                    format!("randomization.{name}"),
                    format!("interval [{lo}, {hi}] is not well-ordered"),
                ));
            }
        }
        for (name, lo) in [
            ("object_mass", self.object_mass[0]),
            ("object_scale", self.object_scale[0]),
            ("friction", self.friction[0]),
            ("restitution", self.restitution[0]),
            ("damping", self.damping[0]),
        ] {
            if lo < 0.0 {
                return Err(SimError::config(
                    format!("randomization.{name}"),
                    "must be non-negative",
                ));
            }
        }
        if self.f_cmd[0] < 0.0 || self.f_cmd[1] > 1.0 {
            return Err(SimError::config(
                "randomization.f_cmd",
                "interval must sit inside [0, 1]",
            ));
        }
        self.actuator.validate()
    }
}

/// Concrete sampled values for one episode, with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeDraw {
    pub master_seed: u64,
    pub stream_index: u64,
    pub object_mass: f64,
    pub object_scale: f64,
    pub friction: f64,
    pub restitution: f64,
    pub damping: f64,
    pub drop_height: f64,
    /// Unit quaternion [w, x, y, z].
    pub initial_orientation: [f64; 4],
    pub actuators: Vec<ActuatorParams>,
    pub f_cmd: f64,
}

impl EpisodeDraw {
    pub fn initial_rotation(&self) -> Mat3 {
        let [w, x, y, z] = self.initial_orientation;
        quat_to_matrix(&nalgebra::UnitQuaternion::from_quaternion(
            nalgebra::Quaternion::new(w, x, y, z),
        ))
    }
}

fn uniform(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Uniform rotation via a Gaussian 4-vector normalized onto the 3-sphere.
pub fn uniform_quaternion(rng: &mut impl Rng) -> [f64; 4] {
    use rand_distr::StandardNormal;
    loop {
        let q = [
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm];
        }
    }
}

/// Samples one episode's randomization. Draw order is fixed; identical
/// stream state reproduces the draw exactly.
pub fn draw_episode(spec: &RandomizationSpec, stream: &mut EnvStream) -> Result<EpisodeDraw> {
    spec.validate()?;
    let master_seed = stream.master_seed;
    let stream_index = stream.index;
    let rng = stream.rng();
    let object_mass = uniform(rng, spec.object_mass);
    let object_scale = uniform(rng, spec.object_scale);
    let friction = uniform(rng, spec.friction);
    let restitution = uniform(rng, spec.restitution);
    let damping = uniform(rng, spec.damping);
    let drop_height = uniform(rng, spec.drop_height);
    let initial_orientation = if spec.random_orientation {
        uniform_quaternion(rng)
    } else {
        [1.0, 0.0, 0.0, 0.0]
    };
    let mut actuators = Vec::with_capacity(DOF);
    for _ in 0..DOF {
        actuators.push(sample_params(&spec.actuator, rng)?);
    }
    let f_cmd = uniform(rng, spec.f_cmd);
    Ok(EpisodeDraw {
        master_seed,
        stream_index,
        object_mass,
        object_scale,
        friction,
        restitution,
        damping,
        drop_height,
        initial_orientation,
        actuators,
        f_cmd,
    })
}
