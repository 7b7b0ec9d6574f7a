//! Virtual-taxel contact model.
//!
//! A taxel at world position `p` is in contact when the vector from the
//! nearest object-surface point back to the taxel points against the
//! outward normal, i.e. the taxel has penetrated. Per-taxel force comes
//! from penetration depth; the per-fingertip aggregate is the tuple
//! `(F_i, mu_i)`: total force and the force-weighted contact center.
//! With the linear force law the stiffness cancels out of `mu_i`, so the
//! contact center is computed depth-weighted and is exactly independent
//! of `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{batch_nearest_surface, ObjectShape, SurfaceQuery};
use crate::hand::TaxelFrameBatch;
use crate::math::{Transform, Vec3};

/// Contact material: linear stiffness, or an optional tabulated
/// stress-strain curve used instead of the linear law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContactMaterial {
    /// Linear stiffness, force units per meter of penetration.
    pub stiffness: f64,
    /// Minimum penetration depth before a taxel reports contact.
    #[serde(default)]
    pub min_depth: f64,
    /// Optional monotone (strain, stress) table; enables table mode.
    #[serde(default)]
    pub stress_strain_table: Option<Vec<(f64, f64)>>,
    /// Pad thickness used to convert depth to strain in table mode.
    #[serde(default = "default_pad_thickness")]
    pub pad_thickness: f64,
    /// Area scale applied to the interpolated stress in table mode.
    #[serde(default = "default_taxel_area")]
    pub taxel_area: f64,
}

fn default_pad_thickness() -> f64 {
    0.002
}

fn default_taxel_area() -> f64 {
    1.0
}

impl Default for ContactMaterial {
    fn default() -> Self {
        ContactMaterial {
            stiffness: 1000.0,
            min_depth: 0.0,
            stress_strain_table: None,
            pad_thickness: default_pad_thickness(),
            taxel_area: default_taxel_area(),
        }
    }
}

impl ContactMaterial {
    pub fn validate(&self) -> Result<()> {
        if self.stiffness <= 0.0 {
            return Err(SimError::config("material.stiffness", "must be positive"));
        }
        if self.min_depth < 0.0 {
            return Err(SimError::config("material.min_depth", "must be non-negative"));
        }
        if let Some(table) = &self.stress_strain_table {
            if table.is_empty() {
                return Err(SimError::config(
                    "material.stress_strain_table",
                    "table must not be empty",
                ));
            }
            for w in table.windows(2) {
                if w[1].0 <= w[0].0 || w[1].1 <= w[0].1 {
                    return Err(SimError::config(
                        "material.stress_strain_table",
                        "table must be strictly increasing in strain and stress",
                    ));
                }
            }
            if table[0].0 < 0.0 || table[0].1 < 0.0 {
                return Err(SimError::config(
                    "material.stress_strain_table",
                    "table entries must be non-negative",
                ));
            }
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.stress_strain_table.is_none()
    }
}

/// One taxel's reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxelReading {
    pub active: bool,
    pub depth: f64,
    pub force: f64,
    pub world_position: Vec3,
}

/// Per-fingertip aggregate `(F_i, mu_i)` plus the raw readings.
#[derive(Debug, Clone)]
pub struct FingertipTactile {
    pub total_force: f64,
    pub contact_center: Vec3,
    pub active_count: usize,
    pub readings: Vec<TaxelReading>,
}

/// Penetration test: true iff `(p - p_o) . n_o < 0` (strict).
pub fn detect_contact(taxel_pos: &Vec3, surface: &SurfaceQuery) -> bool {
    (taxel_pos - surface.nearest_point).dot(&surface.outward_normal) < 0.0
}

/// Per-taxel normal force from penetration depth.
pub fn taxel_force(depth: f64, material: &ContactMaterial) -> Result<f64> {
    if depth < 0.0 {
        return Err(SimError::DegenerateInput(format!(
            "negative penetration depth {depth}"
        )));
    }
    match &material.stress_strain_table {
        None => Ok(material.stiffness * depth),
        Some(table) => {
            let strain = depth / material.pad_thickness;
            Ok(interp_stress(table, strain) * material.taxel_area)
        }
    }
}

fn interp_stress(table: &[(f64, f64)], strain: f64) -> f64 {
    // implicit (0, 0) anchor; linear extrapolation past the last segment
    if strain <= 0.0 {
        return 0.0;
    }
    let (s0, f0) = (0.0, 0.0);
    let mut prev = (s0, f0);
    for &(s, f) in table {
        if strain <= s {
            let t = (strain - prev.0) / (s - prev.0);
            return prev.1 + t * (f - prev.1);
        }
        prev = (s, f);
    }
    let n = table.len();
    let (s_last, f_last) = table[n - 1];
    let (s_prev, f_prev) = if n >= 2 { table[n - 2] } else { (0.0, 0.0) };
    let slope = (f_last - f_prev) / (s_last - s_prev);
    f_last + slope * (strain - s_last)
}

/// Senses one fingertip against an object.
///
/// `sentinel` is reported as the contact center when no taxel is active
/// (the fingertip frame origin mapped to world); `active_count` lets
/// consumers mask it.
pub fn sense_fingertip(
    taxel_positions: &[Vec3],
    sentinel: Vec3,
    shape: &ObjectShape,
    pose: &Transform,
    material: &ContactMaterial,
) -> Result<FingertipTactile> {
    let surfaces = batch_nearest_surface(shape, pose, taxel_positions);
    sense_fingertip_with_surfaces(taxel_positions, &surfaces, sentinel, material)
}

pub fn sense_fingertip_with_surfaces(
    taxel_positions: &[Vec3],
    surfaces: &[SurfaceQuery],
    sentinel: Vec3,
    material: &ContactMaterial,
) -> Result<FingertipTactile> {
    let mut readings = Vec::with_capacity(taxel_positions.len());
    let mut total_force = 0.0;
    let mut depth_sum = 0.0;
    let mut force_weighted = Vec3::zeros();
    let mut depth_weighted = Vec3::zeros();
    let mut active_count = 0usize;
    for (p, sq) in taxel_positions.iter().zip(surfaces) {
        let mut reading = TaxelReading {
            active: false,
            depth: 0.0,
            force: 0.0,
            world_position: *p,
        };
        if detect_contact(p, sq) {
            let depth = (sq.nearest_point - p).norm();
            if depth > material.min_depth {
                let force = taxel_force(depth, material)?;
                reading = TaxelReading {
                    active: true,
                    depth,
                    force,
                    world_position: *p,
                };
                total_force += force;
                depth_sum += depth;
                force_weighted += p * force;
                depth_weighted += p * depth;
                active_count += 1;
            }
        }
        readings.push(reading);
    }
    let contact_center = if active_count == 0 {
        sentinel
    } else if material.is_linear() {
        // stiffness cancels: depth weighting equals force weighting exactly
        depth_weighted / depth_sum
    } else {
        force_weighted / total_force
    };
    Ok(FingertipTactile {
        total_force,
        contact_center,
        active_count,
        readings,
    })
}

/// Senses all five fingertips independently.
pub fn sense_hand(
    frames: &TaxelFrameBatch,
    shape: &ObjectShape,
    pose: &Transform,
    material: &ContactMaterial,
) -> Result<Vec<FingertipTactile>> {
    frames
        .world_positions
        .iter()
        .zip(&frames.fingertip_poses)
        .map(|(taxels, tip)| sense_fingertip(taxels, tip.translation, shape, pose, material))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::nearest_surface;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere() -> ObjectShape {
        ObjectShape::Sphere { radius: 0.05 }
    }

    #[test]
    fn detect_contact_cases() {
        let s = sphere();
        let id = Transform::identity();
        let interior = Vec3::new(0.0, 0.0, 0.04);
        let exterior = Vec3::new(0.0, 0.0, 0.06);
        let boundary = Vec3::new(0.0, 0.0, 0.05);
        assert!(detect_contact(&interior, &nearest_surface(&s, &id, &interior)));
        assert!(!detect_contact(&exterior, &nearest_surface(&s, &id, &exterior)));
        // exactly on the surface: strict inequality means no contact
        assert!(!detect_contact(&boundary, &nearest_surface(&s, &id, &boundary)));
    }

    #[test]
    fn taxel_force_linear() {
        let m = ContactMaterial {
            stiffness: 1000.0,
            ..Default::default()
        };
        assert_eq!(taxel_force(0.01, &m).unwrap(), 10.0);
        assert_eq!(taxel_force(0.0, &m).unwrap(), 0.0);
        assert_eq!(taxel_force(0.02, &m).unwrap(), 20.0);
        assert!(taxel_force(-0.001, &m).is_err());
    }

    #[test]
    fn taxel_force_table_mode() {
        let m = ContactMaterial {
            stiffness: 1.0,
            stress_strain_table: Some(vec![(0.5, 100.0), (1.0, 300.0)]),
            pad_thickness: 0.002,
            taxel_area: 1.0,
            ..Default::default()
        };
        m.validate().unwrap();
        assert_eq!(taxel_force(0.0, &m).unwrap(), 0.0);
        // strain 0.25 -> halfway to the first knot
        assert_abs_diff_eq!(taxel_force(0.0005, &m).unwrap(), 50.0, epsilon = 1e-12);
        // strain 0.75 -> between knots
        assert_abs_diff_eq!(taxel_force(0.0015, &m).unwrap(), 200.0, epsilon = 1e-12);
        // extrapolation keeps monotonicity
        assert!(taxel_force(0.004, &m).unwrap() > 300.0);
    }

    #[test]
    fn two_point_weighted_mean() {
        // active taxels p1 d=0.01, p2 d=0.03, k=1000 -> F=40, mu=(0.25,0.75,0)
        // constructed against a sphere so depths come out exactly
        let m = ContactMaterial {
            stiffness: 1000.0,
            ..Default::default()
        };
        let p1 = Vec3::new(1.0, 0.0, 0.0);
        let p2 = Vec3::new(0.0, 1.0, 0.0);
        let d = [0.01, 0.03];
        let mut total = 0.0;
        let mut weighted = Vec3::zeros();
        for (p, depth) in [p1, p2].iter().zip(d) {
            let f = taxel_force(depth, &m).unwrap();
            total += f;
            weighted += p * f;
        }
        assert_abs_diff_eq!(total, 40.0, epsilon = 1e-12);
        assert_abs_diff_eq!(weighted / total, Vec3::new(0.25, 0.75, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn no_contact_sentinel() {
        let m = ContactMaterial::default();
        let sentinel = Vec3::new(9.0, 9.0, 9.0);
        let taxels = vec![Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.0, 0.3, 0.0)];
        let r = sense_fingertip(&taxels, sentinel, &sphere(), &Transform::identity(), &m).unwrap();
        assert_eq!(r.active_count, 0);
        assert_eq!(r.total_force, 0.0);
        assert_eq!(r.contact_center, sentinel);
        for reading in &r.readings {
            assert!(!reading.active);
            assert_eq!(reading.depth, 0.0);
            assert_eq!(reading.force, 0.0);
        }
    }

    fn random_contact_taxels(rng: &mut impl Rng, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                let dir = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
                .normalize();
                dir * rng.gen_range(0.02..0.07)
            })
            .collect()
    }

    #[test]
    fn stiffness_cancels_in_contact_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let taxels = random_contact_taxels(&mut rng, 40);
            let sentinel = Vec3::zeros();
            let lo = ContactMaterial {
                stiffness: 1.0,
                ..Default::default()
            };
            let hi = ContactMaterial {
                stiffness: 500.0,
                ..Default::default()
            };
            let a = sense_fingertip(&taxels, sentinel, &sphere(), &Transform::identity(), &lo)
                .unwrap();
            let b = sense_fingertip(&taxels, sentinel, &sphere(), &Transform::identity(), &hi)
                .unwrap();
            // depth-weighted path is bit-for-bit identical across k
            assert_eq!(a.contact_center, b.contact_center);
            if a.active_count > 0 {
                // and agrees with the force-weighted formula
                let mut fw = Vec3::zeros();
                let mut total = 0.0;
                for r in b.readings.iter().filter(|r| r.active) {
                    fw += r.world_position * r.force;
                    total += r.force;
                }
                assert_abs_diff_eq!(b.contact_center, fw / total, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn three_taxel_enumeration_oracle() {
        // 3-taxel toy fingertip vs a sphere: activation set and aggregates
        // enumerated by hand
        let m = ContactMaterial {
            stiffness: 100.0,
            ..Default::default()
        };
        let taxels = vec![
            Vec3::new(0.0, 0.0, 0.04),  // inside, depth 0.01
            Vec3::new(0.0, 0.03, 0.0),  // inside, depth 0.02
            Vec3::new(0.0, 0.0, 0.09),  // outside
        ];
        let r = sense_fingertip(
            &taxels,
            Vec3::zeros(),
            &sphere(),
            &Transform::identity(),
            &m,
        )
        .unwrap();
        assert_eq!(r.active_count, 2);
        assert!(r.readings[0].active && r.readings[1].active && !r.readings[2].active);
        assert_abs_diff_eq!(r.readings[0].depth, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(r.readings[1].depth, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(r.total_force, 3.0, epsilon = 1e-12);
        let expected_mu =
            (taxels[0] * 0.01 + taxels[1] * 0.02) / 0.03;
        assert_abs_diff_eq!(r.contact_center, expected_mu, epsilon = 1e-12);
    }

    #[test]
    fn contact_center_in_convex_hull_and_monotone_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let m = ContactMaterial::default();
        for _ in 0..50 {
            let taxels = random_contact_taxels(&mut rng, 30);
            let r = sense_fingertip(
                &taxels,
                Vec3::zeros(),
                &sphere(),
                &Transform::identity(),
                &m,
            )
            .unwrap();
            if r.active_count == 0 {
                continue;
            }
            // convex hull containment: mu is a convex combination of active
            // positions, so it stays inside their bounding box
            let active: Vec<&TaxelReading> = r.readings.iter().filter(|t| t.active).collect();
            for axis in 0..3 {
                let lo = active
                    .iter()
                    .map(|t| t.world_position[axis])
                    .fold(f64::INFINITY, f64::min);
                let hi = active
                    .iter()
                    .map(|t| t.world_position[axis])
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(r.contact_center[axis] >= lo - 1e-12);
                assert!(r.contact_center[axis] <= hi + 1e-12);
            }
            // uniformly deeper penetration strictly increases F
            let deeper: Vec<Vec3> = taxels
                .iter()
                .map(|p| {
                    if p.norm() < 0.05 {
                        p * 0.9
                    } else {
                        *p
                    }
                })
                .collect();
            let r2 = sense_fingertip(
                &deeper,
                Vec3::zeros(),
                &sphere(),
                &Transform::identity(),
                &m,
            )
            .unwrap();
            assert!(r2.total_force > r.total_force);
        }
    }

    #[test]
    fn translation_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let m = ContactMaterial::default();
        let shift = Vec3::new(0.11, -0.07, 0.04);
        for _ in 0..50 {
            let taxels = random_contact_taxels(&mut rng, 25);
            let moved: Vec<Vec3> = taxels.iter().map(|p| p + shift).collect();
            let a = sense_fingertip(
                &taxels,
                Vec3::zeros(),
                &sphere(),
                &Transform::identity(),
                &m,
            )
            .unwrap();
            let b = sense_fingertip(
                &moved,
                shift,
                &sphere(),
                &Transform::from_translation(shift),
                &m,
            )
            .unwrap();
            assert_eq!(a.active_count, b.active_count);
            assert_abs_diff_eq!(a.total_force, b.total_force, epsilon = 1e-9);
            assert_abs_diff_eq!(a.contact_center + shift, b.contact_center, epsilon = 1e-9);
        }
    }

    #[test]
    fn symmetric_pinch_equal_forces() {
        // mirrored taxel layouts pinching a sphere on the x-axis
        let m = ContactMaterial::default();
        let mut left = Vec::new();
        let mut right = Vec::new();
        for i in 0..10 {
            let y = -0.01 + 0.002 * i as f64;
            left.push(Vec3::new(-0.045, y, 0.0));
            right.push(Vec3::new(0.045, y, 0.0));
        }
        let a = sense_fingertip(&left, Vec3::zeros(), &sphere(), &Transform::identity(), &m)
            .unwrap();
        let b = sense_fingertip(&right, Vec3::zeros(), &sphere(), &Transform::identity(), &m)
            .unwrap();
        assert!(a.total_force > 0.0);
        assert_abs_diff_eq!(a.total_force, b.total_force, epsilon = 1e-9);
    }

    #[test]
    fn sense_hand_locality() {
        use crate::hand::{forward_kinematics, HandModel, JointState, DOF};
        let model = HandModel::default_model();
        let frames = forward_kinematics(&model, &JointState::zeros(DOF)).unwrap();
        // a small sphere touching only the thumb fingertip
        let thumb_tip = frames.fingertip_poses[0].translation;
        let pose = Transform::from_translation(thumb_tip + Vec3::new(0.012, 0.0, 0.0));
        let shape = ObjectShape::Sphere { radius: 0.012 };
        let m = ContactMaterial::default();
        let hand = sense_hand(&frames, &shape, &pose, &m).unwrap();
        assert_eq!(hand.len(), 5);
        assert!(hand[0].total_force > 0.0, "thumb should touch");
        for f in &hand[1..] {
            assert_eq!(f.total_force, 0.0);
            assert_eq!(f.active_count, 0);
        }
        // the 5D contact-force observation row
        let forces: Vec<f64> = hand.iter().map(|f| f.total_force).collect();
        assert_eq!(forces.len(), 5);
    }
}
