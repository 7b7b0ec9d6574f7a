//! Rigid transforms, rotation representations, and distance metrics.
//!
//! Orientations move between three forms: orthonormal 3x3 matrices, unit
//! quaternions, and the continuous 6D encoding (first two matrix columns,
//! decoded by Gram-Schmidt). The 6D form collapses the quaternion double
//! cover: `q` and `-q` map to the same matrix and therefore the same
//! encoding, which is why policies consume it instead of quaternions.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Rigid transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Transform {
    pub fn identity() -> Self {
        Transform {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Transform {
            rotation,
            translation,
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Transform {
            rotation: Mat3::identity(),
            translation,
        }
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let unit = nalgebra::Unit::new_normalize(axis);
        Transform {
            rotation: nalgebra::Rotation3::from_axis_angle(&unit, angle).into_inner(),
            translation: Vec3::zeros(),
        }
    }

    /// `self` then `other`, i.e. the transform mapping x to self(other(x)).
    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Transform {
        let rot_inv = self.rotation.transpose();
        Transform {
            rotation: rot_inv,
            translation: -(rot_inv * self.translation),
        }
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Checks the rotation block is orthonormal with determinant +1.
    pub fn validate(&self, tol: f64) -> Result<()> {
        validate_rotation(&self.rotation, tol)
    }
}

pub fn validate_rotation(r: &Mat3, tol: f64) -> Result<()> {
    let err = (r.transpose() * r - Mat3::identity()).norm();
    if err > tol {
        return Err(SimError::InvalidRotation(format!(
            "orthonormality residual {err:.3e} exceeds {tol:.1e}"
        )));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > tol {
        return Err(SimError::InvalidRotation(format!(
            "determinant {det:.9} is not +1 within {tol:.1e}"
        )));
    }
    Ok(())
}

/// 6D rotation encoding: the first two columns of a rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation6D {
    pub a1: Vec3,
    pub a2: Vec3,
}

impl Rotation6D {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.a1.x, self.a1.y, self.a1.z, self.a2.x, self.a2.y, self.a2.z,
        ]
    }
}

/// Extracts the first two columns of an orthonormal matrix.
pub fn encode6d(rotation: &Mat3) -> Result<Rotation6D> {
    validate_rotation(rotation, 1e-6)?;
    Ok(Rotation6D {
        a1: rotation.column(0).into(),
        a2: rotation.column(1).into(),
    })
}

/// Gram-Schmidt reconstruction of the full matrix from the 6D encoding.
pub fn decode6d(r: &Rotation6D) -> Result<Mat3> {
    let n1 = r.a1.norm();
    if n1 < 1e-12 {
        return Err(SimError::DegenerateInput("6D first column is zero".into()));
    }
    let b1 = r.a1 / n1;
    let proj = r.a2 - b1 * b1.dot(&r.a2);
    let n2 = proj.norm();
    if n2 < 1e-12 {
        return Err(SimError::DegenerateInput(
            "6D columns are parallel".into(),
        ));
    }
    let b2 = proj / n2;
    let b3 = b1.cross(&b2);
    Ok(Mat3::from_columns(&[b1, b2, b3]))
}

/// Geodesic angle between two rotations, in radians, clamped into [0, pi].
pub fn rot_distance(r1: &Mat3, r2: &Mat3) -> f64 {
    let trace = (r1.transpose() * r2).trace();
    // clamp absorbs floating-point drift outside [-1, 1]
    let c = ((trace - 1.0) / 2.0).clamp(-1.0, 1.0);
    c.acos()
}

/// Quaternion to rotation matrix. Every entry is built from products of
/// two components, so q and -q produce bit-identical matrices: the double
/// cover collapses exactly, not just to rounding error.
pub fn quat_to_matrix(q: &UnitQuaternion<f64>) -> Mat3 {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rotation(rng: &mut impl Rng) -> Mat3 {
        quat_to_matrix(&random_unit_quat(rng))
    }

    fn random_unit_quat(rng: &mut impl Rng) -> UnitQuaternion<f64> {
        use rand_distr::StandardNormal;
        let q = nalgebra::Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        UnitQuaternion::from_quaternion(q)
    }

    #[test]
    fn encode_identity() {
        let r = encode6d(&Mat3::identity()).unwrap();
        assert_eq!(r.a1, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(r.a2, Vec3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn encode_quarter_turn_z() {
        let rot = Transform::from_axis_angle(Vec3::z(), std::f64::consts::FRAC_PI_2).rotation;
        let r = encode6d(&rot).unwrap();
        assert_abs_diff_eq!(r.a1, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(r.a2, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn encode_rejects_non_rotation() {
        let m = Mat3::identity() * 2.0;
        assert!(encode6d(&m).is_err());
    }

    #[test]
    fn double_cover_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = random_unit_quat(&mut rng);
            // exact antipode: re-normalizing would perturb the components
            let neg = UnitQuaternion::new_unchecked(-q.into_inner());
            let e1 = encode6d(&quat_to_matrix(&q)).unwrap();
            let e2 = encode6d(&quat_to_matrix(&neg)).unwrap();
            assert_eq!(e1.as_array(), e2.as_array());
        }
    }

    #[test]
    fn decode_examples() {
        let id = decode6d(&Rotation6D {
            a1: Vec3::new(1.0, 0.0, 0.0),
            a2: Vec3::new(0.0, 1.0, 0.0),
        })
        .unwrap();
        assert_abs_diff_eq!(id, Mat3::identity(), epsilon = 1e-12);

        let scaled = decode6d(&Rotation6D {
            a1: Vec3::new(2.0, 0.0, 0.0),
            a2: Vec3::new(0.0, 3.0, 0.0),
        })
        .unwrap();
        assert_abs_diff_eq!(scaled, Mat3::identity(), epsilon = 1e-12);

        let gs = decode6d(&Rotation6D {
            a1: Vec3::new(1.0, 0.0, 0.0),
            a2: Vec3::new(1.0, 1.0, 0.0),
        })
        .unwrap();
        assert_abs_diff_eq!(Vec3::from(gs.column(1)), Vec3::y(), epsilon = 1e-12);
    }

    #[test]
    fn decode_degenerate_inputs() {
        assert!(decode6d(&Rotation6D {
            a1: Vec3::zeros(),
            a2: Vec3::y(),
        })
        .is_err());
        assert!(decode6d(&Rotation6D {
            a1: Vec3::x(),
            a2: Vec3::x() * 3.0,
        })
        .is_err());
    }

    #[test]
    fn rot_distance_examples() {
        let id = Mat3::identity();
        assert_eq!(rot_distance(&id, &id), 0.0);
        let quarter = Transform::from_axis_angle(Vec3::z(), std::f64::consts::FRAC_PI_2).rotation;
        assert_abs_diff_eq!(
            rot_distance(&id, &quarter),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
        let half = Transform::from_axis_angle(Vec3::x(), std::f64::consts::PI).rotation;
        assert_abs_diff_eq!(rot_distance(&id, &half), std::f64::consts::PI, epsilon = 1e-9);
    }

    #[test]
    fn round_trip_random_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let r = random_rotation(&mut rng);
            let back = decode6d(&encode6d(&r).unwrap()).unwrap();
            assert!((back - r).norm() < 1e-9);
        }
    }

    #[test]
    fn rot_distance_metric_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let a = random_rotation(&mut rng);
            let b = random_rotation(&mut rng);
            let c = random_rotation(&mut rng);
            let dab = rot_distance(&a, &b);
            let dba = rot_distance(&b, &a);
            assert_abs_diff_eq!(dab, dba, epsilon = 1e-9);
            assert!(dab <= rot_distance(&a, &c) + rot_distance(&c, &b) + 1e-9);
        }
    }

    #[test]
    fn continuity_near_antipode() {
        // Near a half-turn, quaternions flip sign between nearby rotations
        // while the 6D encoding stays continuous.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let base = random_rotation(&mut rng);
            let nudge =
                Transform::from_axis_angle(Vec3::new(0.3, -0.2, 0.9), 5e-4).rotation;
            let nearby = base * nudge;
            assert!(rot_distance(&base, &nearby) < 1e-3);
            let e1 = encode6d(&base).unwrap().as_array();
            let e2 = encode6d(&nearby).unwrap().as_array();
            let jump = e1
                .iter()
                .zip(e2.iter())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            assert!(jump < 1e-2);
        }
    }

    proptest! {
        #[test]
        fn decode_always_orthonormal(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = random_rotation(&mut rng);
            let m = decode6d(&encode6d(&r).unwrap()).unwrap();
            prop_assert!(validate_rotation(&m, 1e-9).is_ok());
        }
    }
}
