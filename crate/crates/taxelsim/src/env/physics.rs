//! Minimal deterministic rigid-object integrator.
//!
//! One free rigid object under gravity, driven by penalty contact forces
//! from the taxel model: every active taxel pushes the object along the
//! inward normal at its nearest surface point, with a velocity-damped
//! normal force and Coulomb-capped tangential friction. Semi-implicit
//! Euler throughout. This is deliberately the smallest plant that
//! exercises the contact formulas, not a general-purpose engine.

use nalgebra::UnitQuaternion;

use crate::error::{Result, SimError};
use crate::geometry::{nearest_surface, ObjectShape};
use crate::math::{Mat3, Transform, Vec3};
use crate::tactile::{detect_contact, taxel_force, ContactMaterial};

#[derive(Debug, Clone)]
pub struct ObjectBody {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    pub mass: f64,
    /// Body-frame diagonal inertia.
    pub inertia: Vec3,
    pub shape: ObjectShape,
    pub friction: f64,
    pub restitution: f64,
    /// Viscous velocity damping coefficient.
    pub damping: f64,
}

impl ObjectBody {
    pub fn new(
        shape: ObjectShape,
        mass: f64,
        friction: f64,
        restitution: f64,
        damping: f64,
    ) -> Result<ObjectBody> {
        shape.validate()?;
        if mass <= 0.0 {
            return Err(SimError::config("object.mass", "must be positive"));
        }
        let inertia = diagonal_inertia(&shape, mass);
        Ok(ObjectBody {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
            linear_velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            mass,
            inertia,
            shape,
            friction,
            restitution,
            damping,
        })
    }

    pub fn pose(&self) -> Transform {
        Transform::new(
            self.orientation.to_rotation_matrix().into_inner(),
            self.position,
        )
    }

    pub fn kinetic_energy(&self) -> f64 {
        let lin = 0.5 * self.mass * self.linear_velocity.norm_squared();
        let r = self.orientation.to_rotation_matrix().into_inner();
        let i_world = r * Mat3::from_diagonal(&self.inertia) * r.transpose();
        let ang = 0.5 * self.angular_velocity.dot(&(i_world * self.angular_velocity));
        lin + ang
    }
}

/// Diagonal body-frame inertia for the supported shapes. Convex meshes use
/// their bounding-box approximation.
pub fn diagonal_inertia(shape: &ObjectShape, mass: f64) -> Vec3 {
    match shape {
        ObjectShape::Sphere { radius } => {
            let i = 0.4 * mass * radius * radius;
            Vec3::new(i, i, i)
        }
        ObjectShape::Box { half_extents } => {
            let [hx, hy, hz] = *half_extents;
            let (a, b, c) = (2.0 * hx, 2.0 * hy, 2.0 * hz);
            Vec3::new(
                mass / 12.0 * (b * b + c * c),
                mass / 12.0 * (a * a + c * c),
                mass / 12.0 * (a * a + b * b),
            )
        }
        ObjectShape::Cylinder {
            radius,
            half_height,
        } => {
            let h = 2.0 * half_height;
            let lateral = mass * (3.0 * radius * radius + h * h) / 12.0;
            Vec3::new(lateral, lateral, 0.5 * mass * radius * radius)
        }
        ObjectShape::ConvexMesh(mesh) => {
            let mut hi = Vec3::from_element(f64::NEG_INFINITY);
            let mut lo = Vec3::from_element(f64::INFINITY);
            for v in &mesh.vertices {
                for a in 0..3 {
                    hi[a] = hi[a].max(v[a]);
                    lo[a] = lo[a].min(v[a]);
                }
            }
            let ext = hi - lo;
            Vec3::new(
                mass / 12.0 * (ext.y * ext.y + ext.z * ext.z),
                mass / 12.0 * (ext.x * ext.x + ext.z * ext.z),
                mass / 12.0 * (ext.x * ext.x + ext.y * ext.y),
            )
        }
    }
}

pub struct PhysicsParams {
    pub gravity: f64,
    /// Tangential viscous coefficient feeding the Coulomb cap.
    pub tangent_damping: f64,
    pub contacts_enabled: bool,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            gravity: 9.81,
            tangent_damping: 100.0,
            contacts_enabled: true,
        }
    }
}

/// Advances the object by one substep of length `h` against a fixed set of
/// taxel positions (fingers are treated as quasi-static within a control
/// step).
pub fn substep_object(
    body: &mut ObjectBody,
    taxels: &[Vec3],
    material: &ContactMaterial,
    params: &PhysicsParams,
    h: f64,
) -> Result<()> {
    let mut force = Vec3::new(0.0, 0.0, -params.gravity * body.mass);
    let mut torque = Vec3::zeros();

    if params.contacts_enabled {
        let pose = body.pose();
        // first pass: gather penetrating taxels so the damping terms can be
        // split across them
        let mut contacts: Vec<(crate::geometry::SurfaceQuery, f64)> = Vec::new();
        for p in taxels {
            let sq = nearest_surface(&body.shape, &pose, p);
            if !detect_contact(p, &sq) {
                continue;
            }
            let depth = (sq.nearest_point - p).norm();
            if depth <= material.min_depth {
                continue;
            }
            contacts.push((sq, depth));
        }
        if !contacts.is_empty() {
            let n = contacts.len() as f64;
            // normal damping sized to critically damp the contact; zero
            // restitution maps to full damping. Both viscous coefficients
            // are capped at m/(n h) so the combined damping impulse of one
            // substep can never exceed the momentum it removes — explicit
            // damping would otherwise reverse the velocity and inject
            // energy on stiff impacts.
            let c_cap = body.mass / (n * h);
            let c_n = ((1.0 - body.restitution)
                * 2.0
                * (material.stiffness * body.mass).sqrt())
            .min(c_cap);
            let c_t = params.tangent_damping.min(c_cap);
            for (sq, depth) in &contacts {
                let f_elastic = taxel_force(*depth, material)?;
                let r = sq.nearest_point - body.position;
                let v_contact = body.linear_velocity + body.angular_velocity.cross(&r);
                // positive approach speed deepens the penetration
                let approach = v_contact.dot(&sq.outward_normal);
                let f_n = (f_elastic + c_n * approach).max(0.0);
                let mut f = -sq.outward_normal * f_n;
                let v_t = v_contact - sq.outward_normal * approach;
                let speed_t = v_t.norm();
                if speed_t > 1e-9 {
                    let f_t = (c_t * speed_t).min(body.friction * f_n);
                    f -= v_t / speed_t * f_t;
                }
                force += f;
                torque += r.cross(&f);
            }
        }
    }

    body.linear_velocity += force / body.mass * h;
    let r = body.orientation.to_rotation_matrix().into_inner();
    let i_world = r * Mat3::from_diagonal(&body.inertia) * r.transpose();
    let i_inv = i_world
        .try_inverse()
        .ok_or_else(|| SimError::DegenerateInput("singular inertia tensor".into()))?;
    body.angular_velocity += i_inv * torque * h;
    // viscous velocity damping, applied implicitly: the coefficient is
    // divided by the (tiny) rotational inertia, so an explicit damping
    // torque would overshoot and amplify the spin it is meant to remove.
    // The implicit form is unconditionally stable and exact at c = 0.
    if body.damping > 0.0 {
        body.linear_velocity *= body.mass / (body.mass + body.damping * h);
        let lhs = i_world + Mat3::identity() * (body.damping * h);
        let lhs_inv = lhs
            .try_inverse()
            .ok_or_else(|| SimError::DegenerateInput("singular inertia tensor".into()))?;
        body.angular_velocity = lhs_inv * (i_world * body.angular_velocity);
    }
    body.position += body.linear_velocity * h;
    body.orientation =
        UnitQuaternion::from_scaled_axis(body.angular_velocity * h) * body.orientation;
    Ok(())
}

pub fn is_finite_body(body: &ObjectBody) -> bool {
    body.position.iter().all(|x| x.is_finite())
        && body.linear_velocity.iter().all(|x| x.is_finite())
        && body.angular_velocity.iter().all(|x| x.is_finite())
        && body.orientation.coords.iter().all(|x| x.is_finite())
}
