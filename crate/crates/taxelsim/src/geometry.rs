//! Object shapes and nearest-surface-point queries.
//!
//! Every contact decision downstream rests on `nearest_surface`: given a
//! query point (a taxel), return the closest point on the object surface,
//! the outward normal there, and a signed distance (negative inside).
//! Interior queries are first-class because penetrating taxels are exactly
//! the interesting case.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::math::{Transform, Vec3};

/// Convex shape in its local frame. All lengths in meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectShape {
    Sphere { radius: f64 },
    Box { half_extents: [f64; 3] },
    Cylinder { radius: f64, half_height: f64 },
    ConvexMesh(ConvexMesh),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Triangles, outward-wound (counter-clockwise seen from outside).
    pub faces: Vec<[usize; 3]>,
}

/// Result of a nearest-surface query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceQuery {
    pub nearest_point: Vec3,
    pub outward_normal: Vec3,
    /// Negative when the query point is inside the shape.
    pub signed_distance: f64,
}

impl ObjectShape {
    /// Validates size parameters; for meshes, checks closedness, convexity,
    /// and outward winding. Runs at load time so queries never fail.
    pub fn validate(&self) -> Result<()> {
        match self {
            ObjectShape::Sphere { radius } => {
                if *radius <= 0.0 {
                    return Err(SimError::InvalidShape(format!(
                        "sphere radius {radius} must be positive"
                    )));
                }
            }
            ObjectShape::Box { half_extents } => {
                if half_extents.iter().any(|h| *h <= 0.0) {
                    return Err(SimError::InvalidShape(format!(
                        "box half-extents {half_extents:?} must all be positive"
                    )));
                }
            }
            ObjectShape::Cylinder {
                radius,
                half_height,
            } => {
                if *radius <= 0.0 || *half_height <= 0.0 {
                    return Err(SimError::InvalidShape(format!(
                        "cylinder radius {radius}, half-height {half_height} must be positive"
                    )));
                }
            }
            ObjectShape::ConvexMesh(mesh) => mesh.validate()?,
        }
        Ok(())
    }

    /// Scales all linear dimensions by a positive factor.
    pub fn scaled(&self, factor: f64) -> ObjectShape {
        match self {
            ObjectShape::Sphere { radius } => ObjectShape::Sphere {
                radius: radius * factor,
            },
            ObjectShape::Box { half_extents } => ObjectShape::Box {
                half_extents: [
                    half_extents[0] * factor,
                    half_extents[1] * factor,
                    half_extents[2] * factor,
                ],
            },
            ObjectShape::Cylinder {
                radius,
                half_height,
            } => ObjectShape::Cylinder {
                radius: radius * factor,
                half_height: half_height * factor,
            },
            ObjectShape::ConvexMesh(mesh) => ObjectShape::ConvexMesh(ConvexMesh {
                vertices: mesh
                    .vertices
                    .iter()
                    .map(|v| [v[0] * factor, v[1] * factor, v[2] * factor])
                    .collect(),
                faces: mesh.faces.clone(),
            }),
        }
    }

    /// Loose bounding radius around the local origin.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            ObjectShape::Sphere { radius } => *radius,
            ObjectShape::Box { half_extents } => {
                (half_extents[0].powi(2) + half_extents[1].powi(2) + half_extents[2].powi(2)).sqrt()
            }
            ObjectShape::Cylinder {
                radius,
                half_height,
            } => (radius.powi(2) + half_height.powi(2)).sqrt(),
            ObjectShape::ConvexMesh(mesh) => mesh
                .vertices
                .iter()
                .map(|v| (v[0].powi(2) + v[1].powi(2) + v[2].powi(2)).sqrt())
                .fold(0.0, f64::max),
        }
    }
}

impl ConvexMesh {
    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 4 {
            return Err(SimError::InvalidShape(
                "convex mesh needs at least 4 vertices".into(),
            ));
        }
        if self.faces.is_empty() {
            return Err(SimError::InvalidShape("convex mesh has no faces".into()));
        }
        for (fi, f) in self.faces.iter().enumerate() {
            for &vi in f {
                if vi >= self.vertices.len() {
                    return Err(SimError::InvalidShape(format!(
                        "face {fi} references vertex {vi} out of range"
                    )));
                }
            }
        }
        let centroid = self.centroid();
        // Outward winding and convexity: every vertex must lie on or behind
        // every face plane, and the centroid strictly behind.
        for (fi, f) in self.faces.iter().enumerate() {
            let (origin, normal) = self.face_plane(f)?;
            let d_centroid = (centroid - origin).dot(&normal);
            if d_centroid >= -1e-12 {
                return Err(SimError::InvalidShape(format!(
                    "face {fi} is wound inward (centroid on positive side)"
                )));
            }
            for (vi, v) in self.vertices.iter().enumerate() {
                let p = Vec3::new(v[0], v[1], v[2]);
                if (p - origin).dot(&normal) > 1e-9 {
                    return Err(SimError::InvalidShape(format!(
                        "vertex {vi} lies outside face {fi}: mesh is not convex"
                    )));
                }
            }
        }
        // Closedness: every edge must be shared by exactly two faces.
        let mut edge_count = std::collections::HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0usize) += 1;
            }
        }
        if edge_count.values().any(|&c| c != 2) {
            return Err(SimError::InvalidShape(
                "mesh is not closed: an edge is not shared by exactly two faces".into(),
            ));
        }
        Ok(())
    }

    fn centroid(&self) -> Vec3 {
        let mut c = Vec3::zeros();
        for v in &self.vertices {
            c += Vec3::new(v[0], v[1], v[2]);
        }
        c / self.vertices.len() as f64
    }

    fn face_plane(&self, f: &[usize; 3]) -> Result<(Vec3, Vec3)> {
        let a = Vec3::from(self.vertices[f[0]]);
        let b = Vec3::from(self.vertices[f[1]]);
        let c = Vec3::from(self.vertices[f[2]]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len < 1e-15 {
            return Err(SimError::InvalidShape("degenerate face".into()));
        }
        Ok((a, n / len))
    }

    /// Parses an OFF-format convex mesh (triangulating polygon faces by fan).
    pub fn from_off(text: &str) -> Result<ConvexMesh> {
        let mut tokens = text
            .lines()
            .map(|l| match l.find('#') {
                Some(i) => &l[..i],
                None => l,
            })
            .flat_map(|l| l.split_whitespace())
            .peekable();
        if tokens.peek() == Some(&"OFF") {
            tokens.next();
        }
        let mut next_num = |what: &str| -> Result<f64> {
            tokens
                .next()
                .ok_or_else(|| SimError::InvalidShape(format!("OFF: missing {what}")))?
                .parse::<f64>()
                .map_err(|e| SimError::InvalidShape(format!("OFF: bad {what}: {e}")))
        };
        let nv = next_num("vertex count")? as usize;
        let nf = next_num("face count")? as usize;
        let _ne = next_num("edge count")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([next_num("x")?, next_num("y")?, next_num("z")?]);
        }
        let mut faces = Vec::new();
        for _ in 0..nf {
            let n = next_num("face arity")? as usize;
            if n < 3 {
                return Err(SimError::InvalidShape("OFF: face with < 3 vertices".into()));
            }
            let mut idx = Vec::with_capacity(n);
            for _ in 0..n {
                idx.push(next_num("face index")? as usize);
            }
            for k in 1..n - 1 {
                faces.push([idx[0], idx[k], idx[k + 1]]);
            }
        }
        let mesh = ConvexMesh { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Closest surface point, outward normal, and signed distance for one query.
pub fn nearest_surface(shape: &ObjectShape, pose: &Transform, query: &Vec3) -> SurfaceQuery {
    let local = pose.inverse().apply_point(query);
    let local_result = nearest_surface_local(shape, &local);
    SurfaceQuery {
        nearest_point: pose.apply_point(&local_result.nearest_point),
        outward_normal: pose.apply_vector(&local_result.outward_normal),
        signed_distance: local_result.signed_distance,
    }
}

/// Elementwise `nearest_surface`; order of results matches the queries.
pub fn batch_nearest_surface(
    shape: &ObjectShape,
    pose: &Transform,
    queries: &[Vec3],
) -> Vec<SurfaceQuery> {
    let inv = pose.inverse();
    queries
        .iter()
        .map(|q| {
            let local = inv.apply_point(q);
            let r = nearest_surface_local(shape, &local);
            SurfaceQuery {
                nearest_point: pose.apply_point(&r.nearest_point),
                outward_normal: pose.apply_vector(&r.outward_normal),
                signed_distance: r.signed_distance,
            }
        })
        .collect()
}

fn nearest_surface_local(shape: &ObjectShape, q: &Vec3) -> SurfaceQuery {
    match shape {
        ObjectShape::Sphere { radius } => sphere_nearest(*radius, q),
        ObjectShape::Box { half_extents } => box_nearest(half_extents, q),
        ObjectShape::Cylinder {
            radius,
            half_height,
        } => cylinder_nearest(*radius, *half_height, q),
        ObjectShape::ConvexMesh(mesh) => mesh_nearest(mesh, q),
    }
}

fn sphere_nearest(r: f64, q: &Vec3) -> SurfaceQuery {
    let dist = q.norm();
    let normal = if dist > 1e-12 {
        q / dist
    } else {
        // center: tie broken toward +x
        Vec3::x()
    };
    SurfaceQuery {
        nearest_point: normal * r,
        outward_normal: normal,
        signed_distance: dist - r,
    }
}

fn box_nearest(h: &[f64; 3], q: &Vec3) -> SurfaceQuery {
    let inside = (0..3).all(|i| q[i].abs() <= h[i]);
    if !inside {
        let clamped = Vec3::new(
            q.x.clamp(-h[0], h[0]),
            q.y.clamp(-h[1], h[1]),
            q.z.clamp(-h[2], h[2]),
        );
        let diff = q - clamped;
        let dist = diff.norm();
        let normal = pick_box_normal(q, h);
        return SurfaceQuery {
            nearest_point: clamped,
            outward_normal: normal,
            signed_distance: dist,
        };
    }
    // interior: project to the closest face, axis priority x -> y -> z
    let mut best_axis = 0usize;
    let mut best_gap = f64::INFINITY;
    for i in 0..3 {
        let gap = h[i] - q[i].abs();
        if gap < best_gap {
            best_gap = gap;
            best_axis = i;
        }
    }
    let sign = if q[best_axis] >= 0.0 { 1.0 } else { -1.0 };
    let mut p = *q;
    p[best_axis] = sign * h[best_axis];
    let mut normal = Vec3::zeros();
    normal[best_axis] = sign;
    SurfaceQuery {
        nearest_point: p,
        outward_normal: normal,
        signed_distance: -best_gap,
    }
}

fn pick_box_normal(q: &Vec3, h: &[f64; 3]) -> Vec3 {
    // exterior: nearest point may sit on an edge or corner; the owning face
    // is the axis with the largest violation, priority x -> y -> z on ties
    let mut best_axis = 0usize;
    let mut best_violation = f64::NEG_INFINITY;
    for i in 0..3 {
        let violation = q[i].abs() - h[i];
        if violation > best_violation {
            best_violation = violation;
            best_axis = i;
        }
    }
    let mut n = Vec3::zeros();
    n[best_axis] = q[best_axis].signum();
    n
}

fn cylinder_nearest(r: f64, hh: f64, q: &Vec3) -> SurfaceQuery {
    let rho = (q.x * q.x + q.y * q.y).sqrt();
    let radial_dir = if rho > 1e-12 {
        Vec3::new(q.x / rho, q.y / rho, 0.0)
    } else {
        Vec3::x()
    };
    let inside = rho <= r && q.z.abs() <= hh;
    if !inside {
        // clamp into the solid, measure from there
        let rho_c = rho.min(r);
        let z_c = q.z.clamp(-hh, hh);
        let clamped = radial_dir * rho_c + Vec3::new(0.0, 0.0, z_c);
        let diff = q - clamped;
        let dist = diff.norm();
        let normal = if dist > 1e-12 {
            diff / dist
        } else {
            radial_dir
        };
        return SurfaceQuery {
            nearest_point: clamped,
            outward_normal: normal,
            signed_distance: dist,
        };
    }
    // interior: closest of the lateral wall and the two caps,
    // lateral wins ties for determinism
    let gap_lateral = r - rho;
    let gap_cap = hh - q.z.abs();
    if gap_lateral <= gap_cap {
        SurfaceQuery {
            nearest_point: radial_dir * r + Vec3::new(0.0, 0.0, q.z),
            outward_normal: radial_dir,
            signed_distance: -gap_lateral,
        }
    } else {
        let sign = if q.z >= 0.0 { 1.0 } else { -1.0 };
        SurfaceQuery {
            nearest_point: Vec3::new(q.x, q.y, sign * hh),
            outward_normal: Vec3::new(0.0, 0.0, sign),
            signed_distance: -gap_cap,
        }
    }
}

fn mesh_nearest(mesh: &ConvexMesh, q: &Vec3) -> SurfaceQuery {
    let mut best = SurfaceQuery {
        nearest_point: Vec3::zeros(),
        outward_normal: Vec3::x(),
        signed_distance: f64::INFINITY,
    };
    let mut best_d2 = f64::INFINITY;
    let mut inside = true;
    for f in &mesh.faces {
        let a = Vec3::from(mesh.vertices[f[0]]);
        let b = Vec3::from(mesh.vertices[f[1]]);
        let c = Vec3::from(mesh.vertices[f[2]]);
        let n = (b - a).cross(&(c - a)).normalize();
        if (q - a).dot(&n) > 0.0 {
            inside = false;
        }
        let p = closest_point_on_triangle(q, &a, &b, &c);
        let d2 = (q - p).norm_squared();
        if d2 < best_d2 - 1e-18 {
            best_d2 = d2;
            best = SurfaceQuery {
                nearest_point: p,
                outward_normal: n,
                signed_distance: 0.0,
            };
        }
    }
    let dist = best_d2.sqrt();
    best.signed_distance = if inside { -dist } else { dist };
    if !inside && dist > 1e-12 {
        // off an edge or vertex the face normal is not the gradient;
        // the direction to the query is
        best.outward_normal = (q - best.nearest_point) / dist;
    }
    best
}

fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    // Ericson, Real-Time Collision Detection, 5.1.5
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Regular octahedron mesh, handy as a small convex-mesh test object.
pub fn octahedron(radius: f64) -> ConvexMesh {
    let r = radius;
    ConvexMesh {
        vertices: vec![
            [r, 0.0, 0.0],
            [-r, 0.0, 0.0],
            [0.0, r, 0.0],
            [0.0, -r, 0.0],
            [0.0, 0.0, r],
            [0.0, 0.0, -r],
        ],
        faces: vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ],
    }
}
