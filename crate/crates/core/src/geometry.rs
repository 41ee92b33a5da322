//! Unsigned distance fields of canonical and posed primitives and their
//! unions. Inside points evaluate to exactly zero.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lowering::{PrimitiveSet, Shape, TransformedPrimitive};
use crate::math::{self, Vec3};

/// Distance to an origin-centered cuboid with full `extents`.
pub fn distance_cuboid(p: Vec3, extents: Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let e = (p[i].abs() - extents[i] / 2.0).max(0.0);
        acc += e * e;
    }
    acc.sqrt()
}

/// Distance to an origin-centered cylinder of full `height` along x.
pub fn distance_cylinder(p: Vec3, height: f64, radius: f64) -> f64 {
    let axial = p[0].abs() - height / 2.0;
    let radial = p[1].hypot(p[2]) - radius;
    match (axial > 0.0, radial > 0.0) {
        (false, false) => 0.0,
        (false, true) => radial,
        (true, false) => axial,
        (true, true) => radial.hypot(axial),
    }
}

pub fn distance_canonical(q: Vec3, shape: &Shape) -> f64 {
    match *shape {
        Shape::Cuboid { extents } => distance_cuboid(q, extents),
        Shape::Cylinder { height, radius } => distance_cylinder(q, height, radius),
    }
}

/// Field of a posed primitive, evaluated in its local frame `Rᵀ(p − t)`.
pub fn distance_primitive(p: Vec3, prim: &TransformedPrimitive) -> f64 {
    distance_canonical(prim.to_local(p), &prim.shape)
}

/// Union field: the minimum over members.
pub fn distance_set(p: Vec3, set: &PrimitiveSet) -> Result<f64> {
    nearest_primitive(p, set).map(|(_, d)| d)
}

/// Index and distance of the member attaining the union minimum. Ties go to
/// the lowest index.
pub fn nearest_primitive(p: Vec3, set: &PrimitiveSet) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, prim) in set.primitives.iter().enumerate() {
        let d = distance_primitive(p, prim);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
            if d == 0.0 {
                break;
            }
        }
    }
    best.ok_or(Error::EmptySet)
}

/// Union field at many points; parallel, order-preserving.
pub fn distance_set_many(points: &[Vec3], set: &PrimitiveSet) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    points.par_iter().map(|&p| distance_set(p, set)).collect()
}

pub fn surface_area(prim: &TransformedPrimitive, include_caps: bool) -> f64 {
    shape_area(&prim.shape, include_caps)
}

pub fn shape_area(shape: &Shape, include_caps: bool) -> f64 {
    match *shape {
        Shape::Cuboid { extents: [a, b, c] } => 2.0 * (a * b + b * c + c * a),
        Shape::Cylinder { height, radius } => {
            let side = 2.0 * PI * radius * height;
            if include_caps {
                side + 2.0 * PI * radius * radius
            } else {
                side
            }
        }
    }
}

/// Partial derivatives of the canonical field at a local point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LocalGradient {
    pub distance: f64,
    /// ∂d/∂q
    pub point: Vec3,
    /// ∂d/∂(axis scale): cuboid extents, or `(height, radius, 0)`.
    pub size: Vec3,
}

/// Zero inside; one-sided outward derivatives on case boundaries.
pub(crate) fn canonical_gradient(q: Vec3, shape: &Shape) -> LocalGradient {
    let zero = LocalGradient {
        distance: 0.0,
        point: [0.0; 3],
        size: [0.0; 3],
    };
    match *shape {
        Shape::Cuboid { extents } => {
            let e: [f64; 3] = std::array::from_fn(|i| (q[i].abs() - extents[i] / 2.0).max(0.0));
            let d = distance_cuboid(q, extents);
            if d == 0.0 {
                return zero;
            }
            LocalGradient {
                distance: d,
                point: std::array::from_fn(|i| e[i] / d * q[i].signum()),
                size: std::array::from_fn(|i| -0.5 * e[i] / d),
            }
        }
        Shape::Cylinder { height, radius } => {
            let rho = q[1].hypot(q[2]);
            let axial = q[0].abs() - height / 2.0;
            let radial = rho - radius;
            let d = distance_cylinder(q, height, radius);
            if d == 0.0 {
                return zero;
            }
            let (da, dr) = match (axial > 0.0, radial > 0.0) {
                (true, true) => (axial / d, radial / d),
                (true, false) => (1.0, 0.0),
                _ => (0.0, 1.0),
            };
            // radial > 0 implies rho > 0 whenever dr != 0
            let (uy, uz) = if dr != 0.0 { (q[1] / rho, q[2] / rho) } else { (0.0, 0.0) };
            LocalGradient {
                distance: d,
                point: [da * q[0].signum(), dr * uy, dr * uz],
                size: [-0.5 * da, -dr, 0.0],
            }
        }
    }
}

/// Gradient of a posed primitive's field with respect to the query point
/// and the pose, for a fixed query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PoseGradient {
    pub distance: f64,
    pub size: Vec3,
    pub translation: Vec3,
    pub rotation: [[f64; 3]; 3],
}

pub(crate) fn primitive_gradient(p: Vec3, prim: &TransformedPrimitive) -> PoseGradient {
    let rel = math::sub(p, prim.translation);
    let q = math::mat_t_vec(&prim.rotation, rel);
    let g = canonical_gradient(q, &prim.shape);
    // q = Rᵀ(p − t): ∂d/∂t = −R·g_q, ∂d/∂R_ij = (p − t)_i · g_q_j
    let rg = math::mat_vec(&prim.rotation, g.point);
    let mut rotation = [[0.0; 3]; 3];
    for (i, row) in rotation.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = rel[i] * g.point[j];
        }
    }
    PoseGradient {
        distance: g.distance,
        size: g.size,
        translation: rg.map(|x| -x),
        rotation,
    }
}
