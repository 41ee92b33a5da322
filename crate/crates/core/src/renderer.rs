//! Point-cloud and voxel rendering of primitive sets.
//!
//! Surface samples are drawn as unit canonical coordinates first and only
//! then mapped through size, rotation and translation, so for a fixed seed
//! every output point is a smooth function of the primitive's pose.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;
use crate::lowering::{PrimitiveSet, Shape, TransformedPrimitive};
use crate::math::Vec3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl From<Vec<Vec3>> for PointCloud {
    fn from(points: Vec<Vec3>) -> Self {
        Self { points }
    }
}

/// Dense cubic occupancy grid in binvox layout: linear index
/// `(x·dim + z)·dim + y`, so y varies fastest. Voxel `(x, y, z)` has its
/// center at `translate + scale·((x, y, z) + ½)/dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub dim: usize,
    pub occupancy: Vec<bool>,
    pub translate: Vec3,
    pub scale: f64,
}

impl VoxelGrid {
    pub fn empty(dim: usize, translate: Vec3, scale: f64) -> Self {
        Self {
            dim,
            occupancy: vec![false; dim * dim * dim],
            translate,
            scale,
        }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.dim + z) * self.dim + y
    }

    /// Inverse of [`index`](Self::index): `(x, y, z)`.
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let d = self.dim;
        (index / (d * d), index % d, (index / d) % d)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy[self.index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.occupancy[i] = value;
    }

    pub fn voxel_center(&self, x: usize, y: usize, z: usize) -> Vec3 {
        let d = self.dim as f64;
        let c = |i: usize, t: f64| t + self.scale * (i as f64 + 0.5) / d;
        [c(x, self.translate[0]), c(y, self.translate[1]), c(z, self.translate[2])]
    }

    pub fn count_occupied(&self) -> usize {
        self.occupancy.iter().filter(|&&v| v).count()
    }
}

/// One drawn surface sample: the emitting primitive and its unit canonical
/// coordinates. The local-frame point is `unit ⊙ shape.axis_scale()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub primitive: usize,
    pub unit: Vec3,
}

impl SurfaceSample {
    pub fn position(&self, prim: &TransformedPrimitive) -> Vec3 {
        let s = prim.shape.axis_scale();
        prim.to_world([self.unit[0] * s[0], self.unit[1] * s[1], self.unit[2] * s[2]])
    }
}

/// Splits `total` across `weights` proportionally, rounding by largest
/// remainder (ties to the lower index) so the counts sum to `total`.
pub fn allocate(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn primitive_rng(seed: u64, primitive: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(primitive as u64);
    rng
}

fn centered(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>() - 0.5
}

fn draw_unit(shape: &Shape, include_caps: bool, rng: &mut ChaCha8Rng) -> Vec3 {
    match *shape {
        Shape::Cuboid { extents: [sx, sy, sz] } => {
            let faces = [sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy];
            let total: f64 = faces.iter().sum();
            let mut pick = rng.random::<f64>() * total;
            let mut face = faces.len() - 1;
            for (i, a) in faces.iter().enumerate() {
                if pick < *a {
                    face = i;
                    break;
                }
                pick -= a;
            }
            let (u, v) = (centered(rng), centered(rng));
            let sign = if face % 2 == 0 { 0.5 } else { -0.5 };
            match face / 2 {
                0 => [sign, u, v],
                1 => [u, sign, v],
                _ => [u, v, sign],
            }
        }
        Shape::Cylinder { height, radius } => {
            let side = 2.0 * PI * radius * height;
            let cap = PI * radius * radius;
            let region = if include_caps {
                let pick = rng.random::<f64>() * (side + 2.0 * cap);
                if pick < side {
                    0
                } else if pick < side + cap {
                    1
                } else {
                    2
                }
            } else {
                0
            };
            let (u1, u2) = (rng.random::<f64>(), rng.random::<f64>());
            match region {
                0 => {
                    let theta = -PI + 2.0 * PI * u1;
                    [u2 - 0.5, theta.sin(), theta.cos()]
                }
                r => {
                    let rho = u1.sqrt();
                    let phi = 2.0 * PI * u2;
                    let x = if r == 1 { 0.5 } else { -0.5 };
                    [x, rho * phi.cos(), rho * phi.sin()]
                }
            }
        }
    }
}

/// Per-primitive point counts for `count` samples over `set`.
pub fn allocation(set: &PrimitiveSet, count: usize, include_caps: bool) -> Vec<usize> {
    let areas: Vec<f64> = set
        .primitives
        .iter()
        .map(|p| geometry::surface_area(p, include_caps))
        .collect();
    allocate(count, &areas)
}

/// Draws `count` unit samples, allocated across primitives by surface area.
/// Primitive `m` uses substream `m` of a ChaCha8 generator seeded with
/// `seed`, so its draws do not depend on the other primitives.
pub fn sample_surface(set: &PrimitiveSet, count: usize, seed: u64, include_caps: bool) -> Result<Vec<SurfaceSample>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if count < 1 {
        return Err(Error::InvalidCount);
    }
    let counts = allocation(set, count, include_caps);
    let per_primitive: Vec<Vec<SurfaceSample>> = set
        .primitives
        .par_iter()
        .zip(counts.par_iter())
        .enumerate()
        .map(|(m, (prim, &n))| {
            let mut rng = primitive_rng(seed, m);
            (0..n)
                .map(|_| SurfaceSample {
                    primitive: m,
                    unit: draw_unit(&prim.shape, include_caps, &mut rng),
                })
                .collect()
        })
        .collect();
    Ok(per_primitive.into_iter().flatten().collect())
}

pub fn sample_points(set: &PrimitiveSet, count: usize, seed: u64, include_caps: bool) -> Result<PointCloud> {
    let samples = sample_surface(set, count, seed, include_caps)?;
    Ok(positions(set, &samples))
}

pub fn positions(set: &PrimitiveSet, samples: &[SurfaceSample]) -> PointCloud {
    samples
        .iter()
        .map(|s| s.position(&set.primitives[s.primitive]))
        .collect::<Vec<_>>()
        .into()
}

/// Axis-aligned bounds `(min, max)` of a non-empty set.
pub fn set_bounds(set: &PrimitiveSet) -> Result<(Vec3, Vec3)> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for prim in &set.primitives {
        let (a, b) = prim.bounds();
        for k in 0..3 {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    Ok((lo, hi))
}

/// Occupancy on a `dim³` cube around the set's bounds. The cube side is the
/// largest bounding-box extent grown by `pad` of itself on every side; a
/// voxel is occupied iff the union field is zero at its center.
pub fn voxelize(set: &PrimitiveSet, dim: usize, pad: f64) -> Result<VoxelGrid> {
    if dim < 1 {
        return Err(Error::InvalidCount);
    }
    if !(pad >= 0.0 && pad.is_finite()) {
        return Err(Error::InvalidConfig(format!("voxel padding must be a non-negative fraction, got {pad}")));
    }
    let (lo, hi) = set_bounds(set)?;
    let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let scale = extent * (1.0 + 2.0 * pad);
    let translate: Vec3 = std::array::from_fn(|k| 0.5 * (lo[k] + hi[k]) - 0.5 * scale);
    let mut grid = VoxelGrid::empty(dim, translate, scale);
    let occupancy: Vec<bool> = (0..grid.occupancy.len())
        .into_par_iter()
        .map(|i| {
            let (x, y, z) = grid.coords(i);
            geometry::distance_set(grid.voxel_center(x, y, z), set).is_ok_and(|d| d == 0.0)
        })
        .collect();
    grid.occupancy = occupancy;
    Ok(grid)
}
