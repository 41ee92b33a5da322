//! Loop unrolling and statement → posed-primitive conversion.
//!
//! Every pose computation is generic over [`Real`], so the same code yields
//! plain poses and, with [`Dual`] scalars, their Jacobians with respect to a
//! statement's reals and its enclosing loop delta.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dsl::{Archetype, Block, Program, Statement, StatementDef, StatementRegistry};
use crate::error::{Error, FormatError, Result};
use crate::math::{self, Dual, Mat3, Real, Vec3};

/// Lines shorter than this cannot be oriented.
pub const DEGENERATE_LINE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Cuboid,
    Cylinder,
}

/// Canonical shape in the primitive's own frame. Cuboids are centered with
/// full extents; cylinders run along the local x-axis, centered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Cuboid { extents: Vec3 },
    Cylinder { height: f64, radius: f64 },
}

impl Shape {
    pub fn kind(&self) -> PrimitiveKind {
        match self {
            Shape::Cuboid { .. } => PrimitiveKind::Cuboid,
            Shape::Cylinder { .. } => PrimitiveKind::Cylinder,
        }
    }

    /// Per-axis scale taking unit canonical coordinates to the local frame:
    /// extents for cuboids, `(height, radius, radius)` for cylinders.
    pub fn axis_scale(&self) -> Vec3 {
        match *self {
            Shape::Cuboid { extents } => extents,
            Shape::Cylinder { height, radius } => [height, radius, radius],
        }
    }

    pub fn size(&self) -> Vec<f64> {
        match *self {
            Shape::Cuboid { extents } => extents.to_vec(),
            Shape::Cylinder { height, radius } => vec![height, radius],
        }
    }
}

/// A cuboid or cylinder with a rigid pose: world point = `rotation · local + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedPrimitive {
    pub shape: Shape,
    pub translation: Vec3,
    pub rotation: Mat3,
}

impl TransformedPrimitive {
    pub fn kind(&self) -> PrimitiveKind {
        self.shape.kind()
    }

    pub fn to_local(&self, p: Vec3) -> Vec3 {
        math::mat_t_vec(&self.rotation, math::sub(p, self.translation))
    }

    pub fn to_world(&self, q: Vec3) -> Vec3 {
        math::add(math::mat_vec(&self.rotation, q), self.translation)
    }

    /// Axis-aligned bounding box `(min, max)` in world coordinates.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let r = &self.rotation;
        let mut half = [0.0; 3];
        match self.shape {
            Shape::Cuboid { extents } => {
                for (i, h) in half.iter_mut().enumerate() {
                    *h = (0..3).map(|j| r[i][j].abs() * extents[j] / 2.0).sum();
                }
            }
            Shape::Cylinder { height, radius } => {
                for (i, h) in half.iter_mut().enumerate() {
                    let axis = r[i][0];
                    *h = axis.abs() * height / 2.0 + radius * (1.0 - axis * axis).max(0.0).sqrt();
                }
            }
        }
        let t = self.translation;
        (
            [t[0] - half[0], t[1] - half[1], t[2] - half[2]],
            [t[0] + half[0], t[1] + half[1], t[2] + half[2]],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub block: usize,
    pub iter: u32,
    pub stmt: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrimitiveSet {
    pub primitives: Vec<TransformedPrimitive>,
    pub provenance: Vec<Provenance>,
}

impl PrimitiveSet {
    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn push(&mut self, prim: TransformedPrimitive, prov: Provenance) {
        self.primitives.push(prim);
        self.provenance.push(prov);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TransformedPrimitive, &Provenance)> {
        self.primitives.iter().zip(&self.provenance)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PrimitiveSetJson::from(self)).expect("primitive set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: PrimitiveSetJson =
            serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
        dto.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct PrimitiveJson {
    kind: PrimitiveKind,
    size: Vec<f64>,
    translation: Vec3,
    rotation: Mat3,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct PrimitiveSetJson {
    primitives: Vec<PrimitiveJson>,
}

impl From<&PrimitiveSet> for PrimitiveSetJson {
    fn from(set: &PrimitiveSet) -> Self {
        let primitives = set
            .iter()
            .map(|(p, prov)| PrimitiveJson {
                kind: p.kind(),
                size: p.shape.size(),
                translation: p.translation,
                rotation: p.rotation,
                provenance: *prov,
            })
            .collect();
        Self { primitives }
    }
}

impl TryFrom<PrimitiveSetJson> for PrimitiveSet {
    type Error = Error;

    fn try_from(dto: PrimitiveSetJson) -> Result<Self> {
        let mut set = PrimitiveSet::default();
        for p in dto.primitives {
            let shape = match (p.kind, p.size.as_slice()) {
                (PrimitiveKind::Cuboid, &[x, y, z]) => Shape::Cuboid { extents: [x, y, z] },
                (PrimitiveKind::Cylinder, &[height, radius]) => Shape::Cylinder { height, radius },
                (kind, size) => {
                    return Err(FormatError::Json(format!("{kind:?} cannot have {} size entries", size.len())).into())
                }
            };
            set.push(
                TransformedPrimitive {
                    shape,
                    translation: p.translation,
                    rotation: p.rotation,
                },
                p.provenance,
            );
        }
        Ok(set)
    }
}

/// Pose of one unrolled loop iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationTransform {
    pub iteration: u32,
    pub translation: Vec3,
    pub rotation: Mat3,
}

impl IterationTransform {
    pub fn identity() -> Self {
        Self {
            iteration: 0,
            translation: [0.0; 3],
            rotation: math::identity(),
        }
    }
}

fn iteration_rotation(block: &Block, iter: u32) -> Mat3 {
    match block {
        Block::RotationFor { count, .. } => math::rot_x(2.0 * PI * f64::from(iter) / f64::from(*count)),
        _ => math::identity(),
    }
}

fn iteration_translation<T: Real>(iter: u32, delta: [T; 3]) -> [T; 3] {
    let k = f64::from(iter);
    [delta[0].scale(k), delta[1].scale(k), delta[2].scale(k)]
}

/// Expands a block into `(statement, iteration pose)` pairs, ordered by
/// iteration and then statement.
pub fn unroll_block(block: &Block) -> Vec<(Statement, IterationTransform)> {
    let delta = match block {
        Block::TranslationFor { delta, .. } => *delta,
        _ => [0.0; 3],
    };
    let mut out = Vec::new();
    for iter in 0..block.iterations() {
        let xf = IterationTransform {
            iteration: iter,
            translation: iteration_translation(iter, delta),
            rotation: iteration_rotation(block, iter),
        };
        for s in block.statements() {
            out.push((s.clone(), xf));
        }
    }
    out
}

/// Pose of a statement before any loop transform, generic in the scalar.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pose<T> {
    pub kind: PrimitiveKind,
    /// Cuboid extents, or `(height, radius, _)` for cylinders.
    pub size: [T; 3],
    pub translation: [T; 3],
    pub rotation: [[T; 3]; 3],
}

/// Rotation taking +x onto the unit vector `d`, by the shortest arc.
fn align_x_to<T: Real>(d: [T; 3]) -> [[T; 3]; 3] {
    let (zero, one) = (T::cst(0.0), T::cst(1.0));
    // v = x̂ × d
    let v = [zero, -d[2], d[1]];
    let vv = v[1] * v[1] + v[2] * v[2];
    let c = d[0];
    if vv.value() == 0.0 {
        return if c.value() > 0.0 {
            math::identity()
        } else {
            [[-one, zero, zero], [zero, one, zero], [zero, zero, -one]]
        };
    }
    // 1/(1+c), rewritten as (1-c)/|v|² when c < 0 to avoid cancellation
    let k = if c.value() >= 0.0 { one / (one + c) } else { (one - c) / vv };
    let skew = [[zero, -v[2], v[1]], [v[2], zero, -v[0]], [-v[1], v[0], zero]];
    let mut r = math::identity();
    for i in 0..3 {
        for j in 0..3 {
            let sq = v[i] * v[j] - if i == j { vv } else { zero };
            r[i][j] = r[i][j] + skew[i][j] + k * sq;
        }
    }
    r
}

pub(crate) fn statement_pose<T: Real>(archetype: Archetype, p: &[T]) -> Result<Pose<T>> {
    let positive = |x: T| {
        if x.value() > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveSize)
        }
    };
    let zero = T::cst(0.0);
    let pose = match archetype {
        Archetype::CuboidCenter => {
            let size = [p[3], p[4], p[5]];
            size.iter().try_for_each(|&s| positive(s))?;
            Pose {
                kind: PrimitiveKind::Cuboid,
                size,
                translation: [p[0], p[1], p[2]],
                rotation: math::euler_zyx(p[6], p[7], p[8]),
            }
        }
        Archetype::CuboidCorner => {
            let size = [p[3], p[4], p[5]];
            size.iter().try_for_each(|&s| positive(s))?;
            let rotation = math::rot_x(p[6]);
            let half = size.map(|s| s.scale(0.5));
            let translation = math::add([p[0], p[1], p[2]], math::mat_vec(&rotation, half));
            Pose {
                kind: PrimitiveKind::Cuboid,
                size,
                translation,
                rotation,
            }
        }
        Archetype::LineCylinder => {
            let a = [p[0], p[1], p[2]];
            let b = [p[3], p[4], p[5]];
            let radius = p[6];
            positive(radius)?;
            let axis = math::sub(b, a);
            let length = math::norm(axis);
            if !(length.value() >= DEGENERATE_LINE_EPS) {
                return Err(Error::DegenerateLine);
            }
            let dir = axis.map(|x| x / length);
            Pose {
                kind: PrimitiveKind::Cylinder,
                size: [length, radius, zero],
                translation: math::add(a, b).map(|x| x.scale(0.5)),
                rotation: align_x_to(dir),
            }
        }
        Archetype::CylinderCenter => {
            positive(p[3])?;
            positive(p[4])?;
            Pose {
                kind: PrimitiveKind::Cylinder,
                size: [p[3], p[4], zero],
                translation: [p[0], p[1], p[2]],
                rotation: math::euler_zyx(p[5], p[6], p[7]),
            }
        }
    };
    Ok(pose)
}

fn compose<T: Real>(pose: Pose<T>, iter_translation: [T; 3], iter_rotation: &Mat3) -> Pose<T> {
    let r_iter = math::lift::<T>(iter_rotation);
    Pose {
        translation: math::add(iter_translation, math::mat_vec(&r_iter, pose.translation)),
        rotation: math::mat_mul(&r_iter, &pose.rotation),
        ..pose
    }
}

fn pose_to_primitive(pose: Pose<f64>) -> TransformedPrimitive {
    let shape = match pose.kind {
        PrimitiveKind::Cuboid => Shape::Cuboid { extents: pose.size },
        PrimitiveKind::Cylinder => Shape::Cylinder {
            height: pose.size[0],
            radius: pose.size[1],
        },
    };
    TransformedPrimitive {
        shape,
        translation: pose.translation,
        rotation: pose.rotation,
    }
}

pub fn statement_to_primitive(s: &Statement, def: &StatementDef) -> Result<TransformedPrimitive> {
    if s.params.len() != def.arity() {
        return Err(Error::ArityMismatch {
            name: s.name.clone(),
            expected: def.arity(),
            got: s.params.len(),
            line: 0,
            column: 0,
        });
    }
    statement_pose(def.archetype, &s.params).map(pose_to_primitive)
}

fn lookup<'r>(registry: &'r StatementRegistry, s: &Statement) -> Result<&'r StatementDef> {
    registry.get(&s.name).ok_or_else(|| Error::UnknownStatement {
        name: s.name.clone(),
        line: 0,
        column: 0,
    })
}

/// Unrolls every block and poses every statement, in (block, iteration,
/// statement) order.
pub fn lower_program(p: &Program, registry: &StatementRegistry) -> Result<PrimitiveSet> {
    let mut set = PrimitiveSet::default();
    for (b, block) in p.blocks.iter().enumerate() {
        let statements = block.statements();
        let poses = statements
            .iter()
            .map(|s| {
                let def = lookup(registry, s)?;
                if s.params.len() != def.arity() {
                    return Err(Error::Invalid(crate::dsl::validate_program(p, registry)));
                }
                statement_pose(def.archetype, &s.params)
            })
            .collect::<Result<Vec<_>>>()?;
        let delta = match block {
            Block::TranslationFor { delta, .. } => *delta,
            _ => [0.0; 3],
        };
        for iter in 0..block.iterations() {
            let t_iter = iteration_translation(iter, delta);
            let r_iter = iteration_rotation(block, iter);
            for (j, pose) in poses.iter().enumerate() {
                set.push(
                    pose_to_primitive(compose(*pose, t_iter, &r_iter)),
                    Provenance { block: b, iter, stmt: j },
                );
            }
        }
    }
    Ok(set)
}

/// Upper bound on local differentiable inputs of one lowered primitive:
/// nine statement reals plus a three-component loop delta.
pub(crate) const MAX_LOCAL: usize = 12;

pub(crate) type LocalDual = Dual<MAX_LOCAL>;

/// The lowered pose of one primitive with tangents seeded on the statement
/// reals (slots `0..arity`) followed by the loop delta (slots `arity..arity+3`,
/// translation loops only).
pub(crate) fn local_pose_dual(block: &Block, stmt: usize, iter: u32, def: &StatementDef) -> Result<Pose<LocalDual>> {
    let s = &block.statements()[stmt];
    let arity = def.arity();
    let params: Vec<LocalDual> = s
        .params
        .iter()
        .enumerate()
        .map(|(k, &v)| LocalDual::variable(v, k))
        .collect();
    let pose = statement_pose(def.archetype, &params)?;
    let delta = match block {
        Block::TranslationFor { delta, .. } => [
            LocalDual::variable(delta[0], arity),
            LocalDual::variable(delta[1], arity + 1),
            LocalDual::variable(delta[2], arity + 2),
        ],
        _ => [LocalDual::constant(0.0); 3],
    };
    Ok(compose(pose, iteration_translation(iter, delta), &iteration_rotation(block, iter)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    fn reg() -> StatementRegistry {
        StatementRegistry::builtin()
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn rotation_ok(r: &Mat3) {
        assert!(math::orthonormality_error(r) < 1e-9);
        assert!((math::determinant(r) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn line_to_cylinder() {
        let def = reg().get("line").unwrap().clone();
        let prim = statement_to_primitive(&Statement::new("line", vec![0., 0., 0., 0., 0., 2., 0.1]), &def).unwrap();
        assert_eq!(prim.shape, Shape::Cylinder { height: 2.0, radius: 0.1 });
        assert_eq!(prim.translation, [0.0, 0.0, 1.0]);
        assert!(close(math::mat_vec(&prim.rotation, [1.0, 0.0, 0.0]), [0.0, 0.0, 1.0], 1e-15));
        rotation_ok(&prim.rotation);
    }

    #[test]
    fn line_orientation_tie_breaks() {
        let def = reg().get("line").unwrap().clone();
        let plus = statement_to_primitive(&Statement::new("line", vec![0., 0., 0., 3., 0., 0., 0.1]), &def).unwrap();
        assert_eq!(plus.rotation, math::identity::<f64>());
        let minus = statement_to_primitive(&Statement::new("line", vec![0., 0., 0., -3., 0., 0., 0.1]), &def).unwrap();
        assert!(close(minus.rotation[0], [-1.0, 0.0, 0.0], 0.0));
        rotation_ok(&minus.rotation);
    }

    #[test]
    fn line_direction_is_mapped_for_all_octants() {
        let def = reg().get("line").unwrap().clone();
        for d in [[1., 2., 3.], [-1., 0.5, -0.2], [-1.0, 1e-9, 0.0], [-1.0, 1e-4, -1e-4], [0.0, -1.0, 0.0]] {
            let prim =
                statement_to_primitive(&Statement::new("line", vec![0., 0., 0., d[0], d[1], d[2], 0.1]), &def).unwrap();
            let n = math::norm(d);
            assert!(close(math::mat_vec(&prim.rotation, [1., 0., 0.]), d.map(|x| x / n), 1e-12), "{d:?}");
            rotation_ok(&prim.rotation);
        }
    }

    #[test]
    fn degenerate_line_errors() {
        let def = reg().get("line").unwrap().clone();
        let err = statement_to_primitive(&Statement::new("line", vec![1., 1., 1., 1., 1., 1., 0.1]), &def).unwrap_err();
        assert!(matches!(err, Error::DegenerateLine));
    }

    #[test]
    fn corner_cuboid_zero_elevation() {
        let def = reg().get("chair_back").unwrap().clone();
        let prim =
            statement_to_primitive(&Statement::new("chair_back", vec![0., 0., 0., 2., 1., 0.5, 0.]), &def).unwrap();
        assert_eq!(prim.translation, [1.0, 0.5, 0.25]);
        assert_eq!(prim.rotation, math::identity::<f64>());
        assert_eq!(prim.shape, Shape::Cuboid { extents: [2.0, 1.0, 0.5] });
    }

    #[test]
    fn corner_cuboid_keeps_its_corner_at_origin() {
        // The elevation rotates about the center after placement, so the
        // rotated box still has its local (-,-,-) corner at o + R·0 shifted back.
        let def = reg().get("table_top").unwrap().clone();
        let prim =
            statement_to_primitive(&Statement::new("table_top", vec![1., 2., 3., 2., 1., 0.5, 0.4]), &def).unwrap();
        let corner = prim.to_world([-1.0, -0.5, -0.25]);
        assert!(close(corner, [1.0, 2.0, 3.0], 1e-15));
    }

    #[test]
    fn non_positive_sizes_error() {
        let r = reg();
        for (name, params) in [
            ("cuboid", vec![0., 0., 0., 1., 0., 1., 0., 0., 0.]),
            ("cylinder", vec![0., 0., 0., 1., -1., 0., 0., 0.]),
            ("line", vec![0., 0., 0., 1., 0., 0., 0.]),
        ] {
            let def = r.get(name).unwrap();
            let err = statement_to_primitive(&Statement::new(name, params), def).unwrap_err();
            assert!(matches!(err, Error::NonPositiveSize), "{name}");
        }
    }

    #[test]
    fn unroll_single_is_identity() {
        let b = Block::Single(Statement::new("cuboid", vec![0.; 9]));
        let u = unroll_block(&b);
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].1, IterationTransform::identity());
    }

    #[test]
    fn unroll_translation() {
        let b = Block::TranslationFor {
            count: 3,
            delta: [0.0, 0.0, 0.5],
            body: vec![Statement::new("cuboid", vec![0.; 9])],
        };
        let t: Vec<Vec3> = unroll_block(&b).iter().map(|(_, x)| x.translation).collect();
        assert_eq!(t, vec![[0., 0., 0.], [0., 0., 0.5], [0., 0., 1.0]]);
    }

    #[test]
    fn unroll_rotation_spacing() {
        let b = Block::RotationFor {
            count: 5,
            body: vec![Statement::new("cuboid", vec![0.; 9])],
        };
        let u = unroll_block(&b);
        assert_eq!(u.len(), 5);
        for w in u.windows(2) {
            let rel = math::mat_mul(&math::transpose(&w[0].1.rotation), &w[1].1.rotation);
            assert!((rel[0][0] - 1.0).abs() < 1e-15);
            let deg = rel[2][1].atan2(rel[1][1]).to_degrees();
            assert!((deg - 72.0).abs() < 1e-9, "{deg}");
        }
    }

    #[test]
    fn rotation_loop_centers_lie_on_a_circle() {
        // line from (0, 1, 0) to (1, 1, 0): center (0.5, 1, 0), radius 1 from the x-axis
        let p = parse_program("(program (block (for 4 rot (draw line 0 1 0 1 1 0 0.1))))", &reg()).unwrap();
        let set = lower_program(&p, &reg()).unwrap();
        let expected = [[0.5, 1.0, 0.0], [0.5, 0.0, 1.0], [0.5, -1.0, 0.0], [0.5, 0.0, -1.0]];
        for (prim, e) in set.primitives.iter().zip(expected) {
            assert!(close(prim.translation, e, 1e-15), "{:?}", prim.translation);
            rotation_ok(&prim.rotation);
        }
        assert_eq!(
            set.provenance.iter().map(|p| p.iter).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn single_block_pose_is_the_statements() {
        let p = parse_program("(program (block (draw cuboid 1 2 3 1 2 3 0.1 0.2 0.3)))", &reg()).unwrap();
        let set = lower_program(&p, &reg()).unwrap();
        let def = reg().get("cuboid").unwrap().clone();
        let direct = statement_to_primitive(p.blocks[0].statements().first().unwrap(), &def).unwrap();
        assert_eq!(set.primitives, vec![direct]);
        assert_eq!(set.provenance, vec![Provenance { block: 0, iter: 0, stmt: 0 }]);
    }

    #[test]
    fn empty_program_lowers_to_empty_set() {
        assert!(lower_program(&Program::default(), &reg()).unwrap().is_empty());
    }

    #[test]
    fn dual_pose_values_match_plain_pose() {
        let text = "(program (block (for 3 trans 0.1 0.2 0.3 (draw line 0 1 2 1 -1 0.5 0.2) (draw chair_back 0 0 0 1 2 0.5 0.3))))";
        let p = parse_program(text, &reg()).unwrap();
        let set = lower_program(&p, &reg()).unwrap();
        for (prim, prov) in set.iter() {
            let block = &p.blocks[prov.block];
            let def = reg().get(&block.statements()[prov.stmt].name).unwrap().clone();
            let pose = local_pose_dual(block, prov.stmt, prov.iter, &def).unwrap();
            assert_eq!(pose.translation.map(|x| x.v), prim.translation);
            assert_eq!(pose.rotation.map(|r| r.map(|x| x.v)), prim.rotation);
        }
    }

    #[test]
    fn primitive_set_json_schema() {
        let p = parse_program("(program (block (draw line 0 0 0 0 0 2 0.1)) (block (draw cuboid 0 0 0 1 2 3 0 0 0)))", &reg()).unwrap();
        let set = lower_program(&p, &reg()).unwrap();
        let json = set.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let first = &v["primitives"][0];
        assert_eq!(first["kind"], "cylinder");
        assert_eq!(first["size"].as_array().unwrap().len(), 2);
        assert_eq!(first["provenance"]["block"], 0);
        assert_eq!(first["provenance"]["iter"], 0);
        assert_eq!(first["provenance"]["stmt"], 0);
        assert_eq!(v["primitives"][1]["kind"], "cuboid");
        assert_eq!(v["primitives"][1]["rotation"][2][2], 1.0);
        assert_eq!(PrimitiveSet::from_json(&json).unwrap(), set);
    }

    #[test]
    fn bounds_contain_the_shape() {
        let prim = TransformedPrimitive {
            shape: Shape::Cylinder { height: 2.0, radius: 0.5 },
            translation: [1.0, 0.0, 0.0],
            rotation: math::euler_zyx(0.3, 0.7, -0.4),
        };
        let (lo, hi) = prim.bounds();
        for k in 0..64 {
            let th = k as f64 * 0.1;
            for x in [-1.0, 1.0] {
                let w = prim.to_world([x, 0.5 * th.cos(), 0.5 * th.sin()]);
                for i in 0..3 {
                    assert!(w[i] >= lo[i] - 1e-12 && w[i] <= hi[i] + 1e-12);
                }
            }
        }
    }
}
