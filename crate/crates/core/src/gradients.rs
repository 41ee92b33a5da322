//! Exact loss gradients with respect to every continuous program parameter,
//! and a finite-difference verifier for them.
//!
//! The backward pass runs in two stages. Loss adjoints are first gathered
//! per lowered primitive (size, translation, rotation matrix), holding the
//! unit surface draws, nearest-neighbor matches and union argmins fixed.
//! Each primitive's pose is then re-evaluated with forward-mode duals seeded
//! on its statement reals and loop delta, and the adjoints are contracted
//! with that local Jacobian.

use serde::{Deserialize, Serialize};

use crate::dsl::{Block, Program, StatementRegistry};
use crate::error::{Error, Result};
use crate::geometry;
use crate::losses::{self, LossConfig, Reduce};
use crate::lowering::{self, PrimitiveSet, Shape};
use crate::math::{self, Mat3, Vec3};
use crate::renderer::{self, PointCloud};

/// Where a flat parameter slot lives in the program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SlotDescriptor {
    StatementParam { block: usize, stmt: usize, param: usize },
    LoopDelta { block: usize, axis: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub values: Vec<f64>,
    pub layout: Vec<SlotDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVector {
    pub values: Vec<f64>,
    pub layout: Vec<SlotDescriptor>,
}

impl ParameterVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl GradientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Flattens every draw-statement real and translation-loop delta, ordered
/// by block; within a block the delta comes first, then statements in
/// order, then parameters in order. Loop counts are not parameters.
pub fn extract_parameters(p: &Program) -> ParameterVector {
    let mut values = Vec::new();
    let mut layout = Vec::new();
    for (b, block) in p.blocks.iter().enumerate() {
        if let Block::TranslationFor { delta, .. } = block {
            for (axis, &d) in delta.iter().enumerate() {
                values.push(d);
                layout.push(SlotDescriptor::LoopDelta { block: b, axis });
            }
        }
        for (j, s) in block.statements().iter().enumerate() {
            for (k, &v) in s.params.iter().enumerate() {
                values.push(v);
                layout.push(SlotDescriptor::StatementParam {
                    block: b,
                    stmt: j,
                    param: k,
                });
            }
        }
    }
    ParameterVector { values, layout }
}

/// Copy of `p` with its continuous parameters replaced by `v`.
pub fn apply_parameters(p: &Program, v: &ParameterVector) -> Result<Program> {
    let expected = extract_parameters(p);
    if v.values.len() != expected.layout.len() || v.layout.len() != v.values.len() || v.layout != expected.layout {
        return Err(Error::LayoutMismatch {
            expected: expected.layout.len(),
            got: v.values.len(),
        });
    }
    let mut out = p.clone();
    let mut values = v.values.iter().copied();
    for block in &mut out.blocks {
        if let Block::TranslationFor { delta, .. } = block {
            for d in delta.iter_mut() {
                *d = values.next().expect("layout checked");
            }
        }
        for s in block.statements_mut() {
            for x in &mut s.params {
                *x = values.next().expect("layout checked");
            }
        }
    }
    Ok(out)
}

/// How programs are rendered for the Chamfer losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub points: usize,
    pub include_caps: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            points: 5000,
            include_caps: true,
        }
    }
}

fn lower_checked(p: &Program, registry: &StatementRegistry) -> Result<PrimitiveSet> {
    let diagnostics = crate::dsl::validate_program(p, registry);
    if !diagnostics.is_empty() {
        return Err(Error::Invalid(diagnostics));
    }
    let set = lowering::lower_program(p, registry)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(set)
}

/// Forward-only pipeline: lower, sample when the loss is a Chamfer variant,
/// and evaluate the loss against `target`.
pub fn evaluate_loss(
    p: &Program,
    registry: &StatementRegistry,
    target: &PointCloud,
    loss: &LossConfig,
    render: &RenderConfig,
    seed: u64,
) -> Result<f64> {
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let set = lower_checked(p, registry)?;
    if loss.kind.is_chamfer() {
        let cloud = renderer::sample_points(&set, render.points, seed, render.include_caps)?;
        losses::chamfer(&cloud, target, loss)
    } else {
        losses::coverage_loss(&set, target, loss)
    }
}

/// ∂loss/∂pose of one lowered primitive. `size` follows the pose layout:
/// cuboid extents, or `(height, radius, 0)` for cylinders.
#[derive(Debug, Clone, Copy, Default)]
struct PoseAdjoint {
    size: Vec3,
    translation: Vec3,
    rotation: Mat3,
}

fn chamfer_adjoints(
    set: &PrimitiveSet,
    target: &PointCloud,
    loss: &LossConfig,
    render: &RenderConfig,
    seed: u64,
    adjoints: &mut [PoseAdjoint],
) -> Result<f64> {
    let samples = renderer::sample_surface(set, render.points, seed, render.include_caps)?;
    let cloud = renderer::positions(set, &samples);
    let matches = losses::chamfer_matches(&cloud.points, &target.points, loss.kind);
    let value = losses::chamfer_from_matches(&matches, loss.kind, loss.chamfer_reduce);

    let weight = |n: usize| match loss.chamfer_reduce {
        Reduce::Mean => 1.0 / n as f64,
        Reduce::Sum => 1.0,
    };
    let mut point_grad = vec![[0.0; 3]; cloud.len()];
    let wf = weight(cloud.len());
    for (i, &(j, _)) in matches.forward.iter().enumerate() {
        let d = math::sub(cloud.points[i], target.points[j]);
        for k in 0..3 {
            point_grad[i][k] += 2.0 * wf * d[k];
        }
    }
    let wb = weight(target.len());
    for (j, &(i, _)) in matches.backward.iter().enumerate() {
        let d = math::sub(cloud.points[i], target.points[j]);
        for k in 0..3 {
            point_grad[i][k] += 2.0 * wb * d[k];
        }
    }

    // x = t + R·(u ⊙ s)
    for (sample, g) in samples.iter().zip(&point_grad) {
        let prim = &set.primitives[sample.primitive];
        let scale = prim.shape.axis_scale();
        let local: Vec3 = std::array::from_fn(|k| sample.unit[k] * scale[k]);
        let rtg = math::mat_t_vec(&prim.rotation, *g);
        let adj = &mut adjoints[sample.primitive];
        for a in 0..3 {
            adj.translation[a] += g[a];
            for b in 0..3 {
                adj.rotation[a][b] += g[a] * local[b];
            }
        }
        match prim.shape {
            Shape::Cuboid { .. } => {
                for k in 0..3 {
                    adj.size[k] += rtg[k] * sample.unit[k];
                }
            }
            Shape::Cylinder { .. } => {
                adj.size[0] += rtg[0] * sample.unit[0];
                adj.size[1] += rtg[1] * sample.unit[1] + rtg[2] * sample.unit[2];
            }
        }
    }
    Ok(value)
}

fn coverage_adjoints(set: &PrimitiveSet, target: &PointCloud, loss: &LossConfig, adjoints: &mut [PoseAdjoint]) -> f64 {
    let matches = losses::coverage_matches(set, &target.points);
    let value = losses::coverage_from_matches(&matches, loss.coverage_power);
    let n = target.len() as f64;
    for (p, &(m, d)) in target.points.iter().zip(&matches) {
        if d == 0.0 {
            continue;
        }
        let w = match loss.coverage_power {
            losses::CoveragePower::One => 1.0 / n,
            losses::CoveragePower::Two => 2.0 * d / n,
        };
        let g = geometry::primitive_gradient(*p, &set.primitives[m]);
        let adj = &mut adjoints[m];
        for a in 0..3 {
            adj.size[a] += w * g.size[a];
            adj.translation[a] += w * g.translation[a];
            for b in 0..3 {
                adj.rotation[a][b] += w * g.rotation[a][b];
            }
        }
    }
    value
}

/// Loss and its gradient for the pipeline of [`evaluate_loss`]. The loss is
/// bit-identical to the forward-only value for equal inputs and seed.
pub fn loss_with_gradient(
    p: &Program,
    registry: &StatementRegistry,
    target: &PointCloud,
    loss: &LossConfig,
    render: &RenderConfig,
    seed: u64,
) -> Result<(f64, GradientVector)> {
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let set = lower_checked(p, registry)?;
    let mut adjoints = vec![PoseAdjoint::default(); set.len()];
    let value = if loss.kind.is_chamfer() {
        chamfer_adjoints(&set, target, loss, render, seed, &mut adjoints)?
    } else {
        coverage_adjoints(&set, target, loss, &mut adjoints)
    };

    let params = extract_parameters(p);
    let mut grad = vec![0.0; params.len()];
    let mut stmt_base = Vec::with_capacity(p.blocks.len());
    let mut delta_base = Vec::with_capacity(p.blocks.len());
    let mut next = 0;
    for block in &p.blocks {
        if matches!(block, Block::TranslationFor { .. }) {
            delta_base.push(Some(next));
            next += 3;
        } else {
            delta_base.push(None);
        }
        let mut bases = Vec::new();
        for s in block.statements() {
            bases.push(next);
            next += s.params.len();
        }
        stmt_base.push(bases);
    }

    for (adj, prov) in adjoints.iter().zip(&set.provenance) {
        let block = &p.blocks[prov.block];
        let stmt = &block.statements()[prov.stmt];
        let def = registry.get(&stmt.name).expect("validated");
        let pose = lowering::local_pose_dual(block, prov.stmt, prov.iter, def)?;
        let arity = def.arity();
        let locals = arity + if delta_base[prov.block].is_some() { 3 } else { 0 };
        for l in 0..locals {
            let mut acc = 0.0;
            for a in 0..3 {
                acc += adj.size[a] * pose.size[a].d[l] + adj.translation[a] * pose.translation[a].d[l];
                for b in 0..3 {
                    acc += adj.rotation[a][b] * pose.rotation[a][b].d[l];
                }
            }
            let slot = if l < arity {
                stmt_base[prov.block][prov.stmt] + l
            } else {
                delta_base[prov.block].expect("translation loop") + (l - arity)
            };
            grad[slot] += acc;
        }
    }
    Ok((
        value,
        GradientVector {
            values: grad,
            layout: params.layout,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    /// finite-difference step
    pub h: f64,
    /// relative-error threshold, also used for the boundary test
    pub tolerance: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { h: 1e-5, tolerance: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotCheck {
    pub slot: SlotDescriptor,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
    pub boundary: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub loss: f64,
    pub h: f64,
    pub tolerance: f64,
    pub slots: Vec<SlotCheck>,
}

impl GradCheckReport {
    /// Non-boundary slots whose analytic value disagrees with the numeric one.
    pub fn failures(&self) -> impl Iterator<Item = &SlotCheck> {
        self.slots.iter().filter(|s| !s.boundary && !s.passed)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn boundary_count(&self) -> usize {
        self.slots.iter().filter(|s| s.boundary).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Gradients smaller than this fraction of `max(1, |loss|)` are compared
/// in absolute rather than relative terms; it sits well above the
/// finite-difference rounding noise of roughly `1e-15·|loss|/h`.
const RELATIVE_FLOOR: f64 = 1e-5;

fn relative(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Compares `analytic` against central differences of the forward pipeline.
///
/// A slot is flagged as lying on a non-smooth locus when its second-order
/// one-sided differences disagree beyond `tolerance`, or when central
/// differences at `h` and `2h` do; flagged slots are reported but not
/// judged.
#[allow(clippy::too_many_arguments)]
pub fn check_gradient(
    p: &Program,
    registry: &StatementRegistry,
    target: &PointCloud,
    loss: &LossConfig,
    render: &RenderConfig,
    seed: u64,
    analytic: &GradientVector,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(Error::InvalidStep(cfg.h));
    }
    let base = extract_parameters(p);
    if analytic.layout != base.layout || analytic.values.len() != base.len() {
        return Err(Error::LayoutMismatch {
            expected: base.len(),
            got: analytic.values.len(),
        });
    }
    let f0 = evaluate_loss(p, registry, target, loss, render, seed)?;
    let floor = RELATIVE_FLOOR * f0.abs().max(1.0);
    let eval_at = |slot: usize, offset: f64| -> Result<f64> {
        let mut v = base.clone();
        v.values[slot] += offset;
        evaluate_loss(&apply_parameters(p, &v)?, registry, target, loss, render, seed)
    };

    let h = cfg.h;
    let mut slots = Vec::with_capacity(base.len());
    for (i, desc) in base.layout.iter().enumerate() {
        let fp = eval_at(i, h)?;
        let fm = eval_at(i, -h)?;
        let fp2 = eval_at(i, 2.0 * h)?;
        let fm2 = eval_at(i, -2.0 * h)?;
        let central = (fp - fm) / (2.0 * h);
        let central_wide = (fp2 - fm2) / (4.0 * h);
        let forward = (-3.0 * f0 + 4.0 * fp - fp2) / (2.0 * h);
        let backward = (3.0 * f0 - 4.0 * fm + fm2) / (2.0 * h);
        let boundary =
            relative(forward, backward, floor) > cfg.tolerance || relative(central, central_wide, floor) > cfg.tolerance;
        let a = analytic.values[i];
        let relative_error = relative(a, central, floor);
        slots.push(SlotCheck {
            slot: *desc,
            analytic: a,
            numeric: central,
            relative_error,
            boundary,
            passed: relative_error < cfg.tolerance,
        });
    }
    Ok(GradCheckReport {
        loss: f0,
        h,
        tolerance: cfg.tolerance,
        slots,
    })
}

/// Computes the analytic gradient and checks it with [`check_gradient`].
pub fn finite_difference_check(
    p: &Program,
    registry: &StatementRegistry,
    target: &PointCloud,
    loss: &LossConfig,
    render: &RenderConfig,
    seed: u64,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    if !(cfg.h > 0.0 && cfg.h.is_finite()) {
        return Err(Error::InvalidStep(cfg.h));
    }
    let (_, grad) = loss_with_gradient(p, registry, target, loss, render, seed)?;
    check_gradient(p, registry, target, loss, render, seed, &grad, cfg)
}
