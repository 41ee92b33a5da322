//! Chamfer distance between point clouds and the coverage loss of a target
//! cloud under a primitive union.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::lowering::PrimitiveSet;
use crate::math::{pairwise_sum, Vec3};
use crate::renderer::PointCloud;
use crate::spatial::KdTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// reconstruction → target
    ChamferForward,
    /// target → reconstruction
    ChamferBackward,
    ChamferSymmetric,
    Coverage,
}

impl LossKind {
    pub fn is_chamfer(self) -> bool {
        !matches!(self, LossKind::Coverage)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduce {
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoveragePower {
    One,
    Two,
}

impl CoveragePower {
    pub fn exponent(self) -> i32 {
        match self {
            CoveragePower::One => 1,
            CoveragePower::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossConfig {
    pub kind: LossKind,
    pub chamfer_reduce: Reduce,
    pub coverage_power: CoveragePower,
}

impl LossConfig {
    pub fn chamfer(kind: LossKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn coverage(power: CoveragePower) -> Self {
        Self {
            kind: LossKind::Coverage,
            coverage_power: power,
            ..Self::default()
        }
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            kind: LossKind::ChamferSymmetric,
            chamfer_reduce: Reduce::Mean,
            coverage_power: CoveragePower::One,
        }
    }
}

/// Nearest-neighbor match of every query point: `(index, squared distance)`.
pub(crate) fn match_all(queries: &[Vec3], index: &KdTree) -> Vec<(usize, f64)> {
    queries
        .par_iter()
        .map(|&q| index.nearest(q).expect("index is non-empty"))
        .collect()
}

pub(crate) fn reduce(values: &[f64], how: Reduce) -> f64 {
    let total = pairwise_sum(values);
    match how {
        Reduce::Sum => total,
        Reduce::Mean => total / values.len() as f64,
    }
}

/// Matches backing one Chamfer evaluation between a reconstruction `a` and
/// a target `b`.
#[derive(Debug, Clone, Default)]
pub(crate) struct ChamferMatches {
    /// for each point of `a`, its nearest in `b`
    pub forward: Vec<(usize, f64)>,
    /// for each point of `b`, its nearest in `a`
    pub backward: Vec<(usize, f64)>,
}

pub(crate) fn chamfer_matches(a: &[Vec3], b: &[Vec3], kind: LossKind) -> ChamferMatches {
    let mut m = ChamferMatches::default();
    if matches!(kind, LossKind::ChamferForward | LossKind::ChamferSymmetric) {
        m.forward = match_all(a, &KdTree::new(b));
    }
    if matches!(kind, LossKind::ChamferBackward | LossKind::ChamferSymmetric) {
        m.backward = match_all(b, &KdTree::new(a));
    }
    m
}

pub(crate) fn chamfer_from_matches(m: &ChamferMatches, kind: LossKind, how: Reduce) -> f64 {
    let term = |matches: &[(usize, f64)]| {
        let d: Vec<f64> = matches.iter().map(|&(_, d)| d).collect();
        reduce(&d, how)
    };
    match kind {
        LossKind::ChamferForward => term(&m.forward),
        LossKind::ChamferBackward => term(&m.backward),
        LossKind::ChamferSymmetric => term(&m.forward) + term(&m.backward),
        LossKind::Coverage => unreachable!("coverage is not a chamfer variant"),
    }
}

/// Chamfer distance from `a` to `b` (forward), `b` to `a` (backward), or
/// their sum, as selected by `cfg.kind`. Each direction reduces squared
/// nearest-neighbor distances by `cfg.chamfer_reduce`.
pub fn chamfer(a: &PointCloud, b: &PointCloud, cfg: &LossConfig) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !cfg.kind.is_chamfer() {
        return Err(Error::InvalidConfig("chamfer needs a chamfer loss kind".into()));
    }
    let m = chamfer_matches(&a.points, &b.points, cfg.kind);
    Ok(chamfer_from_matches(&m, cfg.kind, cfg.chamfer_reduce))
}

/// Per target point: index of the nearest primitive and its field value.
pub(crate) fn coverage_matches(set: &PrimitiveSet, target: &[Vec3]) -> Vec<(usize, f64)> {
    target
        .par_iter()
        .map(|&p| geometry::nearest_primitive(p, set).expect("set is non-empty"))
        .collect()
}

pub(crate) fn coverage_from_matches(m: &[(usize, f64)], power: CoveragePower) -> f64 {
    let terms: Vec<f64> = m.iter().map(|&(_, d)| d.powi(power.exponent())).collect();
    reduce(&terms, Reduce::Mean)
}

/// Mean over target points of the union field raised to `cfg.coverage_power`.
pub fn coverage_loss(set: &PrimitiveSet, target: &PointCloud, cfg: &LossConfig) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if target.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(coverage_from_matches(&coverage_matches(set, &target.points), cfg.coverage_power))
}
