//! Shared test support: random program generators and reference
//! computations that do not go through the library's geometry code.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use shapeprog::dsl::Archetype;
use shapeprog::{Block, Program, Statement, StatementRegistry};

pub type V3 = [f64; 3];
pub type M3 = [[f64; 3]; 3];

// ---------------------------------------------------------------- linear algebra

pub fn mul(a: &M3, b: &M3) -> M3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

pub fn apply(m: &M3, v: V3) -> V3 {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

pub fn apply_t(m: &M3, v: V3) -> V3 {
    [0, 1, 2].map(|i| m[0][i] * v[0] + m[1][i] * v[1] + m[2][i] * v[2])
}

pub fn rx(a: f64) -> M3 {
    let (s, c) = a.sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

pub fn ry(a: f64) -> M3 {
    let (s, c) = a.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub fn rz(a: f64) -> M3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// `R_z(qz)·R_y(qy)·R_x(qx)`
pub fn euler(qx: f64, qy: f64, qz: f64) -> M3 {
    mul(&rz(qz), &mul(&ry(qy), &rx(qx)))
}

/// Inverse of [`euler`] away from gimbal lock: `(qx, qy, qz)`.
pub fn euler_angles(m: &M3) -> V3 {
    let qy = (-m[2][0]).clamp(-1.0, 1.0).asin();
    let qx = m[2][1].atan2(m[2][2]);
    let qz = m[1][0].atan2(m[0][0]);
    [qx, qy, qz]
}

pub fn dist(a: V3, b: V3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

// ---------------------------------------------------------------- random programs

pub fn registry() -> StatementRegistry {
    StatementRegistry::builtin()
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Valid parameters for one statement of the given archetype, positioned
/// within roughly the unit cube.
pub fn random_params(rng: &mut impl Rng, archetype: Archetype) -> Vec<f64> {
    fn pos(rng: &mut impl Rng) -> f64 {
        uniform(rng, -0.8, 0.8)
    }
    match archetype {
        Archetype::CuboidCenter => {
            let c = [pos(rng), pos(rng), pos(rng)];
            let mut v = c.to_vec();
            v.extend((0..3).map(|_| uniform(rng, 0.15, 0.8)));
            v.extend((0..3).map(|_| uniform(rng, -PI, PI)));
            v
        }
        Archetype::CuboidCorner => {
            let o = [pos(rng), pos(rng), pos(rng)];
            let mut v = o.to_vec();
            v.extend((0..3).map(|_| uniform(rng, 0.15, 0.8)));
            v.push(uniform(rng, -PI, PI));
            v
        }
        Archetype::LineCylinder => loop {
            let a = [pos(rng), pos(rng), pos(rng)];
            let b = [pos(rng), pos(rng), pos(rng)];
            if dist(a, b) > 0.3 {
                let mut v = a.to_vec();
                v.extend(b);
                v.push(uniform(rng, 0.04, 0.2));
                break v;
            }
        },
        Archetype::CylinderCenter => {
            let c = [pos(rng), pos(rng), pos(rng)];
            let mut v = c.to_vec();
            v.push(uniform(rng, 0.2, 0.9));
            v.push(uniform(rng, 0.05, 0.3));
            v.extend((0..3).map(|_| uniform(rng, -PI, PI)));
            v
        }
    }
}

pub fn random_statement(rng: &mut impl Rng, registry: &StatementRegistry) -> Statement {
    let names: Vec<&str> = registry.iter().map(|d| d.name.as_str()).collect();
    let name = names[rng.random_range(0..names.len())];
    let def = registry.get(name).unwrap();
    Statement::new(name, random_params(rng, def.archetype))
}

pub struct Shape {
    pub blocks: std::ops::RangeInclusive<usize>,
    pub max_loop_count: u32,
    pub max_body: usize,
    /// probability that a block is a loop
    pub loop_rate: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            blocks: 1..=4,
            max_loop_count: 4,
            max_body: 2,
            loop_rate: 0.5,
        }
    }
}

pub fn random_block(rng: &mut impl Rng, registry: &StatementRegistry, shape: &Shape, force_loop: bool) -> Block {
    if !force_loop && !rng.random_bool(shape.loop_rate) {
        return Block::Single(random_statement(rng, registry));
    }
    let count = rng.random_range(1..=shape.max_loop_count);
    let body: Vec<Statement> = (0..rng.random_range(1..=shape.max_body))
        .map(|_| random_statement(rng, registry))
        .collect();
    if rng.random_bool(0.5) {
        let step = 0.6 / count as f64;
        let delta = [0, 1, 2].map(|_| uniform(rng, -step, step));
        Block::TranslationFor { count, delta, body }
    } else {
        Block::RotationFor { count, body }
    }
}

pub fn random_program(rng: &mut impl Rng, registry: &StatementRegistry, shape: &Shape) -> Program {
    let n = rng.random_range(shape.blocks.clone());
    Program::new((0..n).map(|_| random_block(rng, registry, shape, false)).collect())
}

/// A finite real drawn from a spread of magnitudes, for syntax tests.
pub fn wild_real(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => 0.0,
        1 => rng.random_range(-10i32..10) as f64,
        2 => uniform(rng, -1.0, 1.0),
        3 => uniform(rng, -1.0, 1.0) * 10f64.powi(rng.random_range(-300..300)),
        4 => f64::from_bits(rng.random::<u64>() & !(0x7ffu64 << 52) | (rng.random_range(1u64..0x7fe) << 52)),
        _ => -uniform(rng, 0.0, 1e6),
    }
}

/// Any syntactically valid program over `registry`, including values that
/// would fail validation.
pub fn random_syntax_program(rng: &mut impl Rng, registry: &StatementRegistry) -> Program {
    fn statement(rng: &mut impl Rng, registry: &StatementRegistry) -> Statement {
        let defs: Vec<_> = registry.iter().collect();
        let def = defs[rng.random_range(0..defs.len())];
        Statement::new(&def.name, (0..def.arity()).map(|_| wild_real(rng)).collect())
    }
    let blocks = (0..rng.random_range(0..6))
        .map(|_| match rng.random_range(0..3) {
            0 => Block::Single(statement(rng, registry)),
            k => {
                let count = if rng.random_bool(0.1) { rng.random_range(1..=u32::MAX) } else { rng.random_range(1..10) };
                let body = (0..rng.random_range(1..4)).map(|_| statement(rng, registry)).collect();
                if k == 1 {
                    Block::TranslationFor {
                        count,
                        delta: [wild_real(rng), wild_real(rng), wild_real(rng)],
                        body,
                    }
                } else {
                    Block::RotationFor { count, body }
                }
            }
        })
        .collect();
    Program::new(blocks)
}

// ---------------------------------------------------------------- flattening

/// Rewrites every loop into single-statement blocks whose parameters already
/// include the iteration's transform.
pub fn flatten(p: &Program, registry: &StatementRegistry) -> Program {
    let mut blocks = Vec::new();
    for block in &p.blocks {
        match block {
            Block::Single(s) => blocks.push(Block::Single(s.clone())),
            Block::TranslationFor { count, delta, body } => {
                for i in 0..*count {
                    for s in body {
                        let shift = delta.map(|d| i as f64 * d);
                        blocks.push(Block::Single(translate_statement(s, registry, shift)));
                    }
                }
            }
            Block::RotationFor { count, body } => {
                for i in 0..*count {
                    let angle = 2.0 * PI * i as f64 / *count as f64;
                    for s in body {
                        blocks.push(Block::Single(rotate_statement(s, registry, angle)));
                    }
                }
            }
        }
    }
    Program::new(blocks)
}

fn translate_statement(s: &Statement, registry: &StatementRegistry, shift: V3) -> Statement {
    let archetype = registry.get(&s.name).unwrap().archetype;
    let mut params = s.params.clone();
    let points = if archetype == Archetype::LineCylinder { 2 } else { 1 };
    for k in 0..points {
        for a in 0..3 {
            params[3 * k + a] += shift[a];
        }
    }
    Statement::new(&s.name, params)
}

fn rotate_statement(s: &Statement, registry: &StatementRegistry, angle: f64) -> Statement {
    let archetype = registry.get(&s.name).unwrap().archetype;
    let r = rx(angle);
    let p = &s.params;
    let mut out = p.clone();
    let point = |k: usize| [p[3 * k], p[3 * k + 1], p[3 * k + 2]];
    let mut put = |k: usize, v: V3| out[3 * k..3 * k + 3].copy_from_slice(&v);
    match archetype {
        Archetype::LineCylinder => {
            put(0, apply(&r, point(0)));
            put(1, apply(&r, point(1)));
        }
        Archetype::CuboidCorner => {
            put(0, apply(&r, point(0)));
            out[6] = p[6] + angle;
        }
        Archetype::CuboidCenter => {
            put(0, apply(&r, point(0)));
            let q = euler_angles(&mul(&r, &euler(p[6], p[7], p[8])));
            out[6..9].copy_from_slice(&q);
        }
        Archetype::CylinderCenter => {
            put(0, apply(&r, point(0)));
            let q = euler_angles(&mul(&r, &euler(p[5], p[6], p[7])));
            out[5..8].copy_from_slice(&q);
        }
    }
    Statement::new(&s.name, out)
}

// ---------------------------------------------------------------- brute force

/// Sum of squared nearest distances from each point of `a` to `b`, by a
/// plain double loop, and the index matched for each point.
pub fn brute_chamfer_term(a: &[V3], b: &[V3]) -> (f64, Vec<usize>) {
    let mut total = 0.0;
    let mut idx = Vec::with_capacity(a.len());
    for p in a {
        let mut best = (0, f64::INFINITY);
        for (j, q) in b.iter().enumerate() {
            let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2);
            if d < best.1 {
                best = (j, d);
            }
        }
        total += best.1;
        idx.push(best.0);
    }
    (total, idx)
}

/// Closed-form surface area: cuboid `2(ab+bc+ca)`, cylinder `2πrH (+2πr²)`.
pub fn reference_area(kind: &str, size: &[f64], caps: bool) -> f64 {
    match kind {
        "cuboid" => 2.0 * (size[0] * size[1] + size[1] * size[2] + size[2] * size[0]),
        _ => {
            let (h, r) = (size[0], size[1]);
            2.0 * PI * r * h + if caps { 2.0 * PI * r * r } else { 0.0 }
        }
    }
}

/// Hamilton (largest remainder) apportionment, remainder ties to the lower
/// index.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quota: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quota.iter().map(|q| q.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut taken = vec![false; weights.len()];
    while left > 0 {
        let mut best: Option<usize> = None;
        for i in 0..weights.len() {
            if taken[i] {
                continue;
            }
            let r = quota[i] - quota[i].floor();
            if best.is_none_or(|b| r > quota[b] - quota[b].floor()) {
                best = Some(i);
            }
        }
        let i = best.unwrap();
        taken[i] = true;
        counts[i] += 1;
        left -= 1;
    }
    counts
}
