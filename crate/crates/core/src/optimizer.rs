//! Gradient-based fitting of program parameters to a target point cloud.

use serde::{Deserialize, Serialize};

use crate::dsl::{Archetype, Program, StatementRegistry};
use crate::error::{Error, Result};
use crate::gradients::{apply_parameters, extract_parameters, loss_with_gradient, RenderConfig, SlotDescriptor};
use crate::losses::LossConfig;
use crate::renderer::PointCloud;

/// Sizes are projected back to at least this after every step.
pub const MIN_SIZE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gd,
    Momentum,
    /// Adam with β₁ = 0.9, β₂ = 0.999.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub steps: usize,
    pub step_size: f64,
    pub method: Method,
    /// Draw fresh surface samples every step (seed + step) instead of
    /// reusing `seed`.
    pub reseed_per_step: bool,
    /// Stop once the relative change between consecutive losses is at most
    /// this; zero disables the test.
    pub convergence_tol: f64,
    pub loss: LossConfig,
    pub render: RenderConfig,
    pub seed: u64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            steps: 200,
            step_size: 0.01,
            method: Method::Adaptive,
            reseed_per_step: true,
            convergence_tol: 0.0,
            loss: LossConfig::default(),
            render: RenderConfig::default(),
            seed: 0,
        }
    }
}

impl OptimConfig {
    fn check(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidConfig(format!("step size must be positive, got {}", self.step_size)));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "convergence tolerance must be non-negative, got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Lowest-loss evaluated iterate, or the input when nothing was evaluated.
    pub program: Program,
    /// Loss of each evaluated iterate, in step order.
    pub trace: Vec<f64>,
    pub best_step: Option<usize>,
}

impl FitResult {
    pub fn best_loss(&self) -> Option<f64> {
        self.best_step.map(|i| self.trace[i])
    }
}

/// Keeps sizes positive and line endpoints apart. A statement whose line
/// would collapse keeps its previous endpoints.
fn project(p: &Program, registry: &StatementRegistry, values: &mut [f64], previous: &[f64], layout: &[SlotDescriptor]) {
    let mut i = 0;
    while i < layout.len() {
        let SlotDescriptor::StatementParam { block, stmt, param: 0 } = layout[i] else {
            i += 1;
            continue;
        };
        let s = &p.blocks[block].statements()[stmt];
        let Some(def) = registry.get(&s.name) else {
            i += s.params.len().max(1);
            continue;
        };
        let slots = &mut values[i..i + s.params.len()];
        for &k in def.archetype.size_slots() {
            slots[k] = slots[k].max(MIN_SIZE);
        }
        if def.archetype == Archetype::LineCylinder {
            let len = ((slots[3] - slots[0]).powi(2) + (slots[4] - slots[1]).powi(2) + (slots[5] - slots[2]).powi(2)).sqrt();
            if len < MIN_SIZE {
                slots[..6].copy_from_slice(&previous[i..i + 6]);
            }
        }
        i += s.params.len();
    }
}

/// Descends on the program's continuous parameters and returns the best
/// iterate seen.
pub fn fit(p0: &Program, registry: &StatementRegistry, target: &PointCloud, cfg: &OptimConfig) -> Result<FitResult> {
    cfg.check()?;
    let mut trace = Vec::with_capacity(cfg.steps);
    let mut best: Option<(usize, f64, Program)> = None;
    let mut params = extract_parameters(p0);
    let n = params.len();
    let mut velocity = vec![0.0; n];
    let mut second = vec![0.0; n];
    let (beta1, beta2, eps) = (0.9f64, 0.999f64, 1e-8);

    let mut current = p0.clone();
    for step in 0..cfg.steps {
        let seed = if cfg.reseed_per_step {
            cfg.seed.wrapping_add(step as u64)
        } else {
            cfg.seed
        };
        let (loss, grad) = loss_with_gradient(&current, registry, target, &cfg.loss, &cfg.render, seed)?;
        if !loss.is_finite() || grad.values.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        trace.push(loss);
        if best.as_ref().is_none_or(|(_, b, _)| loss < *b) {
            best = Some((step, loss, current.clone()));
        }
        if step > 0 && cfg.convergence_tol > 0.0 {
            let prev = trace[step - 1];
            if (loss - prev).abs() <= cfg.convergence_tol * prev.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }

        let previous = params.values.clone();
        let g = &grad.values;
        match cfg.method {
            Method::Gd => {
                for (x, gi) in params.values.iter_mut().zip(g) {
                    *x -= cfg.step_size * gi;
                }
            }
            Method::Momentum => {
                for ((x, v), gi) in params.values.iter_mut().zip(&mut velocity).zip(g) {
                    *v = beta1 * *v + gi;
                    *x -= cfg.step_size * *v;
                }
            }
            Method::Adaptive => {
                let t = (step + 1) as i32;
                let (c1, c2) = (1.0 - beta1.powi(t), 1.0 - beta2.powi(t));
                for i in 0..n {
                    velocity[i] = beta1 * velocity[i] + (1.0 - beta1) * g[i];
                    second[i] = beta2 * second[i] + (1.0 - beta2) * g[i] * g[i];
                    let m_hat = velocity[i] / c1;
                    let v_hat = second[i] / c2;
                    params.values[i] -= cfg.step_size * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        project(&current, registry, &mut params.values, &previous, &params.layout);
        current = apply_parameters(&current, &params)?;
    }

    Ok(match best {
        Some((step, _, program)) => FitResult {
            program,
            trace,
            best_step: Some(step),
        },
        None => FitResult {
            program: p0.clone(),
            trace,
            best_step: None,
        },
    })
}

/// `step,loss` rows with a header.
pub fn trace_to_csv(trace: &[f64]) -> String {
    let mut out = String::from("step,loss\n");
    for (i, l) in trace.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

#[derive(Serialize)]
struct TraceEntry {
    step: usize,
    loss: f64,
}

pub fn trace_to_json(trace: &[f64]) -> String {
    let entries: Vec<TraceEntry> = trace
        .iter()
        .enumerate()
        .map(|(step, &loss)| TraceEntry { step, loss })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "trace": entries })).expect("trace serializes")
}
